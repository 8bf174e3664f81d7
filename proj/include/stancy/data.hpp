/*
 * Copyright 2026 The Stancy Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace stancy::data {

enum class StanceLabel { kSupport = 0, kOppose = 1 };
inline constexpr std::size_t kNumLabels = 2;

// +1 for SUPPORT (similar representations), -1 for OPPOSE.
constexpr int to_sim_target(StanceLabel l) { return l == StanceLabel::kSupport ? 1 : -1; }
constexpr std::size_t label_index(StanceLabel l) { return static_cast<std::size_t>(l); }
std::string_view label_name(StanceLabel l);
StanceLabel parse_label(std::string_view s);

enum class Split { kTrain = 0, kDev = 1, kTest = 2 };
std::string_view split_name(Split s);
// Accepts train/dev/test in any case (plus "val"/"validation" for dev).
Split parse_split(std::string_view s);

struct StancePair {
  std::string pair_id;
  std::string claim_text;
  std::string perspective_text;
  StanceLabel label = StanceLabel::kSupport;
  Split split = Split::kTrain;

  bool operator==(const StancePair&) const = default;
};

// Unique ids, non-empty whitespace-normalized texts. Throws InputError.
void validate(std::span<const StancePair> pairs);
std::vector<StancePair> filter_split(std::span<const StancePair> pairs, Split split);

struct SplitCounts {
  std::size_t supporting = 0;
  std::size_t opposing = 0;
  std::size_t total = 0;
  bool operator==(const SplitCounts&) const = default;
};

struct DatasetStats {
  std::array<SplitCounts, 3> splits{};
  const SplitCounts& at(Split s) const { return splits[static_cast<std::size_t>(s)]; }
  SplitCounts grand_total() const;
  bool operator==(const DatasetStats&) const = default;
};

DatasetStats compute_stats(std::span<const StancePair> pairs);
std::string format_stats_table(const DatasetStats& stats);
// One record per split plus a "total" record.
nlohmann::ordered_json stats_records(const DatasetStats& stats);

// Maps raw Perspectrum stance strings to the binary scheme; nullopt drops the
// perspective. Keys are compared after upper-casing and folding ' '/'-' to '_'.
struct LabelCollapse {
  std::string field = "stance_label_3";
  std::map<std::string, std::optional<StanceLabel>> mapping;

  static LabelCollapse defaults();
  static std::string canonical_key(std::string_view raw);
};

struct IngestOptions {
  std::string claims_file = "perspectrum_with_answers_v1.0.json";
  std::string pool_file = "perspective_pool_v1.0.json";
  std::string split_file = "dataset_split_v1.0.json";
  LabelCollapse collapse = LabelCollapse::defaults();
};

struct IngestSummary {
  std::size_t claims = 0;
  std::size_t dropped = 0;
  std::size_t duplicates = 0;
};

std::vector<StancePair> ingest_perspectrum(const std::filesystem::path& raw_dir,
                                           const IngestOptions& options = {},
                                           IngestSummary* summary = nullptr);

std::string to_canonical_line(const StancePair& pair);
StancePair from_canonical_line(std::string_view line, std::size_t line_number);
void write_canonical(std::span<const StancePair> pairs, const std::filesystem::path& out);
std::vector<StancePair> read_canonical(const std::filesystem::path& in);

}  // namespace stancy::data
