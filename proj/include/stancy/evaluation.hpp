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
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "stancy/data.hpp"
#include "stancy/model.hpp"

namespace stancy::eval {

using data::StanceLabel;

struct ClassMetrics {
  double precision = 0.0;  // percentages
  double recall = 0.0;
  double f1 = 0.0;
  // Set when the metric had a zero denominator and was reported as 0.
  bool precision_undefined = false;
  bool recall_undefined = false;
};

struct EvalReport {
  std::array<ClassMetrics, data::kNumLabels> per_class{};
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  // Mean of the per-class F1 values.
  double macro_f1 = 0.0;
  // confusion[gold][predicted]
  std::array<std::array<std::size_t, data::kNumLabels>, data::kNumLabels> confusion{};
  std::size_t count = 0;

  bool any_undefined() const;
  double accuracy() const;
  // Two-decimal percentage table, one row per class plus the macro row.
  std::string format_table() const;
  nlohmann::ordered_json to_json() const;
};

EvalReport evaluate_labels(std::span<const StanceLabel> gold, std::span<const StanceLabel> predicted);

struct PredictionRecord {
  std::string pair_id;
  StanceLabel gold = StanceLabel::kSupport;
  StanceLabel predicted = StanceLabel::kSupport;
  std::array<double, data::kNumLabels> probs{};

  bool operator==(const PredictionRecord&) const = default;
};

using PredictionFile = std::vector<PredictionRecord>;

// Runs `classifier` over `pairs` in input order; inference is spread over
// `threads` workers (0 = hardware concurrency) and merged by index.
PredictionFile predict_all(const model::Classifier& classifier, std::span<const data::StancePair> pairs,
                           unsigned threads = 0);

// Throws AlignmentError listing missing, extra, or duplicate pair ids.
EvalReport evaluate(const PredictionFile& predictions, std::span<const data::StancePair> pairs);
EvalReport evaluate(const model::Classifier& classifier, std::span<const data::StancePair> pairs);

void write_predictions(const std::filesystem::path& path, const PredictionFile& predictions);
PredictionFile read_predictions(const std::filesystem::path& path);

struct McNemarResult {
  // Continuity-corrected chi-square (|b - c| - 1)^2 / (b + c); 0 when b + c = 0.
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t b_count = 0;  // a correct, b wrong
  std::size_t c_count = 0;  // a wrong, b correct
  std::string method;       // "exact" or "chi2"
  nlohmann::ordered_json to_json() const;
};

inline constexpr std::size_t kExactDiscordantLimit = 25;

double exact_binomial_two_sided(std::size_t b, std::size_t c);
double chi_square_continuity_p(std::size_t b, std::size_t c);
McNemarResult mcnemar_counts(std::size_t b, std::size_t c);
// Aligns by pair_id; throws AlignmentError when the id sets or gold labels differ.
McNemarResult mcnemar(const PredictionFile& a, const PredictionFile& b);

}  // namespace stancy::eval
