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

#include "stancy/data.hpp"

#include <cctype>
#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "stancy/errors.hpp"
#include "stancy/io.hpp"
#include "stancy/text.hpp"

namespace stancy::data {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view label_name(StanceLabel l) { return l == StanceLabel::kSupport ? "SUPPORT" : "OPPOSE"; }

StanceLabel parse_label(std::string_view s) {
  std::string upper(s);
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (upper == "SUPPORT") return StanceLabel::kSupport;
  if (upper == "OPPOSE") return StanceLabel::kOppose;
  throw InputError("unknown stance label '" + std::string(s) + "'");
}

std::string_view split_name(Split s) {
  switch (s) {
    case Split::kTrain:
      return "TRAIN";
    case Split::kDev:
      return "DEV";
    case Split::kTest:
      return "TEST";
  }
  return "TRAIN";
}

Split parse_split(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "train") return Split::kTrain;
  if (lower == "dev" || lower == "val" || lower == "validation") return Split::kDev;
  if (lower == "test") return Split::kTest;
  throw InputError("unknown split '" + std::string(s) + "'");
}

void validate(std::span<const StancePair> pairs) {
  std::unordered_set<std::string> seen;
  for (const auto& p : pairs) {
    if (p.pair_id.empty()) throw InputError("empty pair_id");
    if (!seen.insert(p.pair_id).second) throw InputError("duplicate pair_id " + p.pair_id);
    if (p.claim_text.empty() || !text::is_normalized(p.claim_text)) {
      throw InputError("pair " + p.pair_id + ": claim_text empty or not whitespace-normalized");
    }
    if (p.perspective_text.empty() || !text::is_normalized(p.perspective_text)) {
      throw InputError("pair " + p.pair_id + ": perspective_text empty or not whitespace-normalized");
    }
  }
}

std::vector<StancePair> filter_split(std::span<const StancePair> pairs, Split split) {
  std::vector<StancePair> out;
  for (const auto& p : pairs) {
    if (p.split == split) out.push_back(p);
  }
  return out;
}

SplitCounts DatasetStats::grand_total() const {
  SplitCounts g;
  for (const auto& s : splits) {
    g.supporting += s.supporting;
    g.opposing += s.opposing;
    g.total += s.total;
  }
  return g;
}

DatasetStats compute_stats(std::span<const StancePair> pairs) {
  DatasetStats stats;
  for (const auto& p : pairs) {
    auto& c = stats.splits[static_cast<std::size_t>(p.split)];
    (p.label == StanceLabel::kSupport ? c.supporting : c.opposing) += 1;
    c.total += 1;
  }
  return stats;
}

std::string format_stats_table(const DatasetStats& stats) {
  std::string out = fmt::format("{:<8}{:>12}{:>12}{:>12}\n", "Split", "Supporting", "Opposing", "Total");
  out += std::string(44, '-') + "\n";
  for (Split s : {Split::kTrain, Split::kDev, Split::kTest}) {
    std::string name(split_name(s));
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
    const auto& c = stats.at(s);
    out += fmt::format("{:<8}{:>12}{:>12}{:>12}\n", name, c.supporting, c.opposing, c.total);
  }
  out += std::string(44, '-') + "\n";
  const auto g = stats.grand_total();
  out += fmt::format("{:<8}{:>12}{:>12}{:>12}\n", "TOTAL", g.supporting, g.opposing, g.total);
  return out;
}

ordered_json stats_records(const DatasetStats& stats) {
  ordered_json arr = ordered_json::array();
  auto rec = [](std::string_view name, const SplitCounts& c) {
    ordered_json r;
    r["split"] = name;
    r["supporting"] = c.supporting;
    r["opposing"] = c.opposing;
    r["total"] = c.total;
    return r;
  };
  for (Split s : {Split::kTrain, Split::kDev, Split::kTest}) arr.push_back(rec(split_name(s), stats.at(s)));
  arr.push_back(rec("TOTAL", stats.grand_total()));
  return arr;
}

std::string LabelCollapse::canonical_key(std::string_view raw) {
  std::string key;
  for (char c : text::normalize_whitespace(raw)) {
    if (c == ' ' || c == '-') {
      key.push_back('_');
    } else {
      key.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
  }
  return key;
}

LabelCollapse LabelCollapse::defaults() {
  LabelCollapse c;
  c.mapping = {
      {"SUPPORT", StanceLabel::kSupport},
      {"MILDLY_SUPPORT", StanceLabel::kSupport},
      {"UNDERMINE", StanceLabel::kOppose},
      {"MILDLY_UNDERMINE", StanceLabel::kOppose},
      {"OPPOSE", StanceLabel::kOppose},
      {"NOT_ENOUGH_INFO", std::nullopt},
  };
  return c;
}

namespace {

json load_json_file(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw IngestError("missing input file: " + path.string());
  try {
    return json::parse(io::read_file(path));
  } catch (const json::exception& e) {
    throw IngestError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

std::string id_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw IngestError("id field is neither string nor integer: " + v.dump());
}

}  // namespace

std::vector<StancePair> ingest_perspectrum(const std::filesystem::path& raw_dir, const IngestOptions& options,
                                           IngestSummary* summary) {
  const auto claims_path = raw_dir / options.claims_file;
  const auto pool_path = raw_dir / options.pool_file;
  const auto split_path = raw_dir / options.split_file;
  // Check presence up front so the error names the first missing file.
  for (const auto& p : {claims_path, pool_path, split_path}) {
    if (!std::filesystem::is_regular_file(p)) throw IngestError("missing input file: " + p.string());
  }
  const json claims = load_json_file(claims_path);
  const json pool = load_json_file(pool_path);
  const json splits = load_json_file(split_path);

  std::unordered_map<std::string, std::string> perspective_text;
  for (const auto& p : pool) perspective_text[id_string(p.at("pId"))] = p.at("text").get<std::string>();

  std::unordered_map<std::string, Split> split_of;
  for (auto it = splits.begin(); it != splits.end(); ++it) split_of[it.key()] = parse_split(it.value().get<std::string>());

  IngestSummary local;
  std::vector<StancePair> out;
  std::unordered_set<std::string> ids;
  std::set<std::string> missing_pids;
  std::set<std::string> missing_claims;
  std::set<std::string> unknown_labels;

  for (const auto& claim : claims) {
    ++local.claims;
    const std::string cid = id_string(claim.at("cId"));
    const std::string claim_text = text::normalize_whitespace(claim.at("text").get<std::string>());
    auto split_it = split_of.find(cid);
    if (split_it == split_of.end()) {
      missing_claims.insert(cid);
      continue;
    }
    for (const auto& cluster : claim.at("perspectives")) {
      if (!cluster.contains(options.collapse.field)) {
        throw IngestError("claim " + cid + ": perspective cluster lacks field '" + options.collapse.field + "'");
      }
      const std::string key = LabelCollapse::canonical_key(cluster.at(options.collapse.field).get<std::string>());
      auto map_it = options.collapse.mapping.find(key);
      if (map_it == options.collapse.mapping.end()) {
        unknown_labels.insert(key);
        continue;
      }
      for (const auto& pid_v : cluster.at("pids")) {
        const std::string pid = id_string(pid_v);
        auto text_it = perspective_text.find(pid);
        if (text_it == perspective_text.end()) {
          missing_pids.insert(pid);
          continue;
        }
        if (!map_it->second) {
          ++local.dropped;
          continue;
        }
        StancePair pair;
        pair.pair_id = "c" + cid + "-p" + pid;
        if (!ids.insert(pair.pair_id).second) {
          ++local.duplicates;
          continue;
        }
        pair.claim_text = claim_text;
        pair.perspective_text = text::normalize_whitespace(text_it->second);
        pair.label = *map_it->second;
        pair.split = split_it->second;
        if (pair.claim_text.empty() || pair.perspective_text.empty()) {
          ++local.dropped;
          continue;
        }
        out.push_back(std::move(pair));
      }
    }
  }

  auto join = [](const std::set<std::string>& s) {
    std::string r;
    for (const auto& x : s) r += (r.empty() ? "" : ", ") + x;
    return r;
  };
  if (!missing_pids.empty()) throw IngestError("perspective ids absent from pool: " + join(missing_pids));
  if (!missing_claims.empty()) throw IngestError("claim ids absent from split file: " + join(missing_claims));
  if (!unknown_labels.empty()) {
    throw IngestError("stance labels not covered by the collapse table: " + join(unknown_labels));
  }
  if (summary) *summary = local;
  return out;
}

std::string to_canonical_line(const StancePair& pair) {
  ordered_json j;
  j["pair_id"] = pair.pair_id;
  j["claim_text"] = pair.claim_text;
  j["perspective_text"] = pair.perspective_text;
  j["label"] = label_name(pair.label);
  j["split"] = split_name(pair.split);
  return j.dump(-1, ' ', false, json::error_handler_t::strict);
}

StancePair from_canonical_line(std::string_view line, std::size_t line_number) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw ParseError(line_number, std::string("malformed record: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(line_number, "record is not an object");
  auto field = [&](const char* name) -> std::string {
    auto it = j.find(name);
    if (it == j.end()) throw ParseError(line_number, std::string("missing field '") + name + "'");
    if (!it->is_string()) throw ParseError(line_number, std::string("field '") + name + "' is not a string");
    return it->get<std::string>();
  };
  StancePair p;
  p.pair_id = field("pair_id");
  p.claim_text = field("claim_text");
  p.perspective_text = field("perspective_text");
  try {
    p.label = parse_label(field("label"));
    p.split = parse_split(field("split"));
  } catch (const InputError& e) {
    throw ParseError(line_number, e.what());
  }
  return p;
}

void write_canonical(std::span<const StancePair> pairs, const std::filesystem::path& out) {
  validate(pairs);
  std::string buf;
  for (const auto& p : pairs) {
    buf += to_canonical_line(p);
    buf += '\n';
  }
  io::write_file_atomic(out, buf);
}

std::vector<StancePair> read_canonical(const std::filesystem::path& in) {
  std::ifstream f(in, std::ios::binary);
  if (!f) throw InputError("cannot open " + in.string());
  std::vector<StancePair> out;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t n = 0;
  while (std::getline(f, line)) {
    ++n;
    if (line.empty()) continue;
    auto p = from_canonical_line(line, n);
    if (!ids.insert(p.pair_id).second) throw ParseError(n, "duplicate pair_id " + p.pair_id);
    if (p.claim_text.empty() || p.perspective_text.empty()) throw ParseError(n, "empty text field");
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace stancy::data
