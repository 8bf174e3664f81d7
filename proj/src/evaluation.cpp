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

#include "stancy/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <thread>
#include <unordered_map>

#include <fmt/format.h>

#include "stancy/errors.hpp"
#include "stancy/io.hpp"

namespace stancy::eval {

namespace {

double pct(std::size_t num, std::size_t den, bool& undefined) {
  undefined = den == 0;
  return den == 0 ? 0.0 : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

bool EvalReport::any_undefined() const {
  for (const auto& c : per_class) {
    if (c.precision_undefined || c.recall_undefined) return true;
  }
  return false;
}

double EvalReport::accuracy() const {
  if (count == 0) return 0.0;
  std::size_t correct = 0;
  for (std::size_t k = 0; k < data::kNumLabels; ++k) correct += confusion[k][k];
  return 100.0 * static_cast<double>(correct) / static_cast<double>(count);
}

EvalReport evaluate_labels(std::span<const StanceLabel> gold, std::span<const StanceLabel> predicted) {
  if (gold.size() != predicted.size()) throw InputError("evaluate: gold and predicted lengths differ");
  EvalReport r;
  r.count = gold.size();
  for (std::size_t i = 0; i < gold.size(); ++i) ++r.confusion[data::label_index(gold[i])][data::label_index(predicted[i])];
  for (std::size_t k = 0; k < data::kNumLabels; ++k) {
    std::size_t predicted_k = 0, gold_k = 0;
    for (std::size_t j = 0; j < data::kNumLabels; ++j) {
      predicted_k += r.confusion[j][k];
      gold_k += r.confusion[k][j];
    }
    auto& m = r.per_class[k];
    m.precision = pct(r.confusion[k][k], predicted_k, m.precision_undefined);
    m.recall = pct(r.confusion[k][k], gold_k, m.recall_undefined);
    m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  }
  const double n = static_cast<double>(data::kNumLabels);
  for (const auto& m : r.per_class) {
    r.macro_precision += m.precision / n;
    r.macro_recall += m.recall / n;
  }
  r.macro_f1 = (r.per_class[0].f1 + r.per_class[1].f1) / 2.0;
  return r;
}

std::string EvalReport::format_table() const {
  std::string out = fmt::format("{:<10}{:>10}{:>10}{:>10}\n", "Class", "Prec.", "Recall", "F1");
  out += std::string(40, '-') + "\n";
  for (StanceLabel l : {StanceLabel::kSupport, StanceLabel::kOppose}) {
    const auto& m = per_class[data::label_index(l)];
    out += fmt::format("{:<10}{:>10.2f}{:>10.2f}{:>10.2f}\n", data::label_name(l), m.precision, m.recall, m.f1);
  }
  out += fmt::format("{:<10}{:>10.2f}{:>10.2f}{:>10.2f}\n", "MACRO", macro_precision, macro_recall, macro_f1);
  if (any_undefined()) out += "note: some metrics had zero denominators and are reported as 0\n";
  return out;
}

nlohmann::ordered_json EvalReport::to_json() const {
  nlohmann::ordered_json j;
  for (StanceLabel l : {StanceLabel::kSupport, StanceLabel::kOppose}) {
    const auto& m = per_class[data::label_index(l)];
    j[std::string(data::label_name(l))] = {{"precision", m.precision},
                                           {"recall", m.recall},
                                           {"f1", m.f1},
                                           {"precision_undefined", m.precision_undefined},
                                           {"recall_undefined", m.recall_undefined}};
  }
  j["macro"] = {{"precision", macro_precision}, {"recall", macro_recall}, {"f1", macro_f1}};
  j["confusion"] = {{"gold_SUPPORT", {{"pred_SUPPORT", confusion[0][0]}, {"pred_OPPOSE", confusion[0][1]}}},
                    {"gold_OPPOSE", {{"pred_SUPPORT", confusion[1][0]}, {"pred_OPPOSE", confusion[1][1]}}}};
  j["count"] = count;
  return j;
}

PredictionFile predict_all(const model::Classifier& classifier, std::span<const data::StancePair> pairs,
                           unsigned threads) {
  PredictionFile out(pairs.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, pairs.size())));
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < pairs.size(); i += stride) {
      const auto p = classifier.predict(pairs[i]);
      out[i] = {pairs[i].pair_id, pairs[i].label, p.label, p.probs};
    }
  };
  if (threads <= 1) {
    work(0, 1);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        work(t, threads);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

EvalReport evaluate(const PredictionFile& predictions, std::span<const data::StancePair> pairs) {
  std::unordered_map<std::string, const PredictionRecord*> by_id;
  std::vector<std::string> offenders;
  for (const auto& r : predictions) {
    if (!by_id.emplace(r.pair_id, &r).second) offenders.push_back("duplicate:" + r.pair_id);
  }
  std::vector<StanceLabel> gold, pred;
  std::unordered_map<std::string, bool> used;
  for (const auto& p : pairs) {
    auto it = by_id.find(p.pair_id);
    if (it == by_id.end()) {
      offenders.push_back("missing:" + p.pair_id);
      continue;
    }
    used[p.pair_id] = true;
    gold.push_back(p.label);
    pred.push_back(it->second->predicted);
  }
  for (const auto& r : predictions) {
    if (!used.count(r.pair_id)) offenders.push_back("extra:" + r.pair_id);
  }
  if (!offenders.empty()) {
    std::sort(offenders.begin(), offenders.end());
    offenders.erase(std::unique(offenders.begin(), offenders.end()), offenders.end());
    throw AlignmentError("predictions do not align with the evaluated pairs (" + std::to_string(offenders.size()) +
                             " offenders, first: " + offenders.front() + ")",
                         offenders);
  }
  return evaluate_labels(gold, pred);
}

EvalReport evaluate(const model::Classifier& classifier, std::span<const data::StancePair> pairs) {
  return evaluate(predict_all(classifier, pairs), pairs);
}

void write_predictions(const std::filesystem::path& path, const PredictionFile& predictions) {
  std::string buf;
  for (const auto& r : predictions) {
    nlohmann::ordered_json j;
    j["pair_id"] = r.pair_id;
    j["gold"] = data::label_name(r.gold);
    j["predicted"] = data::label_name(r.predicted);
    j["probs"] = {r.probs[0], r.probs[1]};
    buf += j.dump();
    buf += '\n';
  }
  io::write_file_atomic(path, buf);
}

PredictionFile read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  PredictionFile out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      PredictionRecord r;
      r.pair_id = j.at("pair_id").get<std::string>();
      r.gold = data::parse_label(j.at("gold").get<std::string>());
      r.predicted = data::parse_label(j.at("predicted").get<std::string>());
      const auto probs = j.at("probs").get<std::vector<double>>();
      if (probs.size() != data::kNumLabels) throw ParseError(n, "probs must have two entries");
      r.probs = {probs[0], probs[1]};
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(n, e.what());
    } catch (const InputError& e) {
      throw ParseError(n, e.what());
    }
  }
  return out;
}

nlohmann::ordered_json McNemarResult::to_json() const {
  nlohmann::ordered_json j;
  j["statistic"] = statistic;
  j["p_value"] = p_value;
  j["b_count"] = b_count;
  j["c_count"] = c_count;
  j["method"] = method;
  return j;
}

double exact_binomial_two_sided(std::size_t b, std::size_t c) {
  const std::size_t n = b + c;
  if (n == 0) return 1.0;
  const std::size_t k = std::min(b, c);
  // P(X <= k) for X ~ Binomial(n, 1/2), via log-space binomial coefficients.
  double tail = 0.0;
  for (std::size_t i = 0; i <= k; ++i) {
    const double log_coef = std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(i) + 1.0) -
                            std::lgamma(static_cast<double>(n - i) + 1.0);
    tail += std::exp(log_coef - static_cast<double>(n) * M_LN2);
  }
  return std::min(1.0, 2.0 * tail);
}

double chi_square_continuity_p(std::size_t b, std::size_t c) {
  if (b + c == 0) return 1.0;
  const double diff = std::max(0.0, std::fabs(static_cast<double>(b) - static_cast<double>(c)) - 1.0);
  const double stat = diff * diff / static_cast<double>(b + c);
  // Survival function of chi-square with one degree of freedom.
  return std::erfc(std::sqrt(stat / 2.0));
}

McNemarResult mcnemar_counts(std::size_t b, std::size_t c) {
  McNemarResult r;
  r.b_count = b;
  r.c_count = c;
  if (b + c > 0) {
    const double diff = std::max(0.0, std::fabs(static_cast<double>(b) - static_cast<double>(c)) - 1.0);
    r.statistic = diff * diff / static_cast<double>(b + c);
  }
  if (b + c < kExactDiscordantLimit) {
    r.method = "exact";
    r.p_value = exact_binomial_two_sided(b, c);
  } else {
    r.method = "chi2";
    r.p_value = chi_square_continuity_p(b, c);
  }
  return r;
}

McNemarResult mcnemar(const PredictionFile& a, const PredictionFile& b) {
  std::map<std::string, const PredictionRecord*> left, right;
  std::vector<std::string> offenders;
  for (const auto& r : a) {
    if (!left.emplace(r.pair_id, &r).second) offenders.push_back("duplicate in a:" + r.pair_id);
  }
  for (const auto& r : b) {
    if (!right.emplace(r.pair_id, &r).second) offenders.push_back("duplicate in b:" + r.pair_id);
  }
  for (const auto& [id, r] : left) {
    auto it = right.find(id);
    if (it == right.end()) {
      offenders.push_back("only in a:" + id);
    } else if (it->second->gold != r->gold) {
      offenders.push_back("gold mismatch:" + id);
    }
  }
  for (const auto& [id, r] : right) {
    if (!left.count(id)) offenders.push_back("only in b:" + id);
  }
  if (!offenders.empty()) {
    throw AlignmentError("prediction files do not align (" + std::to_string(offenders.size()) +
                             " offenders, first: " + offenders.front() + ")",
                         offenders);
  }
  std::size_t bc = 0, cc = 0;
  for (const auto& [id, ra] : left) {
    const auto* rb = right.at(id);
    const bool a_ok = ra->predicted == ra->gold;
    const bool b_ok = rb->predicted == rb->gold;
    if (a_ok && !b_ok) ++bc;
    if (!a_ok && b_ok) ++cc;
  }
  return mcnemar_counts(bc, cc);
}

}  // namespace stancy::eval
