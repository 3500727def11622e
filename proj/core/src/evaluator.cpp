/* Copyright 2026 The tacrec Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "tacrec/evaluator.hpp"

#include <algorithm>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "tacrec/error.hpp"

namespace tacrec {
namespace {

void check_pairs(std::span<const ProofStatePair> test, std::size_t k) {
  if (test.empty()) throw Error("empty-dataset", "no test pairs");
  for (const ProofStatePair& p : test) {
    if (p.label.size() != k) {
      throw Error("invalid-config", "test labels must all have length " +
                                        std::to_string(k));
    }
  }
}

// 0-based rank of `gold` among the top `depth` recommendations, or depth
// when absent (including out-of-vocabulary gold).
std::size_t gold_rank(const Predictor& predictor, const ProofStatePair& pair,
                      std::size_t depth, std::size_t k, std::size_t beam,
                      bool* oov) {
  const Vocabulary& vocab = predictor.vocab();
  std::vector<TokenId> gold;
  *oov = false;
  for (const std::string& t : pair.label) {
    if (!vocab.contains(t)) *oov = true;
    gold.push_back(vocab.id_of(t));
  }
  if (*oov) return depth;
  const Recommendation rec =
      predict_topn(predictor, std::span<const std::string>(pair.context),
                   depth, k, beam);
  for (std::size_t i = 0; i < rec.items.size(); ++i) {
    if (rec.items[i].ids == gold) return i;
  }
  return depth;
}

std::string percent(double rate) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * rate);
  return buf;
}

std::string pad_right(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string pad_left(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

}  // namespace

double n_correctness(const Predictor& predictor,
                     std::span<const ProofStatePair> test, std::size_t n,
                     std::size_t k, std::size_t beam) {
  check_pairs(test, k);
  if (n == 0) throw Error("invalid-config", "n must be at least 1");
  std::size_t hits = 0;
  bool oov = false;
  for (const ProofStatePair& p : test) {
    if (gold_rank(predictor, p, n, k, beam, &oov) < n) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(test.size());
}

EvalReport evaluate_suite(
    const Predictor& predictor,
    const std::map<std::size_t, std::vector<ProofStatePair>>& tests,
    std::span<const std::size_t> ns, std::span<const std::size_t> ks,
    const std::string& dataset_name) {
  if (ns.empty() || ks.empty()) throw Error("invalid-config", "empty n or k list");
  if (std::find(ns.begin(), ns.end(), 0) != ns.end()) {
    throw Error("invalid-config", "n must be at least 1");
  }
  const std::size_t depth = *std::max_element(ns.begin(), ns.end());
  const std::size_t beam = default_beam(depth);

  EvalReport report;
  report.dataset_name = dataset_name;
  report.predictor_name = predictor.name();
  for (std::size_t k : ks) {
    const auto it = tests.find(k);
    if (it == tests.end()) {
      throw Error("missing-k", "no test pairs for k = " + std::to_string(k));
    }
    const std::vector<ProofStatePair>& test = it->second;
    check_pairs(test, k);

    std::vector<std::size_t> ranks;
    ranks.reserve(test.size());
    std::size_t oov_count = 0;
    for (const ProofStatePair& p : test) {
      bool oov = false;
      ranks.push_back(gold_rank(predictor, p, depth, k, beam, &oov));
      if (oov) ++oov_count;
    }
    auto& row = report.rows[k];
    for (std::size_t n : ns) {
      Cell cell;
      cell.total = test.size();
      cell.hits = static_cast<std::size_t>(
          std::count_if(ranks.begin(), ranks.end(),
                        [n](std::size_t r) { return r < n; }));
      row[n] = cell;
    }
    report.pair_counts[k] = test.size();
    report.oov_counts[k] = oov_count;
  }
  return report;
}

std::string render_eval_table(const EvalReport& report) {
  std::string out = "n-correctness of " + report.predictor_name + " on " +
                    report.dataset_name + "\n";
  out += "(a k = 2 hit requires the exact ordered pair; out-of-vocabulary gold:";
  for (const auto& [k, count] : report.oov_counts) {
    out += " k=" + std::to_string(k) + " " + std::to_string(count);
  }
  out += ")\n";

  constexpr std::size_t kLabelWidth = 8;
  constexpr std::size_t kCellWidth = 9;
  std::vector<std::size_t> ns;
  if (!report.rows.empty()) {
    for (const auto& [n, cell] : report.rows.begin()->second) ns.push_back(n);
  }
  std::string header = pad_right("", kLabelWidth);
  for (std::size_t n : ns) header += pad_left("Top-" + std::to_string(n), kCellWidth);
  out += header + "\n";
  for (const auto& [k, row] : report.rows) {
    std::string line = pad_right("k = " + std::to_string(k), kLabelWidth);
    for (std::size_t n : ns) line += pad_left(percent(row.at(n).rate()), kCellWidth);
    out += line + "\n";
  }
  return out;
}

std::string render_eval_records(const EvalReport& report) {
  std::string out;
  for (const auto& [k, row] : report.rows) {
    for (const auto& [n, cell] : row) {
      nlohmann::ordered_json j;
      j["k"] = k;
      j["n"] = n;
      j["hits"] = cell.hits;
      j["total"] = cell.total;
      j["rate"] = cell.rate();
      out += j.dump() + "\n";
    }
  }
  return out;
}

std::string with_thousands(std::size_t value) {
  std::string digits = std::to_string(value);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i != 0 && (digits.size() - i) % 3 == 0) out += ',';
    out += digits[i];
  }
  return out;
}

std::string render_stats_table(const CorpusStats& stats,
                               const std::string& dataset_name) {
  constexpr std::size_t kLabelWidth = 18;
  const std::size_t width = std::max<std::size_t>(dataset_name.size(), 10) + 2;
  std::string out = pad_right("", kLabelWidth) + pad_left(dataset_name, width) + "\n";
  const std::pair<const char*, std::size_t> rows[] = {
      {"Distinct Tactics", stats.distinct_tactics},
      {"Proofs", stats.proofs},
      {"Proof States", stats.proof_states},
  };
  for (const auto& [label, value] : rows) {
    out += pad_right(label, kLabelWidth) + pad_left(with_thousands(value), width) +
           "\n";
  }
  return out;
}

}  // namespace tacrec
