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

#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tacrec/corpus.hpp"
#include "tacrec/predictor.hpp"

namespace tacrec {

struct Cell {
  std::size_t hits = 0;
  std::size_t total = 0;
  double rate() const {
    return total == 0 ? 0.0
                      : static_cast<double>(hits) / static_cast<double>(total);
  }
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct EvalReport {
  std::string dataset_name;
  std::string predictor_name;
  std::map<std::size_t, std::map<std::size_t, Cell>> rows;  // k -> n -> cell
  std::map<std::size_t, std::size_t> pair_counts;           // k -> |test|
  // Pairs whose gold label has a token the predictor cannot emit.
  std::map<std::size_t, std::size_t> oov_counts;

  double rate(std::size_t k, std::size_t n) const { return rows.at(k).at(n).rate(); }
  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

// Fraction of pairs whose full gold label is among the top-n recommended
// k-sequences; `beam` as for predict_topn. Out-of-vocabulary gold is a miss.
// Throws Error("empty-dataset") or Error("invalid-config") for label lengths
// other than k.
double n_correctness(const Predictor& predictor,
                     std::span<const ProofStatePair> test, std::size_t n,
                     std::size_t k, std::size_t beam = 0);

inline constexpr std::size_t kDefaultNs[] = {3, 7, 10};
inline constexpr std::size_t kDefaultKs[] = {1, 2};

// Fills the (k, n) grid. Per k, one ranking of length max(ns) is computed
// per pair with beam default_beam(max(ns)), so the rows are exactly
// monotone in n. Throws Error("missing-k") when a k has no test pairs.
EvalReport evaluate_suite(
    const Predictor& predictor,
    const std::map<std::size_t, std::vector<ProofStatePair>>& tests,
    std::span<const std::size_t> ns = kDefaultNs,
    std::span<const std::size_t> ks = kDefaultKs,
    const std::string& dataset_name = "dataset");

// Rows "k = 1", "k = 2", ...; columns Top-n; one-decimal percentages.
std::string render_eval_table(const EvalReport& report);
// One JSON object per (k, n): {"k","n","hits","total","rate"}.
std::string render_eval_records(const EvalReport& report);

// Rows "Distinct Tactics", "Proofs", "Proof States".
std::string render_stats_table(const CorpusStats& stats,
                               const std::string& dataset_name = "dataset");

// 12345 -> "12,345".
std::string with_thousands(std::size_t value);

}  // namespace tacrec
