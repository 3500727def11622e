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
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tacrec/checkpoint.hpp"
#include "tacrec/corpus.hpp"
#include "tacrec/ngram.hpp"

namespace tacrec {

// Probabilities as integer weights over one common denominator.
struct ExactDistribution {
  std::vector<std::uint64_t> weights;  // per vocabulary id
  std::uint64_t total = 1;
};

// A next-tactic distribution over a vocabulary's id space. Implementations
// must be safe to call concurrently.
class Predictor {
 public:
  virtual ~Predictor() = default;

  virtual std::string name() const = 0;
  virtual const Vocabulary& vocab() const = 0;
  // Probability per vocabulary id (length vocab().size()), for a non-empty
  // context of ids (unknown tokens already mapped to UNK).
  virtual std::vector<double> distribution(
      std::span<const TokenId> context) const = 0;
  // The same distribution as exact fractions, for count-based models. Lets
  // two-step ranking tie products that are equal as fractions but round
  // differently in floating point.
  virtual std::optional<ExactDistribution> exact_distribution(
      std::span<const TokenId>) const {
    return std::nullopt;
  }
};

class NgramPredictor final : public Predictor {
 public:
  explicit NgramPredictor(NgramModel model) : model_(std::move(model)) {}

  std::string name() const override;
  const Vocabulary& vocab() const override { return model_.vocab(); }
  std::vector<double> distribution(
      std::span<const TokenId> context) const override;
  std::optional<ExactDistribution> exact_distribution(
      std::span<const TokenId> context) const override;
  const NgramModel& model() const { return model_; }

 private:
  NgramModel model_;
};

class TransformerPredictor final : public Predictor {
 public:
  explicit TransformerPredictor(Checkpoint checkpoint)
      : checkpoint_(std::move(checkpoint)) {}

  std::string name() const override { return "transformer"; }
  const Vocabulary& vocab() const override { return checkpoint_.vocab; }
  std::vector<double> distribution(
      std::span<const TokenId> context) const override;
  const Checkpoint& checkpoint() const { return checkpoint_; }

 private:
  Checkpoint checkpoint_;
};

struct RecommendationItem {
  std::vector<TokenId> ids;
  std::vector<std::string> tactics;
  double score = 0.0;
};

struct Recommendation {
  std::vector<RecommendationItem> items;
  std::size_t n = 0;
  std::size_t k = 0;
};

// Beam width used when the caller does not pick one: max(n, 8).
std::size_t default_beam(std::size_t n);

// Top-n next-tactic sequences of length k in {1, 2}. Candidates with zero
// probability and special ids are never recommended. k = 1 ranks by
// probability (ties: ascending id); k = 2 expands the top `beam` first
// steps by their top `beam` second steps and ranks by the product of the
// two step probabilities (ties: ascending id pair), compared exactly when
// the predictor offers exact_distribution. `beam` = 0 selects
// default_beam(n). Throws Error("empty-context") or Error("invalid-config").
Recommendation predict_topn(const Predictor& predictor,
                            std::span<const TokenId> context, std::size_t n,
                            std::size_t k, std::size_t beam = 0);
Recommendation predict_topn(const Predictor& predictor,
                            std::span<const std::string> context,
                            std::size_t n, std::size_t k, std::size_t beam = 0);

// Ids of the non-special tokens with positive probability, ranked by
// descending probability then ascending id, truncated to `limit`.
std::vector<TokenId> top_ids(std::span<const double> dist, std::size_t limit);

}  // namespace tacrec
