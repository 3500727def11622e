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
#include <map>
#include <span>
#include <vector>

#include "tacrec/corpus.hpp"

namespace tacrec {

// Exact counts of next tactics keyed by context suffixes of length
// 0..max_order, predicted by longest matching suffix (stupid backoff without
// interpolation).
class NgramModel {
 public:
  using Suffix = std::vector<TokenId>;
  using CountTable = std::map<TokenId, std::uint64_t>;

  NgramModel(Vocabulary vocab, std::size_t max_order);

  // Adds one observation for every suffix length 0..min(max_order, |context|).
  void observe(std::span<const TokenId> context, TokenId label);

  std::size_t max_order() const { return max_order_; }
  const Vocabulary& vocab() const { return vocab_; }
  const std::map<Suffix, CountTable>& tables() const { return tables_; }
  // Empty table when the suffix was never observed.
  const CountTable& counts(const Suffix& suffix) const;

  // The table used for `context`: longest observed suffix, or null when the
  // model is empty.
  const CountTable* backoff_table(std::span<const TokenId> context) const;

  // Distribution over the whole vocabulary id space. Falls back to uniform
  // over non-special ids when the model has no observations.
  std::vector<double> predict(std::span<const TokenId> context) const;

 private:
  Vocabulary vocab_;
  std::size_t max_order_;
  std::map<Suffix, CountTable> tables_;
};

// Counts every train pair. Throws Error("invalid-config") for labels that are
// not a single token.
NgramModel ngram_fit(std::span<const ProofStatePair> train,
                     const Vocabulary& vocab, std::size_t max_order = 3);

std::vector<double> ngram_predict(const NgramModel& model,
                                  std::span<const std::string> context);

}  // namespace tacrec
