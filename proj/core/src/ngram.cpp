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

#include "tacrec/ngram.hpp"

#include <algorithm>

#include "tacrec/error.hpp"

namespace tacrec {

NgramModel::NgramModel(Vocabulary vocab, std::size_t max_order)
    : vocab_(std::move(vocab)), max_order_(max_order) {}

void NgramModel::observe(std::span<const TokenId> context, TokenId label) {
  const std::size_t top = std::min(max_order_, context.size());
  for (std::size_t o = 0; o <= top; ++o) {
    Suffix suffix(context.end() - static_cast<std::ptrdiff_t>(o), context.end());
    ++tables_[suffix][label];
  }
}

const NgramModel::CountTable& NgramModel::counts(const Suffix& suffix) const {
  static const CountTable kEmpty;
  const auto it = tables_.find(suffix);
  return it == tables_.end() ? kEmpty : it->second;
}

const NgramModel::CountTable* NgramModel::backoff_table(
    std::span<const TokenId> context) const {
  const std::size_t top = std::min(max_order_, context.size());
  for (std::size_t o = top + 1; o-- > 0;) {
    Suffix suffix(context.end() - static_cast<std::ptrdiff_t>(o), context.end());
    const auto it = tables_.find(suffix);
    if (it != tables_.end() && !it->second.empty()) return &it->second;
  }
  return nullptr;
}

std::vector<double> NgramModel::predict(std::span<const TokenId> context) const {
  std::vector<double> dist(vocab_.size(), 0.0);
  const CountTable* table = backoff_table(context);
  if (!table) {
    const std::size_t regular = vocab_.regular_size();
    for (std::size_t id = Vocabulary::kFirstRegular; id < dist.size(); ++id) {
      dist[id] = 1.0 / static_cast<double>(regular);
    }
    return dist;
  }
  std::uint64_t total = 0;
  for (const auto& [id, c] : *table) total += c;
  for (const auto& [id, c] : *table) {
    dist[static_cast<std::size_t>(id)] =
        static_cast<double>(c) / static_cast<double>(total);
  }
  return dist;
}

NgramModel ngram_fit(std::span<const ProofStatePair> train,
                     const Vocabulary& vocab, std::size_t max_order) {
  NgramModel model(vocab, max_order);
  for (const ProofStatePair& p : train) {
    if (p.label.size() != 1) {
      throw Error("invalid-config", "n-gram training needs k = 1 labels");
    }
  }
  std::vector<TokenId> ids;
  for (const ProofStatePair& p : train) {
    ids.clear();
    for (const std::string& t : p.context) ids.push_back(vocab.id_of(t));
    model.observe(ids, vocab.id_of(p.label.front()));
  }
  return model;
}

std::vector<double> ngram_predict(const NgramModel& model,
                                  std::span<const std::string> context) {
  if (context.empty()) throw Error("empty-context");
  std::vector<TokenId> ids;
  ids.reserve(context.size());
  for (const std::string& t : context) ids.push_back(model.vocab().id_of(t));
  return model.predict(ids);
}

}  // namespace tacrec
