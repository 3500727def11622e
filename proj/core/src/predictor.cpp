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

#include "tacrec/predictor.hpp"

#include <algorithm>

#include "tacrec/error.hpp"
#include "tacrec/transformer.hpp"

namespace tacrec {
namespace {

__extension__ using U128 = unsigned __int128;

U128 gcd128(U128 a, U128 b) {
  while (b != 0) {
    const U128 r = a % b;
    a = b;
    b = r;
  }
  return a;
}

}  // namespace

std::string NgramPredictor::name() const {
  return "ngram-" + std::to_string(model_.max_order());
}

std::vector<double> NgramPredictor::distribution(
    std::span<const TokenId> context) const {
  if (context.empty()) throw Error("empty-context");
  return model_.predict(context);
}

std::optional<ExactDistribution> NgramPredictor::exact_distribution(
    std::span<const TokenId> context) const {
  if (context.empty()) throw Error("empty-context");
  ExactDistribution out;
  out.weights.assign(model_.vocab().size(), 0);
  const NgramModel::CountTable* table = model_.backoff_table(context);
  if (!table) {
    for (std::size_t id = Vocabulary::kFirstRegular; id < out.weights.size(); ++id) {
      out.weights[id] = 1;
    }
    out.total = model_.vocab().regular_size();
    return out;
  }
  out.total = 0;
  for (const auto& [id, c] : *table) {
    out.weights[static_cast<std::size_t>(id)] = c;
    out.total += c;
  }
  return out;
}

std::vector<double> TransformerPredictor::distribution(
    std::span<const TokenId> context) const {
  const std::vector<TokenId> ids =
      encode_ids(context, checkpoint_.config.window);
  const std::vector<float> logits = tf_forward(checkpoint_.params, ids);
  return softmax<float>(logits);
}

std::size_t default_beam(std::size_t n) { return std::max<std::size_t>(n, 8); }

std::vector<TokenId> top_ids(std::span<const double> dist, std::size_t limit) {
  std::vector<TokenId> ids;
  for (std::size_t i = Vocabulary::kFirstRegular; i < dist.size(); ++i) {
    if (dist[i] > 0.0) ids.push_back(static_cast<TokenId>(i));
  }
  auto better = [&](TokenId a, TokenId b) {
    const double pa = dist[static_cast<std::size_t>(a)];
    const double pb = dist[static_cast<std::size_t>(b)];
    return pa != pb ? pa > pb : a < b;
  };
  if (ids.size() > limit) {
    std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(limit),
                      ids.end(), better);
    ids.resize(limit);
  } else {
    std::sort(ids.begin(), ids.end(), better);
  }
  return ids;
}

Recommendation predict_topn(const Predictor& predictor,
                            std::span<const TokenId> context, std::size_t n,
                            std::size_t k, std::size_t beam) {
  if (context.empty()) throw Error("empty-context");
  if (n == 0) throw Error("invalid-config", "n must be at least 1");
  if (k != 1 && k != 2) throw Error("invalid-config", "k must be 1 or 2");
  if (beam == 0) beam = default_beam(n);
  const Vocabulary& vocab = predictor.vocab();

  Recommendation rec;
  rec.n = n;
  rec.k = k;
  const std::vector<double> first = predictor.distribution(context);

  if (k == 1) {
    for (TokenId id : top_ids(first, n)) {
      rec.items.push_back(RecommendationItem{
          {id}, {vocab.token_of(id)}, first[static_cast<std::size_t>(id)]});
    }
    return rec;
  }

  // Exact product as a fraction; den == 0 when no exact form is available.
  struct Fraction {
    U128 num = 0;
    U128 den = 0;
  };
  struct Candidate {
    RecommendationItem item;
    Fraction exact;
  };
  const std::optional<ExactDistribution> first_exact =
      predictor.exact_distribution(context);
  std::vector<Candidate> candidates;
  std::vector<TokenId> extended(context.begin(), context.end());
  extended.push_back(Vocabulary::kPad);
  for (TokenId a : top_ids(first, beam)) {
    extended.back() = a;
    const std::vector<double> second = predictor.distribution(extended);
    const std::optional<ExactDistribution> second_exact =
        first_exact ? predictor.exact_distribution(extended) : std::nullopt;
    const double pa = first[static_cast<std::size_t>(a)];
    for (TokenId b : top_ids(second, beam)) {
      Candidate c{RecommendationItem{{a, b}, {}, pa * second[static_cast<std::size_t>(b)]}, {}};
      if (second_exact) {
        U128 num = static_cast<U128>(first_exact->weights[static_cast<std::size_t>(a)]) *
                   second_exact->weights[static_cast<std::size_t>(b)];
        U128 den = static_cast<U128>(first_exact->total) * second_exact->total;
        const U128 g = gcd128(num, den);
        num /= g;
        den /= g;
        c.exact = {num, den};
        // Reduced first, so equal fractions report identical scores.
        c.item.score = static_cast<double>(num) / static_cast<double>(den);
      }
      candidates.push_back(std::move(c));
    }
  }
  auto better = [](const Candidate& x, const Candidate& y) {
    if (x.exact.den != 0 && y.exact.den != 0) {
      // Weights and totals are counts below 2^32, so the cross products fit.
      const U128 lhs = x.exact.num * y.exact.den;
      const U128 rhs = y.exact.num * x.exact.den;
      if (lhs != rhs) return lhs > rhs;
    } else if (x.item.score != y.item.score) {
      return x.item.score > y.item.score;
    }
    return x.item.ids < y.item.ids;
  };
  const std::size_t keep = std::min(n, candidates.size());
  std::partial_sort(candidates.begin(),
                    candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                    candidates.end(), better);
  candidates.resize(keep);
  for (Candidate& c : candidates) {
    if (c.item.score <= 0.0) break;
    for (TokenId id : c.item.ids) c.item.tactics.push_back(vocab.token_of(id));
    rec.items.push_back(std::move(c.item));
  }
  return rec;
}

Recommendation predict_topn(const Predictor& predictor,
                            std::span<const std::string> context,
                            std::size_t n, std::size_t k, std::size_t beam) {
  if (context.empty()) throw Error("empty-context");
  std::vector<TokenId> ids;
  ids.reserve(context.size());
  for (const std::string& t : context) ids.push_back(predictor.vocab().id_of(t));
  return predict_topn(predictor, std::span<const TokenId>(ids), n, k, beam);
}

}  // namespace tacrec
