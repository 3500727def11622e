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

// Independent reference implementations used as test oracles. None of these
// call into the code paths they check.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tacrec/corpus.hpp"
#include "tacrec/predictor.hpp"

namespace tacrec::testing {

// Exact non-negative rational; compared by cross multiplication.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  friend bool operator==(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num) * b.den ==
           static_cast<__int128>(b.num) * a.den;
  }
  friend bool operator<(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num) * b.den <
           static_cast<__int128>(b.num) * a.den;
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return Rational{a.num * b.num, a.den * b.den};
  }
  double to_double() const {
    return static_cast<double>(num) / static_cast<double>(den);
  }
};

// Longest-suffix counting by direct scan of the training pairs: for
// o = min(order, |context|) down to 0, collect the labels of every pair
// whose context has at least o tokens and ends with the query's last o
// tokens. Returns token -> probability; an empty corpus gives uniform over
// the vocabulary's regular tokens.
inline std::map<std::string, Rational> brute_ngram(
    const std::vector<ProofStatePair>& train, const Vocabulary& vocab,
    std::size_t order, const std::vector<std::string>& context) {
  const std::size_t top = std::min(order, context.size());
  for (std::size_t o = top + 1; o-- > 0;) {
    std::map<std::string, std::int64_t> counts;
    std::int64_t total = 0;
    for (const ProofStatePair& p : train) {
      if (p.context.size() < o) continue;
      bool match = true;
      for (std::size_t i = 1; i <= o && match; ++i) {
        match = p.context[p.context.size() - i] == context[context.size() - i];
      }
      if (!match) continue;
      ++counts[p.label.front()];
      ++total;
    }
    if (total == 0) continue;
    std::map<std::string, Rational> out;
    for (const auto& [t, c] : counts) out[t] = Rational{c, total};
    return out;
  }
  std::map<std::string, Rational> out;
  const auto n = static_cast<std::int64_t>(vocab.regular_size());
  for (const std::string& t : vocab.regular_tokens()) out[t] = Rational{1, n};
  return out;
}

// Every positive-probability k-sequence ranked by exact probability
// (descending), ties by ascending id sequence.
inline std::vector<std::vector<TokenId>> brute_ngram_ranking(
    const std::vector<ProofStatePair>& train, const Vocabulary& vocab,
    std::size_t order, const std::vector<std::string>& context, std::size_t k) {
  struct Scored {
    std::vector<TokenId> ids;
    Rational p;
  };
  std::vector<Scored> all;
  const auto first = brute_ngram(train, vocab, order, context);
  for (const auto& [a, pa] : first) {
    const TokenId ia = vocab.id_of(a);
    if (Vocabulary::is_special(ia) || pa.num == 0) continue;
    if (k == 1) {
      all.push_back({{ia}, pa});
      continue;
    }
    std::vector<std::string> extended = context;
    extended.push_back(a);
    for (const auto& [b, pb] : brute_ngram(train, vocab, order, extended)) {
      const TokenId ib = vocab.id_of(b);
      if (Vocabulary::is_special(ib) || pb.num == 0) continue;
      all.push_back({{ia, ib}, pa * pb});
    }
  }
  std::sort(all.begin(), all.end(), [](const Scored& x, const Scored& y) {
    if (!(x.p == y.p)) return y.p < x.p;
    return x.ids < y.ids;
  });
  std::vector<std::vector<TokenId>> out;
  for (auto& s : all) out.push_back(std::move(s.ids));
  return out;
}

// Hits over `test` when the gold sequence is within the top n of the exact
// ranking; out-of-vocabulary gold never hits.
inline std::size_t brute_ngram_hits(const std::vector<ProofStatePair>& train,
                                    const Vocabulary& vocab, std::size_t order,
                                    const std::vector<ProofStatePair>& test,
                                    std::size_t n, std::size_t k) {
  std::size_t hits = 0;
  for (const ProofStatePair& p : test) {
    std::vector<TokenId> gold;
    bool oov = false;
    for (const std::string& t : p.label) {
      oov = oov || !vocab.contains(t);
      gold.push_back(vocab.id_of(t));
    }
    if (oov) continue;
    const auto ranking = brute_ngram_ranking(train, vocab, order, p.context, k);
    const std::size_t limit = std::min(n, ranking.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (ranking[i] == gold) {
        ++hits;
        break;
      }
    }
  }
  return hits;
}

// All |V|^2 two-step sequences, scored by the product of the predictor's
// step probabilities, ranked descending (ties by id pair), positive only.
inline std::vector<std::pair<std::vector<TokenId>, double>> exhaustive_k2(
    const Predictor& predictor, const std::vector<TokenId>& context,
    std::size_t n) {
  std::vector<std::pair<std::vector<TokenId>, double>> all;
  const std::vector<double> first = predictor.distribution(context);
  const auto v = static_cast<TokenId>(first.size());
  for (TokenId a = Vocabulary::kFirstRegular; a < v; ++a) {
    std::vector<TokenId> extended = context;
    extended.push_back(a);
    const std::vector<double> second = predictor.distribution(extended);
    for (TokenId b = Vocabulary::kFirstRegular; b < v; ++b) {
      const double s = first[static_cast<std::size_t>(a)] *
                       second[static_cast<std::size_t>(b)];
      if (s > 0.0) all.push_back({{a, b}, s});
    }
  }
  std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });
  if (all.size() > n) all.resize(n);
  return all;
}

}  // namespace tacrec::testing
