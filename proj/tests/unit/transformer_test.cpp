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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gradcheck.hpp"
#include "tacrec/error.hpp"
#include "tacrec/rng.hpp"
#include "tacrec/transformer.hpp"

namespace tacrec {
namespace {

using Tokens = std::vector<std::string>;
constexpr TokenId P = Vocabulary::kPad;
constexpr TokenId C = Vocabulary::kCls;

std::string error_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "none";
}

ModelConfig tiny_config(std::uint64_t seed = 0) {
  ModelConfig c;
  c.window = 8;
  c.embed_dim = 8;
  c.heads = 2;
  c.layers = 1;
  c.ffn_dim = 16;
  c.seed = seed;
  return c;
}

const Tensor<float>& tensor(const Parameters<float>& p, const std::string& name) {
  for (const auto& t : p.tensors) {
    if (t.name == name) return t;
  }
  throw std::runtime_error("no tensor " + name);
}

TEST(Encode, PadsAndPrependsCls) {
  const Vocabulary v({"rw", "fs", "simp"});
  EXPECT_EQ(encode_context(Tokens{"rw", "fs", "simp"}, v, 6),
            (std::vector<TokenId>{P, P, C, 3, 4, 5}));
  EXPECT_EQ(encode_context(Tokens{"rw", "zz"}, v, 4),
            (std::vector<TokenId>{P, C, 3, Vocabulary::kUnk}));
  EXPECT_EQ(error_code([&] { encode_context(Tokens{}, v, 4); }), "empty-context");
}

TEST(Encode, KeepsMostRecentTokens) {
  const Vocabulary v({"a", "b"});
  Tokens ctx;
  for (int i = 0; i < 40; ++i) ctx.push_back(i < 39 ? "a" : "b");
  const auto ids = encode_context(ctx, v, 32);
  ASSERT_EQ(ids.size(), 32u);
  EXPECT_EQ(ids[0], C);
  EXPECT_EQ(ids[31], 4);
  EXPECT_TRUE(std::all_of(ids.begin() + 1, ids.end() - 1, [](TokenId t) { return t == 3; }));
  std::vector<TokenId> raw(40, 3);
  EXPECT_EQ(encode_ids(raw, 32).size(), 32u);
}

TEST(Init, DeterministicAndBounded) {
  const ModelConfig c = tiny_config(5);
  const auto a = tf_init<float>(c, 12);
  EXPECT_EQ(a, tf_init<float>(c, 12));
  EXPECT_NE(a, tf_init<float>(tiny_config(6), 12));
  EXPECT_EQ(a.tensors.size(), 2 + Parameters<float>::kPerLayer * c.layers + 4);
  EXPECT_EQ(a.scalar_count(), parameter_count(c, 12));
  const auto& emb = tensor(a, "token_embedding");
  for (std::size_t j = 0; j < emb.cols; ++j) EXPECT_EQ(emb.row(P)[j], 0.0f);
  for (const auto& t : a.tensors) {
    const bool is_bias = t.name.find("bias") != std::string::npos ||
                         t.name.find(".b") != std::string::npos;
    const bool is_gain = t.name.find("gain") != std::string::npos;
    for (float x : t.data) {
      if (is_bias) ASSERT_EQ(x, 0.0f) << t.name;
      if (is_gain) ASSERT_EQ(x, 1.0f) << t.name;
      if (!is_bias && !is_gain) {
        // fan_in is the row count for weight matrices and d for embeddings.
        const double fan_in = t.name.find("embedding") != std::string::npos
                                  ? static_cast<double>(c.embed_dim)
                                  : static_cast<double>(t.rows);
        ASSERT_LE(std::abs(x), 1.0 / std::sqrt(fan_in)) << t.name;
      }
    }
  }
}

TEST(Forward, ShapeFiniteAndInvalidId) {
  const auto p = tf_init<float>(tiny_config(), 12);
  const std::vector<TokenId> ids = {P, P, P, C, 3, 4, 5, 11};
  const auto logits = tf_forward(p, ids);
  ASSERT_EQ(logits.size(), 12u);
  for (float x : logits) EXPECT_TRUE(std::isfinite(x));
  const std::vector<TokenId> bad = {P, P, P, C, 3, 4, 5, 12};
  EXPECT_EQ(error_code([&] { tf_forward(p, bad); }), "invalid-id");
}

TEST(Forward, PadPositionsAreInert) {
  const auto p = tf_init<float>(tiny_config(3), 12);
  const std::vector<TokenId> a = {P, P, P, C, 3, 4, 5, 6};
  std::vector<TokenId> b = a;
  std::swap(b[0], b[2]);
  EXPECT_EQ(tf_forward(p, a), tf_forward(p, b));
  // Whatever sits in the padded positions' embeddings never reaches CLS.
  auto q = p;
  for (auto& t : q.tensors) {
    if (t.name == "position_embedding") {
      for (std::size_t r = 0; r < 3; ++r) std::fill(t.row(r), t.row(r) + t.cols, 5.0f);
    }
  }
  EXPECT_EQ(tf_forward(p, a), tf_forward(q, a));
}

TEST(Forward, ZeroClassifierGivesZeroLogits) {
  auto p = tf_init<float>(tiny_config(), 12);
  for (auto& t : p.tensors) {
    if (t.name.rfind("classifier.", 0) == 0) std::fill(t.data.begin(), t.data.end(), 0.0f);
  }
  for (const auto& ids : {std::vector<TokenId>{P, P, P, C, 3, 4, 5, 6},
                          std::vector<TokenId>{C, 7, 7, 7, 8, 9, 10, 11}}) {
    for (float x : tf_forward(p, ids)) EXPECT_EQ(x, 0.0f);
  }
}

TEST(LossGrad, UniformLogitsGiveLogV) {
  auto p = tf_init<double>(tiny_config(), 10);
  for (auto& t : p.tensors) {
    if (t.name.rfind("classifier.", 0) == 0) std::fill(t.data.begin(), t.data.end(), 0.0);
  }
  const std::vector<Example> batch = {{{P, P, P, C, 3, 4, 5, 6}, 7},
                                      {{P, P, C, 3, 3, 3, 3, 3}, 9}};
  EXPECT_NEAR(tf_loss_grad(p, batch).loss, std::log(10.0), 1e-12);
  EXPECT_NEAR(tf_loss_grad(p, batch).loss, 2.302585, 1e-6);
}

TEST(LossGrad, Errors) {
  const auto p = tf_init<float>(tiny_config(), 12);
  const std::vector<Example> special = {{{P, P, P, C, 3, 4, 5, 6}, Vocabulary::kUnk}};
  EXPECT_EQ(error_code([&] { tf_loss_grad(p, special); }), "invalid-label");
  EXPECT_EQ(error_code([&] { tf_loss_grad(p, std::vector<Example>{}); }), "empty-dataset");
}

using testing::gradcheck_batch;
using testing::gradcheck_config;
using testing::gradient_check;

// At eps = 1e-4 the central-difference truncation error (O(eps^2)) is far
// below the tolerance, so a per-component relative check is meaningful.
TEST(LossGrad, MatchesCentralDifferences) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto r = gradient_check(gradcheck_config(seed), 12, 1e-4);
    EXPECT_LE(r.max_relative, 1e-4) << "seed " << seed << " worst " << r.worst_tensor;
    EXPECT_EQ(r.components, parameter_count(gradcheck_config(seed), 12));
  }
}

TEST(LossGrad, MatchesCentralDifferencesUnderDropout) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto r = gradient_check(gradcheck_config(seed, 0.1), 12, 1e-4);
    EXPECT_LE(r.max_relative, 1e-4) << "seed " << seed << " worst " << r.worst_tensor;
  }
}

// The discrepancy is pure truncation: shrinking eps tenfold shrinks it
// about a hundredfold.
TEST(LossGrad, DiscrepancyScalesWithEpsSquared) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const double coarse = gradient_check(gradcheck_config(seed), 12, 1e-3).max_absolute;
    const double fine = gradient_check(gradcheck_config(seed), 12, 1e-4).max_absolute;
    EXPECT_LT(coarse, 1e-5);
    EXPECT_GT(coarse / fine, 50.0) << "seed " << seed;
    EXPECT_LT(coarse / fine, 200.0) << "seed " << seed;
  }
}

TEST(LossGrad, DuplicatedBatchIsInvariant) {
  const auto p = tf_init<double>(tiny_config(9), 12);
  const auto batch = gradcheck_batch(9, 4, 8, 12);
  std::vector<Example> doubled = batch;
  doubled.insert(doubled.end(), batch.begin(), batch.end());
  const auto a = tf_loss_grad(p, batch);
  const auto b = tf_loss_grad(p, doubled);
  EXPECT_NEAR(a.loss, b.loss, 1e-12);
  for (std::size_t t = 0; t < a.grads.size(); ++t) {
    for (std::size_t i = 0; i < a.grads[t].size(); ++i) {
      ASSERT_NEAR(a.grads[t][i], b.grads[t][i], 1e-12);
    }
  }
}

TEST(LossGrad, InferenceLossMatchesForward) {
  const auto p = tf_init<float>(tiny_config(4), 12);
  const auto batch = gradcheck_batch(4, 3, 8, 12);
  double expected = 0.0;
  for (const auto& ex : batch) {
    const auto probs = softmax<float>(tf_forward(p, ex.ids));
    expected -= std::log(probs[static_cast<std::size_t>(ex.gold)]);
  }
  EXPECT_NEAR(tf_loss_grad(p, batch).loss, expected / 3.0, 1e-5);
}

TEST(Attention, RowsSumToOneAndPadIsMasked) {
  ModelConfig c = tiny_config(2);
  c.layers = 2;
  const auto p = tf_init<float>(c, 12);
  const std::vector<TokenId> ids = {P, P, P, C, 3, 4, 5, 6};
  const auto att = tf_attention(p, ids);
  ASSERT_EQ(att.size(), 2u);
  for (std::size_t l = 0; l < att.size(); ++l) {
    ASSERT_EQ(att[l].size(), c.heads);
    for (const auto& head : att[l]) {
      ASSERT_EQ(head.size(), l + 1 == att.size() ? 1u : 5u);
      for (const auto& row : head) {
        ASSERT_EQ(row.size(), c.window);
        EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-6);
        for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(row[j], 0.0);
        for (std::size_t j = 3; j < row.size(); ++j) EXPECT_GT(row[j], 0.0);
      }
    }
  }
}

TEST(Softmax, IsAProbabilityVector) {
  SplitMix64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<float> logits(1 + rng.below(200));
    for (float& x : logits) x = static_cast<float>(rng.uniform(-80.0, 80.0));
    const auto p = softmax<float>(logits);
    double sum = 0.0;
    for (double x : p) {
      ASSERT_GE(x, 0.0);
      sum += x;
    }
    ASSERT_NEAR(sum, 1.0, 1e-6);
  }
}

TEST(Config, JsonRoundTripAndValidation) {
  ModelConfig c;
  c.lr = 1e-3;
  c.seed = 77;
  EXPECT_EQ(config_from_json(config_to_json(c)), c);
  EXPECT_EQ(config_from_json("{\"layers\": 1}").layers, 1u);
  EXPECT_EQ(error_code([] { config_from_json("{\"depth\": 1}"); }), "invalid-config");
  ModelConfig bad;
  bad.heads = 3;  // 128 is not divisible by 3
  EXPECT_EQ(error_code([&] { bad.validate(); }), "invalid-config");
}

}  // namespace
}  // namespace tacrec
