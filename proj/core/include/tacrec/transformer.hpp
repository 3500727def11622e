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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tacrec/corpus.hpp"
#include "tacrec/rng.hpp"

namespace tacrec {

struct ModelConfig {
  std::size_t window = 32;
  std::size_t embed_dim = 128;
  std::size_t heads = 4;
  std::size_t layers = 2;
  std::size_t ffn_dim = 256;
  double dropout = 0.1;
  double lr = 3e-4;
  std::size_t batch = 64;
  std::size_t epochs = 30;
  std::uint64_t seed = 0;

  // Throws Error("invalid-config").
  void validate(std::size_t context_min = 3) const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

std::string config_to_json(const ModelConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
ModelConfig config_from_json(std::string_view text);

// Number of trainable scalars for the given config and vocabulary size.
std::size_t parameter_count(const ModelConfig& config, std::size_t vocab_size);

template <typename T>
struct Tensor {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> data;  // row-major

  T* row(std::size_t r) { return data.data() + r * cols; }
  const T* row(std::size_t r) const { return data.data() + r * cols; }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

// Parameter tensors in their fixed order:
//   token_embedding |V|xd, position_embedding Wxd,
//   per layer l: ln1.gain, ln1.bias, attn.wq, attn.bq, attn.wk, attn.bk,
//                attn.wv, attn.bv, attn.wo, attn.bo, ln2.gain, ln2.bias,
//                ffn.w1, ffn.b1, ffn.w2, ffn.b2   (names prefixed "layer<l>.")
//   final_ln.gain, final_ln.bias, classifier.w dx|V|, classifier.b
// Weight matrices are stored input-major (rows = fan-in).
template <typename T>
struct Parameters {
  ModelConfig config;
  std::size_t vocab_size = 0;
  std::vector<Tensor<T>> tensors;

  static constexpr std::size_t kPerLayer = 16;

  template <typename U>
  Parameters<U> cast() const {
    Parameters<U> out;
    out.config = config;
    out.vocab_size = vocab_size;
    for (const Tensor<T>& t : tensors) {
      out.tensors.push_back(Tensor<U>{t.name, t.rows, t.cols,
                                      std::vector<U>(t.data.begin(), t.data.end())});
    }
    return out;
  }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& t : tensors) n += t.data.size();
    return n;
  }

  friend bool operator==(const Parameters&, const Parameters&) = default;
};

// Most recent min(|context|, W-1) tokens, CLS prepended, left-padded with PAD
// to length W. Throws Error("empty-context").
std::vector<TokenId> encode_context(std::span<const std::string> context,
                                    const Vocabulary& vocab,
                                    std::size_t window);
std::vector<TokenId> encode_ids(std::span<const TokenId> context,
                                std::size_t window);

// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] drawn in tensor order
// from SplitMix64(config.seed); embedding tables use fan_in = d; layer-norm
// gains are one, every bias zero, and the PAD embedding row zero.
template <typename T>
Parameters<T> tf_init(const ModelConfig& config, std::size_t vocab_size);

// Logits over the whole vocabulary (inference mode). Throws Error("invalid-id").
template <typename T>
std::vector<T> tf_forward(const Parameters<T>& params,
                          std::span<const TokenId> ids);

struct Example {
  std::vector<TokenId> ids;  // encoded, length W
  TokenId gold = Vocabulary::kUnk;
};

template <typename T>
struct LossGrad {
  double loss = 0.0;                  // mean cross-entropy
  std::vector<std::vector<T>> grads;  // aligned with Parameters::tensors
};

// Mean cross-entropy over the batch and its exact gradient. With a non-null
// `dropout_rng` dropout masks are drawn from it in sample order (training
// mode); with null the pass is deterministic inference. Throws
// Error("invalid-label") for special gold ids and Error("empty-dataset")
// for an empty batch.
template <typename T>
LossGrad<T> tf_loss_grad(const Parameters<T>& params,
                         std::span<const Example> batch,
                         SplitMix64* dropout_rng = nullptr);

// Attention weights for inspection: [layer][head][query row][W key
// positions]. Only rows that feed the CLS output are computed (all active
// positions in every layer but the last, CLS only in the last); query rows
// are indexed by active position order starting at CLS.
template <typename T>
std::vector<std::vector<std::vector<std::vector<double>>>> tf_attention(
    const Parameters<T>& params, std::span<const TokenId> ids);

// Softmax in 64-bit.
template <typename T>
std::vector<double> softmax(std::span<const T> logits);

}  // namespace tacrec
