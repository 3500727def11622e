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

#include "tacrec/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tacrec/error.hpp"
#include "tacrec/predictor.hpp"
#include "tacrec/rng.hpp"

namespace tacrec {
namespace {

std::vector<Example> encode_examples(std::span<const ProofStatePair> pairs,
                                     const Vocabulary& vocab,
                                     std::size_t window) {
  std::vector<Example> out;
  out.reserve(pairs.size());
  for (const ProofStatePair& p : pairs) {
    if (p.label.size() != 1) {
      throw Error("invalid-config", "transformer training needs k = 1 labels");
    }
    out.push_back(Example{encode_context(p.context, vocab, window),
                          vocab.id_of(p.label.front())});
  }
  return out;
}

class Adam {
 public:
  Adam(const Parameters<float>& params, double lr) : lr_(lr) {
    for (const auto& t : params.tensors) {
      m_.emplace_back(t.data.size(), 0.0f);
      v_.emplace_back(t.data.size(), 0.0f);
    }
  }

  void step(Parameters<float>& params,
            const std::vector<std::vector<float>>& grads) {
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    const auto b1 = static_cast<float>(kBeta1);
    const auto b2 = static_cast<float>(kBeta2);
    const auto step_size = static_cast<float>(lr_ / c1);
    const auto inv_c2 = static_cast<float>(1.0 / c2);
    const auto eps = static_cast<float>(kEps);
    for (std::size_t i = 0; i < params.tensors.size(); ++i) {
      float* p = params.tensors[i].data.data();
      const float* g = grads[i].data();
      float* m = m_[i].data();
      float* v = v_[i].data();
      for (std::size_t j = 0; j < grads[i].size(); ++j) {
        m[j] = b1 * m[j] + (1.0f - b1) * g[j];
        v[j] = b2 * v[j] + (1.0f - b2) * g[j] * g[j];
        p[j] -= step_size * m[j] / (std::sqrt(v[j] * inv_c2) + eps);
      }
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
  double lr_;
  std::uint64_t t_ = 0;
  std::vector<std::vector<float>> m_;
  std::vector<std::vector<float>> v_;
};

}  // namespace

std::size_t best_epoch(std::span<const TrainingLogEntry> log) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < log.size(); ++i) {
    if (log[i].val_top7 > log[best].val_top7) best = i;
  }
  return log.empty() ? 0 : log[best].epoch;
}

double top_n_rate(const Parameters<float>& params, const Vocabulary& vocab,
                  std::span<const ProofStatePair> pairs, std::size_t n) {
  if (pairs.empty()) return 0.0;
  std::size_t hits = 0;
  for (const ProofStatePair& p : pairs) {
    const TokenId gold = vocab.id_of(p.label.front());
    if (Vocabulary::is_special(gold)) continue;
    const auto ids = encode_context(p.context, vocab, params.config.window);
    const std::vector<float> logits = tf_forward(params, ids);
    const std::vector<double> dist = softmax<float>(logits);
    const auto g = static_cast<std::size_t>(gold);
    if (!(dist[g] > 0.0)) continue;
    std::size_t ahead = 0;
    for (std::size_t i = Vocabulary::kFirstRegular; i < dist.size(); ++i) {
      if (dist[i] > dist[g] || (dist[i] == dist[g] && i < g)) ++ahead;
    }
    if (ahead < n) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

Checkpoint tf_train(const ModelConfig& config,
                    std::span<const ProofStatePair> train,
                    std::span<const ProofStatePair> val,
                    const Vocabulary& vocab, const EpochCallback& on_epoch) {
  if (train.empty() || val.empty()) {
    throw Error("empty-dataset", "training and validation pairs are required");
  }
  config.validate(1);
  const std::vector<Example> examples =
      encode_examples(train, vocab, config.window);
  for (const ProofStatePair& p : val) {
    if (p.label.size() != 1) {
      throw Error("invalid-config", "validation pairs need k = 1 labels");
    }
  }

  Parameters<float> params = tf_init<float>(config, vocab.size());
  Adam adam(params, config.lr);
  SplitMix64 shuffle_rng(config.seed + 1);
  SplitMix64 dropout_rng(config.seed + 2);

  Checkpoint out;
  out.config = config;
  out.vocab = vocab;
  out.params = params;
  double best_rate = -1.0;

  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Example> batch;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle(std::span(order), shuffle_rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch) {
      const std::size_t end = std::min(order.size(), start + config.batch);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(examples[order[i]]);
      const LossGrad<float> lg = tf_loss_grad(params, batch, &dropout_rng);
      loss_sum += lg.loss * static_cast<double>(batch.size());
      adam.step(params, lg.grads);
    }
    TrainingLogEntry entry{epoch,
                           loss_sum / static_cast<double>(examples.size()),
                           top_n_rate(params, vocab, val, 7)};
    out.training_log.push_back(entry);
    if (entry.val_top7 > best_rate) {
      best_rate = entry.val_top7;
      out.params = params;
      out.best_epoch = epoch;
    }
    if (on_epoch) on_epoch(entry, params);
  }
  return out;
}

ValidationCarveOut carve_validation(std::span<const ProofStatePair> train,
                                    std::uint64_t seed, double fraction) {
  const DatasetSplit s =
      split_dataset(train, 1.0 - fraction, seed, SplitMode::kPairLevel);
  return ValidationCarveOut{s.train, s.test};
}

std::vector<ModelConfig> default_grid(const ModelConfig& base) {
  std::vector<ModelConfig> grid;
  for (std::size_t layers : {1, 2}) {
    for (std::size_t d : {64, 128}) {
      for (double lr : {1e-3, 3e-4}) {
        ModelConfig c = base;
        c.layers = layers;
        c.embed_dim = d;
        c.lr = lr;
        grid.push_back(c);
      }
    }
  }
  return grid;
}

std::size_t select_grid_winner(std::span<const GridEntry> entries) {
  if (entries.empty()) throw Error("invalid-config", "empty grid");
  std::size_t best = 0;
  for (std::size_t i = 1; i < entries.size(); ++i) {
    const GridEntry& a = entries[i];
    const GridEntry& b = entries[best];
    if (a.val_top7 > b.val_top7 ||
        (a.val_top7 == b.val_top7 && a.parameters < b.parameters)) {
      best = i;
    }
  }
  return best;
}

GridResult grid_search(
    std::span<const ModelConfig> grid, std::span<const ProofStatePair> train,
    std::span<const ProofStatePair> val, const Vocabulary& vocab,
    const std::function<void(std::size_t, const GridEntry&)>& on_config) {
  if (grid.empty()) throw Error("invalid-config", "empty grid");
  GridResult result;
  std::vector<Checkpoint> checkpoints;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Checkpoint ck = tf_train(grid[i], train, val, vocab);
    GridEntry entry{grid[i], parameter_count(grid[i], vocab.size()), 0.0};
    for (const auto& e : ck.training_log) {
      if (e.epoch == ck.best_epoch) entry.val_top7 = e.val_top7;
    }
    result.entries.push_back(entry);
    if (on_config) on_config(i, entry);
    checkpoints.push_back(std::move(ck));
  }
  const std::size_t winner = select_grid_winner(result.entries);
  result.best_config = grid[winner];
  result.checkpoint = std::move(checkpoints[winner]);
  return result;
}

}  // namespace tacrec
