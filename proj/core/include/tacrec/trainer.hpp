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
#include <functional>
#include <span>
#include <vector>

#include "tacrec/checkpoint.hpp"
#include "tacrec/corpus.hpp"
#include "tacrec/transformer.hpp"

namespace tacrec {

// Called after every epoch with the entry just appended to the log and the
// parameters as they stand at the end of that epoch.
using EpochCallback =
    std::function<void(const TrainingLogEntry&, const Parameters<float>&)>;

// Adam (beta1 0.9, beta2 0.999, eps 1e-8) at the config's fixed learning
// rate. Batches are re-shuffled each epoch with SplitMix64(seed + 1) and
// dropout masks come from SplitMix64(seed + 2); parameters are initialized
// by tf_init. The returned checkpoint holds the parameters of the epoch with
// the best validation top-7 rate (earliest on ties). Single-threaded and
// bit-reproducible. Throws Error("empty-dataset") or Error("invalid-config").
Checkpoint tf_train(const ModelConfig& config,
                    std::span<const ProofStatePair> train,
                    std::span<const ProofStatePair> val,
                    const Vocabulary& vocab,
                    const EpochCallback& on_epoch = {});

// 1-based epoch with the highest rate; the earliest wins ties.
std::size_t best_epoch(std::span<const TrainingLogEntry> log);

// Fraction of pairs whose gold label ranks within the model's top n, using
// the same ranking as predict_topn (k = 1). Out-of-vocabulary gold is a miss.
double top_n_rate(const Parameters<float>& params, const Vocabulary& vocab,
                  std::span<const ProofStatePair> pairs, std::size_t n);

// Holds out `fraction` of `train` (pair level, seeded) for model selection.
struct ValidationCarveOut {
  std::vector<ProofStatePair> fit;
  std::vector<ProofStatePair> val;
};
ValidationCarveOut carve_validation(std::span<const ProofStatePair> train,
                                    std::uint64_t seed, double fraction = 0.1);

// L in {1, 2} x d in {64, 128} x lr in {1e-3, 3e-4}; other fields from base.
std::vector<ModelConfig> default_grid(const ModelConfig& base = {});

struct GridEntry {
  ModelConfig config;
  std::size_t parameters = 0;
  double val_top7 = 0.0;
};

struct GridResult {
  ModelConfig best_config;
  Checkpoint checkpoint;
  std::vector<GridEntry> entries;  // grid order
};

// Index of the winner: highest val_top7, then fewer parameters, then grid
// order.
std::size_t select_grid_winner(std::span<const GridEntry> entries);

// Trains every config and keeps the winner. Throws Error("invalid-config")
// for an empty grid.
GridResult grid_search(std::span<const ModelConfig> grid,
                       std::span<const ProofStatePair> train,
                       std::span<const ProofStatePair> val,
                       const Vocabulary& vocab,
                       const std::function<void(std::size_t, const GridEntry&)>&
                           on_config = {});

}  // namespace tacrec
