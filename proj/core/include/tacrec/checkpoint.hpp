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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tacrec/corpus.hpp"
#include "tacrec/transformer.hpp"

namespace tacrec {

struct TrainingLogEntry {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_top7 = 0.0;

  friend bool operator==(const TrainingLogEntry&, const TrainingLogEntry&) = default;
};

struct Checkpoint {
  ModelConfig config;
  Vocabulary vocab;
  Parameters<float> params;
  std::vector<TrainingLogEntry> training_log;
  std::size_t best_epoch = 0;  // epoch whose parameters are stored

  std::uint64_t vocab_digest() const { return vocab.digest(); }

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

inline constexpr std::string_view kCheckpointMagic = "TACREC01";

// Container layout: magic "TACREC01", then six segments, each a little-endian
// u64 byte length followed by its bytes:
//   1 config (JSON text)          2 vocabulary digest (u64 LE)
//   3 parameter directory (JSON: name, shape, byte offset into segment 4)
//   4 parameters (float32 LE)     5 training log (JSON)
//   6 vocabulary tokens (one per line, id order from 3)
std::string serialize_checkpoint(const Checkpoint& checkpoint);

// Throws Error("corrupt-checkpoint") for malformed bytes and
// Error("vocab-mismatch") when the embedded tokens do not hash to the stored
// digest or, if `expected` is given, the digest differs from expected's.
Checkpoint deserialize_checkpoint(std::string_view bytes,
                                  const Vocabulary* expected = nullptr);

void save_checkpoint(const Checkpoint& checkpoint,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const Vocabulary* expected = nullptr);

}  // namespace tacrec
