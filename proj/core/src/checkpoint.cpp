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

#include "tacrec/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tacrec/error.hpp"

namespace tacrec {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");
static_assert(sizeof(float) == 4);

void put_u64(std::string& out, std::uint64_t v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.append(buf, 8);
}

void put_segment(std::string& out, std::string_view bytes) {
  put_u64(out, bytes.size());
  out.append(bytes);
}

[[noreturn]] void corrupt(const std::string& detail) {
  throw Error("corrupt-checkpoint", detail);
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint64_t u64() {
    if (bytes_.size() - pos_ < 8) corrupt("truncated length prefix");
    std::uint64_t v;
    std::memcpy(&v, bytes_.data() + pos_, 8);
    pos_ += 8;
    return v;
  }

  std::string_view segment() {
    const std::uint64_t len = u64();
    if (len > bytes_.size() - pos_) corrupt("truncated segment");
    const std::string_view s = bytes_.substr(pos_, len);
    pos_ += len;
    return s;
  }

  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ck) {
  std::string out(kCheckpointMagic);
  put_segment(out, config_to_json(ck.config));

  std::string digest;
  put_u64(digest, ck.vocab.digest());
  put_segment(out, digest);

  nlohmann::ordered_json dir = nlohmann::ordered_json::array();
  std::string raw;
  for (const Tensor<float>& t : ck.params.tensors) {
    dir.push_back({{"name", t.name},
                   {"shape", {t.rows, t.cols}},
                   {"offset", raw.size()}});
    raw.append(reinterpret_cast<const char*>(t.data.data()),
               t.data.size() * sizeof(float));
  }
  put_segment(out, dir.dump());
  put_segment(out, raw);

  nlohmann::ordered_json log;
  log["best_epoch"] = ck.best_epoch;
  log["vocab_size"] = ck.params.vocab_size;
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  for (const TrainingLogEntry& e : ck.training_log) {
    entries.push_back({e.epoch, e.train_loss, e.val_top7});
  }
  log["epochs"] = entries;
  put_segment(out, log.dump());

  std::string tokens;
  for (const std::string& t : ck.vocab.regular_tokens()) {
    tokens += t;
    tokens += '\n';
  }
  put_segment(out, tokens);
  return out;
}

Checkpoint deserialize_checkpoint(std::string_view bytes,
                                  const Vocabulary* expected) {
  if (!bytes.starts_with(kCheckpointMagic)) corrupt("bad magic");
  Reader r(bytes.substr(kCheckpointMagic.size()));
  const std::string_view config_seg = r.segment();
  const std::string_view digest_seg = r.segment();
  const std::string_view dir_seg = r.segment();
  const std::string_view raw = r.segment();
  const std::string_view log_seg = r.segment();
  const std::string_view tokens_seg = r.segment();
  if (!r.at_end()) corrupt("trailing bytes");

  Checkpoint ck;
  try {
    ck.config = config_from_json(config_seg);
    ck.config.validate(1);
  } catch (const Error& e) {
    corrupt(std::string("config: ") + e.what());
  }

  if (digest_seg.size() != 8) corrupt("digest segment must be 8 bytes");
  std::uint64_t stored_digest;
  std::memcpy(&stored_digest, digest_seg.data(), 8);

  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < tokens_seg.size();) {
    const std::size_t nl = tokens_seg.find('\n', i);
    if (nl == std::string_view::npos) corrupt("vocabulary segment");
    tokens.emplace_back(tokens_seg.substr(i, nl - i));
    i = nl + 1;
  }
  try {
    ck.vocab = Vocabulary(std::move(tokens));
  } catch (const Error& e) {
    corrupt(std::string("vocabulary: ") + e.what());
  }
  if (ck.vocab.digest() != stored_digest) {
    throw Error("vocab-mismatch", "embedded vocabulary does not match digest");
  }
  if (expected && expected->digest() != stored_digest) {
    throw Error("vocab-mismatch",
                "checkpoint was trained on a different vocabulary");
  }

  try {
    const auto log = nlohmann::json::parse(log_seg);
    ck.best_epoch = log.at("best_epoch").get<std::size_t>();
    ck.params.vocab_size = log.at("vocab_size").get<std::size_t>();
    for (const auto& e : log.at("epochs")) {
      ck.training_log.push_back(TrainingLogEntry{e.at(0).get<std::size_t>(),
                                                 e.at(1).get<double>(),
                                                 e.at(2).get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    corrupt(std::string("training log: ") + e.what());
  }
  if (ck.params.vocab_size != ck.vocab.size()) corrupt("vocabulary size");

  // Shapes must match a freshly initialized model of the same config.
  const Parameters<float> reference = [&] {
    ModelConfig shape_only = ck.config;
    return tf_init<float>(shape_only, ck.params.vocab_size);
  }();
  ck.params.config = ck.config;
  try {
    const auto dir = nlohmann::json::parse(dir_seg);
    if (dir.size() != reference.tensors.size()) corrupt("tensor count");
    for (std::size_t i = 0; i < dir.size(); ++i) {
      const auto& entry = dir.at(i);
      const Tensor<float>& ref = reference.tensors[i];
      Tensor<float> t;
      t.name = entry.at("name").get<std::string>();
      t.rows = entry.at("shape").at(0).get<std::size_t>();
      t.cols = entry.at("shape").at(1).get<std::size_t>();
      const auto offset = entry.at("offset").get<std::size_t>();
      if (t.name != ref.name || t.rows != ref.rows || t.cols != ref.cols) {
        corrupt("tensor " + std::to_string(i) + " does not match the config");
      }
      const std::size_t bytes_needed = t.rows * t.cols * sizeof(float);
      if (offset > raw.size() || raw.size() - offset < bytes_needed) {
        corrupt("tensor " + t.name + " out of range");
      }
      t.data.resize(t.rows * t.cols);
      std::memcpy(t.data.data(), raw.data() + offset, bytes_needed);
      for (float x : t.data) {
        if (!std::isfinite(x)) corrupt("non-finite value in " + t.name);
      }
      ck.params.tensors.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    corrupt(std::string("parameter directory: ") + e.what());
  }
  return ck;
}

void save_checkpoint(const Checkpoint& checkpoint,
                     const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(checkpoint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io-error", "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("io-error", "short write to " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const Vocabulary* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io-error", "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_checkpoint(buf.str(), expected);
}

}  // namespace tacrec
