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
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tacrec/script_parser.hpp"

namespace tacrec {

using TokenId = std::int32_t;

// A current proof state (a prefix of a proof) and the next k gold tactics.
struct ProofStatePair {
  std::vector<std::string> context;
  std::vector<std::string> label;
  std::size_t proof_id = 0;  // index into the proof list the pair came from
  std::size_t offset = 0;    // 0-based position of label.front() in the proof

  friend bool operator==(const ProofStatePair&, const ProofStatePair&) = default;
};

enum class SplitMode { kPairLevel, kProofLevel };

std::string_view to_string(SplitMode mode);
SplitMode split_mode_from_string(std::string_view name);  // "pair" | "proof"

struct DatasetSplit {
  std::vector<ProofStatePair> train;
  std::vector<ProofStatePair> test;
  double ratio = 0.9;
  std::uint64_t seed = 0;
  SplitMode mode = SplitMode::kPairLevel;

  friend bool operator==(const DatasetSplit&, const DatasetSplit&) = default;
};

// Dense bijection between tactic tokens and ids. Ids 0..2 are reserved.
class Vocabulary {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnk = 1;
  static constexpr TokenId kCls = 2;
  static constexpr TokenId kFirstRegular = 3;

  Vocabulary() = default;
  // `regular` lists the non-special tokens in id order (id 3 first).
  // Throws Error("invalid-vocab") on duplicates or empty tokens.
  explicit Vocabulary(std::vector<std::string> regular);

  std::size_t size() const { return kFirstRegular + tokens_.size(); }
  std::size_t regular_size() const { return tokens_.size(); }
  const std::vector<std::string>& regular_tokens() const { return tokens_; }

  // kUnk for tokens outside the vocabulary.
  TokenId id_of(std::string_view token) const;
  bool contains(std::string_view token) const;
  // Specials render as <pad>, <unk>, <cls>.
  const std::string& token_of(TokenId id) const;
  static bool is_special(TokenId id) { return id < kFirstRegular; }

  std::uint64_t digest() const { return digest_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
  std::uint64_t digest_ = 0;
};

struct CorpusStats {
  std::size_t distinct_tactics = 0;
  std::size_t proofs = 0;
  std::size_t proof_states = 0;

  friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

// One pair per prefix length j in [context_min, m - k]: context = t1..tj,
// label = t(j+1)..t(j+k). Throws Error("invalid-config") if k or
// context_min is zero.
std::vector<ProofStatePair> build_pairs(std::span<const ProofRecord> proofs,
                                        std::size_t context_min,
                                        std::size_t k);

// Re-labels `base` pairs with the next `k` tactics of their source proof,
// dropping pairs whose proof is too short. Used to evaluate multi-step
// prediction on exactly the test states of a k = 1 split.
std::vector<ProofStatePair> relabel_pairs(std::span<const ProofStatePair> base,
                                          std::span<const ProofRecord> proofs,
                                          std::size_t k);

// Seeded shuffle then split. Throws Error("empty-dataset") or
// Error("invalid-config") for a ratio outside (0, 1).
DatasetSplit split_dataset(std::span<const ProofStatePair> pairs,
                           double ratio, std::uint64_t seed,
                           SplitMode mode = SplitMode::kPairLevel);

// Tokens ordered by descending frequency over train contexts and labels,
// ties lexicographic. Throws Error("empty-dataset").
Vocabulary build_vocab(std::span<const ProofStatePair> train);

CorpusStats corpus_stats(std::span<const ProofRecord> proofs,
                         std::span<const ProofStatePair> pairs);

// Everything a persisted dataset directory holds.
struct Dataset {
  DatasetSplit split;
  Vocabulary vocab;
  std::size_t context_min = 3;
  std::size_t k = 1;
  // Test states of `split.test` re-labelled with more future tactics,
  // keyed by label length.
  std::map<std::size_t, std::vector<ProofStatePair>> extra_tests;
  CorpusStats stats;

  // Test pairs for label length `k`; throws Error("missing-k") if absent.
  const std::vector<ProofStatePair>& test_for(std::size_t k) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct BuildOptions {
  std::size_t context_min = 3;
  std::size_t k = 1;
  double ratio = 0.9;
  std::uint64_t seed = 0;
  SplitMode mode = SplitMode::kPairLevel;
  std::vector<std::size_t> extra_k = {2};  // values equal to k are ignored
};

// build_pairs -> split_dataset -> build_vocab, plus the re-labelled extra
// test sets and corpus statistics.
Dataset build_dataset(std::span<const ProofRecord> proofs,
                      const BuildOptions& options);

inline constexpr std::string_view kDatasetVersion = "tacrec-dataset-1";

// Writes manifest, vocab, train.pairs, test.pairs and test.k<K>.pairs.
// Throws Error("io-error").
void persist_dataset(const Dataset& dataset, const std::filesystem::path& dir);

// Exact inverse of persist_dataset. Throws Error("io-error") or
// Error("corrupt-dataset").
Dataset load_dataset(const std::filesystem::path& dir);

// Line-delimited proof records, the `extract` output format.
void write_proof_records(std::ostream& out,
                         std::span<const ProofRecord> proofs);
// Throws Error("corrupt-proofs") on a malformed line.
std::vector<ProofRecord> read_proof_records(std::istream& in);
std::string proof_record_line(const ProofRecord& proof);

// True for tokens matching [A-Za-z_][A-Za-z0-9_']*.
bool is_tactic_token(std::string_view token);

}  // namespace tacrec
