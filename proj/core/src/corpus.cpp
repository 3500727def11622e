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

#include "tacrec/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tacrec/error.hpp"
#include "tacrec/hash.hpp"
#include "tacrec/rng.hpp"

namespace tacrec {
namespace {

using ordered_json = nlohmann::ordered_json;

const std::string kSpecialNames[] = {"<pad>", "<unk>", "<cls>"};

std::string pairs_file_name(std::size_t k, std::size_t primary_k) {
  return k == primary_k ? "test.pairs" : "test.k" + std::to_string(k) + ".pairs";
}

std::string join(std::span<const std::string> tokens, char sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

std::vector<std::string> split_tokens(std::string_view field) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < field.size()) {
    const std::size_t j = field.find(' ', i);
    const std::size_t end = j == std::string_view::npos ? field.size() : j;
    if (end > i) out.emplace_back(field.substr(i, end - i));
    i = end + 1;
  }
  return out;
}

std::string pairs_text(std::span<const ProofStatePair> pairs) {
  std::string out;
  for (const ProofStatePair& p : pairs) {
    out += std::to_string(p.proof_id);
    out += '\t';
    out += std::to_string(p.offset);
    out += '\t';
    out += join(p.context, ' ');
    out += '\t';
    out += join(p.label, ' ');
    out += '\n';
  }
  return out;
}

[[noreturn]] void corrupt(const std::string& detail) {
  throw Error("corrupt-dataset", detail);
}

std::size_t parse_count(std::string_view field, const std::string& where) {
  if (field.empty() || field.size() > 19) corrupt(where + ": bad number");
  std::size_t v = 0;
  for (char c : field) {
    if (c < '0' || c > '9') corrupt(where + ": bad number");
    v = v * 10 + static_cast<std::size_t>(c - '0');
  }
  return v;
}

std::vector<ProofStatePair> parse_pairs(std::string_view text,
                                        const std::string& name) {
  std::vector<ProofStatePair> out;
  std::size_t line_no = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t nl = text.find('\n', i);
    if (nl == std::string_view::npos) corrupt(name + ": missing final newline");
    const std::string_view line = text.substr(i, nl - i);
    i = nl + 1;
    ++line_no;
    const std::string where = name + ":" + std::to_string(line_no);
    std::vector<std::string_view> fields;
    std::size_t a = 0;
    while (true) {
      const std::size_t tab = line.find('\t', a);
      fields.push_back(line.substr(a, tab == std::string_view::npos
                                          ? std::string_view::npos
                                          : tab - a));
      if (tab == std::string_view::npos) break;
      a = tab + 1;
    }
    if (fields.size() != 4) corrupt(where + ": expected 4 fields");
    ProofStatePair p;
    p.proof_id = parse_count(fields[0], where);
    p.offset = parse_count(fields[1], where);
    p.context = split_tokens(fields[2]);
    p.label = split_tokens(fields[3]);
    for (const auto& tokens : {p.context, p.label}) {
      for (const std::string& t : tokens) {
        if (!is_tactic_token(t)) corrupt(where + ": bad token '" + t + "'");
      }
    }
    if (p.context.empty() || p.label.empty()) corrupt(where + ": empty field");
    out.push_back(std::move(p));
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io-error", "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io-error", "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("io-error", "short write to " + path.string());
}

}  // namespace

// ---------------------------------------------------------------------------

bool is_tactic_token(std::string_view token) {
  if (token.empty()) return false;
  auto start = [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
  };
  if (!start(token.front())) return false;
  return std::all_of(token.begin() + 1, token.end(), [&](char c) {
    return start(c) || (c >= '0' && c <= '9') || c == '\'';
  });
}

std::string_view to_string(SplitMode mode) {
  return mode == SplitMode::kPairLevel ? "pair" : "proof";
}

SplitMode split_mode_from_string(std::string_view name) {
  if (name == "pair") return SplitMode::kPairLevel;
  if (name == "proof") return SplitMode::kProofLevel;
  throw Error("invalid-config", "unknown split mode '" + std::string(name) + "'");
}

Vocabulary::Vocabulary(std::vector<std::string> regular)
    : tokens_(std::move(regular)) {
  Fnv1a64 h;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    const std::string& t = tokens_[i];
    if (t.empty()) throw Error("invalid-vocab", "empty token");
    if (!ids_.emplace(t, static_cast<TokenId>(kFirstRegular + i)).second) {
      throw Error("invalid-vocab", "duplicate token '" + t + "'");
    }
    h.update(t);
    h.update("\n");
  }
  digest_ = h.digest();
}

TokenId Vocabulary::id_of(std::string_view token) const {
  const auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return ids_.count(std::string(token)) != 0;
}

const std::string& Vocabulary::token_of(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= size()) {
    throw Error("invalid-id", std::to_string(id));
  }
  if (is_special(id)) return kSpecialNames[id];
  return tokens_[static_cast<std::size_t>(id - kFirstRegular)];
}

// ---------------------------------------------------------------------------

std::vector<ProofStatePair> build_pairs(std::span<const ProofRecord> proofs,
                                        std::size_t context_min,
                                        std::size_t k) {
  if (k == 0 || context_min == 0) {
    throw Error("invalid-config", "k and context_min must be at least 1");
  }
  std::vector<ProofStatePair> out;
  for (std::size_t p = 0; p < proofs.size(); ++p) {
    const auto& t = proofs[p].tactics;
    for (std::size_t j = context_min; j + k <= t.size(); ++j) {
      ProofStatePair pair;
      pair.context.assign(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(j));
      pair.label.assign(t.begin() + static_cast<std::ptrdiff_t>(j),
                        t.begin() + static_cast<std::ptrdiff_t>(j + k));
      pair.proof_id = p;
      pair.offset = j;
      out.push_back(std::move(pair));
    }
  }
  return out;
}

std::vector<ProofStatePair> relabel_pairs(std::span<const ProofStatePair> base,
                                          std::span<const ProofRecord> proofs,
                                          std::size_t k) {
  if (k == 0) throw Error("invalid-config", "k must be at least 1");
  std::vector<ProofStatePair> out;
  for (const ProofStatePair& b : base) {
    if (b.proof_id >= proofs.size()) {
      throw Error("invalid-config", "pair refers to unknown proof");
    }
    const auto& t = proofs[b.proof_id].tactics;
    if (b.offset + k > t.size()) continue;
    ProofStatePair pair;
    pair.context = b.context;
    pair.label.assign(t.begin() + static_cast<std::ptrdiff_t>(b.offset),
                      t.begin() + static_cast<std::ptrdiff_t>(b.offset + k));
    pair.proof_id = b.proof_id;
    pair.offset = b.offset;
    out.push_back(std::move(pair));
  }
  return out;
}

DatasetSplit split_dataset(std::span<const ProofStatePair> pairs,
                           double ratio, std::uint64_t seed, SplitMode mode) {
  if (pairs.empty()) throw Error("empty-dataset");
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw Error("invalid-config", "ratio must lie in (0, 1)");
  }
  DatasetSplit out;
  out.ratio = ratio;
  out.seed = seed;
  out.mode = mode;
  SplitMix64 rng(seed);

  if (mode == SplitMode::kPairLevel) {
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    shuffle(std::span(order), rng);
    const auto n_train = static_cast<std::size_t>(
        std::llround(ratio * static_cast<double>(pairs.size())));
    for (std::size_t i = 0; i < order.size(); ++i) {
      (i < n_train ? out.train : out.test).push_back(pairs[order[i]]);
    }
    return out;
  }

  // Proof level: shuffle distinct proofs, then pick the subset (preferring
  // proofs early in the shuffled order) whose pair count is the smallest
  // achievable total >= ratio * |pairs| that still leaves a test side.
  std::map<std::size_t, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    members[pairs[i].proof_id].push_back(i);
  }
  std::vector<std::size_t> proofs;
  for (const auto& [id, _] : members) proofs.push_back(id);
  shuffle(std::span(proofs), rng);

  const std::size_t total = pairs.size();
  const std::size_t n = proofs.size();
  const auto target = static_cast<std::size_t>(
      std::ceil(ratio * static_cast<double>(total) - 1e-9));

  // reach[i] = sums achievable with proofs[i..n).
  const std::size_t words = total / 64 + 1;
  std::vector<std::vector<std::uint64_t>> reach(
      n + 1, std::vector<std::uint64_t>(words, 0));
  reach[n][0] = 1;
  auto test_bit = [&](const std::vector<std::uint64_t>& b, std::size_t s) {
    return (b[s / 64] >> (s % 64)) & 1u;
  };
  for (std::size_t i = n; i-- > 0;) {
    const std::size_t c = members[proofs[i]].size();
    const auto& src = reach[i + 1];
    auto& dst = reach[i];
    dst = src;
    const std::size_t ws = c / 64;
    const std::size_t bs = c % 64;
    for (std::size_t w = words; w-- > ws;) {
      std::uint64_t shifted = src[w - ws] << bs;
      if (bs != 0 && w - ws >= 1) shifted |= src[w - ws - 1] >> (64 - bs);
      dst[w] |= shifted;
    }
  }

  std::size_t chosen = 0;
  bool found = false;
  for (std::size_t s = target; s < total; ++s) {
    if (test_bit(reach[0], s)) {
      chosen = s;
      found = true;
      break;
    }
  }
  if (!found) {
    for (std::size_t s = std::min(target, total); s-- > 1;) {
      if (test_bit(reach[0], s)) {
        chosen = s;
        found = true;
        break;
      }
    }
  }
  if (!found) chosen = total;  // a single proof cannot be split

  std::size_t remaining = chosen;
  std::vector<bool> to_train(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = members[proofs[i]].size();
    if (c <= remaining && test_bit(reach[i + 1], remaining - c)) {
      to_train[i] = true;
      remaining -= c;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t idx : members[proofs[i]]) {
      (to_train[i] ? out.train : out.test).push_back(pairs[idx]);
    }
  }
  return out;
}

Vocabulary build_vocab(std::span<const ProofStatePair> train) {
  if (train.empty()) throw Error("empty-dataset");
  std::map<std::string, std::size_t> freq;
  for (const ProofStatePair& p : train) {
    for (const auto& t : p.context) ++freq[t];
    for (const auto& t : p.label) ++freq[t];
  }
  std::vector<std::pair<std::string, std::size_t>> entries(freq.begin(),
                                                           freq.end());
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second != b.second) return a.second > b.second;
                     return a.first < b.first;
                   });
  std::vector<std::string> tokens;
  tokens.reserve(entries.size());
  for (auto& e : entries) tokens.push_back(std::move(e.first));
  return Vocabulary(std::move(tokens));
}

CorpusStats corpus_stats(std::span<const ProofRecord> proofs,
                         std::span<const ProofStatePair> pairs) {
  std::set<std::string> distinct;
  CorpusStats s;
  for (const ProofRecord& p : proofs) {
    if (!p.tactics.empty()) ++s.proofs;
    distinct.insert(p.tactics.begin(), p.tactics.end());
  }
  s.distinct_tactics = distinct.size();
  s.proof_states = pairs.size();
  return s;
}

// ---------------------------------------------------------------------------

const std::vector<ProofStatePair>& Dataset::test_for(std::size_t label_k) const {
  if (label_k == k) return split.test;
  const auto it = extra_tests.find(label_k);
  if (it == extra_tests.end()) {
    throw Error("missing-k", "dataset has no test pairs for k = " +
                                 std::to_string(label_k));
  }
  return it->second;
}

Dataset build_dataset(std::span<const ProofRecord> proofs,
                      const BuildOptions& options) {
  const std::vector<ProofStatePair> pairs =
      build_pairs(proofs, options.context_min, options.k);
  Dataset d;
  d.split = split_dataset(pairs, options.ratio, options.seed, options.mode);
  d.vocab = build_vocab(d.split.train);
  d.context_min = options.context_min;
  d.k = options.k;
  for (std::size_t extra : options.extra_k) {
    if (extra == options.k) continue;
    d.extra_tests[extra] = relabel_pairs(d.split.test, proofs, extra);
  }
  d.stats = corpus_stats(proofs, pairs);
  return d;
}

void persist_dataset(const Dataset& dataset, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("io-error", "cannot create " + dir.string());

  std::string vocab_text;
  for (const std::string& t : dataset.vocab.regular_tokens()) {
    vocab_text += t;
    vocab_text += '\n';
  }
  const std::string train_text = pairs_text(dataset.split.train);
  const std::string test_text = pairs_text(dataset.split.test);

  ordered_json files = ordered_json::object();
  ordered_json counts = ordered_json::object();
  files["vocab"] = to_hex(fnv1a64(vocab_text));
  files["train.pairs"] = to_hex(fnv1a64(train_text));
  files["test.pairs"] = to_hex(fnv1a64(test_text));
  counts["vocab"] = dataset.vocab.regular_size();
  counts["train.pairs"] = dataset.split.train.size();
  counts["test.pairs"] = dataset.split.test.size();
  std::vector<std::pair<std::string, std::string>> extra_files;
  ordered_json extra_k = ordered_json::array();
  for (const auto& [k, pairs] : dataset.extra_tests) {
    if (k == dataset.k) throw Error("invalid-config", "extra k equals primary k");
    const std::string name = pairs_file_name(k, dataset.k);
    std::string text = pairs_text(pairs);
    files[name] = to_hex(fnv1a64(text));
    counts[name] = pairs.size();
    extra_k.push_back(k);
    extra_files.emplace_back(name, std::move(text));
  }

  ordered_json manifest;
  manifest["version"] = kDatasetVersion;
  manifest["ratio"] = dataset.split.ratio;
  manifest["seed"] = dataset.split.seed;
  manifest["mode"] = to_string(dataset.split.mode);
  manifest["context_min"] = dataset.context_min;
  manifest["k"] = dataset.k;
  manifest["extra_k"] = extra_k;
  manifest["vocab_digest"] = to_hex(dataset.vocab.digest());
  manifest["counts"] = counts;
  manifest["files"] = files;
  manifest["stats"] = {{"distinct_tactics", dataset.stats.distinct_tactics},
                       {"proofs", dataset.stats.proofs},
                       {"proof_states", dataset.stats.proof_states}};

  write_file(dir / "vocab", vocab_text);
  write_file(dir / "train.pairs", train_text);
  write_file(dir / "test.pairs", test_text);
  for (const auto& [name, text] : extra_files) write_file(dir / name, text);
  write_file(dir / "manifest", manifest.dump(2) + "\n");
}

Dataset load_dataset(const std::filesystem::path& dir) {
  const std::string manifest_text = read_file(dir / "manifest");
  ordered_json m;
  try {
    m = ordered_json::parse(manifest_text);
  } catch (const nlohmann::json::exception& e) {
    corrupt(std::string("manifest: ") + e.what());
  }
  try {
    if (m.at("version").get<std::string>() != kDatasetVersion) {
      corrupt("unknown manifest version '" +
              m.at("version").get<std::string>() + "'");
    }
    Dataset d;
    d.split.ratio = m.at("ratio").get<double>();
    d.split.seed = m.at("seed").get<std::uint64_t>();
    d.split.mode = split_mode_from_string(m.at("mode").get<std::string>());
    d.context_min = m.at("context_min").get<std::size_t>();
    d.k = m.at("k").get<std::size_t>();
    const auto& counts = m.at("counts");
    const auto& files = m.at("files");
    const auto& stats = m.at("stats");
    d.stats.distinct_tactics = stats.at("distinct_tactics").get<std::size_t>();
    d.stats.proofs = stats.at("proofs").get<std::size_t>();
    d.stats.proof_states = stats.at("proof_states").get<std::size_t>();

    auto checked = [&](const std::string& name) {
      std::string text = read_file(dir / name);
      if (files.at(name).get<std::string>() != to_hex(fnv1a64(text))) {
        corrupt(name + ": content digest mismatch");
      }
      return text;
    };

    const std::string vocab_text = checked("vocab");
    std::vector<std::string> tokens;
    {
      std::size_t i = 0;
      while (i < vocab_text.size()) {
        const std::size_t nl = vocab_text.find('\n', i);
        if (nl == std::string::npos) corrupt("vocab: missing final newline");
        tokens.emplace_back(vocab_text.substr(i, nl - i));
        i = nl + 1;
      }
    }
    if (tokens.size() != counts.at("vocab").get<std::size_t>()) {
      corrupt("vocab: count mismatch");
    }
    try {
      d.vocab = Vocabulary(std::move(tokens));
    } catch (const Error& e) {
      corrupt(std::string("vocab: ") + e.what());
    }
    if (to_hex(d.vocab.digest()) != m.at("vocab_digest").get<std::string>()) {
      corrupt("vocab digest mismatch");
    }

    auto load_pairs = [&](const std::string& name) {
      auto pairs = parse_pairs(checked(name), name);
      if (pairs.size() != counts.at(name).get<std::size_t>()) {
        corrupt(name + ": count mismatch");
      }
      return pairs;
    };
    d.split.train = load_pairs("train.pairs");
    d.split.test = load_pairs("test.pairs");
    for (const auto& k : m.at("extra_k")) {
      const auto label_k = k.get<std::size_t>();
      d.extra_tests[label_k] = load_pairs(pairs_file_name(label_k, d.k));
    }
    return d;
  } catch (const nlohmann::json::exception& e) {
    corrupt(std::string("manifest: ") + e.what());
  }
}

std::string proof_record_line(const ProofRecord& proof) {
  ordered_json j;
  j["theory"] = proof.theory;
  j["name"] = proof.theorem_name;
  j["decl_form"] = to_string(proof.decl_form);
  j["tactics"] = proof.tactics;
  j["path"] = proof.source_path;
  j["line_start"] = proof.line_span.start;
  j["line_end"] = proof.line_span.end;
  return j.dump();
}

void write_proof_records(std::ostream& out,
                         std::span<const ProofRecord> proofs) {
  for (const ProofRecord& p : proofs) out << proof_record_line(p) << '\n';
}

std::vector<ProofRecord> read_proof_records(std::istream& in) {
  std::vector<ProofRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    try {
      const auto j = nlohmann::json::parse(line);
      ProofRecord p;
      p.theory = j.at("theory").get<std::string>();
      p.theorem_name = j.at("name").get<std::string>();
      p.decl_form = decl_form_from_string(j.at("decl_form").get<std::string>());
      p.tactics = j.at("tactics").get<std::vector<std::string>>();
      p.source_path = j.at("path").get<std::string>();
      p.line_span.start = j.at("line_start").get<int>();
      p.line_span.end = j.at("line_end").get<int>();
      for (const std::string& t : p.tactics) {
        if (!is_tactic_token(t)) {
          throw Error("corrupt-proofs", where + ": bad token '" + t + "'");
        }
      }
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw Error("corrupt-proofs", where + ": " + e.what());
    }
  }
  return out;
}

}  // namespace tacrec
