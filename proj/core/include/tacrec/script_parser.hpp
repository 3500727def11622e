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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace tacrec {

enum class DeclForm { kTheoremProofQED, kTriviality, kStoreThm, kProve };

std::string_view to_string(DeclForm form);
// Throws Error("corrupt-proofs") for an unknown name.
DeclForm decl_form_from_string(std::string_view name);

struct LineSpan {
  int start = 0;  // 1-based, inclusive
  int end = 0;

  friend bool operator==(const LineSpan&, const LineSpan&) = default;
};

// One theorem or lemma reduced to its flattened tactic-head sequence.
struct ProofRecord {
  std::string theory;
  std::string theorem_name;
  DeclForm decl_form = DeclForm::kTheoremProofQED;
  std::vector<std::string> tactics;
  std::string source_path;
  LineSpan line_span;

  friend bool operator==(const ProofRecord&, const ProofRecord&) = default;
};

// Skip reasons emitted by the extractor.
namespace skip_reason {
inline constexpr std::string_view kNoProofBody = "no-proof-body";
inline constexpr std::string_view kUnterminatedSpan = "unterminated-span";
inline constexpr std::string_view kTacticParseFailure = "tactic-parse-failure";
inline constexpr std::string_view kAnonymousProve = "anonymous-prove";
inline constexpr std::string_view kDuplicateName = "duplicate-name";
inline constexpr std::string_view kMalformedDeclaration = "malformed-declaration";
inline constexpr std::string_view kIoError = "io-error";
}  // namespace skip_reason

struct SkipRecord {
  std::string source_path;
  int line = 0;
  std::string reason;

  friend bool operator==(const SkipRecord&, const SkipRecord&) = default;
};

struct ExtractResult {
  std::vector<ProofRecord> proofs;
  std::vector<SkipRecord> skips;
};

struct ParseReport {
  std::size_t files_scanned = 0;
  std::size_t proofs_extracted = 0;
  std::size_t proofs_skipped = 0;
  std::vector<SkipRecord> skip_reasons;
};

struct ScanResult {
  std::vector<ProofRecord> proofs;
  ParseReport report;
};

// Theory name for a script path: the file stem with a trailing "Script"
// removed ("listScript.sml" -> "list").
std::string theory_of(std::string_view source_path);

// Recognizes Theorem/Triviality ... Proof ... QED blocks, store_thm calls and
// `val x = prove (...)` bindings. Never throws on malformed input; every
// declaration that is not extracted is reported in `skips`.
ExtractResult extract_proofs(std::string_view script_text,
                             std::string_view source_path);

// Flattens a tactic expression into the depth-first sequence of atomic
// tactic heads. Throws Error("empty-tactic") or Error("tactic-parse-failure").
std::vector<std::string> flatten_tactic_expr(std::string_view expr_text);

// Runs extract_proofs over every file under `root` whose file name matches
// `pattern` (fnmatch glob). Files are processed in lexicographic order of
// their root-relative path, which is also the recorded source_path; the
// result does not depend on `threads`. Throws Error("no-such-directory").
ScanResult scan_corpus(const std::filesystem::path& root,
                       std::string_view pattern = "*Script.sml",
                       unsigned threads = 1);

}  // namespace tacrec
