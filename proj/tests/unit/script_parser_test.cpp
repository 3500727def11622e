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
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tacrec/corpus.hpp"
#include "tacrec/error.hpp"
#include "tacrec/lexer.hpp"
#include "tacrec/rng.hpp"
#include "tacrec/script_parser.hpp"

namespace tacrec {
namespace {

namespace fs = std::filesystem;
using Tokens = std::vector<std::string>;

const fs::path kFixtures = TACREC_FIXTURES_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string records_text(const ExtractResult& r) {
  std::string out;
  for (const ProofRecord& p : r.proofs) out += proof_record_line(p) + "\n";
  return out;
}

std::string skips_text(const std::vector<SkipRecord>& skips) {
  std::string out;
  for (const SkipRecord& s : skips) {
    out += s.source_path + ":" + std::to_string(s.line) + "\t" + s.reason + "\n";
  }
  return out;
}

// --- lexer ---------------------------------------------------------------

TEST(Lexer, CommentsAreDroppedAndNest) {
  const auto lx = lex_script("a (* b (* c *) d *) e");
  ASSERT_EQ(lx.size(), 2u);
  EXPECT_EQ(lx[0].text, "a");
  EXPECT_EQ(lx[1].text, "e");
}

TEST(Lexer, BacktickQuotations) {
  const auto lx = lex_script("`a b` ``c `d` e`` f");
  ASSERT_EQ(lx.size(), 3u);
  EXPECT_EQ(lx[0].kind, LexKind::kQuotation);
  EXPECT_EQ(lx[0].text, "`a b`");
  EXPECT_EQ(lx[1].kind, LexKind::kQuotation);
  EXPECT_EQ(lx[1].text, "``c `d` e``");
  EXPECT_EQ(lx[2].text, "f");
}

TEST(Lexer, UnicodeQuotationsAndStrings) {
  const auto lx = lex_script("\xE2\x80\x9C" "a b\xE2\x80\x9D \xE2\x80\x98" "c\xE2\x80\x99 \"d \\\" e\"");
  ASSERT_EQ(lx.size(), 3u);
  EXPECT_EQ(lx[0].kind, LexKind::kQuotation);
  EXPECT_EQ(lx[1].kind, LexKind::kQuotation);
  EXPECT_EQ(lx[2].kind, LexKind::kString);
  EXPECT_EQ(lx[2].text, "\"d \\\" e\"");
}

TEST(Lexer, UnterminatedSpanMarksOpenerAndResumes) {
  const auto lx = lex_script("x (* never closed\ny");
  ASSERT_EQ(lx.size(), 5u);
  EXPECT_EQ(lx[1].kind, LexKind::kUnterminated);
  EXPECT_EQ(lx[1].text, "(*");
  EXPECT_EQ(lx[4].text, "y");
  EXPECT_EQ(lx[4].line, 2);
}

TEST(Lexer, QualifiedIdentifiersAndSymbols) {
  const auto lx = lex_script("bossLib.rw >> a \\\\ b >- c >| d");
  ASSERT_EQ(lx.size(), 9u);
  EXPECT_EQ(lx[0].text, "bossLib.rw");
  EXPECT_EQ(unqualified(lx[0].text), "rw");
  EXPECT_EQ(lx[1].kind, LexKind::kSymbol);
  EXPECT_EQ(lx[3].text, "\\\\");
  EXPECT_EQ(lx[5].text, ">-");
  EXPECT_EQ(lx[7].text, ">|");
}

TEST(Lexer, FirstOnLineIgnoresIndentation) {
  const auto lx = lex_script("a b\n   c\n(* x *) d");
  ASSERT_EQ(lx.size(), 4u);
  EXPECT_TRUE(lx[0].first_on_line);
  EXPECT_FALSE(lx[1].first_on_line);
  EXPECT_TRUE(lx[2].first_on_line);
  EXPECT_TRUE(lx[3].first_on_line);
}

TEST(Lexer, Utf8Validation) {
  std::size_t bad = 0;
  EXPECT_TRUE(is_valid_utf8("plain \xE2\x88\x80x"));
  EXPECT_FALSE(is_valid_utf8("ab\xFFz", &bad));
  EXPECT_EQ(bad, 2u);
  EXPECT_FALSE(is_valid_utf8("\xC0\xAF"));  // overlong
  EXPECT_FALSE(is_valid_utf8("\xE2\x80"));  // truncated
}

// --- flatten_tactic_expr ---------------------------------------------------

TEST(Flatten, BrancherEmitsHeadThenBranches) {
  EXPECT_EQ(flatten_tactic_expr("Cases_on `x` THENL [simp[], metis_tac[]]"),
            (Tokens{"Cases_on", "simp", "metis_tac"}));
}

TEST(Flatten, ByEmitsKeywordAndRightTactic) {
  EXPECT_EQ(flatten_tactic_expr("`P n` by rw[] \\\\ fs[]"),
            (Tokens{"by", "rw", "fs"}));
}

TEST(Flatten, OrElseKeepsLeftOperand) {
  EXPECT_EQ(flatten_tactic_expr("(rw[] ORELSE simp[]) >> res_tac"),
            (Tokens{"rw", "res_tac"}));
}

TEST(Flatten, SequencersAreInterchangeable) {
  const Tokens want{"a", "b", "c"};
  EXPECT_EQ(flatten_tactic_expr("a THEN b THEN c"), want);
  EXPECT_EQ(flatten_tactic_expr("a >> b >> c"), want);
  EXPECT_EQ(flatten_tactic_expr("a \\\\ b \\\\ c"), want);
  EXPECT_EQ(flatten_tactic_expr("a >- b >- c"), want);
  EXPECT_EQ(flatten_tactic_expr("a THEN1 b THEN1 c"), want);
}

TEST(Flatten, AssociativityInsensitive) {
  EXPECT_EQ(flatten_tactic_expr("(a >> b) >> c"), flatten_tactic_expr("a >> (b >> c)"));
  EXPECT_EQ(flatten_tactic_expr("(a THEN b) THEN c"),
            flatten_tactic_expr("a THEN (b THEN c)"));
}

TEST(Flatten, WrappersAreTransparent) {
  EXPECT_EQ(flatten_tactic_expr("rpt strip_tac >> TRY (rw[]) >> REPEAT a >> REVERSE b"),
            (Tokens{"strip_tac", "rw", "a", "b"}));
  EXPECT_EQ(flatten_tactic_expr("rpt (rpt (TRY c))"), (Tokens{"c"}));
}

TEST(Flatten, ArgumentsAreDiscarded) {
  EXPECT_EQ(flatten_tactic_expr("qspecl_then [`a`, `b`] mp_tac FOO >> simp[ADD_COMM, SF ss]"),
            (Tokens{"qspecl_then", "simp"}));
  EXPECT_EQ(flatten_tactic_expr("metis_tac[arithmeticTheory.ADD_SYM] >> Q.EXISTS_TAC `x`"),
            (Tokens{"metis_tac", "EXISTS_TAC"}));
  EXPECT_EQ(flatten_tactic_expr("first_x_assum (qspec_then `n` mp_tac)"),
            (Tokens{"first_x_assum"}));
}

TEST(Flatten, BarBrancherWithNestedLists) {
  EXPECT_EQ(flatten_tactic_expr("Induct >| [rw[], Cases_on `a` THENL [b, c]] >> d"),
            (Tokens{"Induct", "rw", "Cases_on", "b", "c", "d"}));
}

TEST(Flatten, SufficesBy) {
  EXPECT_EQ(flatten_tactic_expr("`Q` suffices_by (rw[] >> fs[])"),
            (Tokens{"suffices_by", "rw", "fs"}));
}

TEST(Flatten, ByBindsTighterThanSequencers) {
  EXPECT_EQ(flatten_tactic_expr("a >> `x` by b >> c"),
            (Tokens{"a", "by", "b", "c"}));
}

TEST(Flatten, CommentsAndQuotationsAreOpaque) {
  EXPECT_EQ(flatten_tactic_expr("rw[] (* THEN x >> y *) >> qexists_tac `a >> b THEN c`"),
            (Tokens{"rw", "qexists_tac"}));
}

TEST(Flatten, Errors) {
  auto code_of = [](std::string_view text) {
    try {
      flatten_tactic_expr(text);
    } catch (const Error& e) {
      return e.code();
    }
    return std::string("none");
  };
  EXPECT_EQ(code_of(""), "empty-tactic");
  EXPECT_EQ(code_of("  (* only a comment *) "), "empty-tactic");
  EXPECT_EQ(code_of("rw[ >> fs[]"), "tactic-parse-failure");
  EXPECT_EQ(code_of("(rw[] >> fs[]"), "tactic-parse-failure");
  EXPECT_EQ(code_of("rw[] >>"), "tactic-parse-failure");
  EXPECT_EQ(code_of(">> rw[]"), "tactic-parse-failure");
  EXPECT_EQ(code_of("[a, b]"), "tactic-parse-failure");
  EXPECT_EQ(code_of("`term`"), "tactic-parse-failure");
  EXPECT_EQ(code_of("a) b"), "tactic-parse-failure");
  EXPECT_EQ(code_of("a `x"), "tactic-parse-failure");
}

TEST(Flatten, EveryTokenIsAnIdentifier) {
  const auto toks = flatten_tactic_expr(
      "rpt gen_tac >> (Cases_on `x` THENL [fs[], `y` by metis_tac[]]) \\\\ "
      "Q.SUBGOAL_THEN `z` ASSUME_TAC >- EVAL_TAC");
  for (const auto& t : toks) EXPECT_TRUE(is_tactic_token(t)) << t;
}

// --- extract_proofs ----------------------------------------------------------

TEST(Extract, TheoremProofQed) {
  const auto r = extract_proofs(
      "Theorem foo:\n !n. n + 0 = n\nProof\n Induct_on `n` >> rw[] >> fs[ADD_CLAUSES]\nQED",
      "fooScript.sml");
  ASSERT_EQ(r.proofs.size(), 1u);
  EXPECT_TRUE(r.skips.empty());
  const ProofRecord& p = r.proofs[0];
  EXPECT_EQ(p.theorem_name, "foo");
  EXPECT_EQ(p.decl_form, DeclForm::kTheoremProofQED);
  EXPECT_EQ(p.tactics, (Tokens{"Induct_on", "rw", "fs"}));
  EXPECT_EQ(p.theory, "foo");
  EXPECT_EQ(p.line_span.start, 1);
  EXPECT_EQ(p.line_span.end, 5);
}

TEST(Extract, StoreThm) {
  const auto r = extract_proofs(
      "val bar = store_thm(\"bar\", ``tm``, rpt strip_tac THEN metis_tac [FOO])",
      "x.sml");
  ASSERT_EQ(r.proofs.size(), 1u);
  EXPECT_EQ(r.proofs[0].theorem_name, "bar");
  EXPECT_EQ(r.proofs[0].decl_form, DeclForm::kStoreThm);
  EXPECT_EQ(r.proofs[0].tactics, (Tokens{"strip_tac", "metis_tac"}));
}

TEST(Extract, NoProofBody) {
  const auto r = extract_proofs("Theorem q = SPEC_ALL other", "a/qScript.sml");
  EXPECT_TRUE(r.proofs.empty());
  ASSERT_EQ(r.skips.size(), 1u);
  EXPECT_EQ(r.skips[0], (SkipRecord{"a/qScript.sml", 1, "no-proof-body"}));
}

TEST(Extract, ProveUsesBoundName) {
  const auto r = extract_proofs("val lem = prove(``x``, simp[])\nval _ = f (prove(``y``, rw[]))",
                                "p.sml");
  ASSERT_EQ(r.proofs.size(), 1u);
  EXPECT_EQ(r.proofs[0].theorem_name, "lem");
  EXPECT_EQ(r.proofs[0].decl_form, DeclForm::kProve);
  ASSERT_EQ(r.skips.size(), 1u);
  EXPECT_EQ(r.skips[0].reason, "anonymous-prove");
  EXPECT_EQ(r.skips[0].line, 2);
}

TEST(Extract, InvalidUtf8FailsTheFile) {
  const auto r = extract_proofs("Theorem a:\nT\nProof\nrw[]\nQED\n\xFF", "bad.sml");
  EXPECT_TRUE(r.proofs.empty());
  ASSERT_EQ(r.skips.size(), 1u);
  EXPECT_EQ(r.skips[0].reason, "io-error");
  EXPECT_EQ(r.skips[0].line, 6);
}

TEST(TheoryName, StripsScriptSuffix) {
  EXPECT_EQ(theory_of("dir/listScript.sml"), "list");
  EXPECT_EQ(theory_of("Script.sml"), "Script");
  EXPECT_EQ(theory_of("helpers.sml"), "helpers");
}

// --- fixture corpus --------------------------------------------------------

std::vector<fs::path> fixture_scripts() {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(kFixtures / "scripts")) {
    out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

TEST(Fixtures, CorpusIsLargeEnough) { EXPECT_GE(fixture_scripts().size(), 20u); }

TEST(Fixtures, EachFileMatchesExpectation) {
  for (const fs::path& script : fixture_scripts()) {
    SCOPED_TRACE(script.filename().string());
    const std::string name = script.filename().string();
    const auto r = extract_proofs(slurp(script), name);
    const fs::path stem = kFixtures / "expected" / script.stem();
    EXPECT_EQ(records_text(r), slurp(stem.string() + ".jsonl"));
    EXPECT_EQ(skips_text(r.skips), slurp(stem.string() + ".skips"));
  }
}

TEST(Fixtures, CoverAllDeclarationForms) {
  std::set<DeclForm> forms;
  for (const fs::path& script : fixture_scripts()) {
    for (const auto& p : extract_proofs(slurp(script), "f").proofs) forms.insert(p.decl_form);
  }
  EXPECT_EQ(forms.size(), 4u);
}

TEST(Fixtures, ScanIsDeterministicAcrossThreadCounts) {
  const ScanResult one = scan_corpus(kFixtures / "scripts", "*Script.sml", 1);
  const ScanResult four = scan_corpus(kFixtures / "scripts", "*Script.sml", 4);
  EXPECT_EQ(one.proofs, four.proofs);
  EXPECT_EQ(one.report.skip_reasons, four.report.skip_reasons);
  EXPECT_EQ(one.report.files_scanned, fixture_scripts().size());

  std::string expected;
  std::string expected_skips;
  for (const fs::path& script : fixture_scripts()) {
    const fs::path stem = kFixtures / "expected" / script.stem();
    expected += slurp(stem.string() + ".jsonl");
    expected_skips += slurp(stem.string() + ".skips");
  }
  std::string got;
  for (const auto& p : one.proofs) got += proof_record_line(p) + "\n";
  EXPECT_EQ(got, expected);
  EXPECT_EQ(skips_text(one.report.skip_reasons), expected_skips);
  EXPECT_EQ(one.report.proofs_extracted, one.proofs.size());
  EXPECT_EQ(one.report.proofs_skipped, one.report.skip_reasons.size());
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("tacrec-scan-" + std::to_string(SplitMix64(
                                  reinterpret_cast<std::uintptr_t>(this)).next()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write(const fs::path& p, std::string_view text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

TEST(Scan, CountsAcrossFiles) {
  TempDir dir;
  std::string five;
  for (int i = 0; i < 5; ++i) {
    five += "Theorem t" + std::to_string(i) + ":\n  T\nProof\n  rw[]\nQED\n\n";
  }
  write(dir.path() / "aScript.sml", five);
  write(dir.path() / "bScript.sml", "val _ = new_theory \"b\";\n");
  write(dir.path() / "sub" / "cScript.sml",
        "val x = prove(``T``, simp[]);\nval y = store_thm(\"y\", ``T``, fs[]);\n");
  write(dir.path() / "ignored.sml", "Theorem z:\n T\nProof\n rw[]\nQED\n");
  const ScanResult r = scan_corpus(dir.path());
  EXPECT_EQ(r.proofs.size(), 7u);
  EXPECT_EQ(r.report.files_scanned, 3u);
  EXPECT_EQ(r.proofs.back().source_path, "sub/cScript.sml");
  EXPECT_EQ(r.proofs.back().theory, "c");
}

TEST(Scan, EmptyDirectoryAndMissingRoot) {
  TempDir dir;
  const ScanResult r = scan_corpus(dir.path());
  EXPECT_TRUE(r.proofs.empty());
  EXPECT_EQ(r.report.files_scanned, 0u);
  try {
    scan_corpus(dir.path() / "missing");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "no-such-directory");
  }
}

TEST(Scan, UnterminatedThenGood) {
  TempDir dir;
  write(dir.path() / "mScript.sml",
        "Theorem good:\n  T\nProof\n  rw[]\nQED\n\n"
        "Theorem bad:\n  T\nProof\n  fs[] >> qexists_tac `oops\nQED\n");
  const ScanResult r = scan_corpus(dir.path());
  ASSERT_EQ(r.proofs.size(), 1u);
  EXPECT_EQ(r.proofs[0].theorem_name, "good");
  ASSERT_EQ(r.report.skip_reasons.size(), 1u);
  EXPECT_EQ(r.report.skip_reasons[0], (SkipRecord{"mScript.sml", 7, "unterminated-span"}));
}

// --- properties --------------------------------------------------------------

// Text inserted into any comment, string or quotation never changes the
// extracted tokens.
TEST(Properties, Opaqueness) {
  const std::string insertions[] = {"Proof", "THEN", "QED", "Theorem x: T Proof rw[] QED",
                                    "\nTheorem y:\n T\nProof\n fs[]\nQED\n",
                                    ">> fs[] >>", "store_thm(q, T, rw[])", "(* *)"};
  std::size_t mutations = 0;
  for (const fs::path& script : fixture_scripts()) {
    const std::string text = slurp(script);
    if (!is_valid_utf8(text)) continue;
    const auto baseline = extract_proofs(text, "f");
    std::vector<std::size_t> sites;  // byte offsets just inside an opener
    for (const Lexeme& lx : lex_script(text)) {
      if (lx.kind == LexKind::kQuotation) {
        sites.push_back(lx.offset + (lx.text.starts_with("``") ? 2
                                     : lx.text.starts_with("`") ? 1
                                                                : 3));
      } else if (lx.kind == LexKind::kString) {
        sites.push_back(lx.offset + 1);
      }
    }
    // Terminated comments: every "(*" that lexes away entirely.
    for (std::size_t at = text.find("(*"); at != std::string::npos;
         at = text.find("(*", at + 2)) {
      bool inside_lexeme = false;
      for (const Lexeme& lx : lex_script(text)) {
        if (at >= lx.offset && at < lx.offset + lx.text.size()) inside_lexeme = true;
      }
      if (!inside_lexeme) sites.push_back(at + 2);
    }
    for (std::size_t site : sites) {
      for (const std::string& ins : insertions) {
        std::string mutated = text;
        mutated.insert(site, ins);
        const auto got = extract_proofs(mutated, "f");
        ++mutations;
        ASSERT_EQ(got.proofs.size(), baseline.proofs.size()) << script << " + " << ins;
        for (std::size_t i = 0; i < got.proofs.size(); ++i) {
          EXPECT_EQ(got.proofs[i].tactics, baseline.proofs[i].tactics)
              << script << " + " << ins;
        }
        ASSERT_EQ(got.skips.size(), baseline.skips.size()) << script << " + " << ins;
        for (std::size_t i = 0; i < got.skips.size(); ++i) {
          EXPECT_EQ(got.skips[i].reason, baseline.skips[i].reason);
        }
      }
    }
  }
  EXPECT_GT(mutations, 100u);
}

// Random byte strings built from script-like fragments: extraction always
// terminates, every record is well formed, and every recognised declaration
// is either extracted or reported.
TEST(Properties, ErrorContainment) {
  const std::string fragments[] = {
      "Theorem ", "Triviality ", "Proof", "QED", "\n", " ", "name", ":", "=", "[",
      "]", "(", ")", ",", "(*", "*)", "`", "``", "\"", "\xE2\x80\x9C", "\xE2\x80\x9D",
      "\xE2\x80\x98", "\xE2\x80\x99", ">>", "THEN", "THENL", "ORELSE", "by", "rw",
      "store_thm", "prove", "val ", "x", "\\\\", ">|", "rpt", "\xFF", "Proof[", "T"};
  SplitMix64 rng(20240229);
  for (int trial = 0; trial < 3000; ++trial) {
    std::string text;
    const std::size_t pieces = 1 + rng.below(60);
    for (std::size_t i = 0; i < pieces; ++i) {
      if (rng.below(10) == 0) {
        text += static_cast<char>(rng.below(256));
      } else {
        text += fragments[rng.below(std::size(fragments))];
      }
    }
    const ExtractResult r = extract_proofs(text, "fuzz.sml");
    for (const ProofRecord& p : r.proofs) {
      EXPECT_FALSE(p.tactics.empty());
      EXPECT_LE(p.line_span.start, p.line_span.end);
      for (const auto& t : p.tactics) EXPECT_TRUE(is_tactic_token(t)) << t;
    }
    if (!is_valid_utf8(text)) {
      EXPECT_TRUE(r.proofs.empty());
      EXPECT_EQ(r.skips.size(), 1u);
      continue;
    }
    // Every first-on-line Theorem/Triviality keyword yields a record or skip.
    std::size_t decls = 0;
    for (const Lexeme& lx : lex_script(text)) {
      if (lx.kind == LexKind::kIdent && lx.first_on_line &&
          (lx.text == "Theorem" || lx.text == "Triviality")) {
        ++decls;
      }
    }
    std::size_t block_outcomes = 0;
    for (const ProofRecord& p : r.proofs) {
      if (p.decl_form == DeclForm::kTheoremProofQED || p.decl_form == DeclForm::kTriviality) {
        ++block_outcomes;
      }
    }
    EXPECT_LE(block_outcomes, decls);
    // A declaration keyword is never silently dropped.
    if (decls > 0) EXPECT_GE(r.proofs.size() + r.skips.size(), 1u);
  }
}

}  // namespace
}  // namespace tacrec
