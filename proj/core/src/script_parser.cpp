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

#include "tacrec/script_parser.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iterator>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include "tacrec/error.hpp"
#include "tacrec/lexer.hpp"

namespace tacrec {
namespace {

// ---------------------------------------------------------------------------
// Tactic expressions.
//
// Precedence (all left associative), loosest first:
//   0  THEN THENL THEN1 ORELSE
//   1  >> \\ >- >|
//   8  by suffices_by
// Application (head identifier followed by its arguments) binds tightest.

enum class InfixOp { kSeq, kBranch, kOrElse, kBy, kSufficesBy };

struct InfixInfo {
  InfixOp op;
  int precedence;
};

std::optional<InfixInfo> infix_of(const Lexeme& lx) {
  if (lx.kind == LexKind::kIdent) {
    const std::string_view t = lx.text;
    if (t == "THEN" || t == "THEN1") return InfixInfo{InfixOp::kSeq, 0};
    if (t == "THENL") return InfixInfo{InfixOp::kBranch, 0};
    if (t == "ORELSE") return InfixInfo{InfixOp::kOrElse, 0};
    if (t == "by") return InfixInfo{InfixOp::kBy, 8};
    if (t == "suffices_by") return InfixInfo{InfixOp::kSufficesBy, 8};
  } else if (lx.kind == LexKind::kSymbol) {
    const std::string_view t = lx.text;
    if (t == ">>" || t == "\\\\" || t == ">-") {
      return InfixInfo{InfixOp::kSeq, 1};
    }
    if (t == ">|") return InfixInfo{InfixOp::kBranch, 1};
  }
  return std::nullopt;
}

bool is_wrapper(std::string_view ident) {
  return ident == "rpt" || ident == "TRY" || ident == "REPEAT" ||
         ident == "REVERSE";
}

bool is_punct(const Lexeme& lx, char c) {
  return lx.kind == LexKind::kPunct && lx.text.size() == 1 && lx.text[0] == c;
}

[[noreturn]] void parse_failure(const std::string& detail) {
  throw Error(std::string(skip_reason::kTacticParseFailure), detail);
}

struct Node {
  enum class Kind { kTactic, kTerm, kList };
  Kind kind = Kind::kTactic;
  std::vector<std::string> tokens;  // kTactic
  std::vector<Node> items;          // kList
};

class TacticParser {
 public:
  explicit TacticParser(std::vector<Lexeme> lexemes)
      : lx_(std::move(lexemes)) {}

  std::vector<std::string> run() {
    if (lx_.empty()) throw Error("empty-tactic");
    Node root = expression(0);
    if (pos_ != lx_.size()) {
      parse_failure("unexpected '" + std::string(lx_[pos_].text) + "'");
    }
    return as_tactic(std::move(root));
  }

 private:
  bool done() const { return pos_ >= lx_.size(); }
  const Lexeme& peek() const { return lx_[pos_]; }

  static std::vector<std::string> as_tactic(Node node) {
    if (node.kind != Node::Kind::kTactic) {
      parse_failure("term or list used where a tactic was expected");
    }
    return std::move(node.tokens);
  }

  Node expression(int min_precedence) {
    Node lhs = operand();
    while (!done()) {
      const auto info = infix_of(peek());
      if (!info || info->precedence < min_precedence) break;
      ++pos_;
      if (done()) parse_failure("missing right operand");
      Node rhs = expression(info->precedence + 1);
      lhs = combine(info->op, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  static Node combine(InfixOp op, Node lhs, Node rhs) {
    Node out;
    switch (op) {
      case InfixOp::kSeq: {
        out.tokens = as_tactic(std::move(lhs));
        auto right = as_tactic(std::move(rhs));
        out.tokens.insert(out.tokens.end(), right.begin(), right.end());
        break;
      }
      case InfixOp::kBranch: {
        out.tokens = as_tactic(std::move(lhs));
        if (rhs.kind == Node::Kind::kList) {
          for (Node& branch : rhs.items) {
            auto toks = as_tactic(std::move(branch));
            out.tokens.insert(out.tokens.end(), toks.begin(), toks.end());
          }
        } else {
          auto right = as_tactic(std::move(rhs));
          out.tokens.insert(out.tokens.end(), right.begin(), right.end());
        }
        break;
      }
      case InfixOp::kOrElse:
        as_tactic(std::move(rhs));
        out.tokens = as_tactic(std::move(lhs));
        break;
      case InfixOp::kBy:
      case InfixOp::kSufficesBy: {
        out.tokens.emplace_back(op == InfixOp::kBy ? "by" : "suffices_by");
        auto right = as_tactic(std::move(rhs));
        out.tokens.insert(out.tokens.end(), right.begin(), right.end());
        break;
      }
    }
    return out;
  }

  // Skips a balanced bracket group starting at an opener.
  void skip_group() {
    std::vector<char> stack;
    do {
      if (done()) parse_failure("unbalanced brackets");
      const Lexeme& lx = peek();
      if (lx.kind == LexKind::kPunct) {
        const char c = lx.text[0];
        if (c == '(' || c == '[' || c == '{') {
          stack.push_back(c == '(' ? ')' : c == '[' ? ']' : '}');
        } else if (c == ')' || c == ']' || c == '}') {
          if (stack.empty() || stack.back() != c) {
            parse_failure("mismatched bracket");
          }
          stack.pop_back();
        }
      } else if (lx.kind == LexKind::kUnterminated) {
        parse_failure("unterminated span");
      }
      ++pos_;
    } while (!stack.empty());
  }

  // True if the current lexeme can continue an application's argument list.
  bool at_argument() const {
    if (done()) return false;
    const Lexeme& lx = peek();
    if (infix_of(lx)) return false;
    switch (lx.kind) {
      case LexKind::kPunct: {
        const char c = lx.text[0];
        return c == '(' || c == '[' || c == '{' || c == '.';
      }
      case LexKind::kUnterminated:
        return false;
      default:
        return true;
    }
  }

  void skip_arguments() {
    while (at_argument()) {
      const Lexeme& lx = peek();
      if (lx.kind == LexKind::kPunct && lx.text[0] != '.') {
        skip_group();
      } else {
        ++pos_;
      }
    }
  }

  Node operand() {
    if (done()) parse_failure("missing operand");
    const Lexeme& lx = peek();
    switch (lx.kind) {
      case LexKind::kIdent: {
        if (infix_of(lx)) parse_failure("missing left operand");
        const std::string_view head = unqualified(lx.text);
        ++pos_;
        if (is_wrapper(head)) {
          Node inner = operand();
          if (inner.kind != Node::Kind::kTactic) {
            parse_failure("wrapper applied to a non-tactic");
          }
          return inner;
        }
        skip_arguments();
        Node out;
        out.tokens.emplace_back(head);
        return out;
      }
      case LexKind::kQuotation:
      case LexKind::kString: {
        ++pos_;
        skip_arguments();
        Node out;
        out.kind = Node::Kind::kTerm;
        return out;
      }
      case LexKind::kPunct: {
        if (is_punct(lx, '(')) {
          ++pos_;
          Node inner = expression(0);
          if (done() || !is_punct(peek(), ')')) {
            parse_failure("unbalanced brackets");
          }
          ++pos_;
          skip_arguments();
          return inner;
        }
        if (is_punct(lx, '[')) {
          ++pos_;
          Node list;
          list.kind = Node::Kind::kList;
          if (!done() && is_punct(peek(), ']')) {
            ++pos_;
            return list;
          }
          while (true) {
            list.items.push_back(expression(0));
            if (done()) parse_failure("unbalanced brackets");
            if (is_punct(peek(), ',')) {
              ++pos_;
              continue;
            }
            if (is_punct(peek(), ']')) {
              ++pos_;
              break;
            }
            parse_failure("expected ',' or ']' in tactic list");
          }
          return list;
        }
        break;
      }
      default:
        break;
    }
    parse_failure("unexpected '" + std::string(lx.text) + "'");
  }

  std::vector<Lexeme> lx_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Declarations.

bool is_ident(const Lexeme& lx, std::string_view text) {
  return lx.kind == LexKind::kIdent && lx.text == text;
}

bool is_block_start(const Lexeme& lx) {
  if (lx.kind != LexKind::kIdent || !lx.first_on_line) return false;
  const std::string_view t = lx.text;
  return t == "Theorem" || t == "Triviality" || t == "Definition" ||
         t == "Datatype" || t == "Inductive" || t == "CoInductive";
}

std::string unescape_sml_string(std::string_view lit) {
  std::string out;
  if (lit.size() < 2) return out;
  lit = lit.substr(1, lit.size() - 2);
  for (std::size_t i = 0; i < lit.size(); ++i) {
    if (lit[i] == '\\' && i + 1 < lit.size()) {
      const char e = lit[++i];
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        default: out += e; break;
      }
    } else {
      out += lit[i];
    }
  }
  return out;
}

class DeclarationScanner {
 public:
  DeclarationScanner(std::string_view text, std::string_view path)
      : text_(text), path_(path), theory_(theory_of(path)),
        lx_(lex_script(text)) {}

  ExtractResult run() {
    std::size_t i = 0;
    while (i < lx_.size()) {
      const Lexeme& lx = lx_[i];
      if (lx.kind == LexKind::kIdent && lx.first_on_line &&
          (lx.text == "Theorem" || lx.text == "Triviality")) {
        i = theorem_block(i);
      } else if (lx.kind == LexKind::kIdent && i + 1 < lx_.size() &&
                 is_punct(lx_[i + 1], '(') &&
                 (unqualified(lx.text) == "store_thm" ||
                  unqualified(lx.text) == "prove")) {
        i = call_form(i);
      } else {
        ++i;
      }
    }
    return std::move(result_);
  }

 private:
  void skip(int line, std::string_view reason) {
    result_.skips.push_back(SkipRecord{path_, line, std::string(reason)});
  }

  bool has_unterminated(std::size_t from, std::size_t to) const {
    for (std::size_t k = from; k < to && k < lx_.size(); ++k) {
      if (lx_[k].kind == LexKind::kUnterminated) return true;
    }
    return false;
  }

  // Text from lexeme `from` up to (excluding) lexeme `to`.
  std::string_view slice(std::size_t from, std::size_t to) const {
    if (from >= to) return {};
    const std::size_t begin = lx_[from].offset;
    const std::size_t end = to < lx_.size() ? lx_[to].offset : text_.size();
    return text_.substr(begin, end - begin);
  }

  // Index one past the bracket group opened at `open`, or npos.
  std::size_t group_end(std::size_t open) const {
    int depth = 0;
    for (std::size_t k = open; k < lx_.size(); ++k) {
      if (lx_[k].kind != LexKind::kPunct) continue;
      const char c = lx_[k].text[0];
      if (c == '(' || c == '[' || c == '{') ++depth;
      if (c == ')' || c == ']' || c == '}') {
        if (--depth == 0) return k + 1;
      }
    }
    return std::string_view::npos;
  }

  void record(std::string name, DeclForm form, std::string_view tactic_text,
              int line_start, int line_end) {
    std::vector<std::string> tactics;
    try {
      tactics = flatten_tactic_expr(tactic_text);
    } catch (const Error& e) {
      skip(line_start, e.code() == "empty-tactic"
                           ? skip_reason::kNoProofBody
                           : skip_reason::kTacticParseFailure);
      return;
    }
    if (!names_.insert(name).second) {
      skip(line_start, skip_reason::kDuplicateName);
      return;
    }
    result_.proofs.push_back(ProofRecord{theory_, std::move(name), form,
                                         std::move(tactics), path_,
                                         LineSpan{line_start, line_end}});
  }

  std::size_t theorem_block(std::size_t start) {
    const int line = lx_[start].line;
    const DeclForm form = lx_[start].text == "Theorem"
                              ? DeclForm::kTheoremProofQED
                              : DeclForm::kTriviality;
    std::size_t k = start + 1;
    if (k >= lx_.size() || lx_[k].kind != LexKind::kIdent) {
      skip(line, has_unterminated(start, k + 1)
                     ? skip_reason::kUnterminatedSpan
                     : skip_reason::kMalformedDeclaration);
      return k;
    }
    std::string name(lx_[k].text);
    ++k;
    if (k < lx_.size() && is_punct(lx_[k], '[')) {
      const std::size_t end = group_end(k);
      if (end == std::string_view::npos) {
        skip(line, skip_reason::kMalformedDeclaration);
        return k;
      }
      k = end;
    }
    if (k >= lx_.size() || lx_[k].kind != LexKind::kSymbol) {
      skip(line, skip_reason::kMalformedDeclaration);
      return k;
    }
    if (lx_[k].text.front() == '=') {
      skip(line, skip_reason::kNoProofBody);
      return k + 1;
    }
    if (lx_[k].text.front() != ':') {
      skip(line, skip_reason::kMalformedDeclaration);
      return k;
    }
    // Statement runs up to `Proof`.
    std::size_t proof = k + 1;
    while (proof < lx_.size() && !is_ident(lx_[proof], "Proof")) {
      const Lexeme& lx = lx_[proof];
      if (is_ident(lx, "QED") || is_block_start(lx) ||
          (lx.first_on_line && is_ident(lx, "val"))) {
        break;
      }
      ++proof;
    }
    if (proof >= lx_.size() || !is_ident(lx_[proof], "Proof")) {
      skip(line, has_unterminated(start, proof)
                     ? skip_reason::kUnterminatedSpan
                     : skip_reason::kNoProofBody);
      return proof;
    }
    std::size_t body = proof + 1;
    if (body < lx_.size() && is_punct(lx_[body], '[') &&
        lx_[body].offset == lx_[proof].offset + lx_[proof].text.size()) {
      const std::size_t end = group_end(body);
      if (end == std::string_view::npos) {
        skip(line, has_unterminated(start, lx_.size())
                       ? skip_reason::kUnterminatedSpan
                       : skip_reason::kMalformedDeclaration);
        return body;
      }
      body = end;
    }
    std::size_t qed = body;
    while (qed < lx_.size() && !is_ident(lx_[qed], "QED") &&
           !is_block_start(lx_[qed])) {
      ++qed;
    }
    if (qed >= lx_.size() || !is_ident(lx_[qed], "QED")) {
      skip(line, has_unterminated(start, qed)
                     ? skip_reason::kUnterminatedSpan
                     : skip_reason::kTacticParseFailure);
      return qed;
    }
    if (has_unterminated(start, qed)) {
      skip(line, skip_reason::kUnterminatedSpan);
      return qed + 1;
    }
    record(std::move(name), form, slice(body, qed), line, lx_[qed].line);
    return qed + 1;
  }

  // store_thm ("name", term, tactic) and val x = prove (term, tactic).
  std::size_t call_form(std::size_t call) {
    const bool is_store = unqualified(lx_[call].text) == "store_thm";
    std::size_t start = call;
    std::string bound;
    if (call >= 3 && lx_[call - 1].kind == LexKind::kSymbol &&
        lx_[call - 1].text == "=" && lx_[call - 2].kind == LexKind::kIdent &&
        is_ident(lx_[call - 3], "val")) {
      start = call - 3;
      bound = std::string(lx_[call - 2].text);
    }
    const int line = lx_[start].line;
    const std::size_t open = call + 1;

    // Top-level argument boundaries.
    std::vector<std::size_t> commas;
    std::size_t close = std::string_view::npos;
    int depth = 0;
    for (std::size_t k = open; k < lx_.size(); ++k) {
      const Lexeme& lx = lx_[k];
      if (lx.kind != LexKind::kPunct) continue;
      const char c = lx.text[0];
      if (c == '(' || c == '[' || c == '{') {
        ++depth;
      } else if (c == ')' || c == ']' || c == '}') {
        if (--depth == 0) {
          close = k;
          break;
        }
      } else if (c == ',' && depth == 1) {
        commas.push_back(k);
      }
    }
    if (close == std::string_view::npos) {
      skip(line, has_unterminated(open, lx_.size())
                     ? skip_reason::kUnterminatedSpan
                     : skip_reason::kTacticParseFailure);
      return open + 1;
    }
    if (has_unterminated(open, close)) {
      skip(line, skip_reason::kUnterminatedSpan);
      return close + 1;
    }
    const std::size_t want = is_store ? 2 : 1;
    if (commas.size() != want) {
      skip(line, skip_reason::kMalformedDeclaration);
      return close + 1;
    }
    std::string name;
    DeclForm form;
    if (is_store) {
      form = DeclForm::kStoreThm;
      if (commas[0] != open + 2 || lx_[open + 1].kind != LexKind::kString) {
        skip(line, skip_reason::kMalformedDeclaration);
        return close + 1;
      }
      name = unescape_sml_string(lx_[open + 1].text);
    } else {
      form = DeclForm::kProve;
      if (bound.empty()) {
        skip(line, skip_reason::kAnonymousProve);
        return close + 1;
      }
      name = bound;
    }
    record(std::move(name), form, slice(commas.back() + 1, close), line,
           lx_[close].line);
    return close + 1;
  }

  std::string_view text_;
  std::string path_;
  std::string theory_;
  std::vector<Lexeme> lx_;
  std::set<std::string> names_;
  ExtractResult result_;
};

int line_of_offset(std::string_view text, std::size_t offset) {
  return 1 + static_cast<int>(std::count(
                 text.begin(), text.begin() + static_cast<std::ptrdiff_t>(
                                                  std::min(offset, text.size())),
                 '\n'));
}

}  // namespace

std::string_view to_string(DeclForm form) {
  switch (form) {
    case DeclForm::kTheoremProofQED: return "TheoremProofQED";
    case DeclForm::kTriviality: return "Triviality";
    case DeclForm::kStoreThm: return "StoreThm";
    case DeclForm::kProve: return "Prove";
  }
  return "";
}

DeclForm decl_form_from_string(std::string_view name) {
  for (DeclForm f : {DeclForm::kTheoremProofQED, DeclForm::kTriviality,
                     DeclForm::kStoreThm, DeclForm::kProve}) {
    if (to_string(f) == name) return f;
  }
  throw Error("corrupt-proofs", "unknown decl_form '" + std::string(name) + "'");
}

std::string theory_of(std::string_view source_path) {
  std::string stem = std::filesystem::path(source_path).stem().string();
  constexpr std::string_view kSuffix = "Script";
  if (stem.size() > kSuffix.size() && stem.ends_with(kSuffix)) {
    stem.resize(stem.size() - kSuffix.size());
  }
  return stem;
}

std::vector<std::string> flatten_tactic_expr(std::string_view expr_text) {
  std::vector<Lexeme> lexemes = lex_script(expr_text);
  for (const Lexeme& lx : lexemes) {
    if (lx.kind == LexKind::kUnterminated) {
      throw Error(std::string(skip_reason::kTacticParseFailure),
                  "unterminated span in tactic");
    }
  }
  return TacticParser(std::move(lexemes)).run();
}

ExtractResult extract_proofs(std::string_view script_text,
                             std::string_view source_path) {
  std::size_t bad = 0;
  if (!is_valid_utf8(script_text, &bad)) {
    ExtractResult out;
    out.skips.push_back(SkipRecord{std::string(source_path),
                                   line_of_offset(script_text, bad),
                                   std::string(skip_reason::kIoError)});
    return out;
  }
  if (script_text.starts_with("\xEF\xBB\xBF")) {
    // A byte-order mark is not part of the script; keep offsets intact by
    // blanking it rather than slicing.
    std::string copy(script_text);
    copy.replace(0, 3, "   ");
    ExtractResult out = DeclarationScanner(copy, source_path).run();
    return out;
  }
  return DeclarationScanner(script_text, source_path).run();
}

ScanResult scan_corpus(const std::filesystem::path& root,
                       std::string_view pattern, unsigned threads) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw Error("no-such-directory", root.string());
  }
  const std::string glob(pattern);
  std::vector<std::string> files;
  for (auto it = fs::recursive_directory_iterator(
           root, fs::directory_options::skip_permission_denied, ec);
       !ec && it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (!it->is_regular_file(ec)) continue;
    const std::string name = it->path().filename().string();
    if (fnmatch(glob.c_str(), name.c_str(), 0) != 0) continue;
    files.push_back(fs::relative(it->path(), root).generic_string());
  }
  std::sort(files.begin(), files.end());

  std::vector<ExtractResult> per_file(files.size());
  auto work = [&](std::size_t idx) {
    std::ifstream in(root / files[idx], std::ios::binary);
    std::ostringstream buf;
    if (in) buf << in.rdbuf();
    if (!in || in.bad()) {
      per_file[idx].skips.push_back(
          SkipRecord{files[idx], 0, std::string(skip_reason::kIoError)});
      return;
    }
    per_file[idx] = extract_proofs(buf.str(), files[idx]);
  };
  const unsigned workers =
      std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(
                                                   std::max<std::size_t>(
                                                       files.size(), 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < files.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < files.size(); i = next++) work(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  ScanResult out;
  out.report.files_scanned = files.size();
  for (ExtractResult& r : per_file) {
    out.report.proofs_extracted += r.proofs.size();
    out.report.proofs_skipped += r.skips.size();
    std::move(r.proofs.begin(), r.proofs.end(),
              std::back_inserter(out.proofs));
    std::move(r.skips.begin(), r.skips.end(),
              std::back_inserter(out.report.skip_reasons));
  }
  return out;
}

}  // namespace tacrec
