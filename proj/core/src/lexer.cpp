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

#include "tacrec/lexer.hpp"

#include <cstdint>
#include <string_view>

namespace tacrec {
namespace {

constexpr std::string_view kLeftDouble = "\xE2\x80\x9C";   // “
constexpr std::string_view kRightDouble = "\xE2\x80\x9D";  // ”
constexpr std::string_view kLeftSingle = "\xE2\x80\x98";   // ‘
constexpr std::string_view kRightSingle = "\xE2\x80\x99";  // ’

bool is_ident_start(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}

bool is_ident_char(char c) {
  return is_ident_start(c) || (c >= '0' && c <= '9') || c == '\'';
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_symbolic(char c) {
  switch (c) {
    case '!': case '%': case '&': case '$': case '#': case '+': case '-':
    case '/': case ':': case '<': case '=': case '>': case '?': case '@':
    case '\\': case '~': case '^': case '|': case '*':
      return true;
    default:
      return false;
  }
}

bool is_punct(char c) {
  switch (c) {
    case '(': case ')': case '[': case ']': case '{': case '}':
    case ',': case ';': case '.':
      return true;
    default:
      return false;
  }
}

std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Lexeme> run() {
    while (pos_ < text_.size()) step();
    return std::move(out_);
  }

 private:
  bool at(std::string_view s, std::size_t p) const {
    return text_.substr(p, s.size()) == s;
  }

  // Moves the cursor to `to`, counting newlines on the way.
  void advance_to(std::size_t to) {
    for (; pos_ < to; ++pos_) {
      if (text_[pos_] == '\n') {
        ++line_;
        line_has_lexeme_ = false;
      }
    }
  }

  void emit(LexKind kind, std::size_t begin, std::size_t end, int line) {
    out_.push_back(Lexeme{kind, text_.substr(begin, end - begin), begin, line,
                          !line_has_lexeme_});
    line_has_lexeme_ = true;
  }

  // Finds the end of a nested comment opened at `begin`; npos if unclosed.
  std::size_t comment_end(std::size_t begin) const {
    int depth = 0;
    std::size_t p = begin;
    while (p + 1 < text_.size()) {
      if (text_[p] == '(' && text_[p + 1] == '*') {
        ++depth;
        p += 2;
      } else if (text_[p] == '*' && text_[p + 1] == ')') {
        --depth;
        p += 2;
        if (depth == 0) return p;
      } else {
        ++p;
      }
    }
    return std::string_view::npos;
  }

  std::size_t string_end(std::size_t begin) const {
    for (std::size_t p = begin + 1; p < text_.size(); ++p) {
      if (text_[p] == '\\') {
        ++p;
      } else if (text_[p] == '"') {
        return p + 1;
      }
    }
    return std::string_view::npos;
  }

  std::size_t closer_end(std::size_t from, std::string_view closer) const {
    const std::size_t hit = text_.find(closer, from);
    return hit == std::string_view::npos ? hit : hit + closer.size();
  }

  // Emits an opaque span [pos_, end) or, when unclosed, an unterminated
  // marker covering only the opener.
  void opaque(LexKind kind, std::size_t end, std::size_t opener_len) {
    const std::size_t begin = pos_;
    const int line = line_;
    if (end == std::string_view::npos) {
      emit(LexKind::kUnterminated, begin, begin + opener_len, line);
      advance_to(begin + opener_len);
      return;
    }
    if (kind != LexKind::kUnterminated) emit(kind, begin, end, line);
    advance_to(end);
  }

  void step() {
    const char c = text_[pos_];
    if (c == '\n' || c == ' ' || c == '\t' || c == '\r' || c == '\f' ||
        c == '\v') {
      advance_to(pos_ + 1);
      return;
    }
    if (c == '(' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '*') {
      const std::size_t end = comment_end(pos_);
      if (end == std::string_view::npos) {
        opaque(LexKind::kUnterminated, end, 2);
      } else {
        advance_to(end);  // comments produce no lexeme
      }
      return;
    }
    if (c == '"') {
      opaque(LexKind::kString, string_end(pos_), 1);
      return;
    }
    if (c == '`') {
      if (at("``", pos_)) {
        opaque(LexKind::kQuotation, closer_end(pos_ + 2, "``"), 2);
      } else {
        opaque(LexKind::kQuotation, closer_end(pos_ + 1, "`"), 1);
      }
      return;
    }
    if (at(kLeftDouble, pos_)) {
      opaque(LexKind::kQuotation,
             closer_end(pos_ + kLeftDouble.size(), kRightDouble),
             kLeftDouble.size());
      return;
    }
    if (at(kLeftSingle, pos_)) {
      opaque(LexKind::kQuotation,
             closer_end(pos_ + kLeftSingle.size(), kRightSingle),
             kLeftSingle.size());
      return;
    }
    const std::size_t begin = pos_;
    std::size_t p = pos_;
    LexKind kind;
    if (is_ident_start(c)) {
      kind = LexKind::kIdent;
      while (true) {
        while (p < text_.size() && is_ident_char(text_[p])) ++p;
        if (p + 1 < text_.size() && text_[p] == '.' &&
            is_ident_start(text_[p + 1])) {
          ++p;
          continue;
        }
        break;
      }
    } else if (is_digit(c)) {
      kind = LexKind::kNumber;
      while (p < text_.size() && is_ident_char(text_[p])) ++p;
    } else if (is_symbolic(c)) {
      kind = LexKind::kSymbol;
      while (p < text_.size() && is_symbolic(text_[p])) ++p;
    } else if (is_punct(c)) {
      kind = LexKind::kPunct;
      ++p;
    } else {
      kind = LexKind::kOther;
      p += utf8_length(static_cast<unsigned char>(c));
      if (p > text_.size()) p = text_.size();
    }
    emit(kind, begin, p, line_);
    advance_to(p);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  bool line_has_lexeme_ = false;
  std::vector<Lexeme> out_;
};

}  // namespace

std::vector<Lexeme> lex_script(std::string_view text) {
  return Lexer(text).run();
}

std::string_view unqualified(std::string_view ident) {
  const std::size_t dot = ident.rfind('.');
  return dot == std::string_view::npos ? ident : ident.substr(dot + 1);
}

bool is_valid_utf8(std::string_view text, std::size_t* bad_offset) {
  std::size_t i = 0;
  auto fail = [&](std::size_t at) {
    if (bad_offset) *bad_offset = at;
    return false;
  };
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t len;
    std::uint32_t cp;
    if (lead < 0x80) {
      ++i;
      continue;
    } else if ((lead >> 5) == 0x6) {
      len = 2;
      cp = lead & 0x1F;
    } else if ((lead >> 4) == 0xE) {
      len = 3;
      cp = lead & 0x0F;
    } else if ((lead >> 3) == 0x1E) {
      len = 4;
      cp = lead & 0x07;
    } else {
      return fail(i);
    }
    if (i + len > text.size()) return fail(i);
    for (std::size_t k = 1; k < len; ++k) {
      const auto cont = static_cast<unsigned char>(text[i + k]);
      if ((cont >> 6) != 0x2) return fail(i);
      cp = (cp << 6) | (cont & 0x3F);
    }
    const bool overlong = (len == 2 && cp < 0x80) ||
                          (len == 3 && cp < 0x800) ||
                          (len == 4 && cp < 0x10000);
    if (overlong || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      return fail(i);
    }
    i += len;
  }
  return true;
}

}  // namespace tacrec
