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
#include <string_view>
#include <vector>

namespace tacrec {

// Lexical classes of HOL4 script text. Comments are dropped; strings and
// term quotations are single opaque lexemes so nothing inside them is ever
// seen by the declaration or tactic parsers.
enum class LexKind {
  kIdent,         // [A-Za-z_][A-Za-z0-9_']*, optionally qualified: Q.store_thm
  kSymbol,        // maximal run of SML symbolic characters: >> \\ >- := ...
  kPunct,         // ( ) [ ] { } , ; .
  kNumber,
  kString,        // "..."
  kQuotation,     // `...`  ``...``  “...”  ‘...’
  kUnterminated,  // an opener (comment, string or quotation) with no closer
  kOther,         // any other code point
};

struct Lexeme {
  LexKind kind;
  std::string_view text;  // view into the lexed buffer
  std::size_t offset;     // byte offset of text.front()
  int line;               // 1-based
  bool first_on_line;     // no other lexeme precedes it on its line
};

// Lexes the whole buffer. Never fails: an unterminated span yields a
// kUnterminated lexeme for its opener and lexing resumes right after it.
std::vector<Lexeme> lex_script(std::string_view text);

// Last component of a possibly qualified identifier: "bossLib.rw" -> "rw".
std::string_view unqualified(std::string_view ident);

// True when the buffer is well-formed UTF-8. On failure `bad_offset`
// receives the offset of the first offending byte.
bool is_valid_utf8(std::string_view text, std::size_t* bad_offset = nullptr);

}  // namespace tacrec
