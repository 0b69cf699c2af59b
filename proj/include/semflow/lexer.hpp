#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace semflow {

enum class TokenKind {
  Identifier,
  Keyword,
  Number,
  String,
  Operator,
  Punct,
  Indent,
  Newline,
  Comment,
  Other,
};

struct Token {
  TokenKind kind = TokenKind::Other;
  std::string text;
  int line = 0;  // 0-based physical line of the first character
  int col = 0;   // display column (tabs expand to multiples of 8)
  std::size_t begin = 0;  // byte range into the source
  std::size_t end = 0;
  bool terminated = true;  // false for a string that ran off its line/file

  bool operator==(const Token&) const = default;
};

bool is_keyword(std::string_view word);
bool is_builtin(std::string_view word);

// Error-tolerant Python-style lexer. Never throws: unknown bytes become Other.
// Emits Comment tokens and one Newline token per physical line end outside
// triple-quoted strings. Backslash continuations produce no Newline. No Indent
// tokens are emitted; indentation is read from Token::col.
std::vector<Token> lex(std::string_view source);

// One logical statement spanning one or more physical lines.
struct LogicalLine {
  std::vector<Token> tokens;  // no Comment or Newline tokens
  int start_line = 0;
  int end_line = 0;
  int indent_col = 0;
  bool brackets_balanced = true;
  bool strings_terminated = true;
};

// Groups tokens into logical lines, joining bracketed spans and explicit
// continuations. An unclosed bracket is closed early when the next physical
// line starts with a statement keyword, so one typo cannot swallow the file.
std::vector<LogicalLine> logical_lines(const std::vector<Token>& tokens);

// Canonical single-spaced rendering of a token run.
std::string render_tokens(const std::vector<Token>& tokens);

}  // namespace semflow
