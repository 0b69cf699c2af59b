#include "semflow/lexer.hpp"

#include <algorithm>
#include <array>
#include <unordered_set>

namespace semflow {
namespace {

const std::unordered_set<std::string_view>& keywords() {
  static const std::unordered_set<std::string_view> kSet = {
      "False", "None",   "True",    "and",      "as",       "assert", "async",
      "await", "break",  "class",   "continue", "def",      "del",    "elif",
      "else",  "except", "finally", "for",      "from",     "global", "if",
      "import", "in",    "is",      "lambda",   "nonlocal", "not",    "or",
      "pass",  "raise",  "return",  "try",      "while",    "with",   "yield"};
  return kSet;
}

const std::unordered_set<std::string_view>& builtins() {
  static const std::unordered_set<std::string_view> kSet = {
      "abs", "all", "any", "ascii", "bin", "bool", "breakpoint", "bytearray", "bytes",
      "callable", "chr", "classmethod", "compile", "complex", "delattr", "dict", "dir",
      "divmod", "enumerate", "eval", "exec", "filter", "float", "format", "frozenset",
      "getattr", "globals", "hasattr", "hash", "help", "hex", "id", "input", "int",
      "isinstance", "issubclass", "iter", "len", "list", "locals", "map", "max",
      "memoryview", "min", "next", "object", "oct", "open", "ord", "pow", "print",
      "property", "range", "repr", "reversed", "round", "set", "setattr", "slice",
      "sorted", "staticmethod", "str", "sum", "super", "tuple", "type", "vars", "zip",
      "__import__", "__name__", "__main__", "__init__", "self",
      "Exception", "BaseException", "ArithmeticError", "AssertionError", "AttributeError",
      "EOFError", "ImportError", "IndexError", "KeyError", "KeyboardInterrupt",
      "LookupError", "MemoryError", "ModuleNotFoundError", "NameError",
      "NotImplementedError", "OSError", "OverflowError", "RecursionError",
      "RuntimeError", "StopIteration", "SyntaxError", "IndentationError", "TabError",
      "SystemExit", "TypeError", "UnboundLocalError", "UnicodeError", "ValueError",
      "ZeroDivisionError", "NotImplemented", "Ellipsis"};
  return kSet;
}

bool ident_start(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c >= 0x80;
}
bool ident_char(unsigned char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
bool digit(unsigned char c) { return c >= '0' && c <= '9'; }

constexpr std::array<std::string_view, 30> kOperators = {
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "**", "//", "==", "!=", "<=",
    ">=",  "<<",  ">>",  "+=",  "-=",  "*=", "/=", "%=", "&=", "|=", "^=", "@=",
    "+",   "-",   "*",   "/",   "%",   "@"};
constexpr std::string_view kSingleOps = "&|^~<>=!";
constexpr std::string_view kPunct = "()[]{},:;.";

bool is_string_prefix(std::string_view s) {
  if (s.size() > 2) return false;
  for (char c : s) {
    switch (c) {
      case 'r': case 'R': case 'b': case 'B': case 'u': case 'U': case 'f': case 'F':
        break;
      default:
        return false;
    }
  }
  return true;
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    while (pos_ < src_.size()) {
      unsigned char c = src_[pos_];
      if (c == '\n') {
        emit(TokenKind::Newline, pos_, pos_ + 1);
        advance_newline();
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r' || c == '\f') {
        col_ = (c == '\t') ? (col_ / 8 + 1) * 8 : col_ + 1;
        ++pos_;
        continue;
      }
      if (c == '#') {
        std::size_t e = src_.find('\n', pos_);
        if (e == std::string_view::npos) e = src_.size();
        emit(TokenKind::Comment, pos_, e);
        col_ += static_cast<int>(e - pos_);
        pos_ = e;
        continue;
      }
      if (c == '\\') {
        std::size_t n = pos_ + 1;
        if (n < src_.size() && src_[n] == '\r') ++n;
        if (n < src_.size() && src_[n] == '\n') {
          pos_ = n;
          advance_newline();
          continue;
        }
        emit(TokenKind::Other, pos_, pos_ + 1);
        step(1);
        continue;
      }
      if (c == '"' || c == '\'') {
        lex_string(pos_, pos_);
        continue;
      }
      if (ident_start(c)) {
        std::size_t e = pos_;
        while (e < src_.size() && ident_char(src_[e])) ++e;
        std::string_view word = src_.substr(pos_, e - pos_);
        if (e < src_.size() && (src_[e] == '"' || src_[e] == '\'') && is_string_prefix(word)) {
          lex_string(pos_, e);
          continue;
        }
        emit(is_keyword(word) ? TokenKind::Keyword : TokenKind::Identifier, pos_, e);
        step(e - pos_);
        continue;
      }
      if (digit(c) || (c == '.' && pos_ + 1 < src_.size() && digit(src_[pos_ + 1]))) {
        lex_number();
        continue;
      }
      if (kPunct.find(static_cast<char>(c)) != std::string_view::npos &&
          src_.substr(pos_, 3) != "...") {
        emit(TokenKind::Punct, pos_, pos_ + 1);
        step(1);
        continue;
      }
      std::size_t len = operator_length();
      if (len > 0) {
        emit(TokenKind::Operator, pos_, pos_ + len);
        step(len);
        continue;
      }
      // Multi-byte UTF-8 is handled by ident_start; anything else is unknown.
      emit(TokenKind::Other, pos_, pos_ + 1);
      step(1);
    }
    return std::move(out_);
  }

 private:
  void emit(TokenKind kind, std::size_t b, std::size_t e, bool terminated = true) {
    Token t;
    t.kind = kind;
    t.text = std::string(src_.substr(b, e - b));
    t.line = line_;
    t.col = col_;
    t.begin = b;
    t.end = e;
    t.terminated = terminated;
    out_.push_back(std::move(t));
  }

  void step(std::size_t n) {
    pos_ += n;
    col_ += static_cast<int>(n);
  }

  void advance_newline() {
    ++pos_;
    ++line_;
    col_ = 0;
  }

  std::size_t operator_length() const {
    for (std::string_view op : kOperators) {
      if (src_.substr(pos_, op.size()) == op) return op.size();
    }
    if (kSingleOps.find(src_[pos_]) != std::string_view::npos) return 1;
    return 0;
  }

  void lex_number() {
    std::size_t e = pos_;
    bool hex = src_.substr(pos_, 2) == "0x" || src_.substr(pos_, 2) == "0X";
    while (e < src_.size()) {
      char ch = src_[e];
      if (ident_char(static_cast<unsigned char>(ch)) || ch == '.') {
        ++e;
      } else if ((ch == '+' || ch == '-') && !hex && e > pos_ &&
                 (src_[e - 1] == 'e' || src_[e - 1] == 'E')) {
        ++e;
      } else {
        break;
      }
    }
    emit(TokenKind::Number, pos_, e);
    step(e - pos_);
  }

  // `begin` is the token start (prefix included); `quote_pos` the first quote.
  void lex_string(std::size_t begin, std::size_t quote_pos) {
    const char q = src_[quote_pos];
    const bool triple = src_.substr(quote_pos, 3) == std::string(3, q);
    const int start_line = line_;
    const int start_col = col_;
    std::size_t i = quote_pos + (triple ? 3 : 1);
    bool terminated = false;
    int lines_inside = 0;
    int last_nl = -1;
    while (i < src_.size()) {
      char ch = src_[i];
      if (ch == '\\' && i + 1 < src_.size()) {
        if (src_[i + 1] == '\n') {
          ++lines_inside;
          last_nl = static_cast<int>(i + 1);
        }
        i += 2;
        continue;
      }
      if (ch == '\n') {
        if (!triple) break;
        ++lines_inside;
        last_nl = static_cast<int>(i);
        ++i;
        continue;
      }
      if (ch == q) {
        if (!triple) {
          ++i;
          terminated = true;
          break;
        }
        if (src_.substr(i, 3) == std::string(3, q)) {
          i += 3;
          terminated = true;
          break;
        }
      }
      ++i;
    }
    Token t;
    t.kind = TokenKind::String;
    t.text = std::string(src_.substr(begin, i - begin));
    t.line = start_line;
    t.col = start_col;
    t.begin = begin;
    t.end = i;
    t.terminated = terminated;
    out_.push_back(std::move(t));
    pos_ = i;
    line_ += lines_inside;
    col_ = last_nl >= 0 ? static_cast<int>(i - static_cast<std::size_t>(last_nl) - 1)
                        : start_col + static_cast<int>(i - begin);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 0;
  int col_ = 0;
  std::vector<Token> out_;
};

bool is_opener(const Token& t) {
  return t.kind == TokenKind::Punct && (t.text == "(" || t.text == "[" || t.text == "{");
}
bool is_closer(const Token& t) {
  return t.kind == TokenKind::Punct && (t.text == ")" || t.text == "]" || t.text == "}");
}
char matching_opener(char closer) {
  return closer == ')' ? '(' : closer == ']' ? '[' : '{';
}

// Keywords that only ever start a statement, never continue an expression.
bool statement_only_keyword(const Token& t) {
  static const std::unordered_set<std::string_view> kSet = {
      "def", "class", "elif", "while", "return", "try", "except", "finally", "with",
      "import", "del", "pass", "break", "continue", "raise", "global", "assert", "nonlocal"};
  return t.kind == TokenKind::Keyword && kSet.contains(t.text);
}

int count_newlines(std::string_view s) {
  return static_cast<int>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

bool is_keyword(std::string_view word) { return keywords().contains(word); }
bool is_builtin(std::string_view word) { return builtins().contains(word); }

std::vector<Token> lex(std::string_view source) { return Lexer(source).run(); }

std::vector<LogicalLine> logical_lines(const std::vector<Token>& tokens) {
  std::vector<LogicalLine> out;
  LogicalLine cur;
  std::vector<char> stack;

  auto flush = [&] {
    if (!cur.tokens.empty()) {
      if (!stack.empty()) cur.brackets_balanced = false;
      out.push_back(std::move(cur));
    }
    cur = LogicalLine{};
    stack.clear();
  };

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& tok = tokens[i];
    if (tok.kind == TokenKind::Comment) continue;
    if (tok.kind == TokenKind::Newline) {
      if (cur.tokens.empty()) continue;
      if (stack.empty()) {
        flush();
        continue;
      }
      std::size_t j = i + 1;
      while (j < tokens.size() &&
             (tokens[j].kind == TokenKind::Comment || tokens[j].kind == TokenKind::Newline)) {
        ++j;
      }
      if (j < tokens.size() && statement_only_keyword(tokens[j])) flush();
      continue;
    }
    if (cur.tokens.empty()) {
      cur.start_line = tok.line;
      cur.end_line = tok.line;
      cur.indent_col = tok.col;
    }
    if (is_opener(tok)) {
      stack.push_back(tok.text[0]);
    } else if (is_closer(tok)) {
      if (stack.empty()) {
        cur.brackets_balanced = false;
      } else {
        if (stack.back() != matching_opener(tok.text[0])) cur.brackets_balanced = false;
        stack.pop_back();
      }
    }
    if (tok.kind == TokenKind::String && !tok.terminated) cur.strings_terminated = false;
    cur.end_line = std::max(cur.end_line, tok.line + count_newlines(tok.text));
    cur.tokens.push_back(tok);
  }
  flush();
  return out;
}

namespace {

bool is_text(const Token& t, std::string_view s) { return t.text == s; }

bool value_like(const Token& t) {
  if (t.kind == TokenKind::Identifier || t.kind == TokenKind::String ||
      t.kind == TokenKind::Number) {
    return true;
  }
  if (t.kind == TokenKind::Keyword) {
    return t.text == "True" || t.text == "False" || t.text == "None";
  }
  return t.kind == TokenKind::Punct && (t.text == ")" || t.text == "]" || t.text == "}");
}

}  // namespace

std::string render_tokens(const std::vector<Token>& tokens) {
  struct Bracket {
    char open;
    bool call;
  };
  std::string out;
  std::vector<Bracket> stack;
  bool glue_next = false;

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token& t = tokens[i];
    bool space = true;
    if (i == 0 || glue_next) {
      space = false;
    } else {
      const Token& p = tokens[i - 1];
      const bool in_square = !stack.empty() && stack.back().open == '[';
      const bool in_call = !stack.empty() && stack.back().open == '(' && stack.back().call;
      if (is_opener(p) || is_closer(t)) {
        space = false;
      } else if (t.kind == TokenKind::Punct && (is_text(t, ",") || is_text(t, ";"))) {
        space = false;
      } else if (t.kind == TokenKind::Punct && is_text(t, ":")) {
        space = false;
      } else if (p.kind == TokenKind::Punct && is_text(p, ":") && in_square) {
        space = false;
      } else if ((t.kind == TokenKind::Punct && is_text(t, ".") && p.kind != TokenKind::Keyword) ||
                 (p.kind == TokenKind::Punct && is_text(p, ".") && t.kind != TokenKind::Keyword)) {
        space = false;
      } else if ((is_text(t, "(") || is_text(t, "[")) && t.kind == TokenKind::Punct &&
                 value_like(p)) {
        space = false;
      } else if (in_call && ((t.kind == TokenKind::Operator && is_text(t, "=")) ||
                             (p.kind == TokenKind::Operator && is_text(p, "=")))) {
        space = false;
      }
    }
    glue_next = false;

    if (t.kind == TokenKind::Operator &&
        (is_text(t, "-") || is_text(t, "+") || is_text(t, "~") || is_text(t, "*") ||
         is_text(t, "**") || (is_text(t, "@") && i == 0))) {
      bool unary = i == 0;
      if (!unary) {
        const Token& p = tokens[i - 1];
        unary = p.kind == TokenKind::Operator || is_opener(p) ||
                (p.kind == TokenKind::Punct && (is_text(p, ",") || is_text(p, ":") ||
                                                is_text(p, ";"))) ||
                (p.kind == TokenKind::Keyword && !value_like(p));
      }
      if (unary) glue_next = true;
    }

    if (space) out.push_back(' ');
    out += t.text;

    if (is_opener(t)) {
      bool call = i > 0 && value_like(tokens[i - 1]);
      stack.push_back({t.text[0], call});
    } else if (is_closer(t) && !stack.empty()) {
      stack.pop_back();
    }
  }
  return out;
}

}  // namespace semflow
