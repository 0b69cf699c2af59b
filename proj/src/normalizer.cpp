#include "semflow/normalizer.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "semflow/lexer.hpp"

namespace semflow {
namespace {

constexpr int kIndentWidth = 4;

struct Statement {
  std::vector<Token> tokens;
  int start_line = 0;
  int end_line = 0;
  int depth = 0;
  bool suspect = false;
};

bool punct(const Token& t, std::string_view s) {
  return t.kind == TokenKind::Punct && t.text == s;
}

bool compound_header(const Token& t) {
  static const std::unordered_set<std::string_view> kSet = {
      "if", "elif", "else", "for", "while", "def", "class", "try", "except",
      "finally", "with", "async"};
  return t.kind == TokenKind::Keyword && kSet.contains(t.text);
}

// Index of the colon ending a compound-statement header, or npos.
std::size_t header_colon(const std::vector<Token>& toks) {
  if (toks.empty() || !compound_header(toks.front())) return std::string::npos;
  int depth = 0;
  int pending_lambdas = 0;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const Token& t = toks[i];
    if (t.kind == TokenKind::Punct && (t.text == "(" || t.text == "[" || t.text == "{")) ++depth;
    if (t.kind == TokenKind::Punct && (t.text == ")" || t.text == "]" || t.text == "}")) {
      depth = std::max(0, depth - 1);
    }
    if (depth != 0) continue;
    if (t.kind == TokenKind::Keyword && t.text == "lambda") ++pending_lambdas;
    if (punct(t, ":")) {
      if (pending_lambdas > 0) {
        --pending_lambdas;
        continue;
      }
      return i;
    }
  }
  return std::string::npos;
}

// R5: split one logical line into statements at top-level ';' and after a
// compound header's colon when a body follows on the same line.
void split_statements(std::vector<Token> toks, int depth, std::vector<std::vector<Token>>& out,
                      std::vector<int>& depths) {
  while (!toks.empty()) {
    std::size_t colon = header_colon(toks);
    std::size_t semi = std::string::npos;
    int bracket = 0;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      const Token& t = toks[i];
      if (t.kind == TokenKind::Punct && (t.text == "(" || t.text == "[" || t.text == "{")) ++bracket;
      if (t.kind == TokenKind::Punct && (t.text == ")" || t.text == "]" || t.text == "}")) {
        bracket = std::max(0, bracket - 1);
      }
      if (bracket == 0 && punct(t, ";")) {
        semi = i;
        break;
      }
    }
    if (colon != std::string::npos && colon + 1 < toks.size() &&
        (semi == std::string::npos || colon < semi)) {
      out.emplace_back(toks.begin(), toks.begin() + static_cast<std::ptrdiff_t>(colon) + 1);
      depths.push_back(depth);
      toks.erase(toks.begin(), toks.begin() + static_cast<std::ptrdiff_t>(colon) + 1);
      ++depth;
      continue;
    }
    if (semi != std::string::npos) {
      if (semi > 0) {
        out.emplace_back(toks.begin(), toks.begin() + static_cast<std::ptrdiff_t>(semi));
        depths.push_back(depth);
      }
      toks.erase(toks.begin(), toks.begin() + static_cast<std::ptrdiff_t>(semi) + 1);
      continue;
    }
    out.push_back(std::move(toks));
    depths.push_back(depth);
    return;
  }
}

// R3: a statement made only of `<output_fn>( ... )`.
bool is_output_call(const std::vector<Token>& toks, const std::vector<std::string>& fns) {
  if (toks.size() < 3 || toks[0].kind != TokenKind::Identifier || !punct(toks[1], "(")) {
    return false;
  }
  if (std::find(fns.begin(), fns.end(), toks[0].text) == fns.end()) return false;
  int depth = 0;
  for (std::size_t i = 1; i < toks.size(); ++i) {
    const Token& t = toks[i];
    if (t.kind == TokenKind::Punct && (t.text == "(" || t.text == "[" || t.text == "{")) ++depth;
    if (t.kind == TokenKind::Punct && (t.text == ")" || t.text == "]" || t.text == "}")) {
      --depth;
      if (depth == 0) return i + 1 == toks.size();
    }
  }
  // Unclosed call: still solely an output call.
  return true;
}

class Renamer {
 public:
  explicit Renamer(const NormalizerOptions& opts)
      : allow_(opts.allowlist.begin(), opts.allowlist.end()) {}

  void apply(std::vector<Token>& toks) {
    const bool is_def = !toks.empty() && toks[0].kind == TokenKind::Keyword && toks[0].text == "def";
    std::vector<bool> call_paren;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      Token& t = toks[i];
      if (punct(t, "(") || punct(t, "[") || punct(t, "{")) {
        bool call = punct(t, "(") && i > 0 &&
                    (toks[i - 1].kind == TokenKind::Identifier || punct(toks[i - 1], ")") ||
                     punct(toks[i - 1], "]"));
        call_paren.push_back(call && !is_def);
      } else if ((punct(t, ")") || punct(t, "]") || punct(t, "}")) && !call_paren.empty()) {
        call_paren.pop_back();
      }
      if (t.kind != TokenKind::Identifier) continue;
      if (i > 0 && punct(toks[i - 1], ".")) continue;  // attribute access
      const bool kwarg = !call_paren.empty() && call_paren.back() && i + 1 < toks.size() &&
                         toks[i + 1].kind == TokenKind::Operator && toks[i + 1].text == "=";
      if (kwarg) continue;
      if (is_builtin(t.text) || allow_.contains(t.text)) continue;
      auto [it, inserted] = names_.try_emplace(t.text, "v" + std::to_string(names_.size()));
      t.text = it->second;
    }
  }

 private:
  std::unordered_set<std::string> allow_;
  std::unordered_map<std::string, std::string> names_;
};

bool ends_with_colon(const std::vector<Token>& toks) {
  return !toks.empty() && punct(toks.back(), ":");
}

}  // namespace

std::string_view to_string(StatementKind kind) {
  switch (kind) {
    case StatementKind::Assign: return "assign";
    case StatementKind::For: return "for";
    case StatementKind::While: return "while";
    case StatementKind::If: return "if";
    case StatementKind::Elif: return "elif";
    case StatementKind::Else: return "else";
    case StatementKind::Return: return "return";
    case StatementKind::Call: return "call";
    case StatementKind::Def: return "def";
    case StatementKind::AugAssign: return "augassign";
    case StatementKind::Other: return "other";
  }
  return "other";
}

StatementKind statement_kind_from_string(std::string_view name) {
  for (int k = 0; k <= static_cast<int>(StatementKind::Other); ++k) {
    auto kind = static_cast<StatementKind>(k);
    if (to_string(kind) == name) return kind;
  }
  return StatementKind::Other;
}

StatementKind statement_kind(std::string_view text) {
  std::vector<Token> toks;
  for (Token& t : lex(text)) {
    if (t.kind != TokenKind::Newline && t.kind != TokenKind::Comment) toks.push_back(std::move(t));
  }
  if (toks.empty()) return StatementKind::Other;
  const Token& first = toks.front();
  if (first.kind == TokenKind::Keyword) {
    if (first.text == "for") return StatementKind::For;
    if (first.text == "while") return StatementKind::While;
    if (first.text == "if") return StatementKind::If;
    if (first.text == "elif") return StatementKind::Elif;
    if (first.text == "else") return StatementKind::Else;
    if (first.text == "return") return StatementKind::Return;
    if (first.text == "def") return StatementKind::Def;
    if (first.text == "async" && toks.size() > 1) {
      if (toks[1].text == "def") return StatementKind::Def;
      if (toks[1].text == "for") return StatementKind::For;
    }
    return StatementKind::Other;
  }
  int depth = 0;
  for (const Token& t : toks) {
    if (t.kind == TokenKind::Punct && (t.text == "(" || t.text == "[" || t.text == "{")) ++depth;
    if (t.kind == TokenKind::Punct && (t.text == ")" || t.text == "]" || t.text == "}")) {
      depth = std::max(0, depth - 1);
    }
    if (depth != 0 || t.kind != TokenKind::Operator) continue;
    if (t.text == "=") return StatementKind::Assign;
    if (t.text.size() >= 2 && t.text.back() == '=' && t.text != "==" && t.text != "!=" &&
        t.text != "<=" && t.text != ">=") {
      return StatementKind::AugAssign;
    }
  }
  if (toks.size() >= 3 && punct(toks.back(), ")")) {
    for (std::size_t i = 1; i < toks.size(); ++i) {
      if (punct(toks[i], "(") && toks[i - 1].kind == TokenKind::Identifier) {
        return StatementKind::Call;
      }
    }
  }
  return StatementKind::Other;
}

std::vector<NormalizedLine> normalize(const Submission& sub, const NormalizerOptions& opts) {
  return normalize_source(sub.id, sub.source, opts);
}

std::vector<NormalizedLine> normalize_source(std::string_view submission_id,
                                             std::string_view source,
                                             const NormalizerOptions& opts) {
  // R1 + R2: comments are dropped by logical_lines; spacing is canonicalized
  // by render_tokens; indentation becomes a depth count.
  const std::vector<LogicalLine> logical = logical_lines(lex(source));

  std::vector<Statement> statements;
  std::vector<int> indent_stack{0};
  bool prev_header = false;
  for (const LogicalLine& ll : logical) {
    bool indent_bad = false;
    if (ll.indent_col > indent_stack.back()) {
      if (!prev_header) indent_bad = true;
      indent_stack.push_back(ll.indent_col);
    } else {
      if (prev_header) indent_bad = true;
      while (indent_stack.size() > 1 && ll.indent_col < indent_stack.back()) indent_stack.pop_back();
      if (ll.indent_col != indent_stack.back()) {
        indent_bad = true;
        indent_stack.push_back(ll.indent_col);
      }
    }
    prev_header = ends_with_colon(ll.tokens);
    const int depth = static_cast<int>(indent_stack.size()) - 1;
    const bool suspect = indent_bad || !ll.brackets_balanced || !ll.strings_terminated;

    std::vector<std::vector<Token>> parts;
    std::vector<int> depths;
    split_statements(ll.tokens, depth, parts, depths);
    for (std::size_t p = 0; p < parts.size(); ++p) {
      if (is_output_call(parts[p], opts.output_functions)) continue;  // R3
      statements.push_back({std::move(parts[p]), ll.start_line, ll.end_line, depths[p], suspect});
    }
  }

  Renamer renamer(opts);  // R4
  std::vector<NormalizedLine> out;
  out.reserve(statements.size());
  int prev_depth = -1;
  for (Statement& st : statements) {
    renamer.apply(st.tokens);
    // Depth may rise by at most one level per line so the rendering re-lexes
    // to the same depths.
    const int depth = std::min(st.depth, prev_depth + 1);
    prev_depth = depth;
    NormalizedLine line;
    line.submission_id = std::string(submission_id);
    line.index = static_cast<int>(out.size());
    line.text = std::string(static_cast<std::size_t>(depth * kIndentWidth), ' ') +
                render_tokens(st.tokens);
    line.start_line = st.start_line;
    line.end_line = st.end_line;
    line.depth = depth;
    line.kind = statement_kind(line.text);
    line.syntax_suspect = st.suspect;
    out.push_back(std::move(line));
  }
  return out;
}

std::string render(const std::vector<NormalizedLine>& lines) {
  std::string out;
  for (const auto& l : lines) {
    if (!out.empty()) out.push_back('\n');
    out += l.text;
  }
  return out;
}

}  // namespace semflow
