#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "semflow/corpus.hpp"

namespace semflow {

enum class StatementKind {
  Assign,
  For,
  While,
  If,
  Elif,
  Else,
  Return,
  Call,
  Def,
  AugAssign,
  Other,
};

std::string_view to_string(StatementKind kind);
StatementKind statement_kind_from_string(std::string_view name);

struct NormalizedLine {
  std::string submission_id;
  int index = 0;
  std::string text;  // canonical, 4 spaces per depth level
  int start_line = 0;  // 0-based physical lines into the original source
  int end_line = 0;
  StatementKind kind = StatementKind::Other;
  int depth = 0;
  // Bracket/quote imbalance or inconsistent indentation in the original.
  bool syntax_suspect = false;

  bool operator==(const NormalizedLine&) const = default;
};

struct NormalizerOptions {
  std::vector<std::string> allowlist;
  std::vector<std::string> output_functions{"print"};
};

std::vector<NormalizedLine> normalize(const Submission& sub, const NormalizerOptions& opts);
std::vector<NormalizedLine> normalize_source(std::string_view submission_id,
                                             std::string_view source,
                                             const NormalizerOptions& opts);

// Statement-kind dispatch on a rendered line.
StatementKind statement_kind(std::string_view text);
inline StatementKind statement_kind(const NormalizedLine& line) { return statement_kind(line.text); }

// Joins line texts with '\n'; the result normalizes back to the same lines.
std::string render(const std::vector<NormalizedLine>& lines);

}  // namespace semflow
