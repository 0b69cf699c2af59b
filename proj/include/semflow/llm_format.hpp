#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace semflow {

enum class ErrorClass { Correct, Syntax, Runtime, Semantic };

std::string_view to_string(ErrorClass c);
ErrorClass error_class_from_string(std::string_view s);

// SyntaxError/IndentationError/TabError -> Syntax, LogicalError -> Semantic,
// other known Python exceptions -> Runtime, anything else -> Semantic.
ErrorClass classify_error_kind(std::string_view kind);
bool is_known_error_kind(std::string_view kind);

// One `ERROR n: KIND: description | Line Number k: "code"` record.
struct ErrorRecord {
  int number = 0;
  std::string kind;
  std::string message;
  int line = 0;  // 0-based line of the sample as sent
  std::string code;

  bool operator==(const ErrorRecord&) const = default;
};

inline constexpr std::size_t kMaxErrorRecords = 7;

struct ParsedErrors {
  std::vector<ErrorRecord> records;  // at most kMaxErrorRecords
  std::vector<std::string> warnings;
};

// Tolerates code fences, blank lines and surrounding chatter. An empty block
// (or an explicit "no errors" reply) yields no records. Throws
// UnparseableResponse when non-empty text contains no parsable record.
ParsedErrors parse_llm_output(std::string_view text);

std::string render_record(const ErrorRecord& r);
std::string render_llm_output(const std::vector<ErrorRecord>& records);

}  // namespace semflow
