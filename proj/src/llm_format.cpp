#include "semflow/llm_format.hpp"

#include <regex>
#include <sstream>
#include <unordered_set>

#include "semflow/errors.hpp"

namespace semflow {
namespace {

const std::unordered_set<std::string_view>& runtime_kinds() {
  static const std::unordered_set<std::string_view> kSet = {
      "AttributeError", "ValueError", "NameError", "TypeError", "IndexError", "KeyError",
      "ZeroDivisionError", "UnboundLocalError", "RecursionError", "ImportError",
      "ModuleNotFoundError", "RuntimeError", "AssertionError", "OverflowError",
      "StopIteration", "FileNotFoundError", "NotImplementedError", "LookupError",
      "ArithmeticError", "OSError", "EOFError", "MemoryError", "UnicodeError"};
  return kSet;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::string_view to_string(ErrorClass c) {
  switch (c) {
    case ErrorClass::Correct: return "Correct";
    case ErrorClass::Syntax: return "Syntax";
    case ErrorClass::Runtime: return "Runtime";
    case ErrorClass::Semantic: return "Semantic";
  }
  return "Correct";
}

ErrorClass error_class_from_string(std::string_view s) {
  if (s == "Syntax") return ErrorClass::Syntax;
  if (s == "Runtime") return ErrorClass::Runtime;
  if (s == "Semantic") return ErrorClass::Semantic;
  if (s == "Correct") return ErrorClass::Correct;
  throw Error("unknown error class: " + std::string(s));
}

ErrorClass classify_error_kind(std::string_view kind) {
  if (kind == "SyntaxError" || kind == "IndentationError" || kind == "TabError") {
    return ErrorClass::Syntax;
  }
  if (kind == "LogicalError") return ErrorClass::Semantic;
  if (runtime_kinds().contains(kind)) return ErrorClass::Runtime;
  return ErrorClass::Semantic;
}

bool is_known_error_kind(std::string_view kind) {
  return kind == "SyntaxError" || kind == "IndentationError" || kind == "TabError" ||
         kind == "LogicalError" || runtime_kinds().contains(kind);
}

ParsedErrors parse_llm_output(std::string_view text) {
  static const std::regex kRecord(
      R"re(^\s*ERROR\s*#?\s*(\d+)\s*:\s*([A-Za-z_][A-Za-z0-9_]*)\s*:\s*(.*?)\s*\|\s*Line\s+Number\s*#?\s*(-?\d+)\s*:\s*(?:"(.*)"|(.*?))\s*$)re",
      std::regex::icase);
  static const std::regex kLooksLikeRecord(R"(^\s*ERROR\b)", std::regex::icase);
  static const std::regex kNoErrors(R"(\bno\s+(more\s+)?errors?\b)", std::regex::icase);

  ParsedErrors out;
  std::istringstream in{std::string(text)};
  std::string line;
  bool any_content = false;
  bool says_no_errors = false;
  std::size_t dropped = 0;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t.starts_with("```")) continue;
    any_content = true;
    std::smatch m;
    if (std::regex_match(t, m, kRecord)) {
      if (out.records.size() >= kMaxErrorRecords) {
        ++dropped;
        continue;
      }
      ErrorRecord r;
      r.number = std::stoi(m[1].str());
      r.kind = m[2].str();
      r.message = m[3].str();
      r.line = std::stoi(m[4].str());
      r.code = m[5].matched ? m[5].str() : m[6].str();
      out.records.push_back(std::move(r));
    } else if (std::regex_search(t, kLooksLikeRecord)) {
      out.warnings.push_back("unparsed record: " + t);
    } else if (std::regex_search(t, kNoErrors)) {
      says_no_errors = true;
    }
  }
  if (dropped > 0) {
    out.warnings.push_back("dropped " + std::to_string(dropped) + " record(s) beyond the limit of " +
                           std::to_string(kMaxErrorRecords));
  }
  if (out.records.empty() && any_content && !says_no_errors) {
    throw UnparseableResponse("no ERROR record could be parsed from the response");
  }
  return out;
}

std::string render_record(const ErrorRecord& r) {
  return "ERROR " + std::to_string(r.number) + ": " + r.kind + ": " + r.message +
         "  |  Line Number " + std::to_string(r.line) + ": \"" + r.code + "\"";
}

std::string render_llm_output(const std::vector<ErrorRecord>& records) {
  std::string out = "```\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (i > 0) out += "\n";
    out += render_record(records[i]) + "\n";
  }
  out += "```\n";
  return out;
}

}  // namespace semflow
