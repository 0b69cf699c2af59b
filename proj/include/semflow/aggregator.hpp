#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semflow/analysis.hpp"

namespace semflow {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  auto operator<=>(const Rgb&) const = default;
  std::string hex() const;
  static std::optional<Rgb> parse(std::string_view hex);
};

struct ColorScale {
  Rgb incorrect{0xD3, 0x2F, 0x2F};
  Rgb correct{0x38, 0x8E, 0x3C};

  // Linear RGB interpolation; ratio is clamped to [0, 1].
  Rgb at(double ratio) const;
};

struct ViewOptions {
  ColorScale colors;
  std::size_t page_size = 50;
};

struct VariantAggregate {
  VariantId id;
  std::string display;
  int member_lines = 0;
  int correct = 0;
  int incorrect = 0;
  int submission_count = 0;
  std::map<std::string, int> error_facets;  // kind -> submissions

  bool operator==(const VariantAggregate&) const = default;
};

struct StepAggregate {
  StepId id = 0;
  TagId tag = 0;
  std::string display_label;
  int member_lines = 0;
  int correct = 0;
  int incorrect = 0;
  double ratio = 0.0;  // 0 for a step with no lines in scope
  Rgb color;
  std::vector<VariantAggregate> variants;  // member_lines desc, display asc

  bool operator==(const StepAggregate&) const = default;
};

struct FilterTerm {
  VariantId variant;
  std::optional<std::string> error_kind;

  bool operator==(const FilterTerm&) const = default;
};

using FilterStack = std::vector<FilterTerm>;

struct ViewModel {
  FilterStack stack;
  int total_submissions = 0;
  int active_submissions = 0;
  std::vector<StepAggregate> steps;

  bool operator==(const ViewModel&) const = default;
};

// Does the submission contain a line matching the term?
bool matches(const AnalyzedSubmission& sub, const FilterTerm& term);

// Active-set mask: intersection over terms; all true for an empty stack.
std::vector<bool> active_set(const Analysis& analysis, const FilterStack& stack);

// Aggregates over the submissions whose mask entry is true.
ViewModel build_viewmodel(const Analysis& analysis, const std::vector<bool>& active,
                          const ColorScale& colors = {});
ViewModel build_viewmodel(const Analysis& analysis, const ColorScale& colors = {});

// Throws UnknownVariant / UnknownErrorKind.
void validate_term(const Analysis& analysis, const FilterTerm& term);

// Nested filtering over one analysis. Every mutation returns the new view.
class Explorer {
 public:
  Explorer(const Analysis& analysis, ViewOptions opts = {});

  const ViewModel& view() const noexcept { return view_; }
  const FilterStack& stack() const noexcept { return stack_; }
  const std::vector<bool>& active() const noexcept { return active_; }

  const ViewModel& push(const FilterTerm& term);
  const ViewModel& pop();  // throws EmptyStack
  const ViewModel& clear();

 private:
  void refresh();

  const Analysis* analysis_;
  ViewOptions opts_;
  FilterStack stack_;
  std::vector<bool> active_;
  ViewModel view_;
};

struct Highlight {
  int index = 0;
  int start_line = 0;
  int end_line = 0;
  LineErrorLabel label;

  bool operator==(const Highlight&) const = default;
};

struct SubmissionEntry {
  std::string id;
  bool passed = false;
  std::string source;
  std::vector<Highlight> highlights;

  bool operator==(const SubmissionEntry&) const = default;
};

struct SubmissionPage {
  VariantId variant;
  std::optional<std::string> error_kind;
  int total = 0;  // matching submissions across all pages
  int page = 0;   // 0-based
  int page_size = 0;
  std::map<std::string, int> error_facets;  // over the variant, before kind filter
  std::vector<SubmissionEntry> entries;  // ordered by id
};

// Submissions in the active set with a line in `variant` (and, when given,
// such a line labeled `error_kind`). Throws UnknownVariant / UnknownErrorKind.
SubmissionPage list_submissions(const Analysis& analysis, const std::vector<bool>& active,
                                const VariantId& variant,
                                const std::optional<std::string>& error_kind, int page,
                                std::size_t page_size);

nlohmann::json to_json(const ViewModel& vm);
nlohmann::json to_json(const SubmissionPage& page);
nlohmann::json to_json(const FilterTerm& term);

}  // namespace semflow
