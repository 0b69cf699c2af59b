#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "semflow/corpus.hpp"
#include "semflow/llm_format.hpp"
#include "semflow/normalizer.hpp"
#include "semflow/retry.hpp"

namespace semflow {

enum class LabelSource { Llm, Divergence, Override };

std::string_view to_string(LabelSource s);
LabelSource label_source_from_string(std::string_view s);

struct LineErrorLabel {
  ErrorClass cls = ErrorClass::Correct;
  std::string kind;     // empty iff Correct
  std::string message;  // empty iff Correct
  LabelSource source = LabelSource::Divergence;

  bool operator==(const LineErrorLabel&) const = default;
  static LineErrorLabel correct(LabelSource src) { return {ErrorClass::Correct, {}, {}, src}; }
};

// Audit record; never read by aggregation.
struct LabelerReport {
  std::string submission_id;
  std::string labeler;  // "llm", "divergence", "llm->divergence"
  std::vector<std::string> transcript;  // alternating prompt / response
  std::string parse_status;  // "ok", "empty", "unparseable", "unavailable", "n/a"
  int retries = 0;
  std::vector<std::string> warnings;
};

// ---------------------------------------------------------------------------
// Prompt

struct PromptTemplate {
  std::string version;
  std::string text;

  static PromptTemplate builtin();
  static PromptTemplate from_file(const std::string& path);
};

struct PromptInputs {
  std::string problem_description;
  std::string input_example;
  std::string output_example;
  std::string compile_error;  // OEmessage
  std::string code;
};

std::string default_input_example();
std::string default_output_example();

std::string render_prompt(const PromptTemplate& tpl, const PromptInputs& in);

// ---------------------------------------------------------------------------
// LLM labeler

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual std::string id() const = 0;
  // Throws RemoteUnavailable on transport failure.
  virtual std::string complete(const std::string& prompt, int max_tokens) = 0;
};

struct HttpChatOptions {
  std::string url;
  std::string model;
  RetryPolicy retry;
  std::chrono::milliseconds timeout{60000};
};

// POST {url}/v1/chat {"prompt", "max_tokens"[, "model"]} -> {"text"}.
class HttpChatClient final : public ChatClient {
 public:
  explicit HttpChatClient(HttpChatOptions opts);
  std::string id() const override;
  std::string complete(const std::string& prompt, int max_tokens) override;

 private:
  HttpChatOptions opts_;
};

struct LlmLabelOptions {
  PromptTemplate prompt = PromptTemplate::builtin();
  std::string problem_description;
  std::string input_example = default_input_example();
  std::string output_example = default_output_example();
  int max_tokens = 512;
};

struct LabelOutcome {
  std::vector<LineErrorLabel> labels;  // one per normalized line
  LabelerReport report;
};

// Sends the original source; record line numbers are raw 0-based lines and
// are mapped to the first normalized line whose raw span covers them.
// Throws RemoteUnavailable, or UnparseableResponse after one re-ask.
LabelOutcome label_llm(const Submission& sub, const std::vector<NormalizedLine>& lines,
                       const std::optional<std::string>& compile_error, ChatClient& chat,
                       const LlmLabelOptions& opts);

// Maps parsed records onto normalized lines (exposed for the harness).
std::vector<LineErrorLabel> labels_from_records(const std::vector<ErrorRecord>& records,
                                                const std::vector<NormalizedLine>& lines,
                                                std::vector<std::string>& warnings);

// ---------------------------------------------------------------------------
// Divergence labeler

// `variant_in_passed[j]` says whether line j's fine variant contains any line
// from a passing submission.
std::vector<LineErrorLabel> label_divergence(bool passed, const std::vector<NormalizedLine>& lines,
                                             const std::vector<bool>& variant_in_passed);

// Forces every label of a passing submission to Correct; returns the number of
// labels that had to change.
int enforce_passed_correct(std::vector<LineErrorLabel>& labels);

}  // namespace semflow
