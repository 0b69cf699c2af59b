#include "semflow/errorlabeler.hpp"

#include <fstream>
#include <httplib.h>
#include <nlohmann/json.hpp>
#include <sstream>

#include "semflow/errors.hpp"

namespace semflow {
namespace resources {
extern const char* const kErrorPromptV1;
}

namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size()) {
    s.replace(pos, from.size(), to);
  }
}

constexpr std::string_view kDivergenceMessage = "implementation not seen in any passing submission";
constexpr std::string_view kSyntaxMessage = "unbalanced brackets or quotes, or inconsistent indentation";
constexpr std::string_view kDegradedMessage = "failing submission with no localized divergence";

}  // namespace

std::string_view to_string(LabelSource s) {
  switch (s) {
    case LabelSource::Llm: return "llm";
    case LabelSource::Divergence: return "divergence";
    case LabelSource::Override: return "override";
  }
  return "divergence";
}

LabelSource label_source_from_string(std::string_view s) {
  if (s == "llm") return LabelSource::Llm;
  if (s == "override") return LabelSource::Override;
  if (s == "divergence") return LabelSource::Divergence;
  throw Error("unknown label source: " + std::string(s));
}

PromptTemplate PromptTemplate::builtin() { return {"error_prompt.v1", resources::kErrorPromptV1}; }

PromptTemplate PromptTemplate::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read prompt template: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string name = path;
  if (auto slash = name.find_last_of('/'); slash != std::string::npos) name = name.substr(slash + 1);
  return {name, ss.str()};
}

std::string default_input_example() {
  return "past_tense = []\n"
         "for word in words:\n"
         "    past_tense = past_tense + word\n";
}

std::string default_output_example() {
  return "ERROR 1: TypeError: can only concatenate list (not \"str\") to list  |  "
         "Line Number 2: \"    past_tense = past_tense + word\"";
}

std::string render_prompt(const PromptTemplate& tpl, const PromptInputs& in) {
  std::string out = tpl.text;
  replace_all(out, "{Problem Description}", in.problem_description);
  replace_all(out, "{Input Example}", in.input_example);
  replace_all(out, "{Output Example}", in.output_example);
  replace_all(out, "{OEmessage}", in.compile_error.empty() ? "None" : in.compile_error);
  if (!out.empty() && out.back() != '\n') out.push_back('\n');
  out += "Code Sample:\n```\n" + in.code;
  if (!in.code.empty() && in.code.back() != '\n') out.push_back('\n');
  out += "```\n";
  return out;
}

HttpChatClient::HttpChatClient(HttpChatOptions opts) : opts_(std::move(opts)) {}

std::string HttpChatClient::id() const {
  return "chat:" + opts_.url + (opts_.model.empty() ? "" : "#" + opts_.model);
}

std::string HttpChatClient::complete(const std::string& prompt, int max_tokens) {
  nlohmann::json req = {{"prompt", prompt}, {"max_tokens", max_tokens}};
  if (!opts_.model.empty()) req["model"] = opts_.model;
  const std::string body = req.dump();
  return with_retries(opts_.retry, [&]() -> std::string {
    httplib::Client cli(opts_.url);
    cli.set_connection_timeout(opts_.timeout);
    cli.set_read_timeout(opts_.timeout);
    auto res = cli.Post("/v1/chat", body, "application/json");
    if (!res) throw RemoteUnavailable(id(), httplib::to_string(res.error()));
    if (res->status != 200) throw RemoteUnavailable(id(), "HTTP " + std::to_string(res->status));
    try {
      auto j = nlohmann::json::parse(res->body);
      return j.at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw RemoteUnavailable(id(), std::string("bad response body: ") + e.what());
    }
  });
}

std::vector<LineErrorLabel> labels_from_records(const std::vector<ErrorRecord>& records,
                                                const std::vector<NormalizedLine>& lines,
                                                std::vector<std::string>& warnings) {
  std::vector<LineErrorLabel> labels(lines.size(), LineErrorLabel::correct(LabelSource::Llm));
  int last_raw = -1;
  for (const auto& l : lines) last_raw = std::max(last_raw, l.end_line);
  for (const ErrorRecord& r : records) {
    if (r.line < 0 || r.line > last_raw) {
      warnings.push_back("ERROR " + std::to_string(r.number) + ": line " + std::to_string(r.line) +
                         " out of range");
      continue;
    }
    int target = -1;
    for (const auto& l : lines) {
      if (l.start_line <= r.line && r.line <= l.end_line) {
        target = l.index;
        break;
      }
    }
    if (target < 0) {
      warnings.push_back("ERROR " + std::to_string(r.number) + ": line " + std::to_string(r.line) +
                         " has no analyzed statement");
      continue;
    }
    LineErrorLabel& lab = labels[static_cast<std::size_t>(target)];
    if (lab.cls != ErrorClass::Correct) {
      warnings.push_back("ERROR " + std::to_string(r.number) + ": line " + std::to_string(r.line) +
                         " already labeled");
      continue;
    }
    lab.cls = classify_error_kind(r.kind);
    lab.kind = r.kind;
    lab.message = r.message.empty() ? r.kind : r.message;
  }
  return labels;
}

LabelOutcome label_llm(const Submission& sub, const std::vector<NormalizedLine>& lines,
                       const std::optional<std::string>& compile_error, ChatClient& chat,
                       const LlmLabelOptions& opts) {
  LabelOutcome out;
  out.report.submission_id = sub.id;
  out.report.labeler = "llm";
  const std::string prompt = render_prompt(
      opts.prompt, {opts.problem_description, opts.input_example, opts.output_example,
                    compile_error.value_or(""), sub.source});

  std::string request = prompt;
  for (int attempt = 0;; ++attempt) {
    out.report.transcript.push_back(request);
    std::string response;
    try {
      response = chat.complete(request, opts.max_tokens);
    } catch (const RemoteUnavailable&) {
      out.report.parse_status = "unavailable";
      throw;
    }
    out.report.transcript.push_back(response);
    try {
      ParsedErrors parsed = parse_llm_output(response);
      out.report.warnings = std::move(parsed.warnings);
      out.report.parse_status = parsed.records.empty() ? "empty" : "ok";
      out.labels = labels_from_records(parsed.records, lines, out.report.warnings);
      return out;
    } catch (const UnparseableResponse&) {
      out.report.parse_status = "unparseable";
      if (attempt >= 1) throw;
      ++out.report.retries;
      request = prompt +
                "\nYour previous answer did not follow the Output Format. Answer again using only "
                "lines of the form ERROR #: ERROR TYPE: ERROR Description  |  Line Number #: "
                "\"Code\", or an empty block if there is no error.\n";
    }
  }
}

std::vector<LineErrorLabel> label_divergence(bool passed, const std::vector<NormalizedLine>& lines,
                                             const std::vector<bool>& variant_in_passed) {
  std::vector<LineErrorLabel> labels(lines.size(),
                                     LineErrorLabel::correct(LabelSource::Divergence));
  if (passed) return labels;
  bool any = false;
  for (std::size_t j = 0; j < lines.size(); ++j) {
    if (lines[j].syntax_suspect) {
      labels[j] = {ErrorClass::Syntax, "SyntaxError", std::string(kSyntaxMessage),
                   LabelSource::Divergence};
      any = true;
    } else if (j < variant_in_passed.size() && !variant_in_passed[j]) {
      labels[j] = {ErrorClass::Semantic, "LogicalError", std::string(kDivergenceMessage),
                   LabelSource::Divergence};
      any = true;
    }
  }
  if (!any) {
    for (auto& l : labels) {
      l = {ErrorClass::Semantic, "LogicalError", std::string(kDegradedMessage),
           LabelSource::Divergence};
    }
  }
  return labels;
}

int enforce_passed_correct(std::vector<LineErrorLabel>& labels) {
  int changed = 0;
  for (auto& l : labels) {
    if (l.cls != ErrorClass::Correct) {
      l = LineErrorLabel::correct(LabelSource::Override);
      ++changed;
    }
  }
  return changed;
}

}  // namespace semflow
