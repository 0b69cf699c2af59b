#pragma once

#include <cstddef>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace semflow {

struct Submission {
  std::string id;
  std::string source;
  bool passed = false;
  std::map<std::string, std::string> meta;

  bool operator==(const Submission&) const = default;
};

struct Corpus {
  std::string exercise_id;
  std::string prompt_text;
  std::vector<Submission> submissions;

  std::size_t size() const noexcept { return submissions.size(); }
};

// Reads UTF-8 line-delimited JSON, one submission object per line. Blank lines
// are skipped. Throws MalformedRecord, DuplicateId or EmptyCorpus.
Corpus ingest(std::istream& in);
Corpus ingest_file(const std::string& path);

struct ScrubOptions {
  // Comment and string-literal contents strictly longer than this are redacted.
  std::size_t max_length = 8;
};

inline constexpr std::string_view kRedacted = "⟨redacted⟩";

// Source-level redaction used for exported copies only.
std::string scrub_source(std::string_view source, const ScrubOptions& opts = {});
Corpus scrub(const Corpus& corpus, const ScrubOptions& opts = {});

// Writes the corpus back out in the ingest format.
void write_jsonl(const Corpus& corpus, std::ostream& out);

// Live-grading hook: runs `command <path-to-source-file>` once per submission
// and sets `passed` from the exit status (0 = pass).
void apply_external_verdicts(Corpus& corpus, const std::string& command);

}  // namespace semflow
