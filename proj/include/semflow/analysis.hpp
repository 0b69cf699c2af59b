#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "semflow/aligner.hpp"
#include "semflow/clusterer.hpp"
#include "semflow/errorlabeler.hpp"
#include "semflow/normalizer.hpp"

namespace semflow {

inline constexpr int kSchemaVersion = 1;

struct AnalyzedLine {
  std::string text;
  int start_line = 0;
  int end_line = 0;
  StatementKind kind = StatementKind::Other;
  TagId tag = 0;
  VariantId variant;
  StepId step = 0;
  LineErrorLabel label;
};

struct AnalyzedSubmission {
  std::string id;
  bool passed = false;
  std::string source;  // as ingested; exports scrub it
  std::vector<AnalyzedLine> lines;
  std::vector<std::pair<int, StepId>> matched;
};

struct StepInfo {
  StepId id = 0;
  TagId tag = 0;
  double agreement = 0.0;
  int cohort = 0;
  std::string label;
};

struct TagEntry {
  TagId id = 0;
  std::string label;
  int line_count = 0;
  std::vector<std::string> members;  // distinct texts, visit order
};

struct VariantEntry {
  VariantId id;
  std::string display;
  int line_count = 0;
  std::vector<std::string> members;
};

// Everything `serve` needs; written by `analyze` as one JSON document.
struct Analysis {
  int schema_version = kSchemaVersion;
  std::string exercise_id;
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json provenance = nlohmann::json::object();
  double min_agreement = 0.30;
  double min_coverage = 0.20;
  std::vector<StepInfo> steps;
  std::vector<TagEntry> tags;
  std::vector<VariantEntry> variants;  // ordered by (tag, index)
  std::vector<AnalyzedSubmission> submissions;  // corpus order
  std::vector<LabelerReport> reports;

  const VariantEntry* find_variant(const VariantId& id) const;
};

}  // namespace semflow
