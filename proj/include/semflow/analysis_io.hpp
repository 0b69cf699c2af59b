#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <string_view>

#include "semflow/aggregator.hpp"
#include "semflow/analysis.hpp"

namespace semflow {

// The analysis file: {schema_version, exercise_id, config, provenance,
// progression, tags, variants, submissions, alignments, labels, steps,
// labeler_reports}. `steps` holds the unfiltered view model.
nlohmann::json to_json(const Analysis& analysis, const ColorScale& colors = {});
Analysis analysis_from_json(const nlohmann::json& j);  // throws SchemaMismatch

// Compact, deterministic text (object keys sorted) ending in a newline.
std::string serialize(const Analysis& analysis, const ColorScale& colors = {});
void save_analysis(const Analysis& analysis, const std::string& path, const ColorScale& colors = {});

struct LoadedAnalysis {
  Analysis analysis;
  std::string hash;  // sha256 of the file bytes, hex
};
LoadedAnalysis load_analysis(const std::string& path);

std::string sha256_hex(std::string_view bytes);

}  // namespace semflow
