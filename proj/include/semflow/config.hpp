#pragma once

#include <chrono>
#include <nlohmann/json.hpp>
#include <string>

#include "semflow/aggregator.hpp"
#include "semflow/corpus.hpp"
#include "semflow/embedder.hpp"
#include "semflow/errorlabeler.hpp"
#include "semflow/normalizer.hpp"

namespace semflow {

struct EmbeddingConfig {
  std::string backend = "local";  // "local" | "remote"
  LocalHashOptions local;
  RemoteOptions remote;
  std::size_t batch_size = 64;
  std::size_t max_in_flight = 4;
  bool fallback_to_local = true;
};

struct LabelerConfig {
  std::string mode = "divergence";  // "divergence" | "llm"
  HttpChatOptions chat;
  std::string prompt_file;  // empty: built-in template
  int max_tokens = 512;
  std::size_t max_in_flight = 4;
  bool skip_passed = true;
  std::string input_example = default_input_example();
  std::string output_example = default_output_example();
};

struct ServiceConfig {
  std::chrono::seconds session_timeout{7200};
  std::string cors_origin = "*";
};

struct RunConfig {
  std::string exercise_id;
  std::string problem_description;
  std::string runner_command;  // empty: verdicts come from the input
  ScrubOptions scrub;
  NormalizerOptions normalizer;
  EmbeddingConfig embedding;
  double theta_coarse = 0.25;
  double theta_fine = 0.10;
  double min_agreement = 0.30;
  double min_coverage = 0.20;
  LabelerConfig labeler;
  ViewOptions view;
  ServiceConfig service;
};

// Strict: unknown keys and ill-typed values throw ConfigError. Missing keys
// keep their defaults. The result is validated.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

// Full effective configuration, every knob present.
nlohmann::json to_json(const RunConfig& cfg);

// Range checks; throws ConfigError (e.g. theta_fine >= theta_coarse).
void validate(const RunConfig& cfg);

// SEMFLOW_EMBED_URL / SEMFLOW_CHAT_URL override backend endpoints.
void apply_env_overrides(RunConfig& cfg);

}  // namespace semflow
