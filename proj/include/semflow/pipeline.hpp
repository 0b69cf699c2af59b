#pragma once

#include <string>
#include <utility>
#include <vector>

#include "semflow/analysis.hpp"
#include "semflow/config.hpp"
#include "semflow/corpus.hpp"

namespace semflow {

// Optional injection points; null members are built from the config.
struct PipelineBackends {
  EmbeddingBackend* embedding = nullptr;
  ChatClient* chat = nullptr;
};

struct StageTiming {
  std::string stage;
  double millis = 0.0;
};

struct PipelineStats {
  std::size_t submissions = 0;
  std::size_t lines = 0;
  std::size_t distinct_lines = 0;
  std::size_t tags = 0;
  std::size_t variants = 0;
  std::size_t steps = 0;
  std::size_t llm_fallbacks = 0;
  std::size_t passed_overrides = 0;
  std::vector<StageTiming> timings;
};

struct PipelineResult {
  Analysis analysis;
  PipelineStats stats;
};

// Runs normalization, embedding, coarse clustering, progression mining and
// alignment, error labeling and fine clustering over the corpus. Throws
// NoCorrectSolutions, RemoteUnavailable (embedding without fallback) or
// ConfigError.
PipelineResult run_pipeline(const Corpus& corpus, const RunConfig& cfg,
                            PipelineBackends backends = {});

}  // namespace semflow
