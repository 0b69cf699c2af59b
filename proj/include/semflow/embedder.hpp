#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "semflow/normalizer.hpp"
#include "semflow/retry.hpp"

namespace semflow {

struct LineVector {
  std::string submission_id;
  int index = 0;
  std::vector<float> values;
  std::string backend_id;

  std::size_t dim() const noexcept { return values.size(); }
};

// One embedding request: the line's text plus its neighbors (previous, next).
struct EmbedInput {
  std::string text;
  std::vector<std::string> context;
  StatementKind kind = StatementKind::Other;
};

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual std::string id() const = 0;
  virtual std::size_t dim() const = 0;
  // One vector per input, same order. May throw RemoteUnavailable/DimMismatch.
  virtual std::vector<std::vector<float>> embed(std::span<const EmbedInput> batch) = 0;
};

struct LocalHashOptions {
  std::size_t dim = 256;
  std::uint64_t seed = 0x5eedf10;
  double context_decay = 0.3;
};

// Feature hashing over token unigrams, bigrams, statement kind and decayed
// neighbor unigrams. Pure and bit-reproducible for fixed options.
class LocalHashBackend final : public EmbeddingBackend {
 public:
  explicit LocalHashBackend(LocalHashOptions opts = {});
  std::string id() const override;
  std::size_t dim() const override { return opts_.dim; }
  std::vector<std::vector<float>> embed(std::span<const EmbedInput> batch) override;
  std::vector<float> embed_one(const EmbedInput& input) const;

 private:
  LocalHashOptions opts_;
};

struct RemoteOptions {
  std::string url;  // e.g. http://host:port
  std::size_t dim = 768;
  RetryPolicy retry;
  std::chrono::milliseconds timeout{30000};
};

// HTTP client for POST /embed. Batching and concurrency are handled by
// embed_corpus; this class sends one request per call with retries.
class RemoteBackend final : public EmbeddingBackend {
 public:
  explicit RemoteBackend(RemoteOptions opts);
  std::string id() const override;
  std::size_t dim() const override { return opts_.dim; }
  std::vector<std::vector<float>> embed(std::span<const EmbedInput> batch) override;
  const RemoteOptions& options() const noexcept { return opts_; }

 private:
  RemoteOptions opts_;
};

EmbedInput embed_input_for(const std::vector<NormalizedLine>& submission_lines, std::size_t j);

struct EmbedCorpusOptions {
  std::size_t batch_size = 64;
  std::size_t max_in_flight = 4;
};

struct EmbedCorpusResult {
  std::vector<LineVector> vectors;
  std::string backend_id;
  bool fell_back = false;
};

// One vector per line, in input order. `lines` is grouped per submission in
// corpus order. When `fallback` is set and the primary backend fails, the
// whole corpus is re-embedded with the fallback.
EmbedCorpusResult embed_corpus(const std::vector<std::vector<NormalizedLine>>& lines,
                               EmbeddingBackend& primary, const EmbedCorpusOptions& opts,
                               EmbeddingBackend* fallback = nullptr);

}  // namespace semflow
