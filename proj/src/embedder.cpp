#include "semflow/embedder.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <httplib.h>
#include <mutex>
#include <nlohmann/json.hpp>
#include <thread>

#include "semflow/errors.hpp"
#include "semflow/lexer.hpp"

namespace semflow {
namespace {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t feature_hash(std::uint64_t seed, std::string_view prefix, std::string_view a,
                           std::string_view b = {}) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ mix64(seed);
  auto eat = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  eat(prefix);
  eat(a);
  if (!b.empty()) {
    h ^= 0x1f;
    h *= 0x100000001b3ULL;
    eat(b);
  }
  return mix64(h);
}

std::vector<std::string> token_texts(std::string_view text) {
  std::vector<std::string> out;
  for (Token& t : lex(text)) {
    if (t.kind == TokenKind::Newline || t.kind == TokenKind::Comment) continue;
    out.push_back(std::move(t.text));
  }
  return out;
}

void l2_normalize(std::vector<float>& v) {
  double sq = 0.0;
  for (float x : v) sq += static_cast<double>(x) * x;
  if (sq <= 0.0) throw Error("cannot normalize a zero embedding vector");
  const double inv = 1.0 / std::sqrt(sq);
  for (float& x : v) x = static_cast<float>(x * inv);
}

}  // namespace

LocalHashBackend::LocalHashBackend(LocalHashOptions opts) : opts_(opts) {
  if (opts_.dim == 0) throw ConfigError("embedding dim must be positive");
}

std::string LocalHashBackend::id() const {
  return "local-hash/d" + std::to_string(opts_.dim) + "/s" + std::to_string(opts_.seed);
}

std::vector<float> LocalHashBackend::embed_one(const EmbedInput& input) const {
  std::vector<double> acc(opts_.dim, 0.0);
  auto add = [&](std::uint64_t h, double w) {
    const std::size_t bucket = h % opts_.dim;
    acc[bucket] += (h >> 63) ? -w : w;
  };
  const auto toks = token_texts(input.text);
  for (std::size_t i = 0; i < toks.size(); ++i) {
    add(feature_hash(opts_.seed, "u:", toks[i]), 1.0);
    if (i + 1 < toks.size()) add(feature_hash(opts_.seed, "b:", toks[i], toks[i + 1]), 1.0);
  }
  add(feature_hash(opts_.seed, "k:", to_string(input.kind)), 1.0);
  for (const std::string& neighbor : input.context) {
    for (const std::string& t : token_texts(neighbor)) {
      add(feature_hash(opts_.seed, "c:", t), opts_.context_decay);
    }
  }
  std::vector<float> out(acc.begin(), acc.end());
  l2_normalize(out);
  return out;
}

std::vector<std::vector<float>> LocalHashBackend::embed(std::span<const EmbedInput> batch) {
  std::vector<std::vector<float>> out;
  out.reserve(batch.size());
  for (const auto& in : batch) out.push_back(embed_one(in));
  return out;
}

RemoteBackend::RemoteBackend(RemoteOptions opts) : opts_(std::move(opts)) {
  if (opts_.dim == 0) throw ConfigError("remote embedding dim must be positive");
}

std::string RemoteBackend::id() const { return "remote:" + opts_.url; }

std::vector<std::vector<float>> RemoteBackend::embed(std::span<const EmbedInput> batch) {
  nlohmann::json req;
  req["texts"] = nlohmann::json::array();
  req["contexts"] = nlohmann::json::array();
  for (const auto& in : batch) {
    req["texts"].push_back(in.text);
    req["contexts"].push_back(in.context);
  }
  const std::string body = req.dump();

  auto attempt = [&]() -> nlohmann::json {
    httplib::Client cli(opts_.url);
    cli.set_connection_timeout(opts_.timeout);
    cli.set_read_timeout(opts_.timeout);
    auto res = cli.Post("/embed", body, "application/json");
    if (!res) throw RemoteUnavailable(id(), httplib::to_string(res.error()));
    if (res->status != 200) {
      throw RemoteUnavailable(id(), "HTTP " + std::to_string(res->status));
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw RemoteUnavailable(id(), std::string("bad response body: ") + e.what());
    }
  };
  const nlohmann::json resp = with_retries(opts_.retry, attempt);

  if (!resp.contains("dim") || !resp.contains("vectors") || !resp["vectors"].is_array()) {
    throw RemoteUnavailable(id(), "response missing 'dim' or 'vectors'");
  }
  const std::size_t dim = resp["dim"].get<std::size_t>();
  if (dim != opts_.dim) throw DimMismatch(opts_.dim, dim);
  if (resp["vectors"].size() != batch.size()) {
    throw RemoteUnavailable(id(), "vector count does not match request");
  }
  std::vector<std::vector<float>> out;
  out.reserve(batch.size());
  for (const auto& v : resp["vectors"]) {
    auto vec = v.get<std::vector<float>>();
    if (vec.size() != opts_.dim) throw DimMismatch(opts_.dim, vec.size());
    l2_normalize(vec);
    out.push_back(std::move(vec));
  }
  return out;
}

EmbedInput embed_input_for(const std::vector<NormalizedLine>& lines, std::size_t j) {
  EmbedInput in;
  in.text = lines[j].text;
  in.kind = lines[j].kind;
  if (j > 0) in.context.push_back(lines[j - 1].text);
  if (j + 1 < lines.size()) in.context.push_back(lines[j + 1].text);
  return in;
}

namespace {

std::vector<std::vector<float>> run_batches(const std::vector<EmbedInput>& inputs,
                                            EmbeddingBackend& backend,
                                            const EmbedCorpusOptions& opts) {
  const std::size_t batch = std::max<std::size_t>(1, opts.batch_size);
  const std::size_t n_batches = (inputs.size() + batch - 1) / batch;
  std::vector<std::vector<std::vector<float>>> results(n_batches);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;

  auto worker = [&] {
    for (;;) {
      if (failed.load()) return;
      const std::size_t b = next.fetch_add(1);
      if (b >= n_batches) return;
      const std::size_t lo = b * batch;
      const std::size_t hi = std::min(inputs.size(), lo + batch);
      try {
        auto vecs = backend.embed(std::span<const EmbedInput>(inputs.data() + lo, hi - lo));
        if (vecs.size() != hi - lo) throw Error("backend returned wrong vector count");
        for (const auto& v : vecs) {
          if (v.size() != backend.dim()) throw DimMismatch(backend.dim(), v.size());
        }
        results[b] = std::move(vecs);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        failed = true;
        return;
      }
    }
  };

  const std::size_t n_workers = std::min(std::max<std::size_t>(1, opts.max_in_flight), n_batches);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t i = 0; i < n_workers; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (error) std::rethrow_exception(error);

  std::vector<std::vector<float>> out;
  out.reserve(inputs.size());
  for (auto& r : results) {
    for (auto& v : r) out.push_back(std::move(v));
  }
  return out;
}

}  // namespace

EmbedCorpusResult embed_corpus(const std::vector<std::vector<NormalizedLine>>& lines,
                               EmbeddingBackend& primary, const EmbedCorpusOptions& opts,
                               EmbeddingBackend* fallback) {
  std::vector<EmbedInput> inputs;
  std::vector<std::pair<const std::string*, int>> keys;
  for (const auto& sub : lines) {
    for (std::size_t j = 0; j < sub.size(); ++j) {
      inputs.push_back(embed_input_for(sub, j));
      keys.emplace_back(&sub[j].submission_id, sub[j].index);
    }
  }

  EmbedCorpusResult result;
  EmbeddingBackend* used = &primary;
  std::vector<std::vector<float>> vecs;
  try {
    vecs = run_batches(inputs, primary, opts);
  } catch (const RemoteUnavailable&) {
    if (fallback == nullptr) throw;
    used = fallback;
    result.fell_back = true;
    vecs = run_batches(inputs, *fallback, opts);
  }

  result.backend_id = used->id();
  result.vectors.reserve(vecs.size());
  for (std::size_t i = 0; i < vecs.size(); ++i) {
    result.vectors.push_back({*keys[i].first, keys[i].second, std::move(vecs[i]), result.backend_id});
  }
  return result;
}

}  // namespace semflow
