#include "semflow/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "semflow/errors.hpp"

namespace semflow {
namespace {

using nlohmann::json;

// Reads keys from one JSON object and rejects any key nobody asked for.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  void done() const {
    for (const auto& [k, _] : j_.items()) {
      if (!seen_.contains(k)) throw ConfigError("unknown config key: " + qualified(k));
    }
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw ConfigError("invalid value for " + qualified(key));
    }
  }

  void get_ms(const char* key, std::chrono::milliseconds& out) {
    long long ms = out.count();
    get(key, ms);
    out = std::chrono::milliseconds(ms);
  }

  void get_color(const char* key, Rgb& out) {
    std::string hex = out.hex();
    get(key, hex);
    auto c = Rgb::parse(hex);
    if (!c) throw ConfigError("invalid color for " + qualified(key) + ": " + hex);
    out = *c;
  }

  // Runs `fn(Section&)` on a nested object when present.
  template <typename F>
  void nested(const char* key, F&& fn) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    Section child(*it, qualified(key));
    fn(child);
    child.done();
  }

 private:
  std::string qualified(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }
  std::string where() const { return path_.empty() ? "config" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_retry(Section& s, RetryPolicy& r) {
  s.get("max_retries", r.max_retries);
  s.get_ms("backoff_ms", r.initial_backoff);
  s.get_ms("max_backoff_ms", r.max_backoff);
}

}  // namespace

RunConfig config_from_json(const json& j) {
  RunConfig cfg;
  {
    Section root(j, "");
    root.nested("exercise", [&](Section& s) {
      s.get("id", cfg.exercise_id);
      s.get("problem_description", cfg.problem_description);
    });
    root.nested("corpus", [&](Section& s) {
      s.get("runner_command", cfg.runner_command);
      s.get("scrub_max_length", cfg.scrub.max_length);
    });
    root.nested("normalizer", [&](Section& s) {
      s.get("allowlist", cfg.normalizer.allowlist);
      s.get("output_functions", cfg.normalizer.output_functions);
    });
    root.nested("embedding", [&](Section& s) {
      auto& e = cfg.embedding;
      s.get("backend", e.backend);
      s.get("dim", e.local.dim);
      s.get("seed", e.local.seed);
      s.get("context_decay", e.local.context_decay);
      s.get("batch_size", e.batch_size);
      s.get("max_in_flight", e.max_in_flight);
      s.get("fallback_to_local", e.fallback_to_local);
      s.nested("remote", [&](Section& r) {
        r.get("url", e.remote.url);
        r.get("dim", e.remote.dim);
        r.get_ms("timeout_ms", e.remote.timeout);
        read_retry(r, e.remote.retry);
      });
    });
    root.nested("clustering", [&](Section& s) {
      s.get("theta_coarse", cfg.theta_coarse);
      s.get("theta_fine", cfg.theta_fine);
    });
    root.nested("alignment", [&](Section& s) {
      s.get("min_agreement", cfg.min_agreement);
      s.get("min_coverage", cfg.min_coverage);
    });
    root.nested("labeler", [&](Section& s) {
      auto& l = cfg.labeler;
      s.get("mode", l.mode);
      s.get("url", l.chat.url);
      s.get("model", l.chat.model);
      s.get_ms("timeout_ms", l.chat.timeout);
      read_retry(s, l.chat.retry);
      s.get("prompt_file", l.prompt_file);
      s.get("max_tokens", l.max_tokens);
      s.get("max_in_flight", l.max_in_flight);
      s.get("skip_passed", l.skip_passed);
      s.get("input_example", l.input_example);
      s.get("output_example", l.output_example);
    });
    root.nested("view", [&](Section& s) {
      s.get_color("color_incorrect", cfg.view.colors.incorrect);
      s.get_color("color_correct", cfg.view.colors.correct);
      s.get("page_size", cfg.view.page_size);
    });
    root.nested("service", [&](Section& s) {
      long long secs = cfg.service.session_timeout.count();
      s.get("session_timeout_s", secs);
      cfg.service.session_timeout = std::chrono::seconds(secs);
      s.get("cors_origin", cfg.service.cors_origin);
    });
    root.done();
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return config_from_json(j);
}

json to_json(const RunConfig& cfg) {
  const auto& e = cfg.embedding;
  const auto& l = cfg.labeler;
  return {
      {"exercise", {{"id", cfg.exercise_id}, {"problem_description", cfg.problem_description}}},
      {"corpus",
       {{"runner_command", cfg.runner_command}, {"scrub_max_length", cfg.scrub.max_length}}},
      {"normalizer",
       {{"allowlist", cfg.normalizer.allowlist},
        {"output_functions", cfg.normalizer.output_functions}}},
      {"embedding",
       {{"backend", e.backend},
        {"dim", e.local.dim},
        {"seed", e.local.seed},
        {"context_decay", e.local.context_decay},
        {"batch_size", e.batch_size},
        {"max_in_flight", e.max_in_flight},
        {"fallback_to_local", e.fallback_to_local},
        {"remote",
         {{"url", e.remote.url},
          {"dim", e.remote.dim},
          {"timeout_ms", e.remote.timeout.count()},
          {"max_retries", e.remote.retry.max_retries},
          {"backoff_ms", e.remote.retry.initial_backoff.count()},
          {"max_backoff_ms", e.remote.retry.max_backoff.count()}}}}},
      {"clustering", {{"theta_coarse", cfg.theta_coarse}, {"theta_fine", cfg.theta_fine}}},
      {"alignment", {{"min_agreement", cfg.min_agreement}, {"min_coverage", cfg.min_coverage}}},
      {"labeler",
       {{"mode", l.mode},
        {"url", l.chat.url},
        {"model", l.chat.model},
        {"timeout_ms", l.chat.timeout.count()},
        {"max_retries", l.chat.retry.max_retries},
        {"backoff_ms", l.chat.retry.initial_backoff.count()},
        {"max_backoff_ms", l.chat.retry.max_backoff.count()},
        {"prompt_file", l.prompt_file},
        {"max_tokens", l.max_tokens},
        {"max_in_flight", l.max_in_flight},
        {"skip_passed", l.skip_passed},
        {"input_example", l.input_example},
        {"output_example", l.output_example}}},
      {"view",
       {{"color_incorrect", cfg.view.colors.incorrect.hex()},
        {"color_correct", cfg.view.colors.correct.hex()},
        {"page_size", cfg.view.page_size}}},
      {"service",
       {{"session_timeout_s", cfg.service.session_timeout.count()},
        {"cors_origin", cfg.service.cors_origin}}},
  };
}

void validate(const RunConfig& cfg) {
  auto fraction = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(name) + " must be in [0, 1]");
  };
  if (!(cfg.theta_coarse > 0.0 && cfg.theta_coarse <= 2.0)) {
    throw ConfigError("clustering.theta_coarse must be in (0, 2]");
  }
  if (!(cfg.theta_fine >= 0.0)) throw ConfigError("clustering.theta_fine must be >= 0");
  if (!(cfg.theta_fine < cfg.theta_coarse)) {
    throw ConfigError("clustering.theta_fine must be smaller than clustering.theta_coarse");
  }
  fraction(cfg.min_agreement, "alignment.min_agreement");
  fraction(cfg.min_coverage, "alignment.min_coverage");
  fraction(cfg.embedding.local.context_decay, "embedding.context_decay");
  if (cfg.embedding.local.dim == 0) throw ConfigError("embedding.dim must be positive");
  if (cfg.embedding.remote.dim == 0) throw ConfigError("embedding.remote.dim must be positive");
  if (cfg.embedding.batch_size == 0) throw ConfigError("embedding.batch_size must be positive");
  if (cfg.embedding.max_in_flight == 0) throw ConfigError("embedding.max_in_flight must be positive");
  if (cfg.embedding.backend != "local" && cfg.embedding.backend != "remote") {
    throw ConfigError("embedding.backend must be 'local' or 'remote'");
  }
  if (cfg.embedding.remote.retry.max_retries < 0 || cfg.labeler.chat.retry.max_retries < 0) {
    throw ConfigError("max_retries must be >= 0");
  }
  if (cfg.labeler.mode != "divergence" && cfg.labeler.mode != "llm") {
    throw ConfigError("labeler.mode must be 'divergence' or 'llm'");
  }
  if (cfg.labeler.max_in_flight == 0) throw ConfigError("labeler.max_in_flight must be positive");
  if (cfg.labeler.max_tokens <= 0) throw ConfigError("labeler.max_tokens must be positive");
  if (cfg.view.page_size == 0) throw ConfigError("view.page_size must be positive");
  if (cfg.service.session_timeout.count() <= 0) {
    throw ConfigError("service.session_timeout_s must be positive");
  }
}

void apply_env_overrides(RunConfig& cfg) {
  if (const char* v = std::getenv("SEMFLOW_EMBED_URL"); v != nullptr && *v != '\0') {
    cfg.embedding.remote.url = v;
  }
  if (const char* v = std::getenv("SEMFLOW_CHAT_URL"); v != nullptr && *v != '\0') {
    cfg.labeler.chat.url = v;
  }
}

}  // namespace semflow
