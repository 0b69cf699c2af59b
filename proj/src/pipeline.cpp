#include "semflow/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>

#include "semflow/aligner.hpp"
#include "semflow/clusterer.hpp"
#include "semflow/embedder.hpp"
#include "semflow/errorlabeler.hpp"
#include "semflow/errors.hpp"
#include "semflow/normalizer.hpp"

namespace semflow {
namespace {

class Stopwatch {
 public:
  explicit Stopwatch(PipelineStats& stats) : stats_(stats) {}
  void lap(std::string stage) {
    const auto now = std::chrono::steady_clock::now();
    stats_.timings.push_back(
        {std::move(stage), std::chrono::duration<double, std::milli>(now - last_).count()});
    last_ = now;
  }

 private:
  PipelineStats& stats_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

template <typename F>
void parallel_for(std::size_t n, std::size_t workers, F&& fn) {
  workers = std::min(std::max<std::size_t>(workers, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) fn(i);
    });
  }
  for (auto& t : threads) t.join();
}

std::optional<std::string> compile_error_of(const Submission& s) {
  auto it = s.meta.find("compile_error");
  if (it == s.meta.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

}  // namespace

PipelineResult run_pipeline(const Corpus& corpus, const RunConfig& cfg, PipelineBackends backends) {
  validate(cfg);
  if (corpus.submissions.empty()) throw EmptyCorpus();
  PipelineResult result;
  PipelineStats& stats = result.stats;
  Stopwatch clock(stats);
  const std::size_t n = corpus.submissions.size();
  stats.submissions = n;

  // Stage 1a: normalization.
  std::vector<std::vector<NormalizedLine>> lines(n);
  for (std::size_t i = 0; i < n; ++i) {
    lines[i] = normalize(corpus.submissions[i], cfg.normalizer);
    stats.lines += lines[i].size();
  }
  clock.lap("normalize");

  // Stage 1b: embedding.
  LocalHashBackend local(cfg.embedding.local);
  std::unique_ptr<RemoteBackend> remote;
  EmbeddingBackend* primary = backends.embedding;
  EmbeddingBackend* fallback = nullptr;
  if (primary == nullptr) {
    if (cfg.embedding.backend == "remote") {
      remote = std::make_unique<RemoteBackend>(cfg.embedding.remote);
      primary = remote.get();
      if (cfg.embedding.fallback_to_local) fallback = &local;
    } else {
      primary = &local;
    }
  } else if (cfg.embedding.fallback_to_local && primary->id() != local.id()) {
    fallback = &local;
  }
  EmbedCorpusResult embedded = embed_corpus(
      lines, *primary, {cfg.embedding.batch_size, cfg.embedding.max_in_flight}, fallback);
  clock.lap("embed");

  // Stage 1c: coarse tags (and Stage 4 fine variants, computed together since
  // both only depend on the vectors).
  const DistinctTable table = dedupe(lines, embedded.vectors);
  embedded.vectors.clear();
  embedded.vectors.shrink_to_fit();
  const ClusterModel model = build_cluster_model(table, cfg.theta_coarse, cfg.theta_fine);
  stats.distinct_lines = table.size();
  stats.tags = model.tags.size();
  for (const auto& v : model.variants) stats.variants += v.size();
  clock.lap("cluster");

  // Stage 2: canonical progression and alignment.
  std::vector<std::vector<TagId>> tag_seqs(n);
  std::vector<std::vector<TagId>> correct;
  for (std::size_t i = 0; i < n; ++i) {
    for (int d : table.line_to_distinct[i]) tag_seqs[i].push_back(model.tag_of[d]);
    if (corpus.submissions[i].passed) correct.push_back(tag_seqs[i]);
  }
  const CanonicalProgression progression =
      mine_progression(correct, cfg.min_agreement, cfg.min_coverage);
  std::vector<Alignment> alignments(n);
  for (std::size_t i = 0; i < n; ++i) alignments[i] = align(tag_seqs[i], progression.step_tag);
  stats.steps = progression.size();
  clock.lap("align");

  // Stage 3: line-level error labels.
  std::vector<bool> variant_has_passed_distinct(table.size(), false);
  {
    std::vector<std::vector<bool>> variant_passed(model.tags.size());
    for (std::size_t t = 0; t < model.tags.size(); ++t) {
      variant_passed[t].assign(model.variants[t].size(), false);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!corpus.submissions[i].passed) continue;
      for (int d : table.line_to_distinct[i]) {
        variant_passed[model.tag_of[d]][model.variant_of[d]] = true;
      }
    }
    for (std::size_t d = 0; d < table.size(); ++d) {
      variant_has_passed_distinct[d] = variant_passed[model.tag_of[d]][model.variant_of[d]];
    }
  }

  std::unique_ptr<HttpChatClient> http_chat;
  ChatClient* chat = backends.chat;
  if (cfg.labeler.mode == "llm" && chat == nullptr) {
    http_chat = std::make_unique<HttpChatClient>(cfg.labeler.chat);
    chat = http_chat.get();
  }
  LlmLabelOptions llm_opts;
  if (!cfg.labeler.prompt_file.empty()) {
    llm_opts.prompt = PromptTemplate::from_file(cfg.labeler.prompt_file);
  }
  llm_opts.problem_description = cfg.problem_description;
  llm_opts.input_example = cfg.labeler.input_example;
  llm_opts.output_example = cfg.labeler.output_example;
  llm_opts.max_tokens = cfg.labeler.max_tokens;

  std::vector<std::vector<LineErrorLabel>> labels(n);
  std::vector<LabelerReport> reports(n);
  std::atomic<std::size_t> fallbacks{0};
  auto label_one = [&](std::size_t i) {
    const Submission& sub = corpus.submissions[i];
    std::vector<bool> in_passed;
    in_passed.reserve(lines[i].size());
    for (int d : table.line_to_distinct[i]) in_passed.push_back(variant_has_passed_distinct[d]);

    const bool use_llm = chat != nullptr && !(sub.passed && cfg.labeler.skip_passed);
    if (use_llm) {
      try {
        LabelOutcome out = label_llm(sub, lines[i], compile_error_of(sub), *chat, llm_opts);
        labels[i] = std::move(out.labels);
        reports[i] = std::move(out.report);
        return;
      } catch (const RemoteUnavailable& e) {
        reports[i].parse_status = "unavailable";
        reports[i].warnings.push_back(e.what());
      } catch (const UnparseableResponse& e) {
        reports[i].parse_status = "unparseable";
        reports[i].warnings.push_back(e.what());
      }
      ++fallbacks;
      reports[i].submission_id = sub.id;
      reports[i].labeler = "llm->divergence";
    } else {
      reports[i].submission_id = sub.id;
      reports[i].labeler = "divergence";
      reports[i].parse_status = "n/a";
    }
    labels[i] = label_divergence(sub.passed, lines[i], in_passed);
  };
  parallel_for(n, chat != nullptr ? cfg.labeler.max_in_flight : 1, label_one);
  stats.llm_fallbacks = fallbacks.load();
  for (std::size_t i = 0; i < n; ++i) {
    if (!corpus.submissions[i].passed) continue;
    const int changed = enforce_passed_correct(labels[i]);
    if (changed > 0) {
      stats.passed_overrides += static_cast<std::size_t>(changed);
      reports[i].warnings.push_back("passing submission: " + std::to_string(changed) +
                                    " label(s) overridden to Correct");
    }
  }
  clock.lap("label");

  // Assemble the analysis document.
  Analysis& a = result.analysis;
  a.exercise_id = cfg.exercise_id.empty() ? corpus.exercise_id : cfg.exercise_id;
  a.config = to_json(cfg);
  a.min_agreement = progression.min_agreement;
  a.min_coverage = progression.min_coverage;
  for (std::size_t k = 0; k < progression.size(); ++k) {
    const TagId tag = progression.step_tag[k];
    a.steps.push_back({static_cast<StepId>(k), tag, progression.agreement[k], progression.cohort[k],
                       model.tags[tag].label});
  }
  for (const TagInfo& t : model.tags) {
    TagEntry e{t.id, t.label, t.line_count, {}};
    for (int d : t.members) e.members.push_back(table.lines[d].text);
    a.tags.push_back(std::move(e));
    for (const VariantInfo& v : model.variants[t.id]) {
      VariantEntry ve{v.id, v.display, v.line_count, {}};
      for (int d : v.members) ve.members.push_back(table.lines[d].text);
      a.variants.push_back(std::move(ve));
    }
  }
  a.submissions.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Submission& sub = corpus.submissions[i];
    AnalyzedSubmission as{sub.id, sub.passed, sub.source, {}, alignments[i].matched};
    for (std::size_t j = 0; j < lines[i].size(); ++j) {
      const NormalizedLine& nl = lines[i][j];
      const int d = table.line_to_distinct[i][j];
      as.lines.push_back({nl.text, nl.start_line, nl.end_line, nl.kind, model.tag_of[d],
                          model.variant_id(d), alignments[i].slot[j], labels[i][j]});
    }
    a.submissions.push_back(std::move(as));
  }
  a.reports = std::move(reports);

  std::string labeler_id = "divergence";
  if (chat != nullptr) labeler_id = chat->id() + "+divergence";
  a.provenance = {
      {"seeds", {{"embedding_hash_seed", cfg.embedding.local.seed}}},
      {"thresholds",
       {{"theta_coarse", cfg.theta_coarse},
        {"theta_fine", cfg.theta_fine},
        {"min_agreement", cfg.min_agreement},
        {"min_coverage", cfg.min_coverage},
        {"context_decay", cfg.embedding.local.context_decay}}},
      {"backend_ids",
       {{"embedding", embedded.backend_id},
        {"embedding_fell_back", embedded.fell_back},
        {"labeler", labeler_id},
        {"prompt_version", llm_opts.prompt.version}}},
      {"counts",
       {{"submissions", stats.submissions},
        {"lines", stats.lines},
        {"distinct_lines", stats.distinct_lines},
        {"tags", stats.tags},
        {"variants", stats.variants},
        {"steps", stats.steps},
        {"llm_fallbacks", stats.llm_fallbacks},
        {"passed_overrides", stats.passed_overrides}}},
  };
  clock.lap("assemble");
  return result;
}

}  // namespace semflow
