#include <CLI11.hpp>
#include <httplib.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "semflow/analysis_io.hpp"
#include "semflow/config.hpp"
#include "semflow/errors.hpp"
#include "semflow/pipeline.hpp"
#include "semflow/service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace semflow;

namespace {

enum Exit { kOk = 0, kInputError = 1, kNoCorrect = 2, kRemoteFailure = 3 };

std::string read_text(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Config embedded in an analysis file, or defaults for older/hand-made files.
RunConfig config_of(const Analysis& a) {
  try {
    return config_from_json(a.config);
  } catch (const ConfigError&) {
    return RunConfig{};
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

int cmd_analyze(const std::string& input, const std::string& config_path, const std::string& out) {
  RunConfig cfg;
  Corpus corpus;
  try {
    cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    apply_env_overrides(cfg);
    corpus = ingest_file(input);
    if (!cfg.runner_command.empty()) apply_external_verdicts(corpus, cfg.runner_command);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  PipelineResult result;
  try {
    result = run_pipeline(corpus, cfg);
  } catch (const NoCorrectSolutions& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNoCorrect;
  } catch (const RemoteUnavailable& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRemoteFailure;
  } catch (const DimMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRemoteFailure;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  try {
    save_analysis(result.analysis, out, cfg.view.colors);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  const auto& st = result.stats;
  double total = 0.0;
  for (const auto& t : st.timings) {
    std::printf("%-10s %10.1f ms\n", t.stage.c_str(), t.millis);
    total += t.millis;
  }
  std::printf("%-10s %10.1f ms\n", "total", total);
  std::printf("submissions=%zu lines=%zu distinct_lines=%zu tags=%zu variants=%zu steps=%zu\n",
              st.submissions, st.lines, st.distinct_lines, st.tags, st.variants, st.steps);
  if (st.llm_fallbacks > 0) std::printf("llm_fallbacks=%zu\n", st.llm_fallbacks);
  if (st.passed_overrides > 0) std::printf("passed_overrides=%zu\n", st.passed_overrides);
  std::printf("wrote %s\n", out.c_str());
  return kOk;
}

int cmd_serve(const std::string& analysis_path, const std::string& config_path,
              const std::string& host, int port) {
  LoadedAnalysis loaded;
  RunConfig cfg;
  try {
    loaded = load_analysis(analysis_path);
    cfg = config_path.empty() ? config_of(loaded.analysis) : load_config(config_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  const std::size_t n = loaded.analysis.submissions.size();
  ExplorationService service(std::move(loaded.analysis), loaded.hash, cfg.view, cfg.service);
  httplib::Server server;
  service.mount(server);
  if (port == 0) {
    port = server.bind_to_any_port(host);
  } else if (!server.bind_to_port(host, port)) {
    port = -1;
  }
  if (port < 0) {
    std::cerr << "error: cannot bind " << host << "\n";
    return kInputError;
  }
  std::printf("serving %zu submissions on http://%s:%d (analysis %s)\n", n, host.c_str(), port,
              service.analysis_hash().c_str());
  std::fflush(stdout);
  server.listen_after_bind();
  return kOk;
}

void export_json(const Analysis& a, const RunConfig& cfg, const std::string& out) {
  json subs = json::array();
  for (const auto& s : a.submissions) {
    json lines = json::array();
    for (const auto& l : s.lines) {
      lines.push_back({{"text", l.text},
                       {"span", {l.start_line, l.end_line}},
                       {"variant", l.variant.str()},
                       {"step", l.step},
                       {"class", to_string(l.label.cls)},
                       {"kind", l.label.kind}});
    }
    subs.push_back({{"id", s.id},
                    {"passed", s.passed},
                    {"source", scrub_source(s.source, cfg.scrub)},
                    {"lines", std::move(lines)}});
  }
  json doc = to_json(a, cfg.view.colors);
  doc["submissions"] = std::move(subs);
  doc.erase("labeler_reports");  // transcripts carry unscrubbed code
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + out);
  f << doc.dump(2) << "\n";
}

void export_csv(const Analysis& a, const RunConfig& cfg, const std::string& dir) {
  fs::create_directories(dir);
  const ViewModel vm = build_viewmodel(a, cfg.view.colors);
  std::ofstream steps(fs::path(dir) / "steps.csv", std::ios::binary | std::ios::trunc);
  if (!steps) throw Error("cannot write steps.csv in " + dir);
  steps << "step_id,tag,label,agreement,cohort,member_lines,correct,incorrect,ratio,color\n";
  for (std::size_t k = 0; k < vm.steps.size(); ++k) {
    const auto& s = vm.steps[k];
    const auto& info = a.steps[k];
    steps << s.id << ',' << s.tag << ',' << csv_field(s.display_label) << ','
          << fmt_double(info.agreement) << ',' << info.cohort << ',' << s.member_lines << ','
          << s.correct << ',' << s.incorrect << ',' << fmt_double(s.ratio) << ','
          << s.color.hex() << "\n";
  }

  struct Counts {
    int correct = 0, incorrect = 0, submissions = 0;
  };
  std::map<VariantId, Counts> counts;
  for (const auto& sub : a.submissions) {
    std::set<VariantId> seen;
    for (const auto& l : sub.lines) {
      auto& c = counts[l.variant];
      (l.label.cls == ErrorClass::Correct ? c.correct : c.incorrect)++;
      if (seen.insert(l.variant).second) ++c.submissions;
    }
  }
  std::map<TagId, StepId> step_of_tag;
  for (const auto& s : a.steps) step_of_tag.emplace(s.tag, s.id);
  std::ofstream vars(fs::path(dir) / "variants.csv", std::ios::binary | std::ios::trunc);
  if (!vars) throw Error("cannot write variants.csv in " + dir);
  vars << "variant_id,tag,step_id,display,line_count,correct,incorrect,submission_count\n";
  for (const auto& v : a.variants) {
    const Counts c = counts[v.id];
    auto st = step_of_tag.find(v.id.tag);
    vars << v.id.str() << ',' << v.id.tag << ','
         << (st == step_of_tag.end() ? std::string() : std::to_string(st->second)) << ','
         << csv_field(v.display) << ',' << v.line_count << ',' << c.correct << ','
         << c.incorrect << ',' << c.submissions << "\n";
  }
}

int cmd_export(const std::string& analysis_path, const std::string& format, std::string out) {
  try {
    LoadedAnalysis loaded = load_analysis(analysis_path);
    const RunConfig cfg = config_of(loaded.analysis);
    if (format == "json") {
      if (out.empty()) out = "export.json";
      export_json(loaded.analysis, cfg, out);
    } else {
      if (out.empty()) out = "export";
      export_csv(loaded.analysis, cfg, out);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  std::printf("wrote %s\n", out.c_str());
  return kOk;
}

int cmd_check_config(const std::string& path) {
  try {
    RunConfig cfg = load_config(path);
    apply_env_overrides(cfg);
    std::cout << to_json(cfg).dump(2) << "\n";
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kOk;
}

int cmd_prompt(const std::string& source_path, const std::string& config_path,
               const std::string& compile_error) {
  try {
    const RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    const PromptTemplate tpl = cfg.labeler.prompt_file.empty()
                                   ? PromptTemplate::builtin()
                                   : PromptTemplate::from_file(cfg.labeler.prompt_file);
    PromptInputs in{cfg.problem_description, cfg.labeler.input_example,
                    cfg.labeler.output_example, compile_error, read_text(source_path)};
    std::cout << render_prompt(tpl, in);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kOk;
}

int cmd_parse_response(const std::string& path, const std::string& source_path) {
  try {
    const ParsedErrors parsed = parse_llm_output(read_text(path));
    json records = json::array();
    for (const auto& r : parsed.records) {
      records.push_back({{"number", r.number},
                         {"kind", r.kind},
                         {"class", to_string(classify_error_kind(r.kind))},
                         {"message", r.message},
                         {"line", r.line},
                         {"code", r.code}});
    }
    json out = {{"records", records}, {"warnings", parsed.warnings}};
    if (!source_path.empty()) {
      const Submission sub{"harness", read_text(source_path), false, {}};
      const auto lines = normalize(sub, NormalizerOptions{});
      std::vector<std::string> warnings;
      const auto labels = labels_from_records(parsed.records, lines, warnings);
      json mapped = json::array();
      for (std::size_t j = 0; j < lines.size(); ++j) {
        mapped.push_back(json{{"index", j},
                          {"text", lines[j].text},
                          {"span", {lines[j].start_line, lines[j].end_line}},
                          {"class", to_string(labels[j].cls)},
                          {"kind", labels[j].kind}});
      }
      out["lines"] = std::move(mapped);
      for (auto& w : warnings) out["warnings"].push_back(std::move(w));
    }
    std::cout << out.dump(2) << "\n";
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semflow: line-level aggregation and exploration of student submissions"};
  app.require_subcommand(1);

  std::string input, config, out, analysis, format = "json", host = "127.0.0.1";
  std::string source, response, compile_error;
  int port = 8080;

  auto* analyze = app.add_subcommand("analyze", "Run the pipeline and write an analysis file");
  analyze->add_option("--input", input, "Submissions, one JSON object per line")
      ->required()
      ->check(CLI::ExistingFile);
  analyze->add_option("--config", config, "Run configuration (JSON)");
  analyze->add_option("--out", out, "Analysis file to write")->default_val("analysis.json");

  auto* serve = app.add_subcommand("serve", "Serve an analysis over HTTP");
  serve->add_option("--analysis", analysis)->required();
  serve->add_option("--port", port, "0 picks a free port")->default_val(8080);
  serve->add_option("--host", host)->default_val("127.0.0.1");
  serve->add_option("--config", config, "Overrides the config stored in the analysis");

  auto* exp = app.add_subcommand("export", "Export an analysis with scrubbed sources");
  exp->add_option("--analysis", analysis)->required();
  exp->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}))->default_val("json");
  exp->add_option("--out", out, "File (json) or directory (csv)");

  auto* check = app.add_subcommand("check-config", "Validate a config file and print it");
  check->add_option("file", config)->required();

  auto* prompt = app.add_subcommand("prompt", "Render the labeler prompt for one source file");
  prompt->add_option("--source", source)->required();
  prompt->add_option("--config", config);
  prompt->add_option("--compile-error", compile_error);

  auto* parse = app.add_subcommand("parse-response", "Parse a labeler response");
  parse->add_option("--response", response, "File or - for stdin")->required();
  parse->add_option("--source", source, "Map records onto this source's normalized lines");

  CLI11_PARSE(app, argc, argv);

  if (*analyze) return cmd_analyze(input, config, out);
  if (*serve) return cmd_serve(analysis, config, host, port);
  if (*exp) return cmd_export(analysis, format, out);
  if (*check) return cmd_check_config(config);
  if (*prompt) return cmd_prompt(source, config, compile_error);
  if (*parse) return cmd_parse_response(response, source);
  return kInputError;
}
