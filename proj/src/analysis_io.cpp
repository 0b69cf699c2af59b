#include "semflow/analysis_io.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <sstream>

#include "semflow/errors.hpp"

namespace semflow {
namespace {

using nlohmann::json;

json label_to_json(const LineErrorLabel& l) {
  return {{"class", to_string(l.cls)},
          {"kind", l.kind},
          {"message", l.message},
          {"source", to_string(l.source)}};
}

LineErrorLabel label_from_json(const json& j) {
  LineErrorLabel l;
  l.cls = error_class_from_string(j.at("class").get<std::string>());
  l.kind = j.at("kind").get<std::string>();
  l.message = j.at("message").get<std::string>();
  l.source = label_source_from_string(j.at("source").get<std::string>());
  return l;
}

VariantId parse_variant(const json& j) {
  auto id = VariantId::parse(j.get<std::string>());
  if (!id) throw SchemaMismatch("bad variant id: " + j.dump());
  return *id;
}

}  // namespace

json to_json(const Analysis& a, const ColorScale& colors) {
  json steps = json::array();
  for (const auto& s : a.steps) {
    steps.push_back({{"step_id", s.id},
                     {"tag", s.tag},
                     {"agreement", s.agreement},
                     {"cohort", s.cohort},
                     {"label", s.label}});
  }
  json tags = json::array();
  for (const auto& t : a.tags) {
    tags.push_back(
        {{"id", t.id}, {"label", t.label}, {"line_count", t.line_count}, {"members", t.members}});
  }
  json variants = json::array();
  for (const auto& v : a.variants) {
    variants.push_back({{"variant_id", v.id.str()},
                        {"tag", v.id.tag},
                        {"display", v.display},
                        {"line_count", v.line_count},
                        {"members", v.members}});
  }
  json subs = json::array();
  json alignments = json::array();
  json labels = json::array();
  for (const auto& s : a.submissions) {
    json lines = json::array();
    json slots = json::array();
    json line_labels = json::array();
    for (const auto& l : s.lines) {
      lines.push_back({{"text", l.text},
                       {"span", {l.start_line, l.end_line}},
                       {"kind", to_string(l.kind)},
                       {"tag", l.tag},
                       {"variant", l.variant.str()}});
      slots.push_back(l.step);
      line_labels.push_back(label_to_json(l.label));
    }
    subs.push_back(
        {{"id", s.id}, {"passed", s.passed}, {"source", s.source}, {"lines", std::move(lines)}});
    json matched = json::array();
    for (const auto& [j, k] : s.matched) matched.push_back({j, k});
    alignments.push_back(
        {{"submission_id", s.id}, {"matched", std::move(matched)}, {"slots", std::move(slots)}});
    labels.push_back({{"submission_id", s.id}, {"lines", std::move(line_labels)}});
  }
  json reports = json::array();
  for (const auto& r : a.reports) {
    reports.push_back({{"submission_id", r.submission_id},
                       {"labeler", r.labeler},
                       {"transcript", r.transcript},
                       {"parse_status", r.parse_status},
                       {"retries", r.retries},
                       {"warnings", r.warnings}});
  }
  return {{"schema_version", a.schema_version},
          {"exercise_id", a.exercise_id},
          {"config", a.config},
          {"provenance", a.provenance},
          {"progression",
           {{"min_agreement", a.min_agreement},
            {"min_coverage", a.min_coverage},
            {"steps", std::move(steps)}}},
          {"tags", std::move(tags)},
          {"variants", std::move(variants)},
          {"submissions", std::move(subs)},
          {"alignments", std::move(alignments)},
          {"labels", std::move(labels)},
          {"steps", to_json(build_viewmodel(a, colors))["steps"]},
          {"labeler_reports", std::move(reports)}};
}

Analysis analysis_from_json(const json& j) {
  if (!j.is_object() || !j.contains("schema_version")) {
    throw SchemaMismatch("not an analysis file (missing schema_version)");
  }
  const int version = j.at("schema_version").get<int>();
  if (version != kSchemaVersion) {
    throw SchemaMismatch("analysis schema_version " + std::to_string(version) +
                         " is not supported (expected " + std::to_string(kSchemaVersion) + ")");
  }
  try {
    Analysis a;
    a.schema_version = version;
    a.exercise_id = j.at("exercise_id").get<std::string>();
    a.config = j.at("config");
    a.provenance = j.at("provenance");
    const json& prog = j.at("progression");
    a.min_agreement = prog.at("min_agreement").get<double>();
    a.min_coverage = prog.at("min_coverage").get<double>();
    for (const auto& s : prog.at("steps")) {
      a.steps.push_back({s.at("step_id").get<int>(), s.at("tag").get<int>(),
                         s.at("agreement").get<double>(), s.at("cohort").get<int>(),
                         s.at("label").get<std::string>()});
    }
    for (const auto& t : j.at("tags")) {
      a.tags.push_back({t.at("id").get<int>(), t.at("label").get<std::string>(),
                        t.at("line_count").get<int>(),
                        t.at("members").get<std::vector<std::string>>()});
    }
    for (const auto& v : j.at("variants")) {
      a.variants.push_back({parse_variant(v.at("variant_id")), v.at("display").get<std::string>(),
                            v.at("line_count").get<int>(),
                            v.at("members").get<std::vector<std::string>>()});
    }
    const json& subs = j.at("submissions");
    const json& alignments = j.at("alignments");
    const json& labels = j.at("labels");
    if (alignments.size() != subs.size() || labels.size() != subs.size()) {
      throw SchemaMismatch("submissions, alignments and labels differ in length");
    }
    for (std::size_t i = 0; i < subs.size(); ++i) {
      const json& s = subs[i];
      AnalyzedSubmission sub;
      sub.id = s.at("id").get<std::string>();
      sub.passed = s.at("passed").get<bool>();
      sub.source = s.at("source").get<std::string>();
      const json& slots = alignments[i].at("slots");
      const json& line_labels = labels[i].at("lines");
      const json& lines = s.at("lines");
      if (slots.size() != lines.size() || line_labels.size() != lines.size()) {
        throw SchemaMismatch("line count mismatch for submission " + sub.id);
      }
      for (std::size_t k = 0; k < lines.size(); ++k) {
        const json& l = lines[k];
        AnalyzedLine line;
        line.text = l.at("text").get<std::string>();
        line.start_line = l.at("span").at(0).get<int>();
        line.end_line = l.at("span").at(1).get<int>();
        line.kind = statement_kind_from_string(l.at("kind").get<std::string>());
        line.tag = l.at("tag").get<int>();
        line.variant = parse_variant(l.at("variant"));
        line.step = slots[k].get<int>();
        line.label = label_from_json(line_labels[k]);
        sub.lines.push_back(std::move(line));
      }
      for (const auto& m : alignments[i].at("matched")) {
        sub.matched.emplace_back(m.at(0).get<int>(), m.at(1).get<int>());
      }
      a.submissions.push_back(std::move(sub));
    }
    if (auto it = j.find("labeler_reports"); it != j.end()) {
      for (const auto& r : *it) {
        LabelerReport rep;
        rep.submission_id = r.at("submission_id").get<std::string>();
        rep.labeler = r.at("labeler").get<std::string>();
        rep.transcript = r.at("transcript").get<std::vector<std::string>>();
        rep.parse_status = r.at("parse_status").get<std::string>();
        rep.retries = r.at("retries").get<int>();
        rep.warnings = r.at("warnings").get<std::vector<std::string>>();
        a.reports.push_back(std::move(rep));
      }
    }
    return a;
  } catch (const json::exception& e) {
    throw SchemaMismatch(std::string("malformed analysis file: ") + e.what());
  }
}

std::string serialize(const Analysis& analysis, const ColorScale& colors) {
  return to_json(analysis, colors).dump() + "\n";
}

void save_analysis(const Analysis& analysis, const std::string& path, const ColorScale& colors) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write analysis file: " + path);
  out << serialize(analysis, colors);
  if (!out) throw Error("failed writing analysis file: " + path);
}

LoadedAnalysis load_analysis(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("analysis file not found: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string bytes = ss.str();
  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw SchemaMismatch(std::string("analysis file is not valid JSON: ") + e.what());
  }
  return {analysis_from_json(j), sha256_hex(bytes)};
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

}  // namespace semflow
