#include "semflow/corpus.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <unordered_set>

#include "semflow/errors.hpp"
#include "semflow/lexer.hpp"

namespace semflow {
namespace {

using nlohmann::json;

bool blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos;
}

Submission parse_record(const std::string& line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw MalformedRecord(line_no, e.what());
  }
  if (!j.is_object()) throw MalformedRecord(line_no, "record is not an object");

  Submission s;
  auto id = j.find("id");
  if (id == j.end() || !id->is_string()) throw MalformedRecord(line_no, "missing string 'id'");
  s.id = id->get<std::string>();
  if (s.id.empty()) throw MalformedRecord(line_no, "empty 'id'");

  auto source = j.find("source");
  if (source == j.end() || !source->is_string()) {
    throw MalformedRecord(line_no, "missing string 'source'");
  }
  s.source = source->get<std::string>();
  if (blank(s.source)) throw MalformedRecord(line_no, "'source' is blank");

  auto passed = j.find("passed");
  if (passed == j.end() || !passed->is_boolean()) {
    throw MalformedRecord(line_no, "missing boolean 'passed'");
  }
  s.passed = passed->get<bool>();

  if (auto meta = j.find("meta"); meta != j.end() && !meta->is_null()) {
    if (!meta->is_object()) throw MalformedRecord(line_no, "'meta' is not an object");
    for (const auto& [k, v] : meta->items()) {
      s.meta[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
  }
  return s;
}

std::size_t code_points(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

std::string redacted_keeping_newlines(std::string_view content) {
  std::string out(kRedacted);
  out.append(static_cast<std::size_t>(std::count(content.begin(), content.end(), '\n')), '\n');
  return out;
}

// Byte range of the literal's contents, excluding prefix and quotes.
std::pair<std::size_t, std::size_t> string_contents(const Token& t) {
  std::size_t q = t.text.find_first_of("'\"");
  const char quote = t.text[q];
  const bool triple = t.text.compare(q, 3, std::string(3, quote)) == 0 && t.text.size() >= q + 3;
  const std::size_t open = triple ? 3 : 1;
  std::size_t b = q + open;
  std::size_t e = t.text.size();
  if (t.terminated) e -= open;
  if (e < b) e = b;
  return {t.begin + b, t.begin + e};
}

}  // namespace

Corpus ingest(std::istream& in) {
  Corpus corpus;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    Submission s = parse_record(line, line_no);
    if (!seen.insert(s.id).second) throw DuplicateId(s.id);
    corpus.submissions.push_back(std::move(s));
  }
  if (corpus.submissions.empty()) throw EmptyCorpus();
  return corpus;
}

Corpus ingest_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open input file: " + path);
  return ingest(in);
}

std::string scrub_source(std::string_view source, const ScrubOptions& opts) {
  std::string out;
  std::size_t cursor = 0;
  for (const Token& t : lex(source)) {
    std::size_t b = 0, e = 0;
    std::string replacement;
    if (t.kind == TokenKind::Comment) {
      b = t.begin + 1;
      e = t.end;
      if (code_points(source.substr(b, e - b)) <= opts.max_length) continue;
      replacement = std::string(kRedacted);
    } else if (t.kind == TokenKind::String) {
      std::tie(b, e) = string_contents(t);
      std::string_view content = source.substr(b, e - b);
      if (code_points(content) <= opts.max_length) continue;
      replacement = redacted_keeping_newlines(content);
    } else {
      continue;
    }
    out.append(source.substr(cursor, b - cursor));
    out += replacement;
    cursor = e;
  }
  out.append(source.substr(cursor));
  return out;
}

Corpus scrub(const Corpus& corpus, const ScrubOptions& opts) {
  Corpus out = corpus;
  for (auto& s : out.submissions) s.source = scrub_source(s.source, opts);
  return out;
}

void write_jsonl(const Corpus& corpus, std::ostream& out) {
  for (const auto& s : corpus.submissions) {
    json j = {{"id", s.id}, {"source", s.source}, {"passed", s.passed}};
    if (!s.meta.empty()) j["meta"] = s.meta;
    out << j.dump() << '\n';
  }
}

void apply_external_verdicts(Corpus& corpus, const std::string& command) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("semflow-runner-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  for (auto& s : corpus.submissions) {
    const fs::path file = dir / "submission.py";
    {
      std::ofstream f(file, std::ios::binary | std::ios::trunc);
      f << s.source;
    }
    const std::string cmd = command + " '" + file.string() + "' >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    s.passed = status != -1 && WIFEXITED(status) && WEXITSTATUS(status) == 0;
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
}

}  // namespace semflow
