#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "semflow/analysis_io.hpp"
#include "semflow/errors.hpp"
#include "semflow/pipeline.hpp"
#include "synth.hpp"

using namespace semflow;

namespace {

const Analysis& sample() {
  static const Analysis a = [] {
    synth::Options o;
    o.submissions = 120;
    o.seed = 3;
    return run_pipeline(synth::make_corpus(o), RunConfig{}).analysis;
  }();
  return a;
}

}  // namespace

TEST_CASE("sha256 of known inputs") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("serialize, parse, serialize is a fixed point") {
  const std::string once = serialize(sample());
  CHECK(once.back() == '\n');
  const Analysis back = analysis_from_json(nlohmann::json::parse(once));
  CHECK(serialize(back) == once);
  REQUIRE(back.submissions.size() == sample().submissions.size());
  CHECK(back.submissions[7].lines.size() == sample().submissions[7].lines.size());
  CHECK(back.submissions[7].lines.at(0).label == sample().submissions[7].lines.at(0).label);
  CHECK(back.variants.size() == sample().variants.size());
  CHECK(back.steps.size() == sample().steps.size());
}

TEST_CASE("the file carries the unfiltered view and provenance") {
  const auto j = to_json(sample());
  for (const char* key : {"schema_version", "config", "provenance", "progression", "tags",
                          "variants", "submissions", "alignments", "labels", "steps"}) {
    INFO(key);
    CHECK(j.contains(key));
  }
  CHECK(j["steps"] == to_json(build_viewmodel(sample()))["steps"]);
  CHECK(j["provenance"].contains("seeds"));
  CHECK(j["provenance"].contains("thresholds"));
  CHECK(j["provenance"].contains("backend_ids"));
}

TEST_CASE("schema mismatches are refused") {
  auto j = to_json(sample());
  j["schema_version"] = kSchemaVersion + 1;
  CHECK_THROWS_AS(analysis_from_json(j), SchemaMismatch);
  CHECK_THROWS_AS(analysis_from_json(nlohmann::json::object()), SchemaMismatch);
  auto k = to_json(sample());
  k["labels"].erase(0);
  CHECK_THROWS_AS(analysis_from_json(k), SchemaMismatch);
}

TEST_CASE("save and load agree on the hash") {
  const auto path = (std::filesystem::temp_directory_path() / "semflow_io_test.json").string();
  save_analysis(sample(), path);
  const auto loaded = load_analysis(path);
  std::ifstream in(path, std::ios::binary);
  const std::string bytes((std::istreambuf_iterator<char>(in)), {});
  CHECK(loaded.hash == sha256_hex(bytes));
  CHECK(serialize(loaded.analysis) == bytes);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_analysis(path), Error);
}
