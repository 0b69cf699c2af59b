#include <catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "semflow/clusterer.hpp"
#include "semflow/config.hpp"
#include "semflow/embedder.hpp"
#include "semflow/errors.hpp"
#include "synth.hpp"

using namespace semflow;

namespace {

std::vector<float> unit_at(double angle, std::size_t dim = 4) {
  std::vector<float> v(dim, 0.0f);
  v[0] = static_cast<float>(std::cos(angle));
  v[1] = static_cast<float>(std::sin(angle));
  return v;
}

// Angle whose cosine distance from the x axis is `d`.
double angle_for(double d) { return std::acos(1.0 - d); }

DistinctTable table_of(const std::vector<std::pair<std::string, std::pair<std::vector<float>, int>>>& rows) {
  DistinctTable t;
  int sub = 0;
  for (const auto& [text, vf] : rows) {
    DistinctLine l{text, StatementKind::Assign, vf.first, {}};
    for (int k = 0; k < vf.second; ++k) l.members.push_back({sub++, 0});
    t.lines.push_back(std::move(l));
  }
  return t;
}

struct Built {
  std::vector<std::vector<NormalizedLine>> lines;
  DistinctTable table;
  ClusterModel model;
};

Built build(std::size_t n, std::uint64_t seed) {
  synth::Options o;
  o.submissions = n;
  o.seed = seed;
  Built b;
  for (const auto& s : synth::make_corpus(o).submissions) b.lines.push_back(normalize(s, {}));
  LocalHashBackend be;
  const auto vecs = embed_corpus(b.lines, be, {});
  b.table = dedupe(b.lines, vecs.vectors);
  b.model = build_cluster_model(b.table, 0.25, 0.10);
  return b;
}

}  // namespace

TEST_CASE("single distinct line forms one tag and one variant") {
  const auto t = table_of({{"v0 = 1", {unit_at(0), 3}}});
  const auto m = build_cluster_model(t, 0.25, 0.10);
  REQUIRE(m.tags.size() == 1);
  CHECK(m.tags[0].label == "v0 = 1");
  CHECK(m.tags[0].line_count == 3);
  REQUIRE(m.variants[0].size() == 1);
  CHECK(m.variant_id(0) == VariantId{0, 0});
}

TEST_CASE("controlled angles split variants inside one tag") {
  const auto t = table_of({{"a", {unit_at(0), 2}}, {"b", {unit_at(angle_for(0.18)), 1}}});
  CHECK(cosine_distance(t.lines[0].vector, t.lines[1].vector) == Catch::Approx(0.18).margin(1e-6));
  const auto m = build_cluster_model(t, 0.25, 0.10);
  REQUIRE(m.tags.size() == 1);
  CHECK(m.tag_of[0] == m.tag_of[1]);
  CHECK(m.variants[0].size() == 2);
  CHECK(m.variant_of[0] != m.variant_of[1]);
}

TEST_CASE("distances beyond the coarse threshold found new tags") {
  const auto t = table_of({{"a", {unit_at(0), 2}}, {"b", {unit_at(angle_for(0.4)), 1}}});
  const auto m = build_cluster_model(t, 0.25, 0.10);
  CHECK(m.tags.size() == 2);
}

TEST_CASE("visit order is frequency then text, ties go to the lowest tag") {
  // "zzz" sits at exactly the same distance from both founders.
  const float a = 0.9f;
  const float b = std::sqrt(1.0f - a * a);
  const auto t = table_of({{"zz", {{a, b, 0, 0}, 1}},
                           {"aa", {{a, -b, 0, 0}, 1}},
                           {"zzz", {{1, 0, 0, 0}, 1}}});
  const auto m = build_cluster_model(t, 0.25, 0.05);
  REQUIRE(m.tags.size() == 2);
  CHECK(m.tags[0].label == "aa");
  CHECK(m.tags[1].label == "zz");
  CHECK(m.tag_of[2] == 0);
}

TEST_CASE("the most frequent member labels the tag") {
  const auto t = table_of({{"rare", {unit_at(0.05), 1}}, {"common", {unit_at(0), 5}}});
  const auto m = build_cluster_model(t, 0.25, 0.10);
  REQUIRE(m.tags.size() == 1);
  CHECK(m.tags[0].label == "common");
}

TEST_CASE("fine threshold must be below the coarse one") {
  const auto t = table_of({{"a", {unit_at(0), 1}}});
  CHECK_THROWS_AS(build_cluster_model(t, 0.25, 0.25), ConfigError);
  CHECK_THROWS_AS(build_cluster_model(t, 0.25, 0.30), ConfigError);
  std::vector<TagId> tag_of;
  const auto tags = cluster_coarse(t, 0.25, tag_of);
  std::vector<int> variant_of;
  CHECK_THROWS_AS(cluster_fine(t, tags[0], 0.25, 0.25, variant_of), ConfigError);
  RunConfig cfg;
  cfg.theta_fine = cfg.theta_coarse;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
}

TEST_CASE("dedupe groups by text and kind and averages differing vectors") {
  std::vector<std::vector<NormalizedLine>> lines = {
      {{"a", 0, "v0 = 1", 0, 0, StatementKind::Assign, 0, false}},
      {{"b", 0, "v0 = 1", 0, 0, StatementKind::Assign, 0, false},
       {"b", 1, "v1 = 2", 1, 1, StatementKind::Assign, 0, false}}};
  std::vector<LineVector> vecs = {{"a", 0, unit_at(0), "x"},
                                  {"b", 0, unit_at(std::acos(0.0)), "x"},
                                  {"b", 1, unit_at(1.0), "x"}};
  const auto t = dedupe(lines, vecs);
  REQUIRE(t.size() == 2);
  CHECK(t.lines[0].frequency() == 2);
  CHECK(t.lines[0].vector[0] == Catch::Approx(std::sqrt(0.5)));
  CHECK(t.lines[0].vector[1] == Catch::Approx(std::sqrt(0.5)));
  CHECK(t.line_to_distinct[1] == std::vector<int>{0, 1});
}

TEST_CASE("all-unique lines keep the table at line count") {
  std::vector<std::vector<NormalizedLine>> lines(1);
  std::vector<LineVector> vecs;
  for (int i = 0; i < 10; ++i) {
    lines[0].push_back({"a", i, "v0 = " + std::to_string(i), i, i, StatementKind::Assign, 0, false});
    vecs.push_back({"a", i, unit_at(i * 0.1), "x"});
  }
  CHECK(dedupe(lines, vecs).size() == 10);
}

TEST_CASE("partition, refinement and duplicate laws on a generated corpus") {
  const Built b = build(400, 21);
  std::size_t total_lines = 0;
  for (const auto& s : b.lines) total_lines += s.size();
  CHECK(b.table.size() <= total_lines);

  std::size_t tag_sum = 0;
  for (const auto& tag : b.model.tags) {
    tag_sum += tag.members.size();
    std::size_t var_sum = 0;
    int var_lines = 0;
    for (const auto& v : b.model.variants[tag.id]) {
      var_sum += v.members.size();
      var_lines += v.line_count;
      CHECK(v.id.tag == tag.id);
      for (int d : v.members) CHECK(b.model.tag_of[d] == tag.id);
    }
    CHECK(var_sum == tag.members.size());
    CHECK(var_lines == tag.line_count);
  }
  CHECK(tag_sum == b.table.size());

  std::map<std::string, std::pair<TagId, int>> seen;
  for (std::size_t s = 0; s < b.lines.size(); ++s) {
    for (std::size_t j = 0; j < b.lines[s].size(); ++j) {
      const int d = b.table.line_to_distinct[s][j];
      const auto key = std::make_pair(b.model.tag_of[d], b.model.variant_of[d]);
      auto [it, fresh] = seen.emplace(b.lines[s][j].text, key);
      if (!fresh) CHECK(it->second == key);
    }
  }
}

TEST_CASE("clustering is deterministic") {
  const Built a = build(150, 4);
  const Built b = build(150, 4);
  CHECK(a.model.tag_of == b.model.tag_of);
  CHECK(a.model.variant_of == b.model.variant_of);
}

TEST_CASE("members sit within the threshold of their cluster at assignment time") {
  const Built b = build(200, 8);
  // Replay the coarse pass and check each join against the centroid it saw.
  std::vector<int> items(b.table.size());
  for (std::size_t i = 0; i < items.size(); ++i) items[i] = static_cast<int>(i);
  const auto r = leader_cluster(b.table, items, 0.25);
  for (std::size_t c = 0; c < r.clusters.size(); ++c) {
    std::vector<double> sum(b.table.lines[0].vector.size(), 0.0);
    for (std::size_t k = 0; k < r.clusters[c].size(); ++k) {
      const auto& line = b.table.lines[items[r.clusters[c][k]]];
      if (k > 0) {
        double sq = 0;
        for (double x : sum) sq += x * x;
        std::vector<float> centroid(sum.size());
        for (std::size_t i = 0; i < sum.size(); ++i) centroid[i] = static_cast<float>(sum[i] / std::sqrt(sq));
        CHECK(cosine_distance(line.vector, centroid) <= 0.25 + 1e-9);
      }
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += line.frequency() * line.vector[i];
    }
  }
}

TEST_CASE("variant ids print and parse") {
  CHECK(VariantId{3, 12}.str() == "3.12");
  CHECK(VariantId::parse("3.12") == VariantId{3, 12});
  CHECK_FALSE(VariantId::parse("3"));
  CHECK_FALSE(VariantId::parse("a.b"));
  CHECK_FALSE(VariantId::parse("-1.2"));
  CHECK_FALSE(VariantId::parse("1.2.3"));
}
