#include <catch_amalgamated.hpp>

#include <functional>
#include <random>

#include "oracles.hpp"
#include "semflow/aligner.hpp"
#include "semflow/errors.hpp"

using namespace semflow;

namespace {

using Seq = std::vector<int>;

Seq random_seq(std::mt19937_64& rng, int max_len, int alphabet) {
  Seq s(rng() % static_cast<unsigned>(max_len + 1));
  for (auto& x : s) x = static_cast<int>(rng() % static_cast<unsigned>(alphabet));
  return s;
}

// Expected alignment by enumeration: the lexicographically smallest set of
// line indices of maximal size that embeds into the progression, embedded at
// the earliest steps.
std::vector<std::pair<int, int>> leftmost_alignment(const Seq& tags, const Seq& prog) {
  const int n = static_cast<int>(tags.size());
  const int L = oracle::lcs_dp(tags, prog);
  std::vector<std::pair<int, int>> best;
  if (L == 0) return best;
  std::vector<int> chosen;
  std::vector<int> best_idx;
  // Depth-first in increasing index order finds the smallest set first.
  std::function<bool(int)> dfs = [&](int from) -> bool {
    if (static_cast<int>(chosen.size()) == L) {
      std::size_t pos = 0;
      for (int i : chosen) {
        while (pos < prog.size() && prog[pos] != tags[i]) ++pos;
        if (pos == prog.size()) return false;
        ++pos;
      }
      best_idx = chosen;
      return true;
    }
    for (int i = from; i < n; ++i) {
      chosen.push_back(i);
      if (dfs(i + 1)) return true;
      chosen.pop_back();
    }
    return false;
  };
  dfs(0);
  std::size_t pos = 0;
  for (int i : best_idx) {
    while (prog[pos] != tags[i]) ++pos;
    best.emplace_back(i, static_cast<int>(pos));
    ++pos;
  }
  return best;
}

}  // namespace

TEST_CASE("progression: worked example") {
  const int A = 0, B = 1, C = 2, D = 3;
  const auto p = mine_progression({{A, B, C}, {A, B, C}, {A, D, C}}, 0.5, 0.5);
  CHECK(p.step_tag == std::vector<TagId>{A, B, C});
  CHECK(p.agreement[1] == Catch::Approx(2.0 / 3.0));
  CHECK(p.cohort == std::vector<int>{3, 3, 3});
}

TEST_CASE("progression: single solution and no solutions") {
  CHECK(mine_progression({{4, 2, 9, 2}}, 0.3, 0.2).step_tag == std::vector<TagId>{4, 2, 9, 2});
  CHECK_THROWS_AS(mine_progression({}, 0.3, 0.2), NoCorrectSolutions);
  CHECK_THROWS_AS(mine_progression({{}, {}}, 0.3, 0.2), NoCorrectSolutions);
}

TEST_CASE("progression: ties go to the lower tag; cutoffs stop the scan") {
  CHECK(mine_progression({{5, 1}, {3, 2}}, 0.0, 0.0).step_tag == std::vector<TagId>{3, 1});
  // Index 1 agreement 1/3 < 0.5 stops after the first step.
  CHECK(mine_progression({{0, 1}, {0, 2}, {0, 3}}, 0.5, 0.0).step_tag == std::vector<TagId>{0});
  // Cohort at index 2 is 1 of 4 < 0.5.
  CHECK(mine_progression({{0, 1, 2}, {0, 1}, {0, 1}, {0, 1}}, 0.0, 0.5).step_tag ==
        std::vector<TagId>{0, 1});
  // The first step stays even when it misses the thresholds.
  CHECK(mine_progression({{0}, {1}, {2}}, 0.9, 0.0).step_tag == std::vector<TagId>{0});
}

TEST_CASE("progression matches the column-mode oracle") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::vector<int>> seqs(1 + rng() % 12);
    for (auto& s : seqs) s = random_seq(rng, 8, 1 + static_cast<int>(rng() % 5));
    const double alpha = static_cast<double>(rng() % 11) / 10.0;
    const double beta = static_cast<double>(rng() % 11) / 10.0;
    const auto expected = oracle::progression(seqs, alpha, beta);
    if (expected.tags.empty()) {
      CHECK_THROWS_AS(mine_progression(seqs, alpha, beta), NoCorrectSolutions);
      continue;
    }
    const auto got = mine_progression(seqs, alpha, beta);
    REQUIRE(got.step_tag == expected.tags);
    REQUIRE(got.cohort == expected.cohort);
    REQUIRE(got.agreement == expected.agreement);
  }
}

TEST_CASE("align: worked examples") {
  const int A = 0, B = 1, C = 2, D = 3;
  const auto a = align(std::vector<TagId>{A, B, C, D}, std::vector<TagId>{A, C, D});
  CHECK(a.matched == std::vector<std::pair<int, StepId>>{{0, 0}, {2, 1}, {3, 2}});
  CHECK(a.slot == std::vector<StepId>{0, 0, 1, 2});

  const auto same = align(std::vector<TagId>{A, B, C}, std::vector<TagId>{A, B, C});
  CHECK(same.matched == std::vector<std::pair<int, StepId>>{{0, 0}, {1, 1}, {2, 2}});

  const auto disjoint = align(std::vector<TagId>{7, 8, 9}, std::vector<TagId>{A, B});
  CHECK(disjoint.matched.empty());
  CHECK(disjoint.slot == std::vector<StepId>{0, 0, 0});

  // Unmatched leading lines attach to the first step.
  const auto lead = align(std::vector<TagId>{9, 9, B}, std::vector<TagId>{A, B});
  CHECK(lead.slot == std::vector<StepId>{0, 0, 1});

  CHECK(align(std::vector<TagId>{}, std::vector<TagId>{A}).slot.empty());
}

TEST_CASE("align: leftmost tie-break among equal-length matches") {
  // Both line 0 and line 1 could match the single A.
  const auto a = align(std::vector<TagId>{0, 0}, std::vector<TagId>{0});
  CHECK(a.matched == std::vector<std::pair<int, StepId>>{{0, 0}});
  CHECK(a.slot == std::vector<StepId>{0, 0});
  // One line, two candidate steps: earliest step.
  const auto b = align(std::vector<TagId>{5}, std::vector<TagId>{5, 5});
  CHECK(b.matched == std::vector<std::pair<int, StepId>>{{0, 0}});
}

TEST_CASE("LCS agrees with enumeration and the prefix DP") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 2000; ++trial) {
    const Seq a = random_seq(rng, 10, 4);
    const Seq b = random_seq(rng, 10, 4);
    const auto got = lcs_length(a, b);
    REQUIRE(got == static_cast<std::size_t>(oracle::lcs_enumerate(a, b)));
    REQUIRE(got == static_cast<std::size_t>(oracle::lcs_dp(a, b)));
  }
}

TEST_CASE("alignments are maximal, leftmost and monotone") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 1500; ++trial) {
    const Seq tags = random_seq(rng, 9, 4);
    Seq prog = random_seq(rng, 7, 4);
    if (prog.empty()) prog.push_back(0);
    const auto a = align(tags, prog);
    REQUIRE(a.slot.size() == tags.size());
    std::vector<std::pair<int, int>> pairs(a.matched.begin(), a.matched.end());
    REQUIRE(oracle::is_common_subsequence(tags, prog, pairs));
    REQUIRE(static_cast<int>(pairs.size()) == oracle::lcs_dp(tags, prog));
    REQUIRE(pairs == leftmost_alignment(tags, prog));
    for (std::size_t j = 1; j < a.slot.size(); ++j) REQUIRE(a.slot[j] >= a.slot[j - 1]);
    for (const auto& [j, k] : a.matched) REQUIRE(a.slot[j] == k);
  }
}
