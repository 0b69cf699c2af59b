#pragma once

#include <string>
#include <vector>

#include "semflow/aggregator.hpp"
#include "semflow/analysis.hpp"

namespace oracle {

// Longest common subsequence by trying every subset of the shorter sequence,
// largest first. Only usable for short inputs (<= 20 elements).
int lcs_enumerate(const std::vector<int>& a, const std::vector<int>& b);

// Textbook prefix-table LCS.
int lcs_dp(const std::vector<int>& a, const std::vector<int>& b);

// Is `sub` a subsequence of `seq` at the given strictly increasing positions?
bool is_common_subsequence(const std::vector<int>& a, const std::vector<int>& b,
                           const std::vector<std::pair<int, int>>& pairs);

struct Progression {
  std::vector<int> tags;
  std::vector<double> agreement;
  std::vector<int> cohort;
  bool operator==(const Progression&) const = default;
};

// Column-wise mode by sorting each column. The first step is kept even when
// it misses the thresholds; an empty result means "no correct solutions".
Progression progression(const std::vector<std::vector<int>>& correct, double alpha, double beta);

// Submissions (by position) containing a matching line for every term.
std::vector<bool> active_scan(const semflow::Analysis& a, const semflow::FilterStack& stack);

// Conservation laws over a view model; returns human-readable violations.
std::vector<std::string> conservation_violations(const semflow::Analysis& a,
                                                 const semflow::ViewModel& vm);

}  // namespace oracle
