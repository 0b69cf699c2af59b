#pragma once

#include <span>
#include <utility>
#include <vector>

#include "semflow/clusterer.hpp"

namespace semflow {

using StepId = int;

struct CanonicalProgression {
  std::vector<TagId> step_tag;      // indexed by StepId
  std::vector<double> agreement;    // fraction of the cohort holding the mode
  std::vector<int> cohort;          // correct solutions with > step lines
  double min_agreement = 0.30;
  double min_coverage = 0.20;

  std::size_t size() const noexcept { return step_tag.size(); }
  bool empty() const noexcept { return step_tag.empty(); }
};

// T_k is the most common tag at line k over correct solutions long enough to
// have a line k (ties go to the lower tag id). Mining stops at the first k
// whose cohort is below min_coverage of all correct solutions or whose mode
// agreement is below min_agreement. The first step is always kept when any
// correct solution has a line. Throws NoCorrectSolutions otherwise.
CanonicalProgression mine_progression(const std::vector<std::vector<TagId>>& correct_sequences,
                                      double min_agreement, double min_coverage);

struct Alignment {
  std::vector<std::pair<int, StepId>> matched;  // (line index, step), strictly increasing
  std::vector<StepId> slot;                     // per line

  bool operator==(const Alignment&) const = default;
};

// Length of the longest common subsequence.
std::size_t lcs_length(std::span<const TagId> a, std::span<const TagId> b);

// LCS alignment of a submission's tags against the progression. Among maximal
// alignments, picks the lexicographically smallest line-index set and, for
// each line, the earliest feasible step.
Alignment align(std::span<const TagId> tags, std::span<const TagId> progression);

}  // namespace semflow
