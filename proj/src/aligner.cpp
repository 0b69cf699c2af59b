#include "semflow/aligner.hpp"

#include <map>

#include "semflow/errors.hpp"

namespace semflow {
namespace {

// suffix[i][j] = LCS length of a[i..] and b[j..]; flattened (n+1) x (m+1).
std::vector<int> suffix_table(std::span<const TagId> a, std::span<const TagId> b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<int> t((n + 1) * (m + 1), 0);
  auto at = [&](std::size_t i, std::size_t j) -> int& { return t[i * (m + 1) + j]; };
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      at(i, j) = a[i] == b[j] ? at(i + 1, j + 1) + 1 : std::max(at(i + 1, j), at(i, j + 1));
    }
  }
  return t;
}

}  // namespace

CanonicalProgression mine_progression(const std::vector<std::vector<TagId>>& correct,
                                      double min_agreement, double min_coverage) {
  CanonicalProgression p;
  p.min_agreement = min_agreement;
  p.min_coverage = min_coverage;
  const double total = static_cast<double>(correct.size());
  for (std::size_t k = 0;; ++k) {
    std::map<TagId, int> counts;
    int cohort = 0;
    for (const auto& seq : correct) {
      if (seq.size() > k) {
        ++cohort;
        ++counts[seq[k]];
      }
    }
    if (cohort == 0) break;
    TagId mode = counts.begin()->first;
    int best = counts.begin()->second;
    for (const auto& [tag, c] : counts) {
      if (c > best) {
        best = c;
        mode = tag;
      }
    }
    const double agreement = static_cast<double>(best) / cohort;
    if (k > 0 && (cohort < min_coverage * total || agreement < min_agreement)) break;
    p.step_tag.push_back(mode);
    p.agreement.push_back(agreement);
    p.cohort.push_back(cohort);
  }
  if (p.empty()) throw NoCorrectSolutions();
  return p;
}

std::size_t lcs_length(std::span<const TagId> a, std::span<const TagId> b) {
  if (a.empty() || b.empty()) return 0;
  return static_cast<std::size_t>(suffix_table(a, b)[0]);
}

Alignment align(std::span<const TagId> tags, std::span<const TagId> progression) {
  const std::size_t n = tags.size();
  const std::size_t m = progression.size();
  Alignment out;
  out.slot.assign(n, 0);
  if (n == 0 || m == 0) return out;

  const std::vector<int> t = suffix_table(tags, progression);
  auto at = [&](std::size_t i, std::size_t j) { return t[i * (m + 1) + j]; };

  std::size_t i = 0, j = 0;
  while (at(i, j) > 0) {
    const int need = at(i, j);
    bool found = false;
    for (std::size_t li = i; li < n && !found; ++li) {
      for (std::size_t sj = j; sj < m; ++sj) {
        if (tags[li] == progression[sj] && at(li + 1, sj + 1) + 1 == need) {
          out.matched.emplace_back(static_cast<int>(li), static_cast<StepId>(sj));
          i = li + 1;
          j = sj + 1;
          found = true;
          break;
        }
      }
    }
  }

  StepId current = 0;
  std::size_t next_match = 0;
  for (std::size_t line = 0; line < n; ++line) {
    if (next_match < out.matched.size() &&
        out.matched[next_match].first == static_cast<int>(line)) {
      current = out.matched[next_match].second;
      ++next_match;
    }
    out.slot[line] = current;
  }
  return out;
}

}  // namespace semflow
