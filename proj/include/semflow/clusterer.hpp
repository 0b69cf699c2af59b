#pragma once

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "semflow/embedder.hpp"
#include "semflow/normalizer.hpp"

namespace semflow {

using TagId = int;

struct VariantId {
  TagId tag = 0;
  int index = 0;

  auto operator<=>(const VariantId&) const = default;
  std::string str() const { return std::to_string(tag) + "." + std::to_string(index); }
  static std::optional<VariantId> parse(std::string_view s);
};

// Position of a line in the corpus: submission ordinal and line index.
struct LineRef {
  int submission = 0;
  int index = 0;
  bool operator==(const LineRef&) const = default;
};

struct DistinctLine {
  std::string text;
  StatementKind kind = StatementKind::Other;
  std::vector<float> vector;  // unit norm
  std::vector<LineRef> members;

  int frequency() const noexcept { return static_cast<int>(members.size()); }
};

struct DistinctTable {
  std::vector<DistinctLine> lines;  // first-occurrence order
  std::vector<std::vector<int>> line_to_distinct;  // [submission][index]

  std::size_t size() const noexcept { return lines.size(); }
};

// Groups lines by exact (text, kind). `vectors` is parallel to the flattened
// `lines`. Differing vectors for one text are averaged and renormalized.
DistinctTable dedupe(const std::vector<std::vector<NormalizedLine>>& lines,
                     const std::vector<LineVector>& vectors);

double cosine_distance(std::span<const float> a, std::span<const float> b);

struct TagInfo {
  TagId id = 0;
  std::vector<int> members;  // distinct-line indices, in visit order
  std::vector<float> centroid;
  std::string label;
  int line_count = 0;
};

struct VariantInfo {
  VariantId id;
  std::vector<int> members;
  std::string display;
  int line_count = 0;
};

struct ClusterModel {
  std::vector<TagId> tag_of;  // per distinct line
  std::vector<int> variant_of;  // per distinct line, index within its tag
  std::vector<TagInfo> tags;
  std::vector<std::vector<VariantInfo>> variants;  // [tag][index]
  double theta_coarse = 0.25;
  double theta_fine = 0.10;

  VariantId variant_id(int distinct) const { return {tag_of[distinct], variant_of[distinct]}; }
  const VariantInfo* find_variant(const VariantId& id) const;
};

// Leader clustering over the given distinct lines, visited by frequency
// descending then text ascending. Returns a cluster index per visited item
// (aligned with `items`) and the cluster founders' order defines the ids.
struct LeaderResult {
  std::vector<int> assignment;
  std::vector<std::vector<int>> clusters;  // item positions per cluster
  std::vector<std::vector<float>> centroids;
};
LeaderResult leader_cluster(const DistinctTable& table, std::span<const int> items,
                            double threshold);

std::vector<TagInfo> cluster_coarse(const DistinctTable& table, double theta_coarse,
                                    std::vector<TagId>& tag_of);

// Throws ConfigError unless theta_fine < theta_coarse.
std::vector<VariantInfo> cluster_fine(const DistinctTable& table, const TagInfo& tag,
                                      double theta_fine, double theta_coarse,
                                      std::vector<int>& variant_of);

ClusterModel build_cluster_model(const DistinctTable& table, double theta_coarse,
                                 double theta_fine);

}  // namespace semflow
