#include "semflow/clusterer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>

#include "semflow/errors.hpp"

namespace semflow {
namespace {

double dot(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
  return s;
}

std::vector<float> normalized(const std::vector<double>& v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  const double inv = sq > 0.0 ? 1.0 / std::sqrt(sq) : 0.0;
  std::vector<float> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i] * inv);
  return out;
}

std::vector<int> visit_order(const DistinctTable& table, std::span<const int> items) {
  std::vector<int> order(items.begin(), items.end());
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const auto& la = table.lines[a];
    const auto& lb = table.lines[b];
    if (la.frequency() != lb.frequency()) return la.frequency() > lb.frequency();
    if (la.text != lb.text) return la.text < lb.text;
    return la.kind < lb.kind;
  });
  return order;
}

}  // namespace

std::optional<VariantId> VariantId::parse(std::string_view s) {
  const auto dot_pos = s.find('.');
  if (dot_pos == std::string_view::npos) return std::nullopt;
  VariantId id;
  auto parse_int = [](std::string_view part, int& out) {
    if (part.empty()) return false;
    auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
    return ec == std::errc{} && p == part.data() + part.size() && out >= 0;
  };
  if (!parse_int(s.substr(0, dot_pos), id.tag) || !parse_int(s.substr(dot_pos + 1), id.index)) {
    return std::nullopt;
  }
  return id;
}

double cosine_distance(std::span<const float> a, std::span<const float> b) {
  return 1.0 - dot(a, b);
}

DistinctTable dedupe(const std::vector<std::vector<NormalizedLine>>& lines,
                     const std::vector<LineVector>& vectors) {
  DistinctTable table;
  std::map<std::pair<std::string, StatementKind>, int> index;
  std::vector<std::vector<double>> sums;
  std::vector<bool> all_same;
  std::size_t flat = 0;
  table.line_to_distinct.resize(lines.size());
  for (std::size_t s = 0; s < lines.size(); ++s) {
    table.line_to_distinct[s].reserve(lines[s].size());
    for (const NormalizedLine& line : lines[s]) {
      if (flat >= vectors.size()) throw Error("fewer vectors than lines");
      const auto& vec = vectors[flat++].values;
      auto [it, inserted] = index.try_emplace({line.text, line.kind}, static_cast<int>(table.size()));
      const int d = it->second;
      if (inserted) {
        table.lines.push_back({line.text, line.kind, vec, {}});
        sums.emplace_back(vec.begin(), vec.end());
        all_same.push_back(true);
      } else {
        auto& sum = sums[d];
        if (vec != table.lines[d].vector) all_same[d] = false;
        for (std::size_t i = 0; i < vec.size(); ++i) sum[i] += vec[i];
      }
      table.lines[d].members.push_back({static_cast<int>(s), line.index});
      table.line_to_distinct[s].push_back(d);
    }
  }
  if (flat != vectors.size()) throw Error("more vectors than lines");
  for (std::size_t d = 0; d < table.size(); ++d) {
    if (!all_same[d]) table.lines[d].vector = normalized(sums[d]);
  }
  return table;
}

const VariantInfo* ClusterModel::find_variant(const VariantId& id) const {
  if (id.tag < 0 || id.tag >= static_cast<int>(variants.size())) return nullptr;
  const auto& vs = variants[id.tag];
  if (id.index < 0 || id.index >= static_cast<int>(vs.size())) return nullptr;
  return &vs[id.index];
}

LeaderResult leader_cluster(const DistinctTable& table, std::span<const int> items,
                            double threshold) {
  LeaderResult r;
  r.assignment.assign(items.size(), -1);
  std::vector<int> position(table.size(), -1);
  for (std::size_t i = 0; i < items.size(); ++i) position[items[i]] = static_cast<int>(i);

  std::vector<std::vector<double>> sums;
  for (int d : visit_order(table, items)) {
    const DistinctLine& line = table.lines[d];
    int best = -1;
    double best_dist = 0.0;
    for (std::size_t c = 0; c < r.centroids.size(); ++c) {
      const double dist = cosine_distance(line.vector, r.centroids[c]);
      if (best < 0 || dist < best_dist) {
        best = static_cast<int>(c);
        best_dist = dist;
      }
    }
    const double weight = line.frequency();
    if (best >= 0 && best_dist <= threshold) {
      auto& sum = sums[best];
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += weight * line.vector[i];
      r.centroids[best] = normalized(sum);
    } else {
      best = static_cast<int>(r.centroids.size());
      std::vector<double> sum(line.vector.size());
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = weight * line.vector[i];
      r.centroids.push_back(normalized(sum));
      sums.push_back(std::move(sum));
      r.clusters.emplace_back();
    }
    r.assignment[position[d]] = best;
    r.clusters[best].push_back(position[d]);
  }
  return r;
}

std::vector<TagInfo> cluster_coarse(const DistinctTable& table, double theta_coarse,
                                    std::vector<TagId>& tag_of) {
  std::vector<int> items(table.size());
  std::iota(items.begin(), items.end(), 0);
  LeaderResult r = leader_cluster(table, items, theta_coarse);

  tag_of.assign(table.size(), -1);
  std::vector<TagInfo> tags(r.clusters.size());
  for (std::size_t t = 0; t < tags.size(); ++t) {
    TagInfo& tag = tags[t];
    tag.id = static_cast<TagId>(t);
    tag.centroid = std::move(r.centroids[t]);
    for (int pos : r.clusters[t]) {
      const int d = items[pos];
      tag.members.push_back(d);
      tag.line_count += table.lines[d].frequency();
      tag_of[d] = tag.id;
    }
    // Founder is the first visited member: highest frequency, then text.
    tag.label = table.lines[tag.members.front()].text;
  }
  return tags;
}

std::vector<VariantInfo> cluster_fine(const DistinctTable& table, const TagInfo& tag,
                                      double theta_fine, double theta_coarse,
                                      std::vector<int>& variant_of) {
  if (!(theta_fine < theta_coarse)) {
    throw ConfigError("theta_fine must be smaller than theta_coarse");
  }
  LeaderResult r = leader_cluster(table, tag.members, theta_fine);
  if (variant_of.size() < table.size()) variant_of.resize(table.size(), -1);
  std::vector<VariantInfo> out(r.clusters.size());
  for (std::size_t v = 0; v < out.size(); ++v) {
    VariantInfo& info = out[v];
    info.id = {tag.id, static_cast<int>(v)};
    for (int pos : r.clusters[v]) {
      const int d = tag.members[pos];
      info.members.push_back(d);
      info.line_count += table.lines[d].frequency();
      variant_of[d] = static_cast<int>(v);
    }
    info.display = table.lines[info.members.front()].text;
  }
  return out;
}

ClusterModel build_cluster_model(const DistinctTable& table, double theta_coarse,
                                 double theta_fine) {
  if (!(theta_fine < theta_coarse)) {
    throw ConfigError("theta_fine must be smaller than theta_coarse");
  }
  ClusterModel model;
  model.theta_coarse = theta_coarse;
  model.theta_fine = theta_fine;
  model.tags = cluster_coarse(table, theta_coarse, model.tag_of);
  model.variant_of.assign(table.size(), -1);
  model.variants.reserve(model.tags.size());
  for (const TagInfo& tag : model.tags) {
    model.variants.push_back(cluster_fine(table, tag, theta_fine, theta_coarse, model.variant_of));
  }
  return model;
}

}  // namespace semflow
