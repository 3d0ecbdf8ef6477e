#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dynsparse/coordinate.hpp"
#include "dynsparse/forest.hpp"

namespace dynsparse {

/// Nested partitions V_0, V_1, ..., V_max of the vertex set. labels[a][v] is the
/// smallest vertex in v's class of V_a; each partition refines the previous one.
class LevelStructure {
 public:
  LevelStructure() = default;
  LevelStructure(Vertex n, std::vector<std::vector<Vertex>> labels) : n_(n), labels_(std::move(labels)) {}

  Vertex vertices() const { return n_; }
  int max_level() const { return static_cast<int>(labels_.size()) - 1; }

  /// Class label of v in V_a. Above max_level every vertex is a singleton.
  Vertex label(int a, Vertex v) const { return a > max_level() ? v : labels_[a][v]; }
  const std::vector<Vertex>& labels(int a) const { return labels_[a]; }

  bool same_class(int a, Vertex u, Vertex v) const { return label(a, u) == label(a, v); }

  /// Largest a with u, v in one class of V_a; nullopt when they are not even in one
  /// class of V_0 (different connected components).
  std::optional<int> edge_level(Vertex u, Vertex v) const {
    if (labels_.empty() || !same_class(0, u, v)) return std::nullopt;
    int a = 0;
    while (a < max_level() && same_class(a + 1, u, v)) ++a;
    return a;
  }

  /// Largest a with v not a singleton in V_a; 0 for isolated vertices.
  int vertex_level(Vertex v) const {
    int best = 0;
    for (int a = 0; a <= max_level(); ++a) {
      if (class_size(a, label(a, v)) > 1) best = a;
      else break;
    }
    return best;
  }

  std::size_t class_size(int a, Vertex label_vertex) const {
    build_sizes();
    return sizes_[a][label_vertex];
  }

  /// Members of each class of V_a, keyed by label.
  std::map<Vertex, std::vector<Vertex>> classes(int a) const {
    std::map<Vertex, std::vector<Vertex>> out;
    for (Vertex v = 0; v < n_; ++v) out[label(a, v)].push_back(v);
    return out;
  }

  /// Copies whose forest extraction ran out of rounds, as (a, b) pairs.
  std::vector<std::pair<int, std::uint32_t>> degraded_copies;
  /// Levels where every copy ran out of rounds (treated as all singletons).
  std::vector<int> failed_levels;

 private:
  void build_sizes() const {
    if (!sizes_.empty()) return;
    sizes_.assign(labels_.size(), std::vector<std::size_t>(n_, 0));
    for (std::size_t a = 0; a < labels_.size(); ++a)
      for (Vertex v = 0; v < n_; ++v) ++sizes_[a][labels_[a][v]];
  }

  Vertex n_ = 0;
  std::vector<std::vector<Vertex>> labels_;
  mutable std::vector<std::vector<std::size_t>> sizes_;
};

/// Common refinement of two labelings, with canonical (smallest member) labels.
inline std::vector<Vertex> intersect_partitions(const std::vector<Vertex>& x, const std::vector<Vertex>& y) {
  std::map<std::pair<Vertex, Vertex>, Vertex> first;
  std::vector<Vertex> out(x.size());
  for (Vertex v = 0; v < x.size(); ++v) out[v] = first.try_emplace({x[v], y[v]}, v).first->second;
  return out;
}

/// Builds V_0..V_max from the connectivity sketches. `forest(a, b)` must return the
/// sketch of copy b at exponent a. A copy whose extraction exhausts its rounds is
/// skipped; a level with no usable copy becomes all singletons, which only lowers
/// levels (and so raises sampling rates).
template <class ForestAccess>
LevelStructure build_levels(Vertex n, int max_level, std::uint32_t copies, ForestAccess&& forest) {
  std::vector<std::vector<Vertex>> labels;
  labels.reserve(max_level + 1);
  std::vector<std::pair<int, std::uint32_t>> degraded;
  std::vector<int> failed;

  std::vector<Vertex> singletons(n);
  for (Vertex v = 0; v < n; ++v) singletons[v] = v;

  for (int a = 0; a <= max_level; ++a) {
    // Once everything is a singleton, every later level is too.
    if (a > 0 && labels.back() == singletons) {
      labels.push_back(singletons);
      continue;
    }
    std::optional<std::vector<Vertex>> level;
    for (std::uint32_t b = 0; b < copies; ++b) {
      if (level && *level == singletons) break;
      SpanningForest f = spanning_forest(forest(a, b));
      if (f.exhausted) {
        degraded.emplace_back(a, b);
        continue;
      }
      level = level ? intersect_partitions(*level, f.component) : std::move(f.component);
    }
    if (!level) {
      failed.push_back(a);
      level = singletons;
    }
    if (a > 0) level = intersect_partitions(labels.back(), *level);
    labels.push_back(std::move(*level));
  }
  LevelStructure ls(n, std::move(labels));
  ls.degraded_copies = std::move(degraded);
  ls.failed_levels = std::move(failed);
  return ls;
}

}  // namespace dynsparse
