#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dynsparse/coordinate.hpp"
#include "dynsparse/l0_sampler.hpp"

namespace dynsparse {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    std::size_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) x = std::exchange(parent_[x], root);
    return root;
  }

  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

  std::size_t size() const { return parent_.size(); }

  /// Component label per element: the smallest element of its class.
  std::vector<Vertex> canonical_labels() {
    std::vector<Vertex> label(parent_.size());
    std::vector<Vertex> first(parent_.size(), static_cast<Vertex>(-1));
    for (std::size_t v = 0; v < parent_.size(); ++v) {
      auto r = find(v);
      if (first[r] == static_cast<Vertex>(-1)) first[r] = static_cast<Vertex>(v);
      label[v] = first[r];
    }
    return label;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

struct ForestParams {
  Vertex vertices = 0;
  std::uint32_t rounds = 1;  // Boruvka rounds, each with its own sampler copy
  std::uint32_t levels = 1;  // l0 subsample levels per ladder
  std::uint64_t seed = 0;
  std::uint32_t ladders = 3;  // independent level ladders per l0-sampler

  friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

/// Rounds used by the Boruvka extraction: ceil(log2 n) plus two rounds of slack.
inline std::uint32_t forest_rounds_for(Vertex n) {
  std::uint32_t lg = 0;
  while ((std::uint64_t{1} << lg) < n) ++lg;
  return lg + 2;
}

/// One vertex's samplers for every Boruvka round, stored in a single block laid
/// out as [round][ladder][level]. All samplers share the stride, which grows to
/// the deepest level touched; cells past a sampler's own depth stay zero.
class ForestRow {
 public:
  ForestRow() = default;
  ForestRow(std::uint32_t rounds, std::uint32_t ladders) : rounds_(rounds), ladders_(ladders) {}

  std::uint32_t rounds() const { return rounds_; }

  /// Copy of the sampler of round r.
  L0Sampler sampler(std::uint32_t r) const {
    if (cells_.empty()) return L0Sampler{};
    return L0Sampler(ladders_, stride_, &cells_[block(r)]);
  }

  /// Adds the l0 sampler of round r into `sum`.
  void add_to(L0Sampler& sum, std::uint32_t r) const {
    if (!cells_.empty()) sum += sampler(r);
  }

  std::uint32_t apply(std::uint32_t r, const L0Sampler::Hashed& h, CoordIndex index, std::int64_t delta) {
    grow(L0Sampler::max_depth(h) + 1);
    return L0Sampler::apply_cells(&cells_[block(r)], stride_, h, index, delta);
  }

  bool all_zero() const {
    return std::all_of(cells_.begin(), cells_.end(), [](const TesterCell& c) { return c.is_zero(); });
  }

  std::uint64_t materialized_cells() const { return cells_.size(); }

  friend bool operator==(const ForestRow& a, const ForestRow& b) {
    if (a.rounds_ != b.rounds_) return a.all_zero() && b.all_zero();
    for (std::uint32_t r = 0; r < a.rounds_; ++r)
      if (!(a.sampler(r) == b.sampler(r))) return false;
    return true;
  }

 private:
  std::size_t block(std::uint32_t r) const { return static_cast<std::size_t>(r) * ladders_ * stride_; }

  void grow(std::uint32_t levels) {
    if (!cells_.empty() && levels <= stride_) return;
    const std::uint32_t stride = std::max({levels, stride_, 2u});
    std::vector<TesterCell> grown(static_cast<std::size_t>(rounds_) * ladders_ * stride);
    for (std::size_t sampler = 0; !cells_.empty() && sampler < std::size_t{rounds_} * ladders_; ++sampler)
      std::copy_n(&cells_[sampler * stride_], stride_, &grown[sampler * stride]);
    cells_ = std::move(grown);
    stride_ = stride;
  }

  std::uint32_t rounds_ = 0;
  std::uint32_t ladders_ = 0;
  std::uint32_t stride_ = 0;
  std::vector<TesterCell> cells_;
};

/// Spanning-forest sketch of one sampled graph: per vertex, one l0-sampler per
/// Boruvka round over that vertex's signed incidence row. Rows of untouched
/// vertices are not materialized.
class ForestSketch {
 public:
  using Row = ForestRow;

  ForestSketch() = default;
  explicit ForestSketch(const ForestParams& params) : params_(params) {
    if (params_.ladders == 0) throw ConfigError("l0-samplers need at least one ladder");
    if (params_.ladders > L0Sampler::kMaxLadders) throw ConfigError("l0-samplers take at most 8 ladders");
    round_params_.reserve(params_.rounds);
    for (std::uint32_t r = 0; r < params_.rounds; ++r) {
      round_params_.push_back(
          L0Params{params_.levels, mix_keys(params_.seed, r), pair_count(params_.vertices), params_.ladders});
      round_keys_.push_back(L0Sampler::keys(round_params_.back()));
    }
  }

  const ForestParams& params() const { return params_; }
  const L0Params& round_params(std::uint32_t round) const { return round_params_[round]; }

  /// Applies delta times the incidence column of {u, v}: +delta on the smaller
  /// endpoint's row, -delta on the larger one's. Returns tester cells touched.
  std::uint64_t update_edge(Vertex u, Vertex v, std::int64_t delta) {
    const CoordIndex index = encode_edge(u, v);
    Row& lo = touch(std::min(u, v));
    Row& hi = touch(std::max(u, v));
    std::uint64_t touched = 0;
    for (std::uint32_t r = 0; r < params_.rounds; ++r) {
      const L0Sampler::Hashed h = L0Sampler::hash(round_params_[r], round_keys_[r], index);
      touched += lo.apply(r, h, index, delta);
      touched += hi.apply(r, h, index, -delta);
    }
    return touched;
  }

  const Row* row(Vertex v) const {
    auto it = rows_.find(v);
    return it == rows_.end() ? nullptr : &it->second;
  }

  const std::unordered_map<Vertex, Row>& rows() const { return rows_; }

  std::uint64_t materialized_words() const {
    std::uint64_t cells = 0;
    for (const auto& [v, row] : rows_) cells += row.materialized_cells();
    return cells * 3;
  }

  std::uint64_t nominal_words() const {
    return static_cast<std::uint64_t>(params_.vertices) * params_.rounds * params_.ladders * params_.levels * 3;
  }

  friend bool operator==(const ForestSketch& a, const ForestSketch& b) {
    if (!(a.params_ == b.params_)) return false;
    return covered_by(a, b) && covered_by(b, a);
  }

 private:
  Row& touch(Vertex v) { return rows_.try_emplace(v, params_.rounds, params_.ladders).first->second; }

  // Every row of x equals the corresponding row of y (a missing row counts as zero).
  static bool covered_by(const ForestSketch& x, const ForestSketch& y) {
    for (const auto& [v, row] : x.rows_) {
      const Row* other = y.row(v);
      if (other == nullptr) {
        if (!row.all_zero()) return false;
      } else if (!(row == *other)) {
        return false;
      }
    }
    return true;
  }

  ForestParams params_;
  std::vector<L0Params> round_params_;
  std::vector<L0Sampler::Keys> round_keys_;
  std::unordered_map<Vertex, Row> rows_;
};

struct SpanningForest {
  std::vector<std::pair<Vertex, Vertex>> edges;  // (v, w) with v < w
  std::vector<Vertex> component;                 // canonical label (smallest member) per vertex
  std::uint32_t rounds_used = 0;
  bool exhausted = false;  // some component still had outgoing edges after the last round
};

/// Boruvka over the sketch: each round sums that round's samplers over the members
/// of every current component (internal edges cancel), draws one outgoing edge per
/// component and merges along the drawn edges.
inline SpanningForest spanning_forest(const ForestSketch& sketch) {
  const Vertex n = sketch.params().vertices;
  UnionFind uf(n);
  SpanningForest out;

  std::vector<Vertex> touched;
  touched.reserve(sketch.rows().size());
  for (const auto& [v, row] : sketch.rows()) touched.push_back(v);
  std::sort(touched.begin(), touched.end());

  auto group_components = [&]() {
    std::map<std::size_t, std::vector<Vertex>> groups;
    for (Vertex v : touched) groups[uf.find(v)].push_back(v);
    return groups;
  };
  auto component_sum = [&](const std::vector<Vertex>& members, std::uint32_t round) {
    L0Sampler sum;
    for (Vertex v : members) sketch.row(v)->add_to(sum, round);
    return sum;
  };

  bool settled = false;
  for (std::uint32_t round = 0; round < sketch.params().rounds && !settled; ++round) {
    out.rounds_used = round + 1;
    std::vector<std::pair<Vertex, Vertex>> picks;
    bool any_active = false;
    const auto& rp = sketch.round_params(round);
    for (const auto& [root, members] : group_components()) {
      const L0Sampler sum = component_sum(members, round);
      if (sum.is_zero()) continue;
      any_active = true;
      const auto drawn = sum.sample(rp);
      if (!drawn) continue;  // this component waits for the next round
      const auto [x, y] = decode_edge(drawn->index);
      if (x >= n || y >= n) continue;
      const bool x_in = uf.find(x) == root;
      const bool y_in = uf.find(y) == root;
      if (x_in != y_in) picks.emplace_back(x, y);
    }
    if (!any_active) {
      settled = true;
      break;
    }
    for (const auto& [x, y] : picks) {
      if (uf.unite(x, y)) out.edges.emplace_back(x, y);
    }
  }
  if (!settled && sketch.params().rounds > 0) {
    const std::uint32_t last = sketch.params().rounds - 1;
    for (const auto& [root, members] : group_components()) {
      if (!component_sum(members, last).is_zero()) {
        out.exhausted = true;
        break;
      }
    }
  }
  out.component = uf.canonical_labels();
  return out;
}

}  // namespace dynsparse
