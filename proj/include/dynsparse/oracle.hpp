#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dynsparse/bank.hpp"
#include "dynsparse/coordinate.hpp"
#include "dynsparse/forest.hpp"
#include "dynsparse/sparsifier.hpp"

namespace dynsparse {

/// Exact mirror of the net graph of a stream, as a dense weighted adjacency matrix.
class ShadowGraph {
 public:
  static constexpr Vertex kDefaultLimit = 256;

  explicit ShadowGraph(Vertex n, Vertex limit = kDefaultLimit) : n_(n), w_(static_cast<std::size_t>(n) * n, 0) {
    if (n > limit) throw ConfigError("shadow graph limited to " + std::to_string(limit) + " vertices");
  }

  Vertex vertices() const { return n_; }

  /// Applies one update with full stream validation.
  void apply(const EdgeUpdate& upd) {
    if (upd.u >= n_ || upd.v >= n_ || upd.u == upd.v) throw StreamViolation("invalid endpoints");
    std::uint64_t& cur = at(upd.u, upd.v);
    if (upd.sign > 0) {
      if (cur != 0) throw StreamViolation("insertion of present edge");
      set(upd.u, upd.v, upd.weight);
      ++m_;
    } else {
      if (cur == 0) throw StreamViolation("deletion of absent edge");
      if (cur != upd.weight) throw StreamViolation("deletion weight differs from insertion weight");
      set(upd.u, upd.v, 0);
      --m_;
    }
  }

  void add_edge(Vertex u, Vertex v, std::uint64_t weight = 1) { apply({u, v, 1, weight}); }

  std::uint64_t weight(Vertex u, Vertex v) const { return w_[static_cast<std::size_t>(u) * n_ + v]; }
  std::uint64_t edge_count() const { return m_; }

  /// Edges as (u, v) with u < v, in index order of u then v.
  std::vector<std::pair<Vertex, Vertex>> edges() const {
    std::vector<std::pair<Vertex, Vertex>> out;
    for (Vertex u = 0; u < n_; ++u)
      for (Vertex v = u + 1; v < n_; ++v)
        if (weight(u, v) != 0) out.emplace_back(u, v);
    return out;
  }

  std::uint64_t degree(Vertex u) const {
    std::uint64_t d = 0;
    for (Vertex v = 0; v < n_; ++v) d += weight(u, v);
    return d;
  }

  /// Connected component labels, smallest member as label.
  std::vector<Vertex> components() const {
    UnionFind uf(n_);
    for (auto [u, v] : edges()) uf.unite(u, v);
    return uf.canonical_labels();
  }

 private:
  std::uint64_t& at(Vertex u, Vertex v) { return w_[static_cast<std::size_t>(u) * n_ + v]; }
  void set(Vertex u, Vertex v, std::uint64_t w) {
    at(u, v) = w;
    at(v, u) = w;
  }

  Vertex n_;
  std::uint64_t m_ = 0;
  std::vector<std::uint64_t> w_;
};

/// Total weight crossing (S, V \ S); in_set[v] marks S.
inline std::uint64_t cut_value(const ShadowGraph& g, const std::vector<bool>& in_set) {
  const Vertex n = g.vertices();
  if (in_set.size() != n) throw ConfigError("cut side has wrong size");
  const auto inside = std::count(in_set.begin(), in_set.end(), true);
  if (inside == 0 || inside == static_cast<std::ptrdiff_t>(n)) throw ConfigError("cut side must be a proper nonempty subset");
  std::uint64_t total = 0;
  for (Vertex u = 0; u < n; ++u) {
    if (!in_set[u]) continue;
    for (Vertex v = 0; v < n; ++v)
      if (!in_set[v]) total += g.weight(u, v);
  }
  return total;
}

/// Maximum u-v flow with edge weights as capacities (shortest augmenting paths).
inline std::uint64_t edge_connectivity(const ShadowGraph& g, Vertex s, Vertex t) {
  if (s == t) throw ConfigError("edge connectivity needs distinct endpoints");
  const Vertex n = g.vertices();
  std::vector<std::int64_t> residual(static_cast<std::size_t>(n) * n);
  for (Vertex u = 0; u < n; ++u)
    for (Vertex v = 0; v < n; ++v) residual[static_cast<std::size_t>(u) * n + v] = static_cast<std::int64_t>(g.weight(u, v));
  auto cap = [&](Vertex u, Vertex v) -> std::int64_t& { return residual[static_cast<std::size_t>(u) * n + v]; };

  std::uint64_t flow = 0;
  std::vector<std::int64_t> parent(n);
  while (true) {
    std::fill(parent.begin(), parent.end(), -1);
    parent[s] = s;
    std::queue<Vertex> q;
    q.push(s);
    while (!q.empty() && parent[t] < 0) {
      const Vertex u = q.front();
      q.pop();
      for (Vertex v = 0; v < n; ++v) {
        if (parent[v] < 0 && cap(u, v) > 0) {
          parent[v] = u;
          q.push(v);
        }
      }
    }
    if (parent[t] < 0) return flow;
    std::int64_t push = std::numeric_limits<std::int64_t>::max();
    for (Vertex v = t; v != s; v = static_cast<Vertex>(parent[v])) push = std::min(push, cap(static_cast<Vertex>(parent[v]), v));
    for (Vertex v = t; v != s; v = static_cast<Vertex>(parent[v])) {
      const auto u = static_cast<Vertex>(parent[v]);
      cap(u, v) -= push;
      cap(v, u) += push;
    }
    flow += static_cast<std::uint64_t>(push);
  }
}

struct MinCut {
  std::uint64_t value = 0;
  std::vector<Vertex> side;  // one shore, subset of the input vertices
};

/// Global minimum cut of the subgraph induced by `vertices` (Stoer-Wagner).
/// Needs at least two vertices.
inline MinCut global_min_cut(const ShadowGraph& g, const std::vector<Vertex>& vertices) {
  const std::size_t k = vertices.size();
  if (k < 2) throw ConfigError("minimum cut needs at least two vertices");
  std::vector<std::vector<std::uint64_t>> w(k, std::vector<std::uint64_t>(k));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) w[i][j] = g.weight(vertices[i], vertices[j]);
  std::vector<std::vector<Vertex>> merged(k);
  for (std::size_t i = 0; i < k; ++i) merged[i] = {vertices[i]};
  std::vector<std::size_t> alive(k);
  std::iota(alive.begin(), alive.end(), 0);

  MinCut best;
  best.value = std::numeric_limits<std::uint64_t>::max();
  while (alive.size() > 1) {
    std::vector<std::uint64_t> conn(k, 0);
    std::vector<bool> added(k, false);
    std::size_t prev = alive[0];
    std::size_t last = alive[0];
    for (std::size_t step = 0; step < alive.size(); ++step) {
      std::size_t pick = k;
      for (std::size_t x : alive)
        if (!added[x] && (pick == k || conn[x] > conn[pick])) pick = x;
      added[pick] = true;
      prev = last;
      last = pick;
      for (std::size_t x : alive)
        if (!added[x]) conn[x] += w[pick][x];
    }
    if (conn[last] < best.value) {
      best.value = conn[last];
      best.side = merged[last];
    }
    for (std::size_t x : alive) {
      w[prev][x] += w[last][x];
      w[x][prev] = w[prev][x];
    }
    merged[prev].insert(merged[prev].end(), merged[last].begin(), merged[last].end());
    alive.erase(std::find(alive.begin(), alive.end(), last));
  }
  return best;
}

/// Strong connectivity s_e of every edge, keyed by (u, v) with u < v. A set whose
/// induced subgraph has minimum cut lambda is lambda-connected, so its edges have
/// s_e >= lambda; splitting along that cut and recursing finds the largest such
/// lambda along the chain of sets containing each edge.
inline std::map<std::pair<Vertex, Vertex>, std::uint64_t> strong_connectivities(const ShadowGraph& g) {
  std::map<std::pair<Vertex, Vertex>, std::uint64_t> s;
  for (auto e : g.edges()) s[e] = 0;

  std::vector<std::vector<Vertex>> work;
  {
    std::map<Vertex, std::vector<Vertex>> comps;
    const auto labels = g.components();
    for (Vertex v = 0; v < g.vertices(); ++v) comps[labels[v]].push_back(v);
    for (auto& [l, members] : comps)
      if (members.size() > 1) work.push_back(std::move(members));
  }
  while (!work.empty()) {
    std::vector<Vertex> set = std::move(work.back());
    work.pop_back();
    const MinCut cut = global_min_cut(g, set);
    for (std::size_t i = 0; i < set.size(); ++i)
      for (std::size_t j = i + 1; j < set.size(); ++j) {
        const Vertex u = std::min(set[i], set[j]);
        const Vertex v = std::max(set[i], set[j]);
        if (g.weight(u, v) != 0) s[{u, v}] = std::max(s[{u, v}], cut.value);
      }
    std::vector<bool> on_side(g.vertices(), false);
    for (Vertex v : cut.side) on_side[v] = true;
    std::vector<Vertex> a;
    std::vector<Vertex> b;
    for (Vertex v : set) (on_side[v] ? a : b).push_back(v);
    // Each shore may itself be disconnected once the cut edges are gone.
    for (auto* shore : {&a, &b}) {
      if (shore->size() < 2) continue;
      UnionFind uf(g.vertices());
      for (std::size_t i = 0; i < shore->size(); ++i)
        for (std::size_t j = i + 1; j < shore->size(); ++j)
          if (g.weight((*shore)[i], (*shore)[j]) != 0) uf.unite((*shore)[i], (*shore)[j]);
      std::map<Vertex, std::vector<Vertex>> parts;
      for (Vertex v : *shore) parts[uf.find(v)].push_back(v);
      for (auto& [r, members] : parts)
        if (members.size() > 1) work.push_back(std::move(members));
    }
  }
  return s;
}

inline std::uint64_t strong_connectivity(const ShadowGraph& g, Vertex u, Vertex v) {
  const auto all = strong_connectivities(g);
  auto it = all.find({std::min(u, v), std::max(u, v)});
  if (it == all.end()) throw ConfigError("strong connectivity asked for a non-edge");
  return it->second;
}

struct CutErrorReport {
  double max_error = 0;
  double mean_error = 0;
  std::uint64_t cuts = 0;  // nonzero cuts compared
  bool exhaustive = false;
};

namespace detail {

inline std::vector<double> dense_weights(Vertex n, const std::vector<SparsifierEdge>& edges) {
  std::vector<double> w(static_cast<std::size_t>(n) * n, 0.0);
  for (const auto& e : edges) {
    const double x = e.weight.value();
    w[static_cast<std::size_t>(e.u) * n + e.v] += x;
    w[static_cast<std::size_t>(e.v) * n + e.u] += x;
  }
  return w;
}

}  // namespace detail

/// Largest relative cut error of the sparsifier against the graph, over all cuts
/// for n <= 16 and over `samples` random cuts (shore size uniform in [1, n-1])
/// otherwise. Cuts of weight zero in the graph are skipped.
inline CutErrorReport all_cuts_error(const ShadowGraph& g, const std::vector<SparsifierEdge>& sparsifier,
                                     std::uint64_t rng_seed = 1, std::uint64_t samples = 10000) {
  const Vertex n = g.vertices();
  const std::vector<double> ws = detail::dense_weights(n, sparsifier);
  CutErrorReport rep;
  double sum = 0;
  auto measure = [&](const std::vector<bool>& side) {
    double truth = 0;
    double approx = 0;
    for (Vertex u = 0; u < n; ++u) {
      if (!side[u]) continue;
      for (Vertex v = 0; v < n; ++v) {
        if (side[v]) continue;
        truth += static_cast<double>(g.weight(u, v));
        approx += ws[static_cast<std::size_t>(u) * n + v];
      }
    }
    if (truth == 0) return;
    const double err = std::abs(approx - truth) / truth;
    rep.max_error = std::max(rep.max_error, err);
    sum += err;
    ++rep.cuts;
  };

  if (n < 2) return rep;
  std::vector<bool> side(n, false);
  if (n <= 16) {
    rep.exhaustive = true;
    // Vertex n-1 stays outside, so each cut is visited once.
    const std::uint32_t limit = 1U << (n - 1);
    for (std::uint32_t mask = 1; mask < limit; ++mask) {
      for (Vertex v = 0; v + 1 < n; ++v) side[v] = (mask >> v) & 1U;
      measure(side);
    }
  } else {
    std::mt19937_64 rng(rng_seed);
    std::vector<Vertex> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::uniform_int_distribution<Vertex> size_dist(1, n - 1);
    for (std::uint64_t i = 0; i < samples; ++i) {
      std::shuffle(perm.begin(), perm.end(), rng);
      const Vertex k = size_dist(rng);
      std::fill(side.begin(), side.end(), false);
      for (Vertex j = 0; j < k; ++j) side[perm[j]] = true;
      measure(side);
    }
  }
  rep.mean_error = rep.cuts == 0 ? 0 : sum / static_cast<double>(rep.cuts);
  return rep;
}

class PeelFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WeakPartition {
  std::vector<std::vector<Vertex>> sets;  // W_1, W_2, ...
  bool within_log_bound = true;          // sets.size() <= max(1, ceil(log2 n))
};

/// Greedy peel of a graph whose edges are all k-weak: each round removes every
/// vertex whose degree into the remaining vertices is at most 2k.
inline WeakPartition w_partition_check(const ShadowGraph& g, std::uint64_t k) {
  const Vertex n = g.vertices();
  std::vector<bool> alive(n, true);
  Vertex left = n;
  WeakPartition out;
  while (left > 0) {
    std::vector<Vertex> round;
    for (Vertex u = 0; u < n; ++u) {
      if (!alive[u]) continue;
      std::uint64_t d = 0;
      for (Vertex v = 0; v < n; ++v)
        if (alive[v]) d += g.weight(u, v);
      if (d <= 2 * k) round.push_back(u);
    }
    if (round.empty()) {
      throw PeelFailure("no vertex of degree at most " + std::to_string(2 * k) + " among " + std::to_string(left) +
                        " remaining");
    }
    for (Vertex u : round) alive[u] = false;
    left -= static_cast<Vertex>(round.size());
    out.sets.push_back(std::move(round));
  }
  int bound = 0;
  while ((Vertex{1} << bound) < n) ++bound;
  out.within_log_bound = out.sets.size() <= static_cast<std::size_t>(std::max(bound, 1));
  return out;
}

}  // namespace dynsparse
