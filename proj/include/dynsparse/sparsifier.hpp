#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dynsparse/bank.hpp"
#include "dynsparse/config.hpp"
#include "dynsparse/levels.hpp"
#include "dynsparse/randomness.hpp"

namespace dynsparse {

enum class FailurePolicy {
  kRaise,       // whp failures abort extraction with context
  kBestEffort,  // whp failures fall back to exact exponent-0 sketches and are reported as warnings
};

class PipelineError : public std::runtime_error {
 public:
  enum class Kind { kPartitionStall, kDecodeFailure };

  PipelineError(Kind kind, int level, int round, Vertex supernode, const std::string& detail)
      : std::runtime_error(describe(kind, level, round, supernode, detail)),
        kind_(kind),
        level_(level),
        round_(round),
        supernode_(supernode) {}

  Kind kind() const { return kind_; }
  int level() const { return level_; }
  int round() const { return round_; }
  Vertex supernode() const { return supernode_; }

 private:
  static std::string describe(Kind kind, int level, int round, Vertex supernode, const std::string& detail) {
    std::string s = kind == Kind::kPartitionStall ? "partition stall" : "decode failure";
    s += " at level " + std::to_string(level) + ", round " + std::to_string(round) + ", supernode " +
         std::to_string(supernode);
    if (!detail.empty()) s += ": " + detail;
    return s;
  }

  Kind kind_;
  int level_;
  int round_;
  Vertex supernode_;
};

struct SparsifyOptions {
  FailurePolicy policy = FailurePolicy::kRaise;
  /// Skip levels a with V_a == V_{a+1}: no edge can have such a level, so the
  /// output is unchanged. Turn off to exercise partitioning on every level.
  bool skip_inert_levels = true;
};

struct SparsifierEdge {
  Vertex u = 0;  // u < v
  Vertex v = 0;
  Rational weight = 1;
  int level = 0;
  Vertex controller = 0;  // endpoint whose g* value decided the edge

  friend bool operator==(const SparsifierEdge&, const SparsifierEdge&) = default;
};

struct LevelDiagnostics {
  int level = 0;
  std::size_t supernodes = 0;
  std::size_t rounds_used = 0;
  bool stalled = false;
  std::size_t decode_failures = 0;
  std::size_t fallback_supernodes = 0;
};

struct Sparsifier {
  std::vector<SparsifierEdge> edges;  // sorted by (u, v), no duplicates
  std::uint64_t seed = 0;
  Rational epsilon;
  std::vector<std::uint64_t> level_counts;  // emitted edges per level
  std::uint64_t duplicates = 0;             // edges claimed twice (should stay 0)
  std::vector<LevelDiagnostics> diagnostics;
  std::vector<std::string> warnings;
};

/// Peeling order of the supernodes of H_a (components of V_{a+1}).
struct LevelPartition {
  int level = 0;
  std::vector<std::vector<Vertex>> rounds;  // U^1_a, U^2_a, ... as supernode labels
  std::vector<Vertex> stuck;                // supernodes never peeled (stall)
  bool stalled = false;
  std::size_t decode_failures = 0;
};

namespace detail {

/// Supernodes of H_a: classes of V_{a+1}, keyed by their label.
class Supernodes {
 public:
  Supernodes(const LevelStructure& ls, int a) : ls_(&ls), a_(a), members_(ls.classes(a + 1)) {}

  Vertex of(Vertex v) const { return ls_->label(a_ + 1, v); }
  const std::vector<Vertex>& members(Vertex x) const { return members_.at(x); }
  const std::map<Vertex, std::vector<Vertex>>& all() const { return members_; }

  /// The endpoint of edge `index` lying outside supernode x.
  Vertex outside_endpoint(Vertex x, CoordIndex index) const {
    const auto [p, q] = decode_edge(index);
    return of(p) == x ? q : p;
  }
  Vertex inside_endpoint(Vertex x, CoordIndex index) const {
    const auto [p, q] = decode_edge(index);
    return of(p) == x ? p : q;
  }

 private:
  const LevelStructure* ls_;
  int a_;
  std::map<Vertex, std::vector<Vertex>> members_;
};

}  // namespace detail

/// Splits the supernodes of H_a into rounds U^1, U^2, ... Round r keeps the
/// supernodes whose estimated degree in the partition sample d^r (at exponent
/// max(a - shift, 0)) is at most the peeling threshold, then decodes their later
/// copies S^j, j > r, and subtracts the recovered edges from the supernodes still
/// waiting, so later rounds see degrees into the remaining graph only.
inline LevelPartition partition_level(const SketchBank& bank, const LevelStructure& ls, int a,
                                      FailurePolicy policy = FailurePolicy::kRaise,
                                      std::vector<std::string>* warnings = nullptr) {
  const ResolvedParams& p = bank.params();
  const int e = p.exponent_for_level(a);
  const detail::Supernodes supers(ls, a);

  struct Pair {
    RecoverySketch recovery;
    DegreeSketch degree;
  };
  std::map<std::pair<Vertex, std::uint32_t>, Pair> cache;
  auto sketches = [&](Vertex x, std::uint32_t j) -> Pair& {
    auto it = cache.find({x, j});
    if (it == cache.end()) {
      const auto& m = supers.members(x);
      it = cache.emplace(std::pair{x, j}, Pair{bank.recovery(e, j).sum(m), bank.degree(e, j).sum(m)}).first;
    }
    return it->second;
  };

  LevelPartition out;
  out.level = a;
  std::set<Vertex> remaining;
  for (const auto& [x, m] : supers.all()) remaining.insert(x);

  for (std::uint32_t r = 0; r < p.recovery_copies && !remaining.empty(); ++r) {
    std::vector<Vertex> peeled;
    for (Vertex x : remaining) {
      if (sketches(x, r).degree.estimate() <= p.peel_threshold) peeled.push_back(x);
    }
    if (peeled.empty()) break;
    for (Vertex x : peeled) remaining.erase(x);

    if (!remaining.empty()) {
      for (Vertex x : peeled) {
        for (std::uint32_t j = r + 1; j < p.recovery_copies; ++j) {
          const auto decoded = sketches(x, j).recovery.decode();
          if (!decoded) {
            ++out.decode_failures;
            if (policy == FailurePolicy::kRaise) {
              throw PipelineError(PipelineError::Kind::kDecodeFailure, a, static_cast<int>(j), x,
                                  "partition sketch exceeds its sparsity budget");
            }
            if (warnings) {
              warnings->push_back("level " + std::to_string(a) + ": partition decode failed for supernode " +
                                  std::to_string(x) + " copy " + std::to_string(j));
            }
            continue;
          }
          for (const SparseEntry& entry : *decoded) {
            const Vertex w = supers.of(supers.outside_endpoint(x, entry.index));
            if (!remaining.contains(w)) continue;
            Pair& target = sketches(w, j);
            target.recovery.update(entry.index, entry.value);
            target.degree.update(entry.index, entry.value);
          }
        }
      }
    }
    for (Vertex x : peeled) {
      for (std::uint32_t j = 0; j <= r; ++j) cache.erase({x, j});
    }
    out.rounds.push_back(std::move(peeled));
  }

  if (!remaining.empty()) {
    out.stalled = true;
    out.stuck.assign(remaining.begin(), remaining.end());
    if (policy == FailurePolicy::kRaise) {
      std::string detail = "stuck supernodes:";
      for (Vertex x : out.stuck) detail += " " + std::to_string(x);
      throw PipelineError(PipelineError::Kind::kPartitionStall, a, static_cast<int>(out.rounds.size()),
                          out.stuck.front(), detail);
    }
    if (warnings) warnings->push_back("level " + std::to_string(a) + ": partition stalled");
  }
  return out;
}

/// Emitted edge of one level before deduplication.
struct RecoveredEdge {
  CoordIndex index = 0;
  Vertex controller = 0;
  Rational weight = 1;
};

/// Walks the supernodes in peeling order, decodes each one's emission sketch S*
/// at exponent max(a - shift, 0) and keeps a recovered edge iff its level is a
/// and the controlling endpoint's g* value is below p_a. Every recovered edge is
/// then subtracted from the other endpoint's supernode, so each edge is decided
/// by exactly one endpoint. Stuck or undecodable supernodes (best effort only)
/// fall back to the unsampled exponent-0 sketches and emit at weight 1.
inline std::vector<RecoveredEdge> recover_level(const SketchBank& bank, const LevelStructure& ls, int a,
                                                const LevelPartition& partition, CachedHash& emit_hash,
                                                FailurePolicy policy = FailurePolicy::kRaise,
                                                LevelDiagnostics* diag = nullptr,
                                                std::vector<std::string>* warnings = nullptr) {
  const ResolvedParams& p = bank.params();
  const int e = p.exponent_for_level(a);
  const u128 threshold = p.level_threshold(a);
  const Rational rate = p.level_rate(a);
  const Rational weight = Rational(1) / rate;
  const detail::Supernodes supers(ls, a);
  const FamilyTag emit_tag{Family::kEmit, 0};

  std::map<Vertex, RecoverySketch> cache;
  auto sketch = [&](Vertex x) -> RecoverySketch& {
    auto it = cache.find(x);
    if (it == cache.end()) it = cache.emplace(x, bank.emission(e).sum(supers.members(x))).first;
    return it->second;
  };
  std::set<Vertex> processed;
  std::vector<RecoveredEdge> out;

  auto fallback = [&](Vertex x) {
    if (diag) ++diag->fallback_supernodes;
    const auto decoded = bank.emission(0).sum(supers.members(x)).decode();
    processed.insert(x);
    if (!decoded) {
      if (warnings) {
        warnings->push_back("level " + std::to_string(a) + ": exact fallback failed for supernode " +
                            std::to_string(x) + "; its edges are missing");
      }
      return;
    }
    for (const SparseEntry& entry : *decoded) {
      const Vertex outside = supers.outside_endpoint(x, entry.index);
      const Vertex w = supers.of(outside);
      if (processed.contains(w)) continue;
      const Vertex inside = supers.inside_endpoint(x, entry.index);
      if (bank.hashes().threshold_sample(emit_tag, inside, outside, e)) sketch(w).update(entry.index, entry.value);
      if (ls.edge_level(inside, outside) == a) out.push_back({entry.index, inside, Rational(1)});
    }
  };

  auto process = [&](Vertex x, int round) {
    const auto decoded = sketch(x).decode();
    if (!decoded) {
      if (diag) ++diag->decode_failures;
      if (policy == FailurePolicy::kRaise) {
        throw PipelineError(PipelineError::Kind::kDecodeFailure, a, round, x,
                            "emission sketch exceeds its sparsity budget");
      }
      if (warnings) {
        warnings->push_back("level " + std::to_string(a) + ": emission decode failed for supernode " +
                            std::to_string(x) + ", using exact fallback");
      }
      cache.erase(x);
      fallback(x);
      return;
    }
    for (const SparseEntry& entry : *decoded) {
      const Vertex inside = supers.inside_endpoint(x, entry.index);
      const Vertex outside = supers.outside_endpoint(x, entry.index);
      const Vertex w = supers.of(outside);
      if (emit_hash.unit_hash(emit_tag, inside, outside).below_scaled(threshold) &&
          ls.edge_level(inside, outside) == a) {
        out.push_back({entry.index, inside, weight});
      }
      if (!processed.contains(w) && w != x) sketch(w).update(entry.index, entry.value);
    }
    processed.insert(x);
    cache.erase(x);
  };

  for (std::size_t r = 0; r < partition.rounds.size(); ++r) {
    for (Vertex x : partition.rounds[r]) process(x, static_cast<int>(r));
  }
  for (Vertex x : partition.stuck) fallback(x);
  return out;
}

/// Builds the levels, then partitions and recovers every level, and returns the
/// union of the recovered edges with weight 1/p_e.
inline Sparsifier sparsify(const SketchBank& bank, const SparsifyOptions& options = {}) {
  const ResolvedParams& p = bank.params();
  Sparsifier sp;
  sp.seed = bank.config().seed;
  sp.epsilon = bank.config().epsilon;
  sp.level_counts.assign(p.max_level + 1, 0);

  const LevelStructure ls = build_levels(p.vertices, p.max_level, p.level_copies,
                                         [&](int a, std::uint32_t b) -> const ForestSketch& { return bank.forest(a, b); });
  for (const auto& [a, b] : ls.degraded_copies) {
    sp.warnings.push_back("connectivity copy " + std::to_string(b) + " at exponent " + std::to_string(a) +
                          " ran out of rounds and was skipped");
  }
  for (int a : ls.failed_levels) {
    sp.warnings.push_back("no usable connectivity copy at exponent " + std::to_string(a));
  }

  CachedHash emit_hash(bank.hashes());
  std::map<CoordIndex, SparsifierEdge> chosen;
  for (int a = 0; a <= p.max_level; ++a) {
    if (options.skip_inert_levels) {
      // No edge has level a when V_a and V_{a+1} coincide.
      bool inert = true;
      for (Vertex v = 0; v < p.vertices && inert; ++v) inert = ls.label(a, v) == ls.label(a + 1, v);
      if (inert) continue;
    }

    LevelDiagnostics diag;
    diag.level = a;
    const LevelPartition part = partition_level(bank, ls, a, options.policy, &sp.warnings);
    diag.supernodes = 0;
    for (const auto& round : part.rounds) diag.supernodes += round.size();
    diag.supernodes += part.stuck.size();
    diag.rounds_used = part.rounds.size();
    diag.stalled = part.stalled;
    diag.decode_failures = part.decode_failures;
    const auto recovered = recover_level(bank, ls, a, part, emit_hash, options.policy, &diag, &sp.warnings);
    for (const RecoveredEdge& r : recovered) {
      const auto [u, v] = decode_edge(r.index);
      auto [it, inserted] = chosen.try_emplace(r.index, SparsifierEdge{u, v, r.weight, a, r.controller});
      if (inserted) {
        ++sp.level_counts[a];
      } else {
        ++sp.duplicates;
      }
    }
    sp.diagnostics.push_back(diag);
  }
  sp.edges.reserve(chosen.size());
  for (auto& [index, edge] : chosen) sp.edges.push_back(edge);
  std::sort(sp.edges.begin(), sp.edges.end(),
            [](const SparsifierEdge& x, const SparsifierEdge& y) { return std::pair{x.u, x.v} < std::pair{y.u, y.v}; });
  return sp;
}

class WeightOverflow : public StreamViolation {
 public:
  using StreamViolation::StreamViolation;
};

/// Integer weights in [1, W] via binary expansion: sub-bank b sketches the graph of
/// edges whose weight has bit b set.
class WeightedSketchBank {
 public:
  WeightedSketchBank(const SketchConfig& config, std::uint64_t max_weight)
      : max_weight_(max_weight), checked_(config.checked) {
    if (max_weight == 0) throw ConfigError("maximum weight must be at least 1");
    const auto bits = static_cast<std::uint32_t>(std::bit_width(max_weight));
    banks_.reserve(bits);
    for (std::uint32_t b = 0; b < bits; ++b) {
      SketchConfig sub = config;
      sub.checked = false;
      if (b > 0) sub.seed = mix_keys(config.seed, 0x3e16ULL, b);
      banks_.emplace_back(sub);
    }
  }

  std::uint64_t max_weight() const { return max_weight_; }
  std::size_t bits() const { return banks_.size(); }
  const SketchBank& bank(std::size_t b) const { return banks_[b]; }

  /// Routes the update into every sub-bank whose bit is set in its weight.
  std::uint64_t ingest(const EdgeUpdate& upd) {
    if (upd.weight == 0 || upd.weight > max_weight_) {
      throw WeightOverflow("weight " + std::to_string(upd.weight) + " outside [1, " + std::to_string(max_weight_) + "]");
    }
    if (checked_) check_validity(upd);
    std::uint64_t touched = 0;
    for (std::size_t b = 0; b < banks_.size(); ++b) {
      if ((upd.weight >> b) & 1U) touched += banks_[b].ingest({upd.u, upd.v, upd.sign, 1});
    }
    return touched;
  }

 private:
  void check_validity(const EdgeUpdate& upd) {
    const CoordIndex index = encode_edge(upd.u, upd.v);
    if (upd.sign > 0) {
      if (!present_.try_emplace(index, upd.weight).second) {
        throw StreamViolation("insertion of present edge " + std::to_string(upd.u) + " " + std::to_string(upd.v));
      }
      return;
    }
    auto it = present_.find(index);
    if (it == present_.end()) {
      throw StreamViolation("deletion of absent edge " + std::to_string(upd.u) + " " + std::to_string(upd.v));
    }
    if (it->second != upd.weight) {
      throw StreamViolation("deletion weight differs from insertion weight for edge " + std::to_string(upd.u) + " " +
                            std::to_string(upd.v));
    }
    present_.erase(it);
  }

  std::uint64_t max_weight_;
  bool checked_;
  std::vector<SketchBank> banks_;
  std::unordered_map<CoordIndex, std::uint64_t> present_;
};

/// Union of the per-bit sparsifiers, weights scaled by 2^b; an edge recovered from
/// several bits carries the sum.
inline Sparsifier sparsify_weighted(const WeightedSketchBank& banks, const SparsifyOptions& options = {}) {
  Sparsifier out;
  std::map<std::pair<Vertex, Vertex>, SparsifierEdge> merged;
  for (std::size_t b = 0; b < banks.bits(); ++b) {
    Sparsifier part = sparsify(banks.bank(b), options);
    if (b == 0) {
      out.seed = part.seed;
      out.epsilon = part.epsilon;
      out.level_counts.assign(part.level_counts.size(), 0);
    }
    for (std::size_t a = 0; a < part.level_counts.size() && a < out.level_counts.size(); ++a) {
      out.level_counts[a] += part.level_counts[a];
    }
    out.duplicates += part.duplicates;
    for (auto& w : part.warnings) out.warnings.push_back("bit " + std::to_string(b) + ": " + w);
    for (auto& d : part.diagnostics) out.diagnostics.push_back(d);
    const Rational scale = Rational(1).scaled_pow2(static_cast<int>(b));
    for (const SparsifierEdge& e : part.edges) {
      auto [it, inserted] = merged.try_emplace({e.u, e.v}, e);
      if (inserted) {
        it->second.weight = e.weight * scale;
      } else {
        it->second.weight = it->second.weight + e.weight * scale;
      }
    }
  }
  for (auto& [key, e] : merged) out.edges.push_back(e);
  return out;
}

}  // namespace dynsparse
