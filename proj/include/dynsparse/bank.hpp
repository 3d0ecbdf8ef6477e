#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dynsparse/config.hpp"
#include "dynsparse/coordinate.hpp"
#include "dynsparse/degree_sketch.hpp"
#include "dynsparse/forest.hpp"
#include "dynsparse/randomness.hpp"
#include "dynsparse/sparse_recovery.hpp"

namespace dynsparse {

/// One stream element. sign is +1 for an insertion and -1 for a deletion.
struct EdgeUpdate {
  Vertex u = 0;
  Vertex v = 0;
  int sign = 1;
  std::uint64_t weight = 1;

  friend bool operator==(const EdgeUpdate&, const EdgeUpdate&) = default;
};

class StreamViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-vertex sketches that share one parameter set (one sampled graph, one copy).
template <class Sketch, class Params>
class RowSlot {
 public:
  RowSlot() = default;
  explicit RowSlot(const Params& params) : params_(params) {}

  const Params& params() const { return params_; }

  Sketch& touch(Vertex v) { return rows_.try_emplace(v, params_).first->second; }

  const Sketch* find(Vertex v) const {
    auto it = rows_.find(v);
    return it == rows_.end() ? nullptr : &it->second;
  }

  /// Sum of the rows of `members`: the sketch of the contracted supernode.
  Sketch sum(std::span<const Vertex> members) const {
    Sketch total(params_);
    for (Vertex v : members)
      if (const Sketch* s = find(v)) total += *s;
    return total;
  }

  const std::unordered_map<Vertex, Sketch>& rows() const { return rows_; }

  friend bool operator==(const RowSlot& a, const RowSlot& b) {
    return a.params_ == b.params_ && covered_by(a, b) && covered_by(b, a);
  }

 private:
  static bool covered_by(const RowSlot& x, const RowSlot& y) {
    for (const auto& [v, s] : x.rows_) {
      const Sketch* other = y.find(v);
      if (other == nullptr ? !s.is_zero() : !(s == *other)) return false;
    }
    return true;
  }

  Params params_;
  std::unordered_map<Vertex, Sketch> rows_;
};

using RecoverySlot = RowSlot<RecoverySketch, RecoveryParams>;
using DegreeSlot = RowSlot<DegreeSketch, DegreeParams>;

struct MemoryWords {
  std::uint64_t materialized = 0;  // words held by rows that have been touched
  std::uint64_t nominal = 0;       // words of the dense layout with every row allocated
};

/// Full sketch state of one unweighted dynamic graph:
///  - forests C^b_a over the level samples (exponent a, copy b),
///  - recovery sketches S^r_e and degree sketches d^r_e over the partition samples,
///  - recovery sketches S*_e over the emission samples.
/// Exponent 0 is the unsampled graph. Everything is linear in the updates, so the
/// state depends only on the net graph, not on the order or churn of the stream.
class SketchBank {
 public:
  explicit SketchBank(const SketchConfig& config)
      : config_(config), params_(resolve(config)), hashes_(config.seed, params_.independence) {
    const auto levels = static_cast<std::uint32_t>(params_.max_level + 1);
    const auto exponents = static_cast<std::uint32_t>(params_.max_exponent + 1);
    forests_.reserve(static_cast<std::size_t>(levels) * params_.level_copies);
    for (std::uint32_t a = 0; a < levels; ++a) {
      for (std::uint32_t b = 0; b < params_.level_copies; ++b) {
        forests_.emplace_back(ForestParams{params_.vertices, params_.forest_rounds, params_.l0_levels,
                                           mix_keys(config_.seed, 0xf0e5ULL, a, b), params_.l0_ladders});
      }
    }
    for (std::uint32_t e = 0; e < exponents; ++e) {
      for (std::uint32_t r = 0; r < params_.recovery_copies; ++r) {
        recovery_.emplace_back(make_recovery_params(mix_keys(config_.seed, 0x5ec0ULL, e, r)));
        degree_.emplace_back(DegreeParams{params_.projections, mix_keys(config_.seed, 0xde9ULL, e, r)});
      }
      emit_.emplace_back(make_recovery_params(mix_keys(config_.seed, 0xe317ULL, e)));
    }
  }

  const SketchConfig& config() const { return config_; }
  const ResolvedParams& params() const { return params_; }
  const HashSource& hashes() const { return hashes_; }

  /// Applies one update to every sketch whose sample contains the edge. Returns the
  /// number of sketch cells touched.
  std::uint64_t ingest(const EdgeUpdate& upd) {
    if (upd.u >= params_.vertices || upd.v >= params_.vertices || upd.u == upd.v) {
      throw StreamViolation("invalid endpoints " + std::to_string(upd.u) + " " + std::to_string(upd.v));
    }
    if (upd.sign != 1 && upd.sign != -1) throw StreamViolation("update sign must be +1 or -1");
    const CoordIndex index = encode_edge(upd.u, upd.v);
    if (config_.checked) check_validity(index, upd);

    const Vertex lo = std::min(upd.u, upd.v);
    const Vertex hi = std::max(upd.u, upd.v);
    const std::int64_t delta = upd.sign;
    std::uint64_t touched = 0;

    for (std::uint32_t b = 0; b < params_.level_copies; ++b) {
      const int depth = hashes_.sample_depth({Family::kLevel, b}, lo, hi, params_.max_level);
      for (int a = 0; a <= depth; ++a) touched += forest_mut(a, b).update_edge(lo, hi, delta);
    }

    std::vector<std::int64_t> column(params_.projections);
    for (std::uint32_t r = 0; r < params_.recovery_copies; ++r) {
      const int depth = hashes_.sample_depth({Family::kPartition, r}, lo, hi, params_.max_exponent);
      for (int e = 0; e <= depth; ++e) {
        RecoverySlot& rs = recovery_[slot(e, r)];
        touched += rs.touch(lo).update(index, delta);
        touched += rs.touch(hi).update(index, -delta);
        DegreeSlot& ds = degree_[slot(e, r)];
        DegreeSketch::projection(ds.params(), index, column);
        touched += ds.touch(lo).apply(column, delta);
        touched += ds.touch(hi).apply(column, -delta);
      }
    }

    const int depth = hashes_.sample_depth({Family::kEmit, 0}, lo, hi, params_.max_exponent);
    for (int e = 0; e <= depth; ++e) {
      touched += emit_[e].touch(lo).update(index, delta);
      touched += emit_[e].touch(hi).update(index, -delta);
    }

    ++updates_;
    touched_total_ += touched;
    ++touched_histogram_[touched];
    return touched;
  }

  const ForestSketch& forest(int a, std::uint32_t b) const {
    return forests_[static_cast<std::size_t>(a) * params_.level_copies + b];
  }
  const RecoverySlot& recovery(int e, std::uint32_t r) const { return recovery_[slot(e, r)]; }
  const DegreeSlot& degree(int e, std::uint32_t r) const { return degree_[slot(e, r)]; }
  const RecoverySlot& emission(int e) const { return emit_[e]; }

  std::uint64_t updates() const { return updates_; }
  std::uint64_t touched_total() const { return touched_total_; }
  const std::map<std::uint64_t, std::uint64_t>& touched_histogram() const { return touched_histogram_; }

  MemoryWords memory_words() const {
    MemoryWords m;
    for (const auto& f : forests_) {
      m.materialized += f.materialized_words();
      m.nominal += f.nominal_words();
    }
    auto recovery_words = [&](const RecoverySlot& s) {
      for (const auto& [v, sk] : s.rows()) m.materialized += sk.materialized_cells() * 5;
      m.nominal += s.params().nominal_cells() * 4 * params_.vertices;
    };
    for (const auto& s : recovery_) recovery_words(s);
    for (const auto& s : emit_) recovery_words(s);
    for (const auto& s : degree_) {
      for (const auto& [v, sk] : s.rows()) m.materialized += sk.materialized_words();
      m.nominal += static_cast<std::uint64_t>(s.params().projections) * 2 * params_.vertices;
    }
    return m;
  }

  /// Order-independent fingerprint of the sketch contents (zero rows ignored).
  std::uint64_t digest() const {
    std::uint64_t h = mix_keys(config_.seed, params_.vertices);
    auto fold = [&](std::uint64_t w) { h = mix_keys(h, w); };
    for (const auto& f : forests_) {
      for (Vertex v : sorted_keys(f.rows())) {
        const auto& row = *f.row(v);
        if (row.all_zero()) continue;
        fold(v);
        for (std::uint32_t r = 0; r < row.rounds(); ++r) {
          row.sampler(r).for_each_nonzero([&](std::size_t j, std::size_t l, const TesterCell& c) {
            fold(j);
            fold(l);
            fold(static_cast<std::uint64_t>(c.count));
            fold(static_cast<std::uint64_t>(c.index_sum));
            fold(c.fingerprint);
          });
          fold(0x5a3bULL);
        }
      }
      fold(0xf0e5ULL);
    }
    auto fold_recovery = [&](const RecoverySlot& s) {
      for (Vertex v : sorted_keys(s.rows())) {
        const auto& sk = *s.find(v);
        if (sk.is_zero()) continue;
        std::ostringstream os;
        sk.serialize(os);
        fold(v);
        fold(std::hash<std::string>{}(os.str()));
      }
      fold(0x5ec0ULL);
    };
    for (const auto& s : recovery_) fold_recovery(s);
    for (const auto& s : emit_) fold_recovery(s);
    for (const auto& s : degree_) {
      for (Vertex v : sorted_keys(s.rows())) {
        const auto& sk = *s.find(v);
        if (sk.is_zero()) continue;
        fold(v);
        for (i128 x : sk.accumulators()) {
          fold(static_cast<std::uint64_t>(static_cast<u128>(x)));
          fold(static_cast<std::uint64_t>(static_cast<u128>(x) >> 64));
        }
      }
      fold(0xde9ULL);
    }
    return h;
  }

  /// Equality of sketch state; ingest statistics are not compared.
  friend bool operator==(const SketchBank& a, const SketchBank& b) {
    return a.params_.vertices == b.params_.vertices && a.config_.seed == b.config_.seed && a.forests_ == b.forests_ &&
           a.recovery_ == b.recovery_ && a.degree_ == b.degree_ && a.emit_ == b.emit_;
  }

 private:
  RecoveryParams make_recovery_params(std::uint64_t seed) const {
    return RecoveryParams{params_.sparsity, params_.recovery_rows, 0, seed, params_.dimension};
  }

  std::size_t slot(int e, std::uint32_t r) const {
    return static_cast<std::size_t>(e) * params_.recovery_copies + r;
  }

  ForestSketch& forest_mut(int a, std::uint32_t b) {
    return forests_[static_cast<std::size_t>(a) * params_.level_copies + b];
  }

  void check_validity(CoordIndex index, const EdgeUpdate& upd) {
    if (upd.sign > 0) {
      if (!present_.insert(index).second) {
        throw StreamViolation("insertion of present edge " + std::to_string(upd.u) + " " + std::to_string(upd.v));
      }
    } else if (present_.erase(index) == 0) {
      throw StreamViolation("deletion of absent edge " + std::to_string(upd.u) + " " + std::to_string(upd.v));
    }
  }

  template <class Map>
  static std::vector<Vertex> sorted_keys(const Map& m) {
    std::vector<Vertex> keys;
    keys.reserve(m.size());
    for (const auto& kv : m) keys.push_back(kv.first);
    std::sort(keys.begin(), keys.end());
    return keys;
  }

  SketchConfig config_;
  ResolvedParams params_;
  HashSource hashes_;
  std::vector<ForestSketch> forests_;
  std::vector<RecoverySlot> recovery_;
  std::vector<DegreeSlot> degree_;
  std::vector<RecoverySlot> emit_;

  std::unordered_set<CoordIndex> present_;
  std::uint64_t updates_ = 0;
  std::uint64_t touched_total_ = 0;
  std::map<std::uint64_t, std::uint64_t> touched_histogram_;
};

}  // namespace dynsparse
