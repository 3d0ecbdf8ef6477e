#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <optional>
#include <vector>

#include "dynsparse/coordinate.hpp"
#include "dynsparse/field.hpp"

namespace dynsparse {

struct L0Params {
  std::uint32_t levels = 1;  // subsample levels 0..levels-1; level 0 keeps every coordinate
  std::uint64_t seed = 0;
  std::uint64_t dimension = 0;
  std::uint32_t ladders = 3;  // independent level ladders, tried in turn when sampling

  friend bool operator==(const L0Params&, const L0Params&) = default;
};

/// Levels needed to thin a vector over [0, dimension) down to a single survivor.
inline std::uint32_t l0_levels_for(std::uint64_t dimension) {
  std::uint32_t bits = dimension <= 1 ? 0 : static_cast<std::uint32_t>(std::bit_width(dimension - 1));
  return bits + 1;
}

/// 1-sparse tester: identifies its coordinate when exactly one survivor is nonzero.
struct TesterCell {
  std::int64_t count = 0;
  std::int64_t index_sum = 0;
  std::uint64_t fingerprint = 0;

  bool is_zero() const { return count == 0 && index_sum == 0 && fingerprint == 0; }
  friend bool operator==(const TesterCell&, const TesterCell&) = default;
};

/// Linear l0-sampler. In each ladder, coordinate i survives at levels 0..depth(i),
/// where depth(i) is the number of trailing zero bits of a seeded hash, so each
/// level halves the expected support. One ladder isolates a single survivor at
/// some level with probability about 0.72; independent ladders multiply the
/// failure odds. Parameters are passed in rather than stored so that the many
/// per-vertex samplers of one forest slot share them. Cells live in one array of
/// `ladders x stride` where stride covers the deepest level touched so far (at
/// least 2); missing cells are zero.
class L0Sampler {
 public:
  static constexpr std::uint32_t kMaxLadders = 8;

  /// Per-coordinate hash values, computed once and applied to several rows.
  struct Hashed {
    std::array<std::uint32_t, kMaxLadders> depth{};
    std::uint32_t ladders = 0;
    std::uint64_t fingerprint = 0;
  };

  L0Sampler() = default;
  explicit L0Sampler(const L0Params& params) : ladders_(params.ladders) {
    if (params.ladders == 0 || params.ladders > kMaxLadders) throw ConfigError("l0-sampler ladders must be in [1, 8]");
  }
  // Copies `ladders` x `stride` cells laid out ladder-major.
  L0Sampler(std::uint32_t ladders, std::uint32_t stride, const TesterCell* cells)
      : ladders_(ladders), stride_(stride), cells_(cells, cells + static_cast<std::size_t>(ladders) * stride) {}

  /// Polynomial coefficients of one parameter set, derived once per forest round.
  struct Keys {
    std::array<std::array<std::uint64_t, 2>, kMaxLadders> depth{};
    std::array<std::uint64_t, 4> fingerprint{};
  };

  static Keys keys(const L0Params& p) {
    Keys k;
    for (std::uint32_t j = 0; j < p.ladders && j < kMaxLadders; ++j)
      for (std::uint32_t i = 0; i < 2; ++i) k.depth[j][i] = polynomial_coefficient(depth_key(p, j), i);
    for (std::uint32_t i = 0; i < 4; ++i) k.fingerprint[i] = polynomial_coefficient(fingerprint_key(p), i);
    return k;
  }

  static std::uint32_t depth(const L0Params& p, std::uint32_t ladder, CoordIndex index) {
    return clamp_depth(p, keyed_polynomial(depth_key(p, ladder), 2, index));
  }

  static std::uint64_t fingerprint(const L0Params& p, CoordIndex index) {
    return keyed_polynomial(fingerprint_key(p), 4, index);
  }

  static Hashed hash(const L0Params& p, CoordIndex index) { return hash(p, keys(p), index); }

  static Hashed hash(const L0Params& p, const Keys& k, CoordIndex index) {
    Hashed h;
    h.ladders = p.ladders;
    const std::uint64_t x = index % kFieldPrime;
    for (std::uint32_t j = 0; j < p.ladders; ++j)
      h.depth[j] = clamp_depth(p, field_add(field_mul(k.depth[j][1], x), k.depth[j][0]));
    std::uint64_t fp = 0;
    for (std::size_t i = 4; i-- > 0;) fp = field_add(field_mul(fp, x), k.fingerprint[i]);
    h.fingerprint = fp;
    return h;
  }

  /// Returns the number of tester cells touched.
  std::uint32_t update(const L0Params& p, CoordIndex index, std::int64_t delta) {
    return apply(hash(p, index), index, delta);
  }

  /// Update with hash values precomputed by the caller (both endpoint rows of an
  /// edge share them).
  std::uint32_t apply(const Hashed& h, CoordIndex index, std::int64_t delta) {
    reshape(std::max(ladders_, h.ladders), max_depth(h) + 1);
    return apply_cells(cells_.data(), stride_, h, index, delta);
  }

  /// Deepest level any ladder reaches for this coordinate.
  static std::uint32_t max_depth(const Hashed& h) {
    std::uint32_t deepest = 0;
    for (std::uint32_t j = 0; j < h.ladders; ++j) deepest = std::max(deepest, h.depth[j]);
    return deepest;
  }

  /// The update on cells stored as `h.ladders x stride` starting at `cells`; the
  /// stride must exceed max_depth(h).
  static std::uint32_t apply_cells(TesterCell* cells, std::uint32_t stride, const Hashed& h, CoordIndex index,
                                   std::int64_t delta) {
    const std::uint64_t fp_delta = field_mul(field_from_signed(delta), h.fingerprint);
    const auto di = delta * static_cast<std::int64_t>(index);
    std::uint32_t touched = 0;
    for (std::uint32_t j = 0; j < h.ladders; ++j) {
      TesterCell* ladder = cells + static_cast<std::size_t>(j) * stride;
      for (std::uint32_t l = 0; l <= h.depth[j]; ++l) {
        auto& c = ladder[l];
        c.count += delta;
        c.index_sum += di;
        c.fingerprint = field_add(c.fingerprint, fp_delta);
      }
      touched += h.depth[j] + 1;
    }
    return touched;
  }

  L0Sampler& operator+=(const L0Sampler& other) {
    if (other.cells_.empty()) return *this;
    reshape(std::max(ladders_, other.ladders_), other.stride_);
    for (std::uint32_t j = 0; j < other.ladders_; ++j) {
      TesterCell* mine = &cells_[static_cast<std::size_t>(j) * stride_];
      const TesterCell* theirs = &other.cells_[static_cast<std::size_t>(j) * other.stride_];
      for (std::uint32_t l = 0; l < other.stride_; ++l) {
        mine[l].count += theirs[l].count;
        mine[l].index_sum += theirs[l].index_sum;
        mine[l].fingerprint = field_add(mine[l].fingerprint, theirs[l].fingerprint);
      }
    }
    return *this;
  }

  /// Some nonzero coordinate of the underlying vector, or nullopt if the vector is
  /// zero or no level of any ladder isolates a single survivor.
  std::optional<SparseEntry> sample(const L0Params& p) const {
    for (std::uint32_t j = 0; j < p.ladders && j < ladders_ && !cells_.empty(); ++j) {
      for (std::size_t l = stride_; l-- > 0;) {
        const auto& c = cells_[static_cast<std::size_t>(j) * stride_ + l];
        if (c.count == 0 || c.index_sum % c.count != 0) continue;
        const std::int64_t idx = c.index_sum / c.count;
        if (idx < 0 || static_cast<std::uint64_t>(idx) >= p.dimension) continue;
        const auto index = static_cast<CoordIndex>(idx);
        if (depth(p, j, index) < l) continue;
        if (field_mul(field_from_signed(c.count), fingerprint(p, index)) != c.fingerprint) continue;
        return SparseEntry{index, c.count};
      }
    }
    return std::nullopt;
  }

  /// Level 0 sees the whole vector, so an all-zero level 0 means an empty vector
  /// (up to fingerprint collisions).
  bool is_zero() const { return cells_.empty() || cells_[0].is_zero(); }

  bool all_zero() const {
    return std::all_of(cells_.begin(), cells_.end(), [](const TesterCell& c) { return c.is_zero(); });
  }

  /// Calls f(ladder, level, cell) for every nonzero cell, in ladder then level order.
  template <class F>
  void for_each_nonzero(F&& f) const {
    for (std::size_t j = 0; j < ladders_ && !cells_.empty(); ++j)
      for (std::size_t l = 0; l < stride_; ++l)
        if (const auto& c = cells_[j * stride_ + l]; !c.is_zero()) f(j, l, c);
  }

  std::uint64_t materialized_cells() const { return cells_.size(); }

  friend bool operator==(const L0Sampler& a, const L0Sampler& b) {
    const std::size_t ladders = std::max(a.ladders_, b.ladders_);
    for (std::size_t j = 0; j < ladders; ++j) {
      const std::size_t levels = std::max(a.level_count(j), b.level_count(j));
      for (std::size_t l = 0; l < levels; ++l)
        if (!(a.cell(j, l) == b.cell(j, l))) return false;
    }
    return true;
  }

 private:
  static std::uint64_t depth_key(const L0Params& p, std::uint32_t ladder) { return mix64(p.seed ^ (0x1e7e1ULL + ladder)); }
  static std::uint64_t fingerprint_key(const L0Params& p) { return mix64(p.seed ^ 0xf00dULL); }

  static std::uint32_t clamp_depth(const L0Params& p, std::uint64_t h) {
    const auto tz = h == 0 ? 64u : static_cast<std::uint32_t>(std::countr_zero(h));
    return tz < p.levels - 1 ? tz : p.levels - 1;
  }

  std::size_t level_count(std::size_t j) const { return j < ladders_ && !cells_.empty() ? stride_ : 0; }
  TesterCell cell(std::size_t j, std::size_t l) const {
    return l < level_count(j) ? cells_[j * stride_ + l] : TesterCell{};
  }

  // Ensures room for `ladders` ladders of at least `levels` cells each.
  void reshape(std::uint32_t ladders, std::uint32_t levels) {
    if (!cells_.empty() && ladders <= ladders_ && levels <= stride_) return;
    const std::uint32_t stride = std::max({levels, stride_, 2u});
    std::vector<TesterCell> grown(static_cast<std::size_t>(ladders) * stride);
    if (!cells_.empty()) {
      for (std::uint32_t j = 0; j < ladders_; ++j)
        std::copy_n(&cells_[static_cast<std::size_t>(j) * stride_], stride_, &grown[static_cast<std::size_t>(j) * stride]);
    }
    cells_ = std::move(grown);
    ladders_ = ladders;
    stride_ = stride;
  }

  std::uint32_t ladders_ = 0;
  std::uint32_t stride_ = 0;
  std::vector<TesterCell> cells_;
};

}  // namespace dynsparse
