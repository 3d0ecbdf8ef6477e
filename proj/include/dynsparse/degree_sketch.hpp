#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "dynsparse/coordinate.hpp"
#include "dynsparse/field.hpp"

namespace dynsparse {

struct DegreeParams {
  std::uint32_t projections = 1;
  std::uint64_t seed = 0;

  friend bool operator==(const DegreeParams&, const DegreeParams&) = default;
};

/// Cauchy projections are stored on a 2^-30 grid so that insert/delete pairs
/// cancel to exactly zero.
inline constexpr int kCauchyFractionBits = 30;
inline constexpr double kCauchyClamp = 1e6;

/// Quantized standard Cauchy draw from a raw 64-bit key, by inverse CDF. Clamped to
/// +-1e6.
inline std::int64_t cauchy_from_key(std::uint64_t key) {
  // u in (0, 1): shift by half a step so that tan never sees +-pi/2.
  const std::uint64_t raw = mix64(key) >> 11;
  const double u = (static_cast<double>(raw) + 0.5) / 9007199254740992.0;  // 2^53
  double x = std::tan(std::numbers::pi * (u - 0.5));
  x = std::clamp(x, -kCauchyClamp, kCauchyClamp) * static_cast<double>(std::int64_t{1} << kCauchyFractionBits);
  // |x| < 2^50, so the rounding below is exact in int64.
  return static_cast<std::int64_t>(x < 0 ? x - 0.5 : x + 0.5);
}

/// Cauchy entry for (coordinate, projection): the column key is derived once per
/// coordinate and stepped per projection.
inline std::int64_t cauchy_fixed(std::uint64_t seed, CoordIndex index, std::uint32_t projection) {
  return cauchy_from_key(mix_keys(seed, index) + projection * 0x9e3779b97f4a7c15ULL);
}

/// l1 sketch of one signed row: accumulator i holds sum_j x_j * C(j, i) with C
/// standard Cauchy, so each accumulator is distributed as ||x||_1 times a standard
/// Cauchy and the median of absolute values estimates ||x||_1.
class DegreeSketch {
 public:
  DegreeSketch() = default;
  explicit DegreeSketch(const DegreeParams& params) : params_(params) {
    if (params_.projections == 0) throw ConfigError("degree sketch needs at least one projection");
  }

  const DegreeParams& params() const { return params_; }

  static void projection(const DegreeParams& p, CoordIndex index, std::span<std::int64_t> out) {
    const std::uint64_t column = mix_keys(p.seed, index);
    for (std::uint32_t i = 0; i < p.projections; ++i) out[i] = cauchy_from_key(column + i * 0x9e3779b97f4a7c15ULL);
  }

  /// Returns the number of accumulators touched.
  std::uint32_t update(CoordIndex index, std::int64_t delta) {
    std::vector<std::int64_t> column(params_.projections);
    projection(params_, index, column);
    return apply(column, delta);
  }

  /// Adds delta times a precomputed projection column.
  std::uint32_t apply(std::span<const std::int64_t> column, std::int64_t delta) {
    if (acc_.empty()) acc_.assign(params_.projections, 0);
    for (std::uint32_t i = 0; i < params_.projections; ++i) acc_[i] += static_cast<i128>(delta) * column[i];
    return params_.projections;
  }

  DegreeSketch& operator+=(const DegreeSketch& other) { return combine(other, 1); }
  DegreeSketch& operator-=(const DegreeSketch& other) { return combine(other, -1); }

  friend DegreeSketch operator+(DegreeSketch a, const DegreeSketch& b) { return a += b; }

  double estimate() const {
    if (acc_.empty()) return 0.0;
    std::vector<double> mags(acc_.size());
    for (std::size_t i = 0; i < acc_.size(); ++i) {
      const i128 v = acc_[i] < 0 ? -acc_[i] : acc_[i];
      mags[i] = std::ldexp(static_cast<double>(v), -kCauchyFractionBits);
    }
    const std::size_t mid = mags.size() / 2;
    std::nth_element(mags.begin(), mags.begin() + mid, mags.end());
    const double upper = mags[mid];
    if (mags.size() % 2 == 1) return upper;
    const double lower = *std::max_element(mags.begin(), mags.begin() + mid);
    return 0.5 * (lower + upper);
  }

  bool is_zero() const {
    return std::all_of(acc_.begin(), acc_.end(), [](i128 v) { return v == 0; });
  }

  const std::vector<i128>& accumulators() const { return acc_; }

  std::uint64_t materialized_words() const { return acc_.size() * 2; }

  friend bool operator==(const DegreeSketch& a, const DegreeSketch& b) {
    if (!(a.params_ == b.params_)) return false;
    if (a.acc_.size() == b.acc_.size()) return a.acc_ == b.acc_;
    return a.is_zero() && b.is_zero();
  }

 private:
  DegreeSketch& combine(const DegreeSketch& other, int sign) {
    if (!(params_ == other.params_)) throw ConfigError("degree sketches with different parameters");
    if (other.acc_.empty()) return *this;
    if (acc_.empty()) acc_.assign(params_.projections, 0);
    for (std::size_t i = 0; i < acc_.size(); ++i) acc_[i] += sign * other.acc_[i];
    return *this;
  }

  DegreeParams params_;
  std::vector<i128> acc_;
};

}  // namespace dynsparse
