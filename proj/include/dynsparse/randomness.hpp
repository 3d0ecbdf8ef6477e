#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "dynsparse/coordinate.hpp"
#include "dynsparse/field.hpp"

namespace dynsparse {

/// The three sampling families. kLevel drives the connectivity samples, kPartition
/// the recovery/degree samples used to peel supernodes, kEmit the final edge samples.
enum class Family : std::uint8_t { kLevel = 1, kPartition = 2, kEmit = 3 };

struct FamilyTag {
  Family family = Family::kLevel;
  std::uint32_t copy = 0;

  friend bool operator==(const FamilyTag&, const FamilyTag&) = default;
};

/// A point of [0, 1) stored as a field element x, meaning x / (2^61 - 1).
struct UnitValue {
  std::uint64_t raw = 0;

  double as_double() const { return static_cast<double>(raw) / static_cast<double>(kFieldPrime); }

  /// True iff raw / p < 2^-exponent, decided exactly.
  bool below_pow2(int exponent) const {
    if (exponent <= 0) return true;
    if (exponent >= 64) return raw == 0;
    return (static_cast<u128>(raw) << exponent) < kFieldPrime;
  }

  /// True iff raw / p < threshold / p, i.e. a plain comparison against a
  /// precomputed field-scale threshold (see Rational::unit_threshold).
  bool below_scaled(u128 scaled_threshold) const { return static_cast<u128>(raw) < scaled_threshold; }

  friend auto operator<=>(const UnitValue&, const UnitValue&) = default;
};

/// Seeded source of the per-vertex hash families. For fixed (family, copy, u) the
/// map v -> value is a random polynomial of degree t-1 over GF(2^61-1), hence
/// t-wise independent; coefficient keys for different u pass through a full
/// mixing function, so the per-u families are independent of each other.
class HashSource {
 public:
  HashSource(std::uint64_t master_seed, std::uint32_t independence)
      : seed_(master_seed), independence_(independence) {
    if (independence_ == 0) throw std::invalid_argument("independence degree must be positive");
  }

  std::uint64_t seed() const { return seed_; }
  std::uint32_t independence() const { return independence_; }

  /// Value keyed by the ordered pair (u, v); (u, v) and (v, u) are distinct keys.
  UnitValue unit_hash(FamilyTag tag, Vertex u, Vertex v) const {
    const std::uint64_t key = vertex_key(tag, u);
    if (auto it = coeff_cache_.find(key); it != coeff_cache_.end()) return UnitValue{eval_polynomial(it->second, v)};
    if (cached_words_ + independence_ <= kCacheWords) {
      std::vector<std::uint64_t> coeffs(independence_);
      for (std::uint32_t i = 0; i < independence_; ++i) coeffs[i] = polynomial_coefficient(key, i);
      cached_words_ += independence_;
      return UnitValue{eval_polynomial(coeff_cache_.emplace(key, std::move(coeffs)).first->second, v)};
    }
    return UnitValue{keyed_polynomial(key, independence_, v)};
  }

  /// min(h(u,v), h(v,u)): the quantity compared against every sampling threshold.
  UnitValue pair_min(FamilyTag tag, Vertex u, Vertex v) const {
    return std::min(unit_hash(tag, u, v), unit_hash(tag, v, u));
  }

  bool threshold_sample(FamilyTag tag, Vertex u, Vertex v, int exponent) const {
    return pair_min(tag, u, v).below_pow2(exponent);
  }

  /// Largest a in [0, cap] with threshold_sample(tag, u, v, a). Samples are nested,
  /// so the edge belongs to exactly the exponents 0..depth.
  int sample_depth(FamilyTag tag, Vertex u, Vertex v, int cap) const {
    return depth_of(pair_min(tag, u, v), cap);
  }

  static int depth_of(UnitValue m, int cap) {
    int a = 0;
    while (a < cap && m.below_pow2(a + 1)) ++a;
    return a;
  }

 private:
  std::uint64_t vertex_key(FamilyTag tag, Vertex u) const {
    return mix_keys(seed_, static_cast<std::uint64_t>(tag.family), tag.copy, u);
  }

  // Coefficients of recently used per-vertex polynomials. Only a speedup: values
  // are identical with or without it. Filled until the word budget runs out.
  static constexpr std::size_t kCacheWords = std::size_t{1} << 22;

  std::uint64_t seed_;
  std::uint32_t independence_;
  mutable std::unordered_map<std::uint64_t, std::vector<std::uint64_t>> coeff_cache_;
  mutable std::size_t cached_words_ = 0;
};

/// Memoizes unit_hash results for the duration of one extraction pass.
class CachedHash {
 public:
  explicit CachedHash(const HashSource& source) : source_(&source) {}

  UnitValue unit_hash(FamilyTag tag, Vertex u, Vertex v) {
    const Key key{(static_cast<std::uint64_t>(tag.family) << 32) | tag.copy,
                  (static_cast<std::uint64_t>(u) << 32) | v};
    auto [it, inserted] = cache_.try_emplace(key);
    if (inserted) it->second = source_->unit_hash(tag, u, v);
    return it->second;
  }

  std::size_t size() const { return cache_.size(); }

 private:
  struct Key {
    std::uint64_t tag;
    std::uint64_t pair;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const { return mix_keys(k.tag, k.pair); }
  };

  const HashSource* source_;
  std::unordered_map<Key, UnitValue, KeyHash> cache_;
};

}  // namespace dynsparse
