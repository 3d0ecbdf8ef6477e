#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>

namespace dynsparse {

using Vertex = std::uint32_t;
using CoordIndex = std::uint64_t;

/// Number of unordered vertex pairs, i.e. the width of the signed incidence matrix.
constexpr std::uint64_t pair_count(std::uint64_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

/// Colexicographic rank of the pair {a, b}: (v, w) with v < w maps to w(w-1)/2 + v.
constexpr CoordIndex encode_edge(Vertex a, Vertex b) {
  const std::uint64_t v = a < b ? a : b;
  const std::uint64_t w = a < b ? b : a;
  return w * (w - 1) / 2 + v;
}

/// Inverse of encode_edge; returns (v, w) with v < w.
inline std::pair<Vertex, Vertex> decode_edge(CoordIndex index) {
  std::uint64_t w = static_cast<std::uint64_t>((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(index))) / 2.0);
  while (w > 1 && w * (w - 1) / 2 > index) --w;
  while ((w + 1) * w / 2 <= index) ++w;
  return {static_cast<Vertex>(index - w * (w - 1) / 2), static_cast<Vertex>(w)};
}

/// Entry of row `row` of the signed incidence matrix at pair {a, b}: +1 on the
/// smaller endpoint, -1 on the larger one, 0 elsewhere.
constexpr int incidence_sign(Vertex row, Vertex a, Vertex b) {
  const Vertex lo = a < b ? a : b;
  const Vertex hi = a < b ? b : a;
  if (row == lo) return 1;
  if (row == hi) return -1;
  return 0;
}

struct SparseEntry {
  CoordIndex index = 0;
  std::int64_t value = 0;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
  friend auto operator<=>(const SparseEntry&, const SparseEntry&) = default;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace dynsparse
