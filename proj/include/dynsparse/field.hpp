#pragma once

#include <cstdint>
#include <vector>

namespace dynsparse {

using u128 = unsigned __int128;
using i128 = __int128;

/// Mersenne prime 2^61 - 1. All hash values and fingerprints live in this field.
inline constexpr std::uint64_t kFieldPrime = (std::uint64_t{1} << 61) - 1;

constexpr std::uint64_t reduce_field(u128 x) {
  // Two folds bring any 122-bit product below 2^62, a final subtract finishes.
  std::uint64_t lo = static_cast<std::uint64_t>(x & kFieldPrime);
  std::uint64_t hi = static_cast<std::uint64_t>(x >> 61);
  std::uint64_t r = lo + (hi & kFieldPrime) + (hi >> 61);
  r = (r & kFieldPrime) + (r >> 61);
  return r >= kFieldPrime ? r - kFieldPrime : r;
}

constexpr std::uint64_t field_mul(std::uint64_t a, std::uint64_t b) {
  return reduce_field(static_cast<u128>(a) * b);
}

constexpr std::uint64_t field_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = a + b;
  return r >= kFieldPrime ? r - kFieldPrime : r;
}

constexpr std::uint64_t field_neg(std::uint64_t a) { return a == 0 ? 0 : kFieldPrime - a; }

constexpr std::uint64_t field_sub(std::uint64_t a, std::uint64_t b) { return field_add(a, field_neg(b)); }

/// Maps a signed integer to its residue mod 2^61 - 1.
constexpr std::uint64_t field_from_signed(std::int64_t x) {
  if (x >= 0) return static_cast<std::uint64_t>(x) % kFieldPrime;
  std::uint64_t m = static_cast<std::uint64_t>(-(x + 1)) + 1;  // |x| without overflow at INT64_MIN
  return field_neg(m % kFieldPrime);
}

/// splitmix64 finalizer; bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Keyed mixing of a sequence of words. Order sensitive.
constexpr std::uint64_t mix_keys(std::uint64_t seed) { return mix64(seed); }

template <class... Rest>
constexpr std::uint64_t mix_keys(std::uint64_t seed, std::uint64_t first, Rest... rest) {
  return mix_keys(mix64(seed ^ mix64(first + 0x632be59bd9b4e019ULL)), static_cast<std::uint64_t>(rest)...);
}

/// Uniform field element derived from a key.
constexpr std::uint64_t field_element(std::uint64_t key) {
  // Rejection keeps the result exactly uniform on [0, p).
  std::uint64_t x = mix64(key) >> 3;
  while (x >= kFieldPrime) {
    key = mix64(key + 1);
    x = mix64(key) >> 3;
  }
  return x;
}

/// Evaluates a degree-(degree-1) polynomial over GF(2^61-1) at `point`. Coefficient
/// i is field_element(key + i * golden), i.e. the i-th splitmix64 output seeded at
/// `key`. Coefficients are regenerated on every call, so nothing beyond `key` is
/// stored.
constexpr std::uint64_t polynomial_coefficient(std::uint64_t key, std::uint32_t i) {
  return field_element(key + i * 0x9e3779b97f4a7c15ULL);
}

constexpr std::uint64_t keyed_polynomial(std::uint64_t key, std::uint32_t degree, std::uint64_t point) {
  const std::uint64_t x = point % kFieldPrime;
  std::uint64_t acc = 0;
  for (std::uint32_t i = degree; i-- > 0;) {
    acc = field_add(field_mul(acc, x), polynomial_coefficient(key, i));
  }
  return acc;
}

/// Same value as keyed_polynomial(key, coeffs.size(), point), from coefficients
/// generated in advance.
inline std::uint64_t eval_polynomial(const std::vector<std::uint64_t>& coeffs, std::uint64_t point) {
  const std::uint64_t x = point % kFieldPrime;
  std::uint64_t acc = 0;
  for (std::size_t i = coeffs.size(); i-- > 0;) acc = field_add(field_mul(acc, x), coeffs[i]);
  return acc;
}

}  // namespace dynsparse
