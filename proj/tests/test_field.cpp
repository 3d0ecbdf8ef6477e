#include <gtest/gtest.h>

#include <random>

#include "dynsparse/coordinate.hpp"
#include "dynsparse/field.hpp"

using namespace dynsparse;

TEST(Field, ArithmeticMatchesWideReference) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10000; ++i) {
    const std::uint64_t a = rng() % kFieldPrime;
    const std::uint64_t b = rng() % kFieldPrime;
    EXPECT_EQ(field_mul(a, b), static_cast<std::uint64_t>((static_cast<u128>(a) * b) % kFieldPrime));
    EXPECT_EQ(field_add(a, b), (a + b) % kFieldPrime);
    EXPECT_EQ(field_add(field_sub(a, b), b), a);
    EXPECT_EQ(field_add(a, field_neg(a)), 0u);
  }
}

TEST(Field, SignedEmbedding) {
  EXPECT_EQ(field_from_signed(0), 0u);
  EXPECT_EQ(field_from_signed(5), 5u);
  EXPECT_EQ(field_from_signed(-1), kFieldPrime - 1);
  EXPECT_EQ(field_add(field_from_signed(-7), field_from_signed(7)), 0u);
}

TEST(Field, KeyedPolynomialIsDeterministicAndKeyed) {
  EXPECT_EQ(keyed_polynomial(11, 8, 42), keyed_polynomial(11, 8, 42));
  EXPECT_NE(keyed_polynomial(11, 8, 42), keyed_polynomial(12, 8, 42));
  EXPECT_LT(keyed_polynomial(11, 8, 42), kFieldPrime);
  // Degree-0 polynomial is its constant coefficient everywhere.
  EXPECT_EQ(keyed_polynomial(5, 1, 1), keyed_polynomial(5, 1, 999));
}

TEST(Field, MixKeysIsOrderSensitive) {
  EXPECT_NE(mix_keys(1, 2, 3), mix_keys(1, 3, 2));
  EXPECT_EQ(mix_keys(1, 2, 3), mix_keys(1, 2, 3));
}

TEST(Coordinate, EncodingIsABijectionOntoPairRange) {
  const Vertex n = 200;
  std::vector<bool> hit(pair_count(n), false);
  for (Vertex w = 1; w < n; ++w)
    for (Vertex v = 0; v < w; ++v) {
      const CoordIndex idx = encode_edge(v, w);
      ASSERT_LT(idx, pair_count(n));
      EXPECT_FALSE(hit[idx]);
      hit[idx] = true;
      EXPECT_EQ(encode_edge(w, v), idx);
      EXPECT_EQ(decode_edge(idx), std::make_pair(v, w));
    }
}

TEST(Coordinate, DecodeLargeIndices) {
  const Vertex big = 1u << 20;
  for (Vertex v : {0u, 1u, big - 2, 12345u}) {
    const auto idx = encode_edge(v, big - 1);
    EXPECT_EQ(decode_edge(idx), std::make_pair(v, big - 1));
  }
}

TEST(Coordinate, IncidenceSigns) {
  EXPECT_EQ(incidence_sign(2, 2, 9), 1);
  EXPECT_EQ(incidence_sign(9, 2, 9), -1);
  EXPECT_EQ(incidence_sign(9, 9, 2), -1);
  EXPECT_EQ(incidence_sign(4, 2, 9), 0);
}
