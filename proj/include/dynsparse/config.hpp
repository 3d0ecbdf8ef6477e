#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <compare>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>
#include <utility>

#include "dynsparse/coordinate.hpp"
#include "dynsparse/field.hpp"
#include "dynsparse/forest.hpp"
#include "dynsparse/l0_sampler.hpp"

namespace dynsparse {

inline std::string to_string(i128 x) {
  if (x == 0) return "0";
  const bool neg = x < 0;
  u128 m = neg ? static_cast<u128>(-(x + 1)) + 1 : static_cast<u128>(x);
  std::string s;
  while (m != 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(m % 10)));
    m /= 10;
  }
  if (neg) s.push_back('-');
  std::reverse(s.begin(), s.end());
  return s;
}

/// Exact rational with a positive denominator, always in lowest terms. Sampling
/// rates and output weights are kept exact so that replays are byte-identical.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t integer) : num_(integer), den_(1) {}  // NOLINT(implicit)
  Rational(i128 num, i128 den) : num_(num), den_(den) {
    if (den_ == 0) throw ConfigError("rational with zero denominator");
    normalize();
  }

  /// Accepts "3", "0.25", "-1.5" or "1/3".
  static Rational parse(std::string_view text) {
    auto fail = [&]() -> Rational { throw ConfigError("not a rational number: '" + std::string(text) + "'"); };
    if (text.empty()) return fail();
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
      return parse(text.substr(0, slash)) / parse(text.substr(slash + 1));
    }
    bool neg = false;
    std::size_t i = 0;
    if (text[0] == '-' || text[0] == '+') {
      neg = text[0] == '-';
      ++i;
    }
    i128 num = 0;
    i128 den = 1;
    bool seen_digit = false;
    bool seen_point = false;
    for (; i < text.size(); ++i) {
      const char c = text[i];
      if (c == '.' && !seen_point) {
        seen_point = true;
        continue;
      }
      if (!std::isdigit(static_cast<unsigned char>(c))) return fail();
      seen_digit = true;
      num = num * 10 + (c - '0');
      if (seen_point) den *= 10;
      if (num > (i128{1} << 100) || den > (i128{1} << 100)) return fail();
    }
    if (!seen_digit) return fail();
    return Rational(neg ? -num : num, den);
  }

  /// Closest rational with denominator at most 10^6.
  static Rational from_double(double x) {
    constexpr std::int64_t kDen = 1'000'000;
    return Rational(static_cast<i128>(std::llround(x * kDen)), kDen);
  }

  i128 num() const { return num_; }
  i128 den() const { return den_; }
  double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  /// ceil(num / den) for a nonnegative rational.
  i128 ceil() const { return num_ >= 0 ? (num_ + den_ - 1) / den_ : -((-num_) / den_); }

  std::string to_string() const { return dynsparse::to_string(num_) + "/" + dynsparse::to_string(den_); }

  /// Threshold T such that a unit value x/p is below this rational divided by 2^shift
  /// iff x < T. Exact for nonnegative rationals below 2^66.
  u128 unit_threshold(int shift) const {
    if (num_ <= 0) return 0;
    const u128 n = static_cast<u128>(num_) * kFieldPrime;
    const u128 d = static_cast<u128>(den_);
    u128 t = (n + d - 1) / d;
    if (shift <= 0) return t;
    if (shift >= 127) return t == 0 ? 0 : 1;
    return (t + (u128{1} << shift) - 1) >> shift;
  }

  friend Rational operator*(const Rational& a, const Rational& b) { return Rational(a.num_ * b.num_, a.den_ * b.den_); }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw ConfigError("division by zero rational");
    return Rational(a.num_ * b.den_, a.den_ * b.num_);
  }
  friend Rational operator+(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
  }
  friend bool operator==(const Rational& a, const Rational& b) { return a.num_ == b.num_ && a.den_ == b.den_; }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const i128 l = a.num_ * b.den_;
    const i128 r = b.num_ * a.den_;
    return l < r ? std::strong_ordering::less : (l > r ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

  /// this * 2^k for k >= 0, or this / 2^-k.
  Rational scaled_pow2(int k) const {
    if (k >= 0) return Rational(num_ * (i128{1} << k), den_);
    return Rational(num_, den_ * (i128{1} << -k));
  }

 private:
  void normalize() {
    if (den_ < 0) {
      den_ = -den_;
      num_ = -num_;
    }
    i128 a = num_ < 0 ? -num_ : num_;
    i128 b = den_;
    while (b != 0) a = std::exchange(b, a % b);
    if (a > 1) {
      num_ /= a;
      den_ /= a;
    }
  }

  i128 num_ = 0;
  i128 den_ = 1;
};

enum class Profile { kPaper, kDesk };

inline const char* to_string(Profile p) { return p == Profile::kPaper ? "paper" : "desk"; }

/// ceil(log2 n) for n >= 2; this integer stands in for log n in every rate formula.
inline int log2_ceil(std::uint64_t n) {
  int lg = 0;
  while ((std::uint64_t{1} << lg) < n) ++lg;
  return std::max(lg, 1);
}

/// Tunable constants. Zero in a count field selects the profile default derived
/// from n; see resolve().
struct SketchConfig {
  Vertex vertices = 2;
  Rational epsilon = Rational(1, 2);
  std::uint64_t seed = 1;
  Profile profile = Profile::kPaper;

  Rational gamma = 2;             // sampling-rate constant
  Rational alpha = 2;             // peeling-threshold constant
  Rational kappa = 4;             // sparsity budget constant
  Rational independence_c = 1;    // hash independence constant
  Rational projection_c = 2;      // degree-sketch width constant
  std::uint32_t level_copies = 0;     // copies b per connectivity exponent
  std::uint32_t recovery_copies = 0;  // copies r per recovery exponent
  std::uint32_t max_level = 0;        // highest level a
  std::uint32_t recovery_rows = 0;    // hash rows per recovery sketch
  std::uint32_t l0_ladders = 0;       // independent level ladders per l0-sampler
  bool checked = false;               // validate the stream against a shadow edge set

  static SketchConfig paper(Vertex n, Rational epsilon = Rational(1, 2), std::uint64_t seed = 1) {
    SketchConfig c;
    c.vertices = n;
    c.epsilon = epsilon;
    c.seed = seed;
    return c;
  }

  /// Reduced constants under which graphs with n <= 64 actually get sampled at
  /// rates below 1; the asymptotic constants put every such graph in the rate-1 regime.
  static SketchConfig desk(Vertex n, Rational epsilon = Rational(1, 2), std::uint64_t seed = 1) {
    SketchConfig c = paper(n, epsilon, seed);
    c.profile = Profile::kDesk;
    c.gamma = Rational(1, 16);
    c.alpha = Rational(1, 8);
    c.kappa = 1;
    c.independence_c = Rational(1, 4);
    c.projection_c = 2;
    const auto lg = static_cast<std::uint32_t>(log2_ceil(n));
    c.level_copies = 4 * lg;
    c.recovery_copies = lg;
    c.recovery_rows = 4;
    return c;
  }
};

/// Every size and threshold the pipeline uses, derived once from a SketchConfig.
struct ResolvedParams {
  Vertex vertices = 0;
  int log_n = 1;                 // ceil(log2 n)
  Rational rate_numerator;       // gamma log^2 n / eps^2: level-a edges are kept with min(1, this / 2^a)
  int shift = 0;                 // ceil(log2 rate_numerator), at least 0
  int max_level = 0;             // levels a = 0..max_level
  int max_exponent = 0;          // recovery/degree exponents 0..max_level - shift
  std::uint32_t level_copies = 1;
  std::uint32_t recovery_copies = 1;
  std::uint64_t sparsity = 1;    // k = ceil(kappa log^3 n / eps^2)
  double peel_threshold = 0;     // 4 alpha log^3 n / eps^2
  std::uint32_t independence = 2;
  std::uint32_t projections = 1;
  std::uint32_t recovery_rows = 4;
  std::uint32_t forest_rounds = 1;
  std::uint32_t l0_ladders = 3;
  std::uint32_t l0_levels = 1;
  std::uint64_t dimension = 0;

  /// Exponent of the recovery sketches consulted for level a.
  int exponent_for_level(int a) const { return std::max(a - shift, 0); }

  /// p_a = min(1, rate_numerator / 2^a).
  Rational level_rate(int a) const {
    const Rational p = rate_numerator.scaled_pow2(-a);
    return p < Rational(1) ? p : Rational(1);
  }

  /// Emission test on the controlling endpoint's g* value.
  u128 level_threshold(int a) const { return rate_numerator.unit_threshold(a); }
};

inline ResolvedParams resolve(const SketchConfig& c) {
  if (c.vertices < 2) throw ConfigError("need at least two vertices");
  if (!(c.epsilon > Rational(0) && c.epsilon < Rational(1))) throw ConfigError("epsilon must lie in (0, 1)");
  if (!(c.gamma > Rational(0)) || !(c.alpha > Rational(0)) || !(c.kappa > Rational(0)) ||
      !(c.independence_c > Rational(0)) || !(c.projection_c > Rational(0))) {
    throw ConfigError("constants must be positive");
  }
  ResolvedParams p;
  p.vertices = c.vertices;
  p.log_n = log2_ceil(c.vertices);
  const Rational lg(p.log_n);
  const Rational inv_eps2 = Rational(1) / (c.epsilon * c.epsilon);
  p.rate_numerator = c.gamma * lg * lg * inv_eps2;
  p.shift = 0;
  while (Rational(1).scaled_pow2(p.shift) < p.rate_numerator) ++p.shift;
  p.max_level = c.max_level != 0 ? static_cast<int>(c.max_level) : 2 * p.log_n;
  p.max_exponent = std::max(p.max_level - p.shift, 0);
  const auto lg_u = static_cast<std::uint32_t>(p.log_n);
  p.level_copies = c.level_copies != 0 ? c.level_copies : 8 * lg_u;
  p.recovery_copies = c.recovery_copies != 0 ? c.recovery_copies : 8 * lg_u;
  const Rational cube_over_eps2 = lg * lg * lg * inv_eps2;
  p.sparsity = static_cast<std::uint64_t>(std::max<i128>((c.kappa * cube_over_eps2).ceil(), 1));
  p.peel_threshold = (Rational(4) * c.alpha * cube_over_eps2).value();
  // A polynomial of degree >= n-1 is already fully independent over the n-1
  // possible partners of a vertex, so higher degrees buy nothing.
  const i128 t = (c.independence_c * cube_over_eps2).ceil();
  p.independence = static_cast<std::uint32_t>(std::clamp<i128>(t, 2, std::max<i128>(c.vertices, 2)));
  p.projections = static_cast<std::uint32_t>(std::max<i128>((c.projection_c * lg * inv_eps2).ceil(), 1));
  p.recovery_rows = c.recovery_rows != 0 ? c.recovery_rows : std::max<std::uint32_t>(4, lg_u);
  p.forest_rounds = forest_rounds_for(c.vertices);
  p.l0_ladders = c.l0_ladders != 0 ? c.l0_ladders : 3;
  p.dimension = pair_count(c.vertices);
  p.l0_levels = l0_levels_for(p.dimension);
  return p;
}

}  // namespace dynsparse
