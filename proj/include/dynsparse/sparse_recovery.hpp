#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <vector>

#include "dynsparse/coordinate.hpp"
#include "dynsparse/field.hpp"

namespace dynsparse {

struct RecoveryParams {
  std::uint64_t sparsity = 64;  // k: decode succeeds only for vectors with at most k nonzeros
  std::uint32_t rows = 4;       // independent hash rows
  std::uint64_t buckets = 0;    // per row; 0 selects 2k
  std::uint64_t seed = 0;
  std::uint64_t dimension = 0;  // coordinates live in [0, dimension)

  std::uint64_t bucket_count() const { return buckets != 0 ? buckets : 2 * sparsity; }
  std::uint64_t nominal_cells() const { return bucket_count() * rows; }

  friend bool operator==(const RecoveryParams&, const RecoveryParams&) = default;
};

/// Count, index sum and fingerprint sum of every coordinate hashed into a bucket.
struct RecoveryCell {
  std::int64_t count = 0;
  i128 index_sum = 0;
  std::uint64_t fingerprint = 0;

  bool is_zero() const { return count == 0 && index_sum == 0 && fingerprint == 0; }
  friend bool operator==(const RecoveryCell&, const RecoveryCell&) = default;
};

struct DecodeStats {
  std::uint64_t purity_checks = 0;
  std::uint64_t cell_updates = 0;
};

/// Exact k-sparse recovery sketch. The 0/1 measurement matrix is implicit: row r
/// sends coordinate i to bucket hash_r(i). Only nonzero cells are materialized,
/// kept sorted by row-major position, so two sketches of the same vector compare
/// equal field by field.
class RecoverySketch {
 public:
  RecoverySketch() = default;
  explicit RecoverySketch(const RecoveryParams& params) : params_(params) {
    if (params_.sparsity == 0 || params_.rows == 0 || params_.dimension == 0) {
      throw ConfigError("recovery sketch needs positive sparsity, rows and dimension");
    }
  }

  const RecoveryParams& params() const { return params_; }

  /// Adds delta at coordinate `index`. Returns the number of cells touched.
  std::uint32_t update(CoordIndex index, std::int64_t delta) {
    if (delta == 0) return 0;
    const std::uint64_t fp = fingerprint(index);
    const std::uint64_t fp_delta = field_mul(field_from_signed(delta), fp);
    for (std::uint32_t r = 0; r < params_.rows; ++r) {
      apply(position(r, index), delta, static_cast<i128>(delta) * static_cast<i128>(index), fp_delta);
    }
    return params_.rows;
  }

  RecoverySketch& operator+=(const RecoverySketch& other) { return combine(other, 1); }
  RecoverySketch& operator-=(const RecoverySketch& other) { return combine(other, -1); }

  friend RecoverySketch operator+(RecoverySketch a, const RecoverySketch& b) { return a += b; }
  friend RecoverySketch operator-(RecoverySketch a, const RecoverySketch& b) { return a -= b; }

  bool is_zero() const { return cells_.empty(); }
  std::size_t materialized_cells() const { return cells_.size(); }

  /// Peeling decode. Returns the underlying vector sorted by index, or nullopt when
  /// peeling stalls or more than k coordinates come out.
  std::optional<std::vector<SparseEntry>> decode(DecodeStats* stats = nullptr) const {
    std::vector<Slot> work = cells_;
    std::vector<std::uint64_t> pending;
    pending.reserve(work.size());
    for (const auto& s : work) pending.push_back(s.position);

    std::vector<SparseEntry> out;
    DecodeStats local;
    while (!pending.empty()) {
      const std::uint64_t pos = pending.back();
      pending.pop_back();
      auto it = find(work, pos);
      if (it == work.end()) continue;
      ++local.purity_checks;
      auto entry = pure_entry(pos, it->cell);
      if (!entry) continue;
      if (out.size() == params_.sparsity) {
        if (stats) *stats = local;
        return std::nullopt;
      }
      out.push_back(*entry);
      const std::uint64_t fp_delta = field_mul(field_from_signed(-entry->value), fingerprint(entry->index));
      for (std::uint32_t r = 0; r < params_.rows; ++r) {
        const std::uint64_t p = position(r, entry->index);
        apply_to(work, p, -entry->value, -static_cast<i128>(entry->value) * static_cast<i128>(entry->index),
                 fp_delta);
        ++local.cell_updates;
        if (find(work, p) != work.end()) pending.push_back(p);
      }
    }
    if (stats) *stats = local;
    if (!work.empty()) return std::nullopt;
    std::sort(out.begin(), out.end());
    return out;
  }

  friend bool operator==(const RecoverySketch& a, const RecoverySketch& b) {
    return a.params_ == b.params_ && a.cells_ == b.cells_;
  }

  static constexpr std::uint32_t kFormatVersion = 1;

  /// Binary layout: magic, version, parameters, nonzero cell count, then
  /// (position, count, index_sum lo, index_sum hi, fingerprint) in row-major order.
  void serialize(std::ostream& os) const {
    write_word(os, kMagic);
    write_word(os, kFormatVersion);
    write_word(os, params_.sparsity);
    write_word(os, params_.rows);
    write_word(os, params_.buckets);
    write_word(os, params_.seed);
    write_word(os, params_.dimension);
    write_word(os, cells_.size());
    for (const auto& s : cells_) {
      write_word(os, s.position);
      write_word(os, static_cast<std::uint64_t>(s.cell.count));
      write_word(os, static_cast<std::uint64_t>(static_cast<u128>(s.cell.index_sum)));
      write_word(os, static_cast<std::uint64_t>(static_cast<u128>(s.cell.index_sum) >> 64));
      write_word(os, s.cell.fingerprint);
    }
  }

  static RecoverySketch deserialize(std::istream& is) {
    if (read_word(is) != kMagic) throw ConfigError("not a recovery sketch stream");
    if (read_word(is) != kFormatVersion) throw ConfigError("unsupported recovery sketch version");
    RecoveryParams p;
    p.sparsity = read_word(is);
    p.rows = static_cast<std::uint32_t>(read_word(is));
    p.buckets = read_word(is);
    p.seed = read_word(is);
    p.dimension = read_word(is);
    RecoverySketch s(p);
    const std::uint64_t n = read_word(is);
    s.cells_.resize(n);
    for (auto& slot : s.cells_) {
      slot.position = read_word(is);
      slot.cell.count = static_cast<std::int64_t>(read_word(is));
      const u128 lo = read_word(is);
      const u128 hi = read_word(is);
      slot.cell.index_sum = static_cast<i128>(lo | (hi << 64));
      slot.cell.fingerprint = read_word(is);
    }
    if (!is) throw ConfigError("truncated recovery sketch stream");
    return s;
  }

  std::uint64_t bucket(std::uint32_t row, CoordIndex index) const {
    return keyed_polynomial(mix_keys(params_.seed, 0xb0c4e7ULL, row), 4, index) % params_.bucket_count();
  }

  std::uint64_t fingerprint(CoordIndex index) const {
    return keyed_polynomial(mix_keys(params_.seed, 0xf1f1ULL), 4, index);
  }

 private:
  struct Slot {
    std::uint64_t position = 0;
    RecoveryCell cell;
    friend bool operator==(const Slot&, const Slot&) = default;
  };

  static constexpr std::uint64_t kMagic = 0x53525344ULL;  // "DSRS"

  std::uint64_t position(std::uint32_t row, CoordIndex index) const {
    return static_cast<std::uint64_t>(row) * params_.bucket_count() + bucket(row, index);
  }

  static std::vector<Slot>::iterator find(std::vector<Slot>& v, std::uint64_t pos) {
    auto it = std::lower_bound(v.begin(), v.end(), pos, [](const Slot& s, std::uint64_t p) { return s.position < p; });
    return (it != v.end() && it->position == pos) ? it : v.end();
  }

  static void apply_to(std::vector<Slot>& v, std::uint64_t pos, std::int64_t dc, i128 di, std::uint64_t df) {
    auto it = std::lower_bound(v.begin(), v.end(), pos, [](const Slot& s, std::uint64_t p) { return s.position < p; });
    if (it == v.end() || it->position != pos) it = v.insert(it, Slot{pos, {}});
    it->cell.count += dc;
    it->cell.index_sum += di;
    it->cell.fingerprint = field_add(it->cell.fingerprint, df);
    if (it->cell.is_zero()) v.erase(it);
  }

  void apply(std::uint64_t pos, std::int64_t dc, i128 di, std::uint64_t df) { apply_to(cells_, pos, dc, di, df); }

  RecoverySketch& combine(const RecoverySketch& other, int sign) {
    if (!(params_ == other.params_)) throw ConfigError("recovery sketches with different parameters");
    std::vector<Slot> merged;
    merged.reserve(cells_.size() + other.cells_.size());
    auto a = cells_.begin();
    auto b = other.cells_.begin();
    while (a != cells_.end() || b != other.cells_.end()) {
      if (b == other.cells_.end() || (a != cells_.end() && a->position < b->position)) {
        merged.push_back(*a++);
        continue;
      }
      Slot s = (a != cells_.end() && a->position == b->position) ? *a++ : Slot{b->position, {}};
      s.cell.count += sign * b->cell.count;
      s.cell.index_sum += sign * b->cell.index_sum;
      s.cell.fingerprint =
          sign > 0 ? field_add(s.cell.fingerprint, b->cell.fingerprint) : field_sub(s.cell.fingerprint, b->cell.fingerprint);
      ++b;
      if (!s.cell.is_zero()) merged.push_back(s);
    }
    cells_ = std::move(merged);
    return *this;
  }

  std::optional<SparseEntry> pure_entry(std::uint64_t pos, const RecoveryCell& c) const {
    if (c.count == 0) return std::nullopt;
    if (c.index_sum % c.count != 0) return std::nullopt;
    const i128 idx = c.index_sum / c.count;
    if (idx < 0 || idx >= static_cast<i128>(params_.dimension)) return std::nullopt;
    const auto index = static_cast<CoordIndex>(idx);
    const auto row = static_cast<std::uint32_t>(pos / params_.bucket_count());
    if (position(row, index) != pos) return std::nullopt;
    if (field_mul(field_from_signed(c.count), fingerprint(index)) != c.fingerprint) return std::nullopt;
    return SparseEntry{index, c.count};
  }

  static void write_word(std::ostream& os, std::uint64_t w) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(w >> (8 * i));
    os.write(reinterpret_cast<const char*>(buf), 8);
  }

  static std::uint64_t read_word(std::istream& is) {
    unsigned char buf[8] = {};
    is.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t w = 0;
    for (int i = 0; i < 8; ++i) w |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return w;
  }

  RecoveryParams params_;
  std::vector<Slot> cells_;
};

}  // namespace dynsparse
