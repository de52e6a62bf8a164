#pragma once

// Binary feature vectors, flip sets, and partial instances.

#include <algorithm>

#include "cfxlab/errors.hpp"
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfx {

struct DimensionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ===========================================================================
// BinaryInstance: a point of {0,1}^d
// ===========================================================================

struct BinaryInstance {
  std::vector<uint8_t> bits;  // each 0 or 1

  BinaryInstance() = default;
  explicit BinaryInstance(std::vector<uint8_t> b) : bits(std::move(b)) {}

  static BinaryInstance zeros(size_t dim) { return BinaryInstance(std::vector<uint8_t>(dim, 0)); }
  static BinaryInstance ones(size_t dim) { return BinaryInstance(std::vector<uint8_t>(dim, 1)); }

  // "0110" -> (0,1,1,0)
  static BinaryInstance from_string(const std::string& s) {
    std::vector<uint8_t> b;
    b.reserve(s.size());
    for (char c : s) {
      if (c != '0' && c != '1') throw ParseError("bit string must be over {0,1}");
      b.push_back(static_cast<uint8_t>(c - '0'));
    }
    return BinaryInstance(std::move(b));
  }

  // Decode `dim` bits from an integer, index 0 = least significant bit.
  // Handy for exhaustive sweeps over small domains.
  static BinaryInstance from_index(uint64_t code, size_t dim) {
    std::vector<uint8_t> b(dim);
    for (size_t i = 0; i < dim; ++i) b[i] = static_cast<uint8_t>((code >> i) & 1u);
    return BinaryInstance(std::move(b));
  }

  size_t dim() const { return bits.size(); }
  uint8_t operator[](size_t i) const { return bits[i]; }
  uint8_t& operator[](size_t i) { return bits[i]; }

  std::string to_string() const {
    std::string s;
    s.reserve(bits.size());
    for (uint8_t b : bits) s.push_back(static_cast<char>('0' + b));
    return s;
  }

  bool operator==(const BinaryInstance& o) const { return bits == o.bits; }
  bool operator!=(const BinaryInstance& o) const { return bits != o.bits; }
};

// ===========================================================================
// Delta: a set of coordinates to flip
// ===========================================================================

// Stored sorted and duplicate-free; the canonical representation of a
// counterfactual perturbation of a binary point.
struct Delta {
  std::vector<uint32_t> flips;

  Delta() = default;
  explicit Delta(std::vector<uint32_t> f) : flips(std::move(f)) { normalize(); }

  void normalize() {
    std::sort(flips.begin(), flips.end());
    flips.erase(std::unique(flips.begin(), flips.end()), flips.end());
  }

  size_t size() const { return flips.size(); }
  bool empty() const { return flips.empty(); }
  bool contains(uint32_t i) const {
    return std::binary_search(flips.begin(), flips.end(), i);
  }

  bool operator==(const Delta& o) const { return flips == o.flips; }
  bool operator!=(const Delta& o) const { return flips != o.flips; }

  // Order: fewer flips first; among equal sizes, lexicographically smaller
  // index sequence first. Solvers use this to break ties deterministically.
  static bool size_lex_less(const Delta& a, const Delta& b) {
    if (a.flips.size() != b.flips.size()) return a.flips.size() < b.flips.size();
    return std::lexicographical_compare(a.flips.begin(), a.flips.end(), b.flips.begin(),
                                        b.flips.end());
  }

  // Plain lexicographic order on the index sequence, ignoring size.
  static bool lex_less(const Delta& a, const Delta& b) {
    return std::lexicographical_compare(a.flips.begin(), a.flips.end(), b.flips.begin(),
                                        b.flips.end());
  }
};

inline BinaryInstance apply_delta(const BinaryInstance& x, const Delta& d) {
  BinaryInstance y = x;
  for (uint32_t i : d.flips) {
    if (i >= y.dim()) throw DimensionMismatch("flip index out of range");
    y.bits[i] ^= 1u;
  }
  return y;
}

// The delta sending a to b (defined coordinate-wise; dims must agree).
inline Delta delta_between(const BinaryInstance& a, const BinaryInstance& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("delta between points of different dimension");
  std::vector<uint32_t> f;
  for (size_t i = 0; i < a.dim(); ++i)
    if (a.bits[i] != b.bits[i]) f.push_back(static_cast<uint32_t>(i));
  return Delta(std::move(f));
}

inline size_t hamming_distance(const BinaryInstance& a, const BinaryInstance& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("hamming distance of different dimensions");
  size_t d = 0;
  for (size_t i = 0; i < a.dim(); ++i) d += (a.bits[i] != b.bits[i]);
  return d;
}

// ===========================================================================
// PartialInstance: a point with unset coordinates (a subcube of {0,1}^d)
// ===========================================================================

inline constexpr int8_t kUnset = -1;

struct PartialInstance {
  std::vector<int8_t> bits;  // 0, 1, or kUnset

  PartialInstance() = default;
  explicit PartialInstance(std::vector<int8_t> b) : bits(std::move(b)) {}

  static PartialInstance all_unset(size_t dim) {
    return PartialInstance(std::vector<int8_t>(dim, kUnset));
  }
  static PartialInstance from_instance(const BinaryInstance& x) {
    PartialInstance p;
    p.bits.assign(x.bits.begin(), x.bits.end());
    return p;
  }
  // "01*1": '*' marks an unset coordinate.
  static PartialInstance from_string(const std::string& s) {
    PartialInstance p;
    p.bits.reserve(s.size());
    for (char c : s) {
      if (c == '0' || c == '1')
        p.bits.push_back(static_cast<int8_t>(c - '0'));
      else if (c == '*')
        p.bits.push_back(kUnset);
      else
        throw ParseError("partial bit string must be over {0,1,*}");
    }
    return p;
  }

  size_t dim() const { return bits.size(); }
  bool is_set(size_t i) const { return bits[i] != kUnset; }
  size_t count_unset() const {
    size_t n = 0;
    for (int8_t b : bits) n += (b == kUnset);
    return n;
  }
  bool is_complete() const { return count_unset() == 0; }

  // True if x agrees with every set coordinate.
  bool matches(const BinaryInstance& x) const {
    if (x.dim() != dim()) throw DimensionMismatch("partial/instance dimension mismatch");
    for (size_t i = 0; i < dim(); ++i)
      if (bits[i] != kUnset && bits[i] != static_cast<int8_t>(x.bits[i])) return false;
    return true;
  }

  // Fill unset coordinates from `fill` (must have the same dimension).
  BinaryInstance complete_with(const BinaryInstance& fill) const {
    if (fill.dim() != dim()) throw DimensionMismatch("completion dimension mismatch");
    BinaryInstance x = fill;
    for (size_t i = 0; i < dim(); ++i)
      if (bits[i] != kUnset) x.bits[i] = static_cast<uint8_t>(bits[i]);
    return x;
  }

  // Canonical completion: unset coordinates become 0.
  BinaryInstance complete_zero() const { return complete_with(BinaryInstance::zeros(dim())); }

  std::string to_string() const {
    std::string s;
    s.reserve(bits.size());
    for (int8_t b : bits) s.push_back(b == kUnset ? '*' : static_cast<char>('0' + b));
    return s;
  }

  bool operator==(const PartialInstance& o) const { return bits == o.bits; }
};

}  // namespace cfx
