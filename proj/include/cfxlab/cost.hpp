#pragma once

// Perturbation cost functions over flip sets.

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cfxlab/bits.hpp"
#include "cfxlab/rational.hpp"

namespace cfx {

// Cost of a flip set. Two kinds:
//   hamming      — every coordinate costs 1
//   weighted-l1  — coordinate i costs weights[i] >= 0
// Costs are additive over coordinates, so cost is monotone under inclusion
// of flip sets and cost({}) == 0.
struct CostFunction {
  enum class Kind { hamming, weighted_l1 };

  Kind kind = Kind::hamming;
  size_t dim = 0;
  std::vector<Rational> weights;  // used only for weighted_l1; size == dim

  static CostFunction hamming(size_t dim) {
    CostFunction c;
    c.kind = Kind::hamming;
    c.dim = dim;
    return c;
  }

  static CostFunction weighted_l1(std::vector<Rational> w) {
    CostFunction c;
    c.kind = Kind::weighted_l1;
    c.dim = w.size();
    c.weights = std::move(w);
    for (const Rational& r : c.weights)
      if (r < 0) throw std::invalid_argument("cost weights must be nonnegative");
    return c;
  }

  Rational weight(size_t i) const {
    if (i >= dim) throw DimensionMismatch("cost weight index out of range");
    return kind == Kind::hamming ? Rational(1) : weights[i];
  }

  Rational of(const Delta& d) const {
    if (kind == Kind::hamming) {
      for (uint32_t i : d.flips)
        if (i >= dim) throw DimensionMismatch("flip index beyond cost dimension");
      return Rational(d.size());
    }
    Rational total = 0;
    for (uint32_t i : d.flips) total += weight(i);
    return total;
  }

  Rational between(const BinaryInstance& a, const BinaryInstance& b) const {
    return of(delta_between(a, b));
  }

  // Cost of flipping every coordinate; the largest value `of` can take.
  Rational max_value() const {
    if (kind == Kind::hamming) return Rational(dim);
    Rational total = 0;
    for (const Rational& w : weights) total += w;
    return total;
  }
};

}  // namespace cfx
