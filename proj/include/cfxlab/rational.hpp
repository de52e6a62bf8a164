#pragma once

// Exact rational arithmetic and closed intervals.
//
// All model evaluation and optimization in this library is exact: weights,
// biases, distances and objective values are rationals, never floats. The
// serialized form is either a plain integer or a "p/q" string.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "cfxlab/errors.hpp"

namespace cfx {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// ===========================================================================
// parsing / formatting
// ===========================================================================

// Accepts an optionally signed integer ("-12") or a fraction "p/q" with
// integer p, q and q != 0. Whitespace is not tolerated; inputs come from
// machine-written files.
inline Rational parse_rational(std::string_view text) {
  if (text.empty()) throw ParseError("empty rational literal");
  auto is_int = [](std::string_view s) {
    if (!s.empty() && (s[0] == '+' || s[0] == '-')) s.remove_prefix(1);
    if (s.empty()) return false;
    for (char c : s)
      if (c < '0' || c > '9') return false;
    return true;
  };
  auto slash = text.find('/');
  try {
    if (slash == std::string_view::npos) {
      if (!is_int(text)) throw ParseError("bad rational literal: " + std::string(text));
      return Rational(BigInt(std::string(text)));
    }
    std::string_view num = text.substr(0, slash);
    std::string_view den = text.substr(slash + 1);
    if (!is_int(num) || !is_int(den))
      throw ParseError("bad rational literal: " + std::string(text));
    BigInt q{std::string(den)};
    if (q == 0) throw ParseError("zero denominator: " + std::string(text));
    return Rational(BigInt{std::string(num)}, q);
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception&) {
    throw ParseError("bad rational literal: " + std::string(text));
  }
}

// Integers render without a denominator so round-trips keep the plain form.
inline std::string format_rational(const Rational& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

// ===========================================================================
// intervals
// ===========================================================================

// Closed interval [lo, hi]; used by solvers as a sound over-approximation of
// a model's output range over a box of inputs.
struct Interval {
  Rational lo;
  Rational hi;

  bool contains(const Rational& v) const { return lo <= v && v <= hi; }
  bool is_point() const { return lo == hi; }

  static Interval point(const Rational& v) { return {v, v}; }

  Interval operator+(const Interval& o) const { return {lo + o.lo, hi + o.hi}; }

  Interval& operator+=(const Interval& o) {
    lo += o.lo;
    hi += o.hi;
    return *this;
  }

  // Scale by a constant; a negative factor swaps the endpoints.
  friend Interval operator*(const Rational& c, const Interval& iv) {
    if (c >= 0) return {c * iv.lo, c * iv.hi};
    return {c * iv.hi, c * iv.lo};
  }

  // max(0, .) endpoint-wise, matching the rectifier.
  Interval relu() const {
    auto clamp = [](const Rational& v) { return v < 0 ? Rational(0) : v; };
    return {clamp(lo), clamp(hi)};
  }
};

// Squared distance of v from the closed interval: zero inside, else the
// squared gap to the nearest endpoint. This is the exact lower bound for a
// squared-error loss over the interval.
inline Rational squared_gap(const Interval& iv, const Rational& v) {
  if (v < iv.lo) {
    Rational d = iv.lo - v;
    return d * d;
  }
  if (v > iv.hi) {
    Rational d = v - iv.hi;
    return d * d;
  }
  return Rational(0);
}

}  // namespace cfx
