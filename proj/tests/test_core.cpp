#include <catch2/catch_amalgamated.hpp>

#include "cfxlab/bits.hpp"
#include "cfxlab/cost.hpp"
#include "cfxlab/generators.hpp"
#include "cfxlab/rational.hpp"

using namespace cfx;

TEST_CASE("rational parsing accepts integers and fractions") {
  CHECK(parse_rational("3") == Rational(3));
  CHECK(parse_rational("-7") == Rational(-7));
  CHECK(parse_rational("1/2") == Rational(1, 2));
  CHECK(parse_rational("-6/4") == Rational(-3, 2));
  CHECK(format_rational(Rational(5)) == "5");
  CHECK(format_rational(Rational(-3, 2)) == "-3/2");
  CHECK(parse_rational(format_rational(Rational(22, 7))) == Rational(22, 7));
}

TEST_CASE("rational parsing rejects malformed input") {
  CHECK_THROWS_AS(parse_rational(""), ParseError);
  CHECK_THROWS_AS(parse_rational("1.5"), ParseError);
  CHECK_THROWS_AS(parse_rational("1/0"), ParseError);
  CHECK_THROWS_AS(parse_rational("a/b"), ParseError);
  CHECK_THROWS_AS(parse_rational("1/"), ParseError);
  CHECK_THROWS_AS(parse_rational("2 3"), ParseError);
}

TEST_CASE("interval arithmetic and relu clamp") {
  Interval a{Rational(-1), Rational(2)};
  Interval b{Rational(3), Rational(5)};
  Interval s = a + b;
  CHECK(s.lo == Rational(2));
  CHECK(s.hi == Rational(7));
  Interval scaled = Rational(-2) * b;  // negative scale swaps endpoints
  CHECK(scaled.lo == Rational(-10));
  CHECK(scaled.hi == Rational(-6));
  Interval r = a.relu();
  CHECK(r.lo == Rational(0));
  CHECK(r.hi == Rational(2));
  CHECK(a.contains(Rational(0)));
  CHECK(!a.contains(Rational(3)));
}

TEST_CASE("squared gap to an interval") {
  Interval box{Rational(1), Rational(3)};
  CHECK(squared_gap(box, Rational(2)) == Rational(0));   // inside
  CHECK(squared_gap(box, Rational(0)) == Rational(1));   // below: (1-0)^2
  CHECK(squared_gap(box, Rational(5)) == Rational(4));   // above: (5-3)^2
  CHECK(squared_gap(box, Rational(1)) == Rational(0));   // boundary
}

TEST_CASE("binary instances parse and print") {
  BinaryInstance x = BinaryInstance::from_string("0101");
  CHECK(x.dim() == 4);
  CHECK(x.to_string() == "0101");
  CHECK(x[0] == 0);
  CHECK(x[1] == 1);
  CHECK_THROWS_AS(BinaryInstance::from_string("01x1"), ParseError);
  CHECK(BinaryInstance::from_index(1, 3).to_string() == "100");  // bit 0 first
  CHECK(BinaryInstance::from_index(6, 3).to_string() == "011");
}

TEST_CASE("apply_delta flips exactly the listed bits") {
  BinaryInstance x = BinaryInstance::from_string("000");
  Delta d0;
  d0.flips = {0};
  CHECK(apply_delta(x, d0).to_string() == "100");

  BinaryInstance y = BinaryInstance::from_string("101");
  Delta none;
  CHECK(apply_delta(y, none) == y);

  Delta d02;
  d02.flips = {0, 2};
  CHECK(apply_delta(y, d02).to_string() == "000");

  Delta oob;
  oob.flips = {3};
  CHECK_THROWS_AS(apply_delta(y, oob), DimensionMismatch);
}

TEST_CASE("apply_delta is an involution on random inputs") {
  Rng rng(42);
  for (int t = 0; t < 200; ++t) {
    uint32_t d = static_cast<uint32_t>(rng.range(1, 16));
    BinaryInstance x = random_instance(rng, d);
    Delta delta;
    for (uint32_t i = 0; i < d; ++i)
      if (rng.coin()) delta.flips.push_back(i);
    BinaryInstance twice = apply_delta(apply_delta(x, delta), delta);
    CHECK(twice == x);
    CHECK(hamming_distance(x, apply_delta(x, delta)) == delta.size());
    CHECK(delta_between(x, apply_delta(x, delta)) == delta);
  }
}

TEST_CASE("delta normalization sorts and deduplicates") {
  Delta d;
  d.flips = {5, 1, 5, 3, 1};
  d.normalize();
  CHECK(d.flips == std::vector<uint32_t>{1, 3, 5});
  CHECK(d.contains(3));
  CHECK(!d.contains(2));
}

TEST_CASE("delta orderings") {
  Delta a, b, c;
  a.flips = {0, 3};
  b.flips = {1};
  c.flips = {0, 4};
  CHECK(Delta::lex_less(a, b));        // 0 < 1 lexicographically
  CHECK(Delta::lex_less(a, c));        // shared prefix, 3 < 4
  CHECK(Delta::size_lex_less(b, a));   // smaller size wins first
  CHECK(!Delta::size_lex_less(a, b));
}

TEST_CASE("partial instances") {
  PartialInstance p = PartialInstance::from_string("1*0*");
  CHECK(p.dim() == 4);
  CHECK(p.count_unset() == 2);
  CHECK(!p.is_complete());
  CHECK(p.to_string() == "1*0*");
  CHECK(p.matches(BinaryInstance::from_string("1101")));
  CHECK(!p.matches(BinaryInstance::from_string("0101")));
  CHECK(p.complete_zero().to_string() == "1000");
  BinaryInstance base = BinaryInstance::from_string("0111");
  CHECK(p.complete_with(base).to_string() == "1101");
  PartialInstance full = PartialInstance::from_instance(base);
  CHECK(full.is_complete());
  CHECK(full.complete_zero() == base);
}

TEST_CASE("hamming cost") {
  CostFunction c = CostFunction::hamming(4);
  Delta d;
  CHECK(c.of(d) == Rational(0));
  d.flips = {0, 2, 3};
  CHECK(c.of(d) == Rational(3));
  CHECK(c.max_value() == Rational(4));
  CHECK(c.between(BinaryInstance::from_string("0000"), BinaryInstance::from_string("1010")) ==
        Rational(2));
}

TEST_CASE("weighted cost") {
  CostFunction c = CostFunction::weighted_l1({Rational(1), Rational(1, 2), Rational(3)});
  Delta d;
  d.flips = {1, 2};
  CHECK(c.of(d) == Rational(7, 2));
  CHECK(c.max_value() == Rational(9, 2));
  CHECK_THROWS_AS(CostFunction::weighted_l1({Rational(-1)}), std::invalid_argument);
}

TEST_CASE("cost is monotone under flip-set inclusion") {
  Rng rng(7);
  for (int t = 0; t < 100; ++t) {
    uint32_t d = static_cast<uint32_t>(rng.range(1, 12));
    CostFunction c = random_cost(rng, d);
    Delta small, big;
    for (uint32_t i = 0; i < d; ++i) {
      if (rng.coin()) {
        big.flips.push_back(i);
        if (rng.coin()) small.flips.push_back(i);
      }
    }
    CHECK(c.of(small) <= c.of(big));
    CHECK(c.of(big) <= c.max_value());
  }
}
