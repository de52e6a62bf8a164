#include <catch2/catch_amalgamated.hpp>

#include "cfxlab/gadgets.hpp"
#include "cfxlab/generators.hpp"
#include "oracles.hpp"

using namespace cfx;

namespace {

Assignment make_assignment(std::initializer_list<int> bits) {
  Assignment a;
  for (int b : bits) a.values.push_back(static_cast<uint8_t>(b));
  return a;
}

}  // namespace

TEST_CASE("integer square-root ceiling") {
  CHECK(ceil_sqrt(Rational(0)) == 0);
  CHECK(ceil_sqrt(Rational(1)) == 1);
  CHECK(ceil_sqrt(Rational(2)) == 2);
  CHECK(ceil_sqrt(Rational(4)) == 2);
  CHECK(ceil_sqrt(Rational(5)) == 3);
  CHECK(ceil_sqrt(Rational(6)) == 3);
  CHECK(ceil_sqrt(Rational(9)) == 3);
  CHECK(ceil_sqrt(Rational(10)) == 4);
  CHECK(ceil_sqrt(Rational(1, 4)) == 1);
  CHECK(ceil_sqrt(Rational(17, 2)) == 3);  // 8.5 <= 9
  CHECK(ceil_sqrt(Rational(1000000)) == 1000);
}

TEST_CASE("default scale is the smallest valid one") {
  // six flips maximum: need (M-1)^2 >= 6, so M = 4
  CHECK(default_gadget_scale(CostFunction::hamming(6)) == 4);
  // three flips: (M-1)^2 >= 3 gives M = 3
  CHECK(default_gadget_scale(CostFunction::hamming(3)) == 3);
  // the floor of 2 kicks in for tiny costs
  CHECK(default_gadget_scale(CostFunction::hamming(1)) == 2);
}

TEST_CASE("scale validation rejects unusable values") {
  CnfFormula f = parse_dimacs("p cnf 3 1\n-1 2 -3 0\n");
  CHECK_THROWS_AS(build_gadget(f, GadgetKind::relu, Rational(2)), std::invalid_argument);
  CHECK_THROWS_AS(build_gadget(f, GadgetKind::atm, Rational(1)), std::invalid_argument);
  CHECK_THROWS_AS(build_gadget(f, GadgetKind::knn, Rational(0)), std::invalid_argument);
  // a generous or fractional scale is fine as long as (M-1)^2 covers the cost
  CHECK_NOTHROW(build_gadget(f, GadgetKind::relu, Rational(10)));
  CHECK_NOTHROW(build_gadget(f, GadgetKind::atm, Rational(7, 2)));
}

// ===========================================================================
// network compiler
// ===========================================================================

TEST_CASE("network gadget: shape and frozen evaluations for one clause") {
  CnfFormula f = parse_dimacs("p cnf 3 1\n-1 2 -3 0\n");
  GadgetInstance g = build_relu_gadget(f);
  CHECK(g.M == 4);  // max cost 6 over the 6 literal inputs
  CHECK(g.num_vars == 3);
  CHECK(g.num_clauses == 1);
  REQUIRE(g.regressor.is<ReluNetwork>());
  const auto& net = g.regressor.as<ReluNetwork>();
  CHECK(net.dim == 6);
  REQUIRE(net.layers.size() == 2);
  CHECK(net.layers[0].weights.size() == 4);  // 1 clause + 3 consistency rows
  CHECK(net.layers[1].weights.size() == 1);
  CHECK(!net.classifier);
  CHECK(validate(g.regressor).ok());

  // satisfying assignment x1=F, x2=T, x3=F encodes to output 0
  BinaryInstance sat_x = encode_assignment(g, make_assignment({0, 1, 0}));
  CHECK(sat_x.to_string() == "011001");
  CHECK(evaluate(g.regressor, sat_x) == Output::number(0));

  // the all-unset origin violates the clause: output M
  CHECK(evaluate(g.regressor, g.x_orig) == Output::number(4));

  // falsifying assignment x1=T, x2=F, x3=T: output M
  BinaryInstance bad_x = encode_assignment(g, make_assignment({1, 0, 1}));
  CHECK(evaluate(g.regressor, bad_x) == Output::number(4));

  // claiming a variable both ways trips its consistency neuron
  BinaryInstance both = BinaryInstance::from_string("110010");
  CHECK(evaluate(g.regressor, both).numeric() >= g.M);
}

TEST_CASE("network gadget: extraction defaults unset variables to false") {
  CnfFormula f = parse_dimacs("p cnf 3 1\n-1 2 -3 0\n");
  GadgetInstance g = build_relu_gadget(f);
  // only the negative-literal input of x1 is set: output 0
  BinaryInstance x = BinaryInstance::from_string("010000");
  auto a = extract_assignment(g, x);
  REQUIRE(a.has_value());
  CHECK(a->to_string() == "x1=0 x2=0 x3=0");
  CHECK(satisfies(*a, f));

  // nonzero output extracts nothing
  CHECK(!extract_assignment(g, g.x_orig).has_value());
}

// ===========================================================================
// additive-tree compiler
// ===========================================================================

TEST_CASE("tree gadget: shape and traversal for one clause") {
  CnfFormula f = parse_dimacs("p cnf 3 1\n1 2 -3 0\n");
  GadgetInstance g = build_atm_gadget(f);
  CHECK(g.M == 3);  // max cost 3 over the 3 direct inputs
  REQUIRE(g.regressor.is<AdditiveTreeModel>());
  const auto& atm = g.regressor.as<AdditiveTreeModel>();
  CHECK(atm.dim == 3);
  REQUIRE(atm.trees.size() == 1);
  CHECK(atm.trees[0].nodes.size() == 3);
  CHECK(atm.trees[0].leaves.size() == 4);
  CHECK(validate(g.regressor).ok());

  // x2 true satisfies the clause
  CHECK(evaluate(g.regressor, BinaryInstance::from_string("010")) == Output::number(0));
  // (F,F,T) falsifies every literal: the unique bad branch
  CHECK(evaluate(g.regressor, BinaryInstance::from_string("001")) == Output::number(3));
  // x1 true satisfies it regardless of the rest
  CHECK(evaluate(g.regressor, BinaryInstance::from_string("101")) == Output::number(0));
}

TEST_CASE("tree gadget: the mean turns leaf values back into M per violation") {
  // two clauses over four variables, both falsified by the all-zero input
  CnfFormula f = parse_dimacs("p cnf 4 2\n1 2 3 0\n1 2 4 0\n");
  GadgetInstance g = build_atm_gadget(f);
  CHECK(g.M == 3);
  // all-zero: both clauses false, output 2M
  CHECK(evaluate(g.regressor, BinaryInstance::from_string("0000")) == Output::number(6));
  // x3 true fixes the first clause only
  CHECK(evaluate(g.regressor, BinaryInstance::from_string("0010")) == Output::number(3));
  // x1 true fixes both
  CHECK(evaluate(g.regressor, BinaryInstance::from_string("1000")) == Output::number(0));
}

// ===========================================================================
// nearest-neighbor compiler
// ===========================================================================

TEST_CASE("nearest-neighbor gadget: shape and frozen evaluations") {
  CnfFormula f = parse_dimacs("p cnf 3 1\n1 2 -3 0\n");
  GadgetInstance g = build_knn_gadget(f);
  CHECK(g.M == 3);
  REQUIRE(g.regressor.is<KnnRegressor>());
  const auto& knn = g.regressor.as<KnnRegressor>();
  CHECK(knn.dim == 3);
  CHECK(knn.k == 1);
  CHECK(knn.vectors.size() == 8);
  size_t high_labels = 0;
  for (const Rational& l : knn.labels) high_labels += (l == Rational(3));
  CHECK(high_labels == 1);  // exactly the falsifying corner
  CHECK(validate(g.regressor).ok());

  // the falsifying input sits on the labeled corner
  CHECK(evaluate(g.regressor, BinaryInstance::from_string("001")) == Output::number(3));
  // a satisfying input matches a zero-labeled corner exactly
  CHECK(evaluate(g.regressor, BinaryInstance::from_string("100")) == Output::number(0));
  CHECK(evaluate(g.regressor, BinaryInstance::from_string("010")) == Output::number(0));
}

TEST_CASE("nearest-neighbor gadget: k equals the clause count on larger formulas") {
  CnfFormula f = parse_dimacs("p cnf 4 3\n1 2 3 0\n-1 -2 4 0\n2 3 -4 0\n");
  GadgetInstance g = build_knn_gadget(f);
  const auto& knn = g.regressor.as<KnnRegressor>();
  CHECK(knn.k == 3);
  CHECK(knn.vectors.size() == 24);
  // every group contributes exactly one high corner
  size_t high_labels = 0;
  for (const Rational& l : knn.labels) high_labels += (l != 0);
  CHECK(high_labels == 3);
  // all-zero falsifies clause 1 only (clause 2 has -1, clause 3 has -4)
  CHECK(evaluate(g.regressor, BinaryInstance::from_string("0000")) == Output::number(3));
}

// ===========================================================================
// encoding round trips
// ===========================================================================

TEST_CASE("assignment encoding round-trips through extraction") {
  Rng rng(1234);
  for (int t = 0; t < 40; ++t) {
    uint32_t v = static_cast<uint32_t>(rng.range(3, 6));
    uint32_t c = static_cast<uint32_t>(rng.range(1, 8));
    CnfFormula f = random_cnf(rng, v, c);
    for (GadgetKind kind : {GadgetKind::relu, GadgetKind::atm, GadgetKind::knn}) {
      GadgetInstance g = build_gadget(f, kind);
      for (uint64_t code = 0; code < (uint64_t(1) << v); ++code) {
        Assignment a;
        for (uint32_t i = 0; i < v; ++i) a.values.push_back((code >> i) & 1u);
        BinaryInstance x = encode_assignment(g, a);
        Rational out = evaluate(g.regressor, x).numeric();
        if (satisfies(a, f)) {
          REQUIRE(out == 0);
          auto back = extract_assignment(g, x);
          REQUIRE(back.has_value());
          CHECK(back->values == a.values);
        } else {
          CHECK(out >= g.M);
        }
      }
    }
  }
}

TEST_CASE("assignment encoding checks the variable count") {
  CnfFormula f = parse_dimacs("p cnf 3 1\n1 2 -3 0\n");
  GadgetInstance g = build_gadget(f, GadgetKind::relu);
  CHECK_THROWS_AS(encode_assignment(g, make_assignment({1, 0})), DimensionMismatch);
}

// ===========================================================================
// verifier
// ===========================================================================

TEST_CASE("exhaustive verification passes on a freshly built gadget") {
  CnfFormula f = parse_dimacs("p cnf 3 2\n1 2 -3 0\n-1 2 3 0\n");
  for (GadgetKind kind : {GadgetKind::relu, GadgetKind::atm, GadgetKind::knn}) {
    GadgetInstance g = build_gadget(f, kind);
    GadgetReport rep = verify_gadget(g, f);
    CHECK(rep.ok());
    uint32_t dim = (kind == GadgetKind::relu) ? 6 : 3;
    CHECK(rep.inputs_checked == (uint64_t(1) << dim));
    CHECK(rep.assignments_checked == 8);
  }
}

TEST_CASE("sampled verification respects the requested budget") {
  CnfFormula f = parse_dimacs("p cnf 3 1\n1 2 -3 0\n");
  GadgetInstance g = build_gadget(f, GadgetKind::atm);
  GadgetReport rep = verify_gadget(g, f, VerifyMode::sampled(200, 17));
  CHECK(rep.ok());
  CHECK(rep.inputs_checked == 200);
  CHECK(rep.assignments_checked == 200);
  // same seed, same outcome
  GadgetReport again = verify_gadget(g, f, VerifyMode::sampled(200, 17));
  CHECK(again.inputs_checked == rep.inputs_checked);
  CHECK(again.violations == rep.violations);
}

TEST_CASE("verification catches corrupted gadgets") {
  CnfFormula f = parse_dimacs("p cnf 3 1\n1 2 -3 0\n");
  SECTION("network with a weakened clause neuron") {
    GadgetInstance g = build_relu_gadget(f);
    auto net = g.regressor.as<ReluNetwork>();
    net.layers[0].bias[0] = g.M - 1;  // fires M-1 instead of M
    g.regressor = Model(net);
    GadgetReport rep = verify_gadget(g, f);
    REQUIRE(!rep.ok());
    CHECK(rep.violations.front().find("in (0, M)") != std::string::npos);
  }
  SECTION("tree with a clipped penalty leaf") {
    GadgetInstance g = build_atm_gadget(f);
    auto atm = g.regressor.as<AdditiveTreeModel>();
    atm.trees[0].leaves.back().value = Rational(1);
    g.regressor = Model(atm);
    CHECK(!verify_gadget(g, f).ok());
  }
  SECTION("corner store with a mislabeled point") {
    GadgetInstance g = build_knn_gadget(f);
    auto knn = g.regressor.as<KnnRegressor>();
    for (auto& l : knn.labels)
      if (l == 0) {
        l = Rational(1);  // a satisfying corner now reads 1, inside (0, M)
        break;
      }
    g.regressor = Model(knn);
    CHECK(!verify_gadget(g, f).ok());
  }
}

TEST_CASE("exhaustive verification refuses oversized gadgets") {
  Rng rng(5150);
  CnfFormula f = random_cnf(rng, 11, 4);
  GadgetInstance g = build_gadget(f, GadgetKind::relu);  // 22 inputs
  CHECK_THROWS_AS(verify_gadget(g, f), CapExceeded);
  // sampling still works above the exhaustive cap
  CHECK(verify_gadget(g, f, VerifyMode::sampled(50, 3)).ok());
}

TEST_CASE("dichotomy holds on random formulas for every compiler") {
  Rng rng(31337);
  for (int t = 0; t < 25; ++t) {
    uint32_t v = static_cast<uint32_t>(rng.range(3, 6));
    uint32_t c = static_cast<uint32_t>(rng.range(1, 12));
    CnfFormula f = random_cnf(rng, v, c);
    for (GadgetKind kind : {GadgetKind::relu, GadgetKind::atm, GadgetKind::knn}) {
      GadgetInstance g = build_gadget(f, kind);
      GadgetReport rep = verify_gadget(g, f);
      if (!rep.ok()) {
        for (const auto& viol : rep.violations) UNSCOPED_INFO(viol);
      }
      REQUIRE(rep.ok());
    }
  }
}

// ===========================================================================
// end-to-end reduction
// ===========================================================================

TEST_CASE("reduction decides a satisfiable single clause") {
  CnfFormula f = parse_dimacs("p cnf 3 1\n1 2 -3 0\n");
  for (GadgetKind kind : {GadgetKind::relu, GadgetKind::atm, GadgetKind::knn}) {
    ReductionOutcome out = run_reduction(f, kind);
    REQUIRE(out.satisfiable);
    REQUIRE(out.assignment.has_value());
    CHECK(satisfies(*out.assignment, f));
    CHECK(out.objective <= out.threshold);
    CHECK(!out.certificate.empty());
  }
}

TEST_CASE("reduction decides the eight-clause contradiction") {
  CnfFormula f = parse_dimacs(
      "p cnf 3 8\n"
      "1 2 3 0\n-1 2 3 0\n1 -2 3 0\n1 2 -3 0\n"
      "-1 -2 3 0\n-1 2 -3 0\n1 -2 -3 0\n-1 -2 -3 0\n");
  for (GadgetKind kind : {GadgetKind::relu, GadgetKind::atm, GadgetKind::knn}) {
    ReductionOutcome out = run_reduction(f, kind);
    CHECK(!out.satisfiable);
    CHECK(!out.assignment.has_value());
    CHECK(out.objective >= out.threshold + 1);  // at least M^2 > (M-1)^2
  }
}

TEST_CASE("reduction recovers the unique satisfying assignment") {
  // kill every assignment except all-true
  CnfFormula f = parse_dimacs(
      "p cnf 3 7\n"
      "1 2 3 0\n1 2 -3 0\n1 -2 3 0\n-1 2 3 0\n"
      "1 -2 -3 0\n-1 2 -3 0\n-1 -2 3 0\n");
  for (GadgetKind kind : {GadgetKind::relu, GadgetKind::atm, GadgetKind::knn}) {
    auto a = sat_via_cfe(f, kind);
    REQUIRE(a.has_value());
    CHECK(a->to_string() == "x1=1 x2=1 x3=1");
  }
}

TEST_CASE("reduction agrees with direct search on random formulas") {
  Rng rng(9090);
  for (int t = 0; t < 12; ++t) {
    uint32_t v = static_cast<uint32_t>(rng.range(3, 6));
    uint32_t c = static_cast<uint32_t>(rng.range(1, 14));
    CnfFormula f = random_cnf(rng, v, c);
    bool expect = oracle::sat_search(f).has_value();
    for (GadgetKind kind : {GadgetKind::relu, GadgetKind::atm, GadgetKind::knn}) {
      ReductionOutcome out = run_reduction(f, kind);
      CHECK(out.satisfiable == expect);
      if (out.assignment) CHECK(satisfies(*out.assignment, f));
    }
  }
}

TEST_CASE("reduction at an explicit scale keeps the dichotomy") {
  CnfFormula f = parse_dimacs("p cnf 3 2\n1 2 3 0\n-1 -2 -3 0\n");
  ReductionOutcome out = run_reduction(f, GadgetKind::atm, Rational(11));
  CHECK(out.satisfiable);
  CHECK(out.threshold == 100);
}
