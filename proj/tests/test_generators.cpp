#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "cfxlab/generators.hpp"
#include "cfxlab/model_json.hpp"

using namespace cfx;

TEST_CASE("stream derivation decorrelates seeds") {
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
}

TEST_CASE("bounded draws stay in range") {
  Rng rng(99);
  for (int t = 0; t < 2000; ++t) {
    uint64_t b = rng.below(7);
    CHECK(b < 7);
    int64_t r = rng.range(-3, 12);
    CHECK(r >= -3);
    CHECK(r <= 12);
  }
  // below(1) is always 0
  for (int t = 0; t < 10; ++t) CHECK(rng.below(1) == 0);
}

TEST_CASE("bounded draws hit every residue") {
  Rng rng(7);
  std::set<uint64_t> seen;
  for (int t = 0; t < 400; ++t) seen.insert(rng.below(5));
  CHECK(seen == std::set<uint64_t>{0, 1, 2, 3, 4});
}

TEST_CASE("identical seeds produce identical models") {
  for (uint64_t seed : {1ull, 42ull, 123456789ull}) {
    Rng a(seed);
    Rng b(seed);
    for (int t = 0; t < 20; ++t) {
      uint32_t d = static_cast<uint32_t>(a.range(1, 10));
      uint32_t d2 = static_cast<uint32_t>(b.range(1, 10));
      REQUIRE(d == d2);
      Model ma = random_classifier(a, d);
      Model mb = random_classifier(b, d2);
      CHECK(serialize_model(ma) == serialize_model(mb));
    }
  }
}

TEST_CASE("different seeds diverge") {
  Rng a(1);
  Rng b(2);
  bool any_diff = false;
  for (int t = 0; t < 10 && !any_diff; ++t)
    any_diff = serialize_model(random_classifier(a, 6)) !=
               serialize_model(random_classifier(b, 6));
  CHECK(any_diff);
}

TEST_CASE("every generated family validates") {
  Rng rng(31415);
  for (int t = 0; t < 100; ++t) {
    uint32_t d = static_cast<uint32_t>(rng.range(1, 10));
    CHECK(validate(Model(random_perceptron(rng, d))).ok());
    CHECK(validate(Model(random_fbdd(rng, d))).ok());
    CHECK(validate(Model(random_decision_tree(rng, d))).ok());
    CHECK(validate(Model(random_decision_list(rng, d))).ok());
    CHECK(validate(Model(random_relu(rng, d, rng.coin()))).ok());
    CHECK(validate(Model(random_knn(rng, d))).ok());
    CHECK(validate(Model(random_atm(rng, d))).ok());
    CHECK(validate(Model(random_relu_ensemble(rng, d))).ok());
    CHECK(validate(random_classifier_ensemble(rng, d)).ok());
  }
}

TEST_CASE("random instances have the requested dimension") {
  Rng rng(555);
  for (uint32_t d : {1u, 5u, 24u}) {
    BinaryInstance x = random_instance(rng, d);
    CHECK(x.dim() == d);
  }
}

TEST_CASE("random costs are well-formed") {
  Rng rng(777);
  for (int t = 0; t < 50; ++t) {
    uint32_t d = static_cast<uint32_t>(rng.range(1, 10));
    CostFunction c = random_cost(rng, d);
    CHECK(c.dim == d);
    for (uint32_t i = 0; i < d; ++i) CHECK(c.weight(i) > 0);
  }
}

TEST_CASE("random formulas keep three distinct variables per clause") {
  Rng rng(8888);
  for (int t = 0; t < 60; ++t) {
    uint32_t v = static_cast<uint32_t>(rng.range(3, 12));
    uint32_t c = static_cast<uint32_t>(rng.range(1, 30));
    CnfFormula f = random_cnf(rng, v, c);
    REQUIRE(f.num_vars == v);
    REQUIRE(f.clauses.size() == c);
    for (const Clause& cl : f.clauses) {
      CHECK(cl.lits[0].var != cl.lits[1].var);
      CHECK(cl.lits[0].var != cl.lits[2].var);
      CHECK(cl.lits[1].var != cl.lits[2].var);
      for (const Lit& l : cl.lits) CHECK(l.var < v);
    }
  }
}
