#include <catch2/catch_amalgamated.hpp>

#include "cfxlab/cnf.hpp"
#include "cfxlab/explain_json.hpp"  // read_text_file
#include "cfxlab/generators.hpp"

using namespace cfx;

#ifndef CFXLAB_REPO_ROOT
#define CFXLAB_REPO_ROOT "."
#endif

TEST_CASE("dimacs parsing: literals and polarities") {
  CnfFormula f = parse_dimacs("p cnf 3 1\n-1 2 -3 0\n");
  REQUIRE(f.num_vars == 3);
  REQUIRE(f.clauses.size() == 1);
  const Clause& c = f.clauses[0];
  CHECK(c.lits[0].var == 0);
  CHECK(c.lits[0].neg);
  CHECK(c.lits[1].var == 1);
  CHECK(!c.lits[1].neg);
  CHECK(c.lits[2].var == 2);
  CHECK(c.lits[2].neg);
}

TEST_CASE("dimacs parsing: comments, blank lines, multi-clause") {
  std::string text =
      "c a comment\n"
      "p cnf 4 2\n"
      "\n"
      "1 -2 3 0\n"
      "c another\n"
      "-1 2 4 0\n";
  CnfFormula f = parse_dimacs(text);
  CHECK(f.num_vars == 4);
  CHECK(f.clauses.size() == 2);
}

TEST_CASE("dimacs parsing: clause split across lines") {
  CnfFormula f = parse_dimacs("p cnf 3 1\n1 2\n-3 0\n");
  CHECK(f.clauses.size() == 1);
  CHECK(f.clauses[0].lits[2].neg);
}

TEST_CASE("dimacs parsing rejects malformed input") {
  // duplicate variable inside a clause
  CHECK_THROWS_WITH(parse_dimacs("p cnf 2 1\n1 1 2 0\n"),
                    Catch::Matchers::ContainsSubstring("duplicate variable"));
  // too few literals
  CHECK_THROWS_WITH(parse_dimacs("p cnf 2 1\n1 2 0\n"),
                    Catch::Matchers::ContainsSubstring("fewer than three"));
  // too many literals
  CHECK_THROWS_WITH(parse_dimacs("p cnf 4 1\n1 2 3 4 0\n"),
                    Catch::Matchers::ContainsSubstring("more than three"));
  // literal out of range
  CHECK_THROWS_WITH(parse_dimacs("p cnf 2 1\n1 2 3 0\n"),
                    Catch::Matchers::ContainsSubstring("beyond header count"));
  // missing header
  CHECK_THROWS_AS(parse_dimacs("1 2 3 0\n"), ParseError);
  // unterminated clause
  CHECK_THROWS_AS(parse_dimacs("p cnf 3 1\n1 2 3\n"), ParseError);
  // clause count mismatch
  CHECK_THROWS_AS(parse_dimacs("p cnf 3 2\n1 2 3 0\n"), ParseError);
  // no clauses at all
  CHECK_THROWS_AS(parse_dimacs("p cnf 3 0\n"), ParseError);
  // garbage token
  CHECK_THROWS_AS(parse_dimacs("p cnf 3 1\n1 two 3 0\n"), ParseError);
}

TEST_CASE("to_dimacs round-trips") {
  Rng rng(88);
  for (int t = 0; t < 50; ++t) {
    uint32_t v = static_cast<uint32_t>(rng.range(3, 10));
    uint32_t c = static_cast<uint32_t>(rng.range(1, 20));
    CnfFormula f = random_cnf(rng, v, c);
    CnfFormula back = parse_dimacs(to_dimacs(f));
    REQUIRE(back.num_vars == f.num_vars);
    REQUIRE(back.clauses.size() == f.clauses.size());
    for (size_t i = 0; i < f.clauses.size(); ++i)
      for (size_t j = 0; j < 3; ++j) {
        CHECK(back.clauses[i].lits[j].var == f.clauses[i].lits[j].var);
        CHECK(back.clauses[i].lits[j].neg == f.clauses[i].lits[j].neg);
      }
  }
}

TEST_CASE("satisfies checks clauses and formulas") {
  CnfFormula f = parse_dimacs("p cnf 3 2\n1 2 3 0\n-1 -2 3 0\n");
  Assignment a;
  a.values = {true, false, false};  // x1: first clause sat, second sat via -2
  CHECK(satisfies(a, f.clauses[0]));
  CHECK(satisfies(a, f.clauses[1]));
  CHECK(satisfies(a, f));
  Assignment b;
  b.values = {true, true, false};  // second clause: -1 F, -2 F, 3 F
  CHECK(!satisfies(b, f.clauses[1]));
  CHECK(!satisfies(b, f));
}

TEST_CASE("assignment rendering") {
  Assignment a;
  a.values = {true, false};
  CHECK(a.to_string() == "x1=1 x2=0");
  CHECK(a.num_vars() == 2);
}

TEST_CASE("brute-force SAT on known formulas") {
  SECTION("single clause is satisfiable") {
    CnfFormula f = parse_dimacs(read_text_file(CFXLAB_REPO_ROOT "/samples/sat1.cnf"));
    auto a = brute_force_sat(f);
    REQUIRE(a.has_value());
    CHECK(satisfies(*a, f));
  }
  SECTION("all eight sign patterns over three variables are unsatisfiable") {
    CnfFormula f = parse_dimacs(read_text_file(CFXLAB_REPO_ROOT "/samples/unsat8.cnf"));
    CHECK(!brute_force_sat(f).has_value());
  }
  SECTION("satisfiable formula with several interacting clauses") {
    std::string text =
        "p cnf 3 4\n"
        "1 2 3 0\n"
        "1 -2 -3 0\n"
        "-1 2 -3 0\n"
        "-1 -2 3 0\n";
    CnfFormula f = parse_dimacs(text);
    auto a = brute_force_sat(f);
    REQUIRE(a.has_value());
    CHECK(satisfies(*a, f));
  }
  SECTION("guard on oversized instances") {
    CnfFormula f;
    f.num_vars = 30;
    f.clauses.push_back({{Lit{0, false}, Lit{1, false}, Lit{2, false}}});
    CHECK_THROWS_AS(brute_force_sat(f), std::runtime_error);
  }
}

TEST_CASE("brute-force SAT agrees with exhaustive truth-table counting") {
  Rng rng(2718);
  for (int t = 0; t < 60; ++t) {
    uint32_t v = static_cast<uint32_t>(rng.range(3, 8));
    uint32_t c = static_cast<uint32_t>(rng.range(1, 25));
    CnfFormula f = random_cnf(rng, v, c);
    bool any = false;
    for (uint64_t code = 0; code < (uint64_t(1) << v) && !any; ++code) {
      Assignment a;
      for (uint32_t i = 0; i < v; ++i) a.values.push_back((code >> i) & 1u);
      any = satisfies(a, f);
    }
    auto got = brute_force_sat(f);
    CHECK(got.has_value() == any);
    if (got) CHECK(satisfies(*got, f));
  }
}
