#include <catch2/catch_amalgamated.hpp>

#include "cfxlab/explain_json.hpp"
#include "cfxlab/gadget_json.hpp"
#include "cfxlab/generators.hpp"
#include "cfxlab/model_json.hpp"

using namespace cfx;

#ifndef CFXLAB_REPO_ROOT
#define CFXLAB_REPO_ROOT "."
#endif

TEST_CASE("model JSON round-trip is the identity for every family") {
  Rng rng(404);
  for (int t = 0; t < 120; ++t) {
    uint32_t d = static_cast<uint32_t>(rng.range(1, 10));
    Model m = t % 2 == 0 ? random_classifier(rng, d) : random_regressor(rng, d);
    std::string text = serialize_model(m);
    Model back = parse_model(text);
    CHECK(back == m);
    // serialized form is stable under a second round-trip
    CHECK(serialize_model(back) == text);
  }
}

TEST_CASE("rationals serialize exactly") {
  Perceptron p{2, {Rational(1, 3), Rational(-7, 2)}, Rational(0)};
  std::string text = serialize_model(Model(p));
  CHECK(text.find("\"1/3\"") != std::string::npos);
  CHECK(text.find("\"-7/2\"") != std::string::npos);
  Model back = parse_model(text);
  CHECK(back.as<Perceptron>().weights[0] == Rational(1, 3));
}

TEST_CASE("floating-point literals are rejected with a pointer to the fix") {
  std::string text = R"({"kind":"perceptron","dim":1,"weights":[1.5],"bias":0})";
  try {
    parse_model(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    std::string msg = e.what();
    CHECK(msg.find("floating-point") != std::string::npos);
    CHECK(msg.find("p/q") != std::string::npos);
  }
}

TEST_CASE("malformed model JSON is rejected") {
  CHECK_THROWS_AS(parse_model("not json at all"), ParseError);
  CHECK_THROWS_AS(parse_model(R"({"kind":"widget"})"), ParseError);
  CHECK_THROWS_AS(parse_model(R"({"dim":1})"), ParseError);
  CHECK_THROWS_AS(parse_model(R"({"kind":"perceptron","dim":1,"bias":0})"), ParseError);
  CHECK_THROWS_AS(parse_model(R"({"kind":"perceptron","dim":1,"weights":[1],"bias":"1/0"})"),
                  ParseError);
}

TEST_CASE("sample model files parse and evaluate") {
  Model p = parse_model(read_text_file(CFXLAB_REPO_ROOT "/samples/perceptron.json"));
  CHECK(p.is<Perceptron>());
  CHECK(evaluate(p, BinaryInstance::from_string("100")) == Output::label(1));

  Model t = parse_model(read_text_file(CFXLAB_REPO_ROOT "/samples/and_tree.json"));
  CHECK(t.is<DecisionTree>());
  CHECK(evaluate(t, BinaryInstance::from_string("110")) == Output::label(1));
  CHECK(evaluate(t, BinaryInstance::from_string("101")) == Output::label(0));

  Model f = parse_model(read_text_file(CFXLAB_REPO_ROOT "/samples/fbdd_single.json"));
  CHECK(f.is<Fbdd>());
  CHECK(evaluate(f, BinaryInstance::from_string("1")) == Output::label(1));
}

TEST_CASE("problem spec parsing: inline model") {
  std::string text = R"({
    "kind": "classic-cf",
    "model": {"kind":"perceptron","dim":2,"weights":[1,1],"bias":"-3/2"},
    "x_orig": "00",
    "target": 1
  })";
  ProblemSpec spec = parse_problem_spec(text);
  CHECK(spec.kind == ProblemKind::classic_cf);
  CHECK(spec.x_orig.to_string() == "00");
  REQUIRE(spec.target.has_value());
  CHECK(spec.target->is_label);
  CHECK(spec.target->label_value() == 1);
  CHECK(spec.cost.kind == CostFunction::Kind::hamming);  // defaulted
  CHECK(spec.cost.dim == 2);
}

TEST_CASE("problem spec parsing: model loaded from a file") {
  std::string text = std::string(R"({
    "kind": "mcr",
    "model": ")") + CFXLAB_REPO_ROOT +
                     R"(/samples/perceptron.json",
    "x_orig": "110",
    "target": 1,
    "k": 1
  })";
  ProblemSpec spec = parse_problem_spec(text);
  CHECK(spec.model.is<Perceptron>());
  CHECK(spec.model.as<Perceptron>().weights[0] == Rational(3));
  REQUIRE(spec.k.has_value());
  CHECK(*spec.k == 1);
}

TEST_CASE("problem spec parsing: weighted cost, lambda, pi, model set") {
  std::string text = R"({
    "kind": "robust-cf",
    "model": {"kind":"perceptron","dim":2,"weights":[1,1],"bias":-1},
    "model_set": [
      {"kind":"perceptron","dim":2,"weights":[1,1],"bias":-1},
      {"kind":"perceptron","dim":2,"weights":[2,2],"bias":-3}
    ],
    "x_orig": "00",
    "target": 1,
    "cost": {"kind":"weighted-l1","weights":[1,"1/2"]},
    "lambda": "2/3",
    "pi": {"kind":"perceptron","dim":2,"weights":[0,0],"bias":1}
  })";
  ProblemSpec spec = parse_problem_spec(text);
  CHECK(spec.model_set.size() == 2);
  CHECK(spec.cost.kind == CostFunction::Kind::weighted_l1);
  CHECK(spec.cost.weight(1) == Rational(1, 2));
  REQUIRE(spec.lambda.has_value());
  CHECK(*spec.lambda == Rational(2, 3));
  CHECK(spec.pi.has_value());
}

TEST_CASE("problem spec parsing rejects bad input") {
  CHECK_THROWS_AS(parse_problem_spec("["), ParseError);
  // unknown kind
  CHECK_THROWS_AS(parse_problem_spec(R"({"kind":"nope","model":{"kind":"perceptron","dim":1,
    "weights":[1],"bias":0},"x_orig":"0"})"),
                  ParseError);
  // classifier target outside {0,1}
  CHECK_THROWS_AS(parse_problem_spec(R"({"kind":"classic-cf","model":{"kind":"perceptron",
    "dim":1,"weights":[1],"bias":0},"x_orig":"0","target":2})"),
                  ParseError);
  // structurally invalid model is rejected at the boundary
  CHECK_THROWS_AS(parse_problem_spec(R"({"kind":"classic-cf","model":{"kind":"perceptron",
    "dim":2,"weights":[1],"bias":0},"x_orig":"00","target":1})"),
                  ParseError);
}

TEST_CASE("wachter targets stay numeric even on classifiers") {
  std::string text = R"({
    "kind": "wachter",
    "model": {"kind":"perceptron","dim":1,"weights":[1],"bias":0},
    "x_orig": "0",
    "target": 1,
    "lambda": 1
  })";
  ProblemSpec spec = parse_problem_spec(text);
  REQUIRE(spec.target.has_value());
  CHECK(!spec.target->is_label);
  CHECK(spec.target->numeric() == 1);
}

TEST_CASE("solution JSON carries the witness and exact objective") {
  Solution sol;
  sol.feasible = true;
  sol.objective = Rational(7, 2);
  sol.witness_delta = Delta{{0, 2}};
  sol.certificate = "exhaustive: 8 points";
  Json j = Json::parse(serialize_solution(sol));
  CHECK(j.at("feasible") == true);
  CHECK(j.at("objective") == "7/2");
  CHECK(j.at("witness_delta") == Json::array({0, 2}));
  CHECK(j.at("certificate") == "exhaustive: 8 points");

  Solution inf;
  inf.feasible = false;
  Json ji = Json::parse(serialize_solution(inf));
  CHECK(ji.at("feasible") == false);
  CHECK(!ji.contains("witness_delta"));

  Solution subset;
  subset.feasible = true;
  subset.objective = Rational(2);
  subset.witness_partial = PartialInstance::from_string("11*");
  Json js = Json::parse(serialize_solution(subset));
  CHECK(js.at("witness_subset") == "11*");

  Solution inst;
  inst.feasible = true;
  inst.objective = Rational(1);
  inst.witness_instance = BinaryInstance::from_string("101");
  Json jx = Json::parse(serialize_solution(inst));
  CHECK(jx.at("witness_instance") == "101");
}

TEST_CASE("gadget JSON round-trip preserves the construction") {
  CnfFormula f = parse_dimacs(read_text_file(CFXLAB_REPO_ROOT "/samples/clause1.cnf"));
  for (GadgetKind kind : {GadgetKind::relu, GadgetKind::atm, GadgetKind::knn}) {
    GadgetInstance g = build_gadget(f, kind);
    std::string text = serialize_gadget(g);
    GadgetInstance back = parse_gadget(text);
    CHECK(back.kind == g.kind);
    CHECK(back.num_vars == g.num_vars);
    CHECK(back.num_clauses == g.num_clauses);
    CHECK(back.M == g.M);
    CHECK(back.x_orig.bits == g.x_orig.bits);
    CHECK(back.y_cf == g.y_cf);
    CHECK(back.lambda == g.lambda);
    CHECK(back.regressor == g.regressor);
    // the rebuilt instance reduces identically
    ReductionOutcome a = run_reduction(g, f);
    ReductionOutcome b = run_reduction(back, f);
    CHECK(a.satisfiable == b.satisfiable);
    CHECK(a.objective == b.objective);
  }
}
