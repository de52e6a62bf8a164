// Tests for the reproducible experiment harness: name parsing, per-id
// default configurations, determinism of reports, zero-defect summaries on
// small runs, and the CSV/summary formats downstream scripts rely on.
#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "cfxlab/cfxlab.hpp"

using namespace cfx;

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char ch : text) {
    if (ch == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

}  // namespace

TEST_CASE("experiment names round-trip through the parser") {
  const ExperimentId all[] = {ExperimentId::oracle_agreement, ExperimentId::gadget_soundness,
                              ExperimentId::dichotomy, ExperimentId::scaling,
                              ExperimentId::approximation_gap};
  for (ExperimentId id : all) {
    auto parsed = parse_experiment(experiment_name(id));
    REQUIRE(parsed.has_value());
    CHECK(*parsed == id);
  }
  CHECK(std::string(experiment_name(ExperimentId::oracle_agreement)) == "oracle-agreement");
  CHECK(std::string(experiment_name(ExperimentId::approximation_gap)) == "approximation-gap");
  CHECK_FALSE(parse_experiment("oracle agreement").has_value());
  CHECK_FALSE(parse_experiment("").has_value());
  CHECK_FALSE(parse_experiment("scaling ").has_value());
}

TEST_CASE("default configurations carry per-experiment sizes") {
  ExperimentConfig oa = ExperimentConfig::defaults(ExperimentId::oracle_agreement);
  CHECK(oa.reps == 100);
  CHECK(oa.d.lo == 4);
  CHECK(oa.d.hi == 10);
  CHECK(oa.seed == 1);

  ExperimentConfig gs = ExperimentConfig::defaults(ExperimentId::gadget_soundness, 42);
  CHECK(gs.reps == 50);
  CHECK(gs.c.hi == 20);
  CHECK(gs.seed == 42);

  CHECK(ExperimentConfig::defaults(ExperimentId::dichotomy).reps == 20);
  CHECK(ExperimentConfig::defaults(ExperimentId::scaling).c.hi == 48);
  CHECK(ExperimentConfig::defaults(ExperimentId::approximation_gap).reps == 50);
}

TEST_CASE("identical configurations produce byte-identical reports") {
  ExperimentConfig cfg;
  cfg.id = ExperimentId::gadget_soundness;
  cfg.seed = 7;
  cfg.reps = 2;
  cfg.v = {4, 6};
  cfg.c = {3, 7};

  ExperimentReport a = run_experiment(cfg);
  ExperimentReport b = run_experiment(cfg);
  CHECK(a.report.dump() == b.report.dump());
  CHECK(a.csv == b.csv);
  CHECK(a.summary == b.summary);

  // A different seed reaches different instances but the same clean outcome.
  cfg.seed = 8;
  ExperimentReport c = run_experiment(cfg);
  CHECK(c.report.dump() != a.report.dump());
  CHECK(c.summary == a.summary);
}

TEST_CASE("oracle-agreement finds no disagreements on a small run") {
  ExperimentConfig cfg;
  cfg.id = ExperimentId::oracle_agreement;
  cfg.seed = 11;
  cfg.reps = 9;
  cfg.d = {4, 8};

  ExperimentReport rep = run_experiment(cfg);
  CHECK(rep.summary == "disagreements: 0");
  CHECK(rep.report["summary"] == rep.summary);
  CHECK(rep.report["experiment"] == "oracle-agreement");
  CHECK(rep.report["seed"] == 11);
  REQUIRE(rep.report["trials"].size() == 9);
  for (const auto& row : rep.report["trials"]) {
    CHECK(row["agree"] == true);
    CHECK(row["d"].get<uint32_t>() >= 4);
    CHECK(row["d"].get<uint32_t>() <= 8);
  }
  // The three audited solver families rotate through the trials.
  CHECK(rep.report["trials"][0]["family"] == "perceptron");
  CHECK(rep.report["trials"][1]["family"] == "fbdd");
  CHECK(rep.report["trials"][2]["family"] == "dt");
  CHECK(rep.csv.empty());
}

TEST_CASE("gadget-soundness matches brute-force SAT on a small run") {
  ExperimentConfig cfg;
  cfg.id = ExperimentId::gadget_soundness;
  cfg.seed = 5;
  cfg.reps = 3;
  cfg.v = {4, 6};
  cfg.c = {3, 8};

  ExperimentReport rep = run_experiment(cfg);
  CHECK(rep.summary == "mismatches vs brute-force SAT: 0");
  REQUIRE(rep.report["trials"].size() == 9);  // three constructions x three reps
  for (const auto& row : rep.report["trials"]) {
    CHECK(row["match"] == true);
    CHECK(row["sat_brute"] == row["sat_cfe"]);
  }
}

TEST_CASE("dichotomy sweep sees no outputs in the forbidden gap") {
  ExperimentConfig cfg;
  cfg.id = ExperimentId::dichotomy;
  cfg.seed = 3;
  cfg.reps = 2;
  cfg.v = {4, 5};
  cfg.c = {3, 6};

  ExperimentReport rep = run_experiment(cfg);
  CHECK(rep.summary == "outputs outside {0} ∪ [M,∞): 0");
  REQUIRE(rep.report["trials"].size() == 6);
  for (const auto& row : rep.report["trials"]) CHECK(row["violations"] == 0);
}

TEST_CASE("scaling experiment emits a well-formed CSV") {
  ExperimentConfig cfg;
  cfg.id = ExperimentId::scaling;
  cfg.seed = 9;
  cfg.reps = 2;
  cfg.v = {4, 5};
  cfg.c = {3, 48};

  ExperimentReport rep = run_experiment(cfg);
  std::vector<std::string> lines = split_lines(rep.csv);
  REQUIRE(lines.size() >= 2);
  CHECK(lines[0] == "kind,v,c,rep,satisfiable,objective,work");
  // One data row per trial, every row from the pair-encoding construction.
  CHECK(lines.size() == rep.report["trials"].size() + 1);
  for (size_t i = 1; i < lines.size(); ++i) CHECK(lines[i].substr(0, 5) == "relu,");
  CHECK(rep.summary.find("max work:") != std::string::npos);
}

TEST_CASE("approximation-gap ratios never drop below one") {
  ExperimentConfig cfg;
  cfg.id = ExperimentId::approximation_gap;
  cfg.seed = 2;
  cfg.reps = 6;
  cfg.v = {4, 5};
  cfg.c = {3, 6};

  ExperimentReport rep = run_experiment(cfg);
  CHECK(rep.summary.rfind("ratios below 1: 0; ratio min ", 0) == 0);
  CHECK(rep.summary.find(", median ") != std::string::npos);
  CHECK(rep.summary.find(", mean ") != std::string::npos);
  CHECK(rep.summary.find(", max ") != std::string::npos);

  std::vector<std::string> lines = split_lines(rep.csv);
  REQUIRE(lines.size() == 7);
  CHECK(lines[0] == "kind,v,c,rep,exact,greedy,ratio");
  REQUIRE(rep.report["trials"].size() == 6);
  for (const auto& row : rep.report["trials"]) {
    Rational exact = parse_rational(row["exact"].get<std::string>());
    Rational greedy = parse_rational(row["greedy"].get<std::string>());
    Rational ratio = parse_rational(row["ratio"].get<std::string>());
    CHECK(greedy >= exact);
    CHECK(ratio >= Rational(1));
  }
}
