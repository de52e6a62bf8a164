// cfxlab — exact counterfactual/semi-factual explanation toolkit.
//
// Commands:
//   eval    <bits> --model m.json         print the model output on an input
//   explain --spec spec.json              solve an explanation problem
//   gadget  build|verify|reduce           3-SAT-to-regressor reduction pipeline
//   atlas   lookup|dump                   published complexity results
//   bench   <experiment>                  seeded reproducible experiments
//
// Exit codes: 0 success (including "infeasible" answers), 2 usage or parse
// error, 3 enumeration cap exceeded, 4 internal invariant violation.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cfxlab/cfxlab.hpp"

namespace {

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

cfx::SolverOptions g_opts;

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CliError("cannot write file: " + path);
  out << content;
}

cfx::Model load_model_file(const std::string& path) {
  cfx::Model m = cfx::parse_model(cfx::read_text_file(path));
  cfx::ValidationReport report = cfx::validate(m);
  if (!report.ok()) throw cfx::ParseError("invalid model: " + report.problems.front());
  return m;
}

cfx::CnfFormula load_dimacs_file(const std::string& path) {
  return cfx::parse_dimacs(cfx::read_text_file(path));
}

cfx::GadgetKind parse_kind_or_throw(const std::string& s) {
  auto k = cfx::parse_gadget_kind(s);
  if (!k) throw CliError("unknown gadget kind: " + s + " (expected relu, atm, or knn)");
  return *k;
}

std::optional<cfx::Rational> parse_bigm(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return cfx::parse_rational(s);
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty())
    std::cout << content << "\n";
  else
    write_file(out_path, content + "\n");
}

// ---------------------------------------------------------------------------

int cmd_eval(const std::string& model_path, const std::string& bits) {
  cfx::Model m = load_model_file(model_path);
  cfx::BinaryInstance x = cfx::BinaryInstance::from_string(bits);
  cfx::Output out = cfx::evaluate(m, x);
  if (out.is_label)
    std::cout << "class " << out.label_value() << "\n";
  else
    std::cout << cfx::format_rational(out.numeric()) << "\n";
  return 0;
}

int cmd_explain(const std::string& spec_path, const std::string& out_path) {
  cfx::ProblemSpec spec = cfx::parse_problem_spec(cfx::read_text_file(spec_path));
  cfx::Solution sol = cfx::solve(spec, g_opts);
  emit(out_path, cfx::serialize_solution(sol));
  return 0;
}

int cmd_gadget_build(const std::string& dimacs_path, const std::string& kind_str,
                     const std::string& bigm, const std::string& out_path) {
  cfx::CnfFormula f = load_dimacs_file(dimacs_path);
  cfx::GadgetInstance g = cfx::build_gadget(f, parse_kind_or_throw(kind_str), parse_bigm(bigm));
  emit(out_path, cfx::serialize_gadget(g));
  return 0;
}

int cmd_gadget_verify(const std::string& dimacs_path, const std::string& kind_str,
                      const std::string& bigm, uint64_t samples, uint64_t seed) {
  cfx::CnfFormula f = load_dimacs_file(dimacs_path);
  cfx::GadgetInstance g = cfx::build_gadget(f, parse_kind_or_throw(kind_str), parse_bigm(bigm));
  cfx::VerifyMode mode =
      samples > 0 ? cfx::VerifyMode::sampled(samples, seed) : cfx::VerifyMode::all();
  cfx::GadgetReport rep = cfx::verify_gadget(g, f, mode, g_opts.max_dim);
  std::cout << "inputs checked: " << rep.inputs_checked << "\n";
  std::cout << "assignments checked: " << rep.assignments_checked << "\n";
  for (const std::string& v : rep.violations) std::cout << "violation: " << v << "\n";
  std::cout << rep.violations.size() << " violations\n";
  return 0;
}

int cmd_gadget_reduce(const std::string& dimacs_path, const std::string& kind_str,
                      const std::string& bigm) {
  cfx::CnfFormula f = load_dimacs_file(dimacs_path);
  cfx::ReductionOutcome out =
      cfx::run_reduction(f, parse_kind_or_throw(kind_str), parse_bigm(bigm), g_opts);
  if (out.satisfiable) {
    std::cout << "SAT\n" << out.assignment->to_string() << "\n";
  } else {
    std::cout << "UNSAT\n";
  }
  std::cout << "objective: " << cfx::format_rational(out.objective)
            << " (threshold " << cfx::format_rational(out.threshold) << ")\n";
  return 0;
}

int cmd_atlas_lookup(const std::string& family_str, const std::string& problem_str,
                     bool ensemble) {
  auto family = cfx::parse_atlas_family(family_str);
  if (!family) throw CliError("unknown model family: " + family_str);
  auto problem = cfx::parse_atlas_problem(problem_str);
  if (!problem) throw CliError("unknown problem kind: " + problem_str);
  cfx::AtlasEntry e = cfx::atlas_lookup(*family, *problem, ensemble);
  std::cout << cfx::atlas_entry_to_json(e).dump(2) << "\n";
  return 0;
}

int cmd_atlas_dump(const std::string& out_path) {
  emit(out_path, cfx::atlas_to_json().dump(2));
  return 0;
}

int cmd_bench(const std::string& experiment, uint64_t seed, uint32_t reps,
              const std::string& out_path) {
  auto id = cfx::parse_experiment(experiment);
  if (!id) throw CliError("unknown experiment: " + experiment);
  cfx::ExperimentConfig cfg = cfx::ExperimentConfig::defaults(*id, seed);
  if (reps > 0) cfg.reps = reps;
  cfx::ExperimentReport rep = cfx::run_experiment(cfg, g_opts);
  if (!out_path.empty()) {
    write_file(out_path + ".json", rep.report.dump(2) + "\n");
    if (!rep.csv.empty()) write_file(out_path + ".csv", rep.csv);
  } else {
    std::cout << rep.report.dump(2) << "\n";
  }
  std::cout << rep.summary << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact counterfactual & semi-factual explanation toolkit"};
  app.require_subcommand(1);

  // Enumeration cap: default, then CFXLAB_MAX_DIM, then --max-dim.
  if (const char* env = std::getenv("CFXLAB_MAX_DIM")) {
    try {
      g_opts.max_dim = static_cast<uint32_t>(std::stoul(env));
    } catch (...) {
      std::cerr << "error: CFXLAB_MAX_DIM must be an unsigned integer\n";
      return 2;
    }
  }
  app.add_option("--max-dim", g_opts.max_dim,
                 "enumeration cap on input dimension (env: CFXLAB_MAX_DIM)");

  std::string model_path, spec_path, dimacs_path, bits, kind = "relu", bigm, out_path;
  std::string family_str, problem_str, experiment;
  bool ensemble = false;
  uint64_t seed = 1, samples = 0;
  uint32_t reps = 0;

  CLI::App* eval = app.add_subcommand("eval", "evaluate a model on a bit-string input");
  eval->add_option("--model", model_path, "model JSON file")->required();
  eval->add_option("bits", bits, "input as a 0/1 string")->required();

  CLI::App* explain = app.add_subcommand("explain", "solve an explanation problem spec");
  explain->add_option("--spec", spec_path, "problem spec JSON file")->required();
  explain->add_option("--out", out_path, "write the solution here instead of stdout");

  CLI::App* gadget = app.add_subcommand("gadget", "3-SAT reduction pipeline");
  gadget->require_subcommand(1);
  CLI::App* gbuild = gadget->add_subcommand("build", "compile a formula into a regressor");
  CLI::App* gverify = gadget->add_subcommand("verify", "check the output dichotomy");
  CLI::App* greduce = gadget->add_subcommand("reduce", "decide satisfiability via the solver");
  for (CLI::App* sub : {gbuild, gverify, greduce}) {
    sub->add_option("--dimacs", dimacs_path, "DIMACS CNF file (exactly 3 distinct vars/clause)")
        ->required();
    sub->add_option("--kind", kind, "gadget family: relu | atm | knn");
    sub->add_option("--bigm", bigm, "override the dichotomy threshold M (rational)");
  }
  gbuild->add_option("--out", out_path, "write gadget JSON here instead of stdout");
  gverify->add_option("--samples", samples, "sample count (0 = exhaustive sweep)");
  gverify->add_option("--seed", seed, "sampling seed");

  CLI::App* atlas = app.add_subcommand("atlas", "published complexity results");
  atlas->require_subcommand(1);
  CLI::App* alookup = atlas->add_subcommand("lookup", "one (family, problem, variant) cell");
  alookup->add_option("--family", family_str, "model family")->required();
  alookup->add_option("--problem", problem_str, "problem kind")->required();
  alookup->add_flag("--ensemble", ensemble, "look up the ensemble row");
  CLI::App* adump = atlas->add_subcommand("dump", "all entries as JSON");
  adump->add_option("--out", out_path, "write JSON here instead of stdout");

  CLI::App* bench = app.add_subcommand("bench", "run a seeded experiment");
  bench->add_option("experiment", experiment,
                    "oracle-agreement | gadget-soundness | dichotomy | scaling | "
                    "approximation-gap")
      ->required();
  bench->add_option("--seed", seed, "experiment seed");
  bench->add_option("--reps", reps, "override the default repetition count");
  bench->add_option("--out", out_path, "report path prefix (.json/.csv appended)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*eval) return cmd_eval(model_path, bits);
    if (*explain) return cmd_explain(spec_path, out_path);
    if (*gbuild) return cmd_gadget_build(dimacs_path, kind, bigm, out_path);
    if (*gverify) return cmd_gadget_verify(dimacs_path, kind, bigm, samples, seed);
    if (*greduce) return cmd_gadget_reduce(dimacs_path, kind, bigm);
    if (*alookup) return cmd_atlas_lookup(family_str, problem_str, ensemble);
    if (*adump) return cmd_atlas_dump(out_path);
    if (*bench) return cmd_bench(experiment, seed, reps, out_path);
  } catch (const cfx::CapExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const cfx::InvariantViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
