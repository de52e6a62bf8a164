#pragma once

// Seeded, reproducible experiment harness. Every experiment is a pure
// function of its config: trial seeds derive from (config seed, trial
// index), per-trial rows are merged in trial order, and reports contain
// work counters (search nodes, points evaluated) rather than wall time —
// so identical config means byte-identical output.
//
// Experiments:
//   oracle-agreement  — specialized polynomial-time solvers vs an
//                       independent exhaustive oracle.
//   gadget-soundness  — the SAT-via-counterfactual pipeline vs a
//                       brute-force SAT oracle.
//   dichotomy         — exhaustive check that gadget outputs never fall
//                       strictly between 0 and M.
//   scaling           — exact-solver work counters as formula size grows.
//   approximation-gap — greedy hill-climber objective vs the exact
//                       optimum on satisfiable gadget instances.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cfxlab/cnf.hpp"
#include "cfxlab/explain.hpp"
#include "cfxlab/gadgets.hpp"
#include "cfxlab/generators.hpp"
#include "cfxlab/models.hpp"
#include "cfxlab/rational.hpp"

namespace cfx {

enum class ExperimentId {
  oracle_agreement,
  gadget_soundness,
  dichotomy,
  scaling,
  approximation_gap,
};

inline const char* experiment_name(ExperimentId id) {
  switch (id) {
    case ExperimentId::oracle_agreement: return "oracle-agreement";
    case ExperimentId::gadget_soundness: return "gadget-soundness";
    case ExperimentId::dichotomy: return "dichotomy";
    case ExperimentId::scaling: return "scaling";
    case ExperimentId::approximation_gap: return "approximation-gap";
  }
  return "?";
}

inline std::optional<ExperimentId> parse_experiment(const std::string& s) {
  static const ExperimentId all[] = {ExperimentId::oracle_agreement,
                                     ExperimentId::gadget_soundness, ExperimentId::dichotomy,
                                     ExperimentId::scaling, ExperimentId::approximation_gap};
  for (ExperimentId id : all)
    if (s == experiment_name(id)) return id;
  return std::nullopt;
}

struct SizeRange {
  uint32_t lo = 0;
  uint32_t hi = 0;
};

struct ExperimentConfig {
  ExperimentId id = ExperimentId::oracle_agreement;
  uint64_t seed = 1;
  uint32_t reps = 0;   // trials (per gadget kind where applicable)
  SizeRange d{4, 10};  // model input dimension
  SizeRange v{4, 10};  // formula variables
  SizeRange c{3, 15};  // formula clauses

  static ExperimentConfig defaults(ExperimentId id, uint64_t seed = 1) {
    ExperimentConfig cfg;
    cfg.id = id;
    cfg.seed = seed;
    switch (id) {
      case ExperimentId::oracle_agreement:
        cfg.reps = 100;
        cfg.d = {4, 10};
        break;
      case ExperimentId::gadget_soundness:
        cfg.reps = 50;
        cfg.v = {4, 10};
        cfg.c = {3, 20};
        break;
      case ExperimentId::dichotomy:
        cfg.reps = 20;
        cfg.v = {4, 8};
        cfg.c = {3, 12};
        break;
      case ExperimentId::scaling:
        cfg.reps = 3;
        cfg.v = {4, 12};
        cfg.c = {3, 48};
        break;
      case ExperimentId::approximation_gap:
        cfg.reps = 50;
        cfg.v = {4, 10};
        cfg.c = {3, 15};
        break;
    }
    return cfg;
  }
};

struct ExperimentReport {
  nlohmann::json report;  // config echo, per-trial rows, summary
  std::string csv;        // non-empty for scaling / approximation-gap
  std::string summary;    // one line, also embedded in the JSON
};

namespace detail {

// Exhaustive minimum-cost counterfactual, written independently of the
// solvers it audits: plain code-order enumeration of all flip sets using
// the public evaluator, keeping the (cost, lexicographic) minimum.
inline std::optional<std::pair<Rational, Delta>> oracle_min_cost(const Model& m,
                                                                 const BinaryInstance& x_orig,
                                                                 const Output& target,
                                                                 const CostFunction& cost) {
  uint32_t d = static_cast<uint32_t>(x_orig.dim());
  if (d > 20) throw CapExceeded("oracle enumeration beyond 2^20 points");
  std::optional<std::pair<Rational, Delta>> best;
  for (uint64_t code = 0; code < (uint64_t(1) << d); ++code) {
    Delta delta;
    for (uint32_t i = 0; i < d; ++i)
      if ((code >> i) & 1u) delta.flips.push_back(i);
    if (!(evaluate(m, apply_delta(x_orig, delta)) == target)) continue;
    Rational cst = cost.of(delta);
    if (!best || cst < best->first ||
        (cst == best->first && Delta::lex_less(delta, best->second)))
      best.emplace(std::move(cst), std::move(delta));
  }
  return best;
}

// First integer embedded in a certificate string ("branch-and-bound: 532
// nodes" -> 532); 0 when none is present.
inline uint64_t certificate_count(const std::string& cert) {
  uint64_t value = 0;
  bool in_number = false;
  for (char ch : cert) {
    if (ch >= '0' && ch <= '9') {
      value = value * 10 + static_cast<uint64_t>(ch - '0');
      in_number = true;
    } else if (in_number) {
      break;
    }
  }
  return value;
}

inline nlohmann::json config_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["experiment"] = experiment_name(cfg.id);
  j["seed"] = cfg.seed;
  j["reps"] = cfg.reps;
  j["d"] = {cfg.d.lo, cfg.d.hi};
  j["v"] = {cfg.v.lo, cfg.v.hi};
  j["c"] = {cfg.c.lo, cfg.c.hi};
  return j;
}

inline GadgetKind kind_for(uint32_t index) {
  switch (index % 3) {
    case 0: return GadgetKind::relu;
    case 1: return GadgetKind::atm;
    default: return GadgetKind::knn;
  }
}

inline std::string rational_stats_line(std::vector<Rational> values) {
  if (values.empty()) return "no data";
  std::sort(values.begin(), values.end());
  Rational sum = 0;
  for (const Rational& r : values) sum += r;
  Rational mean = sum / Rational(static_cast<int64_t>(values.size()));
  const Rational& median = values[values.size() / 2];
  return "min " + format_rational(values.front()) + ", median " + format_rational(median) +
         ", mean " + format_rational(mean) + ", max " + format_rational(values.back());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// oracle-agreement
// ---------------------------------------------------------------------------

inline ExperimentReport run_oracle_agreement(const ExperimentConfig& cfg,
                                             const SolverOptions& opts = {}) {
  nlohmann::json rows = nlohmann::json::array();
  uint64_t disagreements = 0;
  for (uint32_t t = 0; t < cfg.reps; ++t) {
    Rng rng(derive_seed(cfg.seed, t));
    uint32_t d = rng.range(cfg.d.lo, cfg.d.hi);
    CostFunction cost = CostFunction::hamming(d);
    BinaryInstance x = random_instance(rng, d);
    nlohmann::json row;
    row["trial"] = t;
    row["d"] = d;

    Solution fast;
    std::optional<std::pair<Rational, Delta>> oracle;
    Model model;
    switch (t % 3) {
      case 0: {
        Perceptron p = random_perceptron(rng, d);
        model = p;
        int y_cf = 1 - evaluate(p, x).label_value();
        fast = perceptron_mcr_fast(p, x, y_cf);
        oracle = detail::oracle_min_cost(model, x, Output::label(y_cf), cost);
        row["family"] = "perceptron";
        break;
      }
      case 1: {
        Fbdd f = random_fbdd(rng, d);
        model = f;
        int y_cf = 1 - evaluate(f, x).label_value();
        fast = fbdd_cf_fast(f, x, y_cf, cost);
        oracle = detail::oracle_min_cost(model, x, Output::label(y_cf), cost);
        row["family"] = "fbdd";
        break;
      }
      default: {
        DecisionTree dt = random_decision_tree(rng, d);
        model = dt;
        int y_cf = 1 - evaluate(dt, x).label_value();
        fast = fbdd_cf_fast(dt, x, y_cf, cost);
        oracle = detail::oracle_min_cost(model, x, Output::label(y_cf), cost);
        row["family"] = "dt";
        break;
      }
    }
    (void)opts;

    bool agree;
    if (!fast.feasible || !oracle) {
      agree = !fast.feasible && !oracle;
    } else {
      agree = *fast.objective == oracle->first;
      row["cost"] = format_rational(oracle->first);
    }
    row["feasible"] = fast.feasible;
    row["agree"] = agree;
    if (!agree) ++disagreements;
    rows.push_back(std::move(row));
  }
  ExperimentReport rep;
  rep.summary = "disagreements: " + std::to_string(disagreements);
  rep.report = detail::config_json(cfg);
  rep.report["trials"] = std::move(rows);
  rep.report["summary"] = rep.summary;
  return rep;
}

// ---------------------------------------------------------------------------
// gadget-soundness
// ---------------------------------------------------------------------------

inline ExperimentReport run_gadget_soundness(const ExperimentConfig& cfg,
                                             const SolverOptions& opts = {}) {
  nlohmann::json rows = nlohmann::json::array();
  uint64_t mismatches = 0;
  uint32_t trial_index = 0;
  for (uint32_t kind_i = 0; kind_i < 3; ++kind_i) {
    GadgetKind kind = detail::kind_for(kind_i);
    for (uint32_t t = 0; t < cfg.reps; ++t, ++trial_index) {
      Rng rng(derive_seed(cfg.seed, trial_index));
      uint32_t v = rng.range(std::max(3u, cfg.v.lo), cfg.v.hi);
      uint32_t c = rng.range(cfg.c.lo, cfg.c.hi);
      CnfFormula f = random_cnf(rng, v, c);
      bool brute_sat = brute_force_sat(f).has_value();
      ReductionOutcome out = run_reduction(f, kind, std::nullopt, opts);
      bool assignment_ok = !out.assignment || satisfies(*out.assignment, f);
      bool match = (out.satisfiable == brute_sat) && assignment_ok;
      if (!match) ++mismatches;
      nlohmann::json row;
      row["kind"] = gadget_kind_name(kind);
      row["trial"] = t;
      row["v"] = v;
      row["c"] = c;
      row["sat_brute"] = brute_sat;
      row["sat_cfe"] = out.satisfiable;
      row["objective"] = format_rational(out.objective);
      row["match"] = match;
      rows.push_back(std::move(row));
    }
  }
  ExperimentReport rep;
  rep.summary = "mismatches vs brute-force SAT: " + std::to_string(mismatches);
  rep.report = detail::config_json(cfg);
  rep.report["trials"] = std::move(rows);
  rep.report["summary"] = rep.summary;
  return rep;
}

// ---------------------------------------------------------------------------
// dichotomy
// ---------------------------------------------------------------------------

inline ExperimentReport run_dichotomy(const ExperimentConfig& cfg, const SolverOptions& = {},
                                      uint32_t dim_cap = 16) {
  nlohmann::json rows = nlohmann::json::array();
  uint64_t violations = 0;
  uint32_t trial_index = 0;
  for (uint32_t kind_i = 0; kind_i < 3; ++kind_i) {
    GadgetKind kind = detail::kind_for(kind_i);
    for (uint32_t t = 0; t < cfg.reps; ++t, ++trial_index) {
      Rng rng(derive_seed(cfg.seed, trial_index));
      // The literal-pair gadget has 2v inputs; keep every sweep within the
      // exhaustive dimension cap.
      uint32_t v_hi = kind == GadgetKind::relu ? std::min(cfg.v.hi, dim_cap / 2)
                                               : std::min(cfg.v.hi, dim_cap);
      uint32_t v = rng.range(std::min(std::max(3u, cfg.v.lo), v_hi), v_hi);
      uint32_t c = rng.range(cfg.c.lo, cfg.c.hi);
      CnfFormula f = random_cnf(rng, v, c);
      GadgetInstance g = build_gadget(f, kind);
      uint32_t dim = static_cast<uint32_t>(g.x_orig.dim());
      PreparedModel prep(g.regressor);
      uint64_t bad = 0;
      for (uint64_t code = 0; code < (uint64_t(1) << dim); ++code) {
        Rational out = prep.eval(BinaryInstance::from_index(code, dim)).numeric();
        if (out != 0 && (out < g.M)) ++bad;
      }
      violations += bad;
      nlohmann::json row;
      row["kind"] = gadget_kind_name(kind);
      row["trial"] = t;
      row["v"] = v;
      row["c"] = c;
      row["inputs"] = uint64_t(1) << dim;
      row["violations"] = bad;
      rows.push_back(std::move(row));
    }
  }
  ExperimentReport rep;
  rep.summary = "outputs outside {0} ∪ [M,∞): " + std::to_string(violations);
  rep.report = detail::config_json(cfg);
  rep.report["trials"] = std::move(rows);
  rep.report["summary"] = rep.summary;
  return rep;
}

// ---------------------------------------------------------------------------
// scaling
// ---------------------------------------------------------------------------

inline ExperimentReport run_scaling(const ExperimentConfig& cfg, const SolverOptions& opts = {}) {
  nlohmann::json rows = nlohmann::json::array();
  std::string csv = "kind,v,c,rep,satisfiable,objective,work\n";
  uint64_t max_work = 0;
  uint32_t trial_index = 0;
  for (uint32_t v = std::max(3u, cfg.v.lo); v <= cfg.v.hi; ++v) {
    for (uint32_t r = 0; r < cfg.reps; ++r, ++trial_index) {
      Rng rng(derive_seed(cfg.seed, trial_index));
      uint32_t c = std::min(cfg.c.hi, std::max(cfg.c.lo, 4 * v));
      CnfFormula f = random_cnf(rng, v, c);
      ReductionOutcome out = run_reduction(f, GadgetKind::relu, std::nullopt, opts);
      uint64_t work = detail::certificate_count(out.certificate);
      max_work = std::max(max_work, work);
      nlohmann::json row;
      row["v"] = v;
      row["c"] = c;
      row["rep"] = r;
      row["satisfiable"] = out.satisfiable;
      row["objective"] = format_rational(out.objective);
      row["work"] = work;
      rows.push_back(row);
      csv += std::string("relu,") + std::to_string(v) + "," + std::to_string(c) + "," +
             std::to_string(r) + "," + (out.satisfiable ? "1" : "0") + "," +
             format_rational(out.objective) + "," + std::to_string(work) + "\n";
    }
  }
  ExperimentReport rep;
  rep.summary = "trials: " + std::to_string(trial_index) + ", max work: " +
                std::to_string(max_work) + " nodes";
  rep.report = detail::config_json(cfg);
  rep.report["trials"] = std::move(rows);
  rep.report["summary"] = rep.summary;
  rep.csv = std::move(csv);
  return rep;
}

// ---------------------------------------------------------------------------
// approximation-gap
// ---------------------------------------------------------------------------

inline ExperimentReport run_approximation_gap(const ExperimentConfig& cfg,
                                              const SolverOptions& opts = {}) {
  nlohmann::json rows = nlohmann::json::array();
  std::string csv = "kind,v,c,rep,exact,greedy,ratio\n";
  std::vector<Rational> ratios;
  uint64_t below_exact = 0;
  for (uint32_t t = 0; t < cfg.reps; ++t) {
    Rng rng(derive_seed(cfg.seed, t));
    GadgetKind kind = detail::kind_for(t);
    uint32_t v = rng.range(std::max(3u, cfg.v.lo), cfg.v.hi);
    uint32_t c = rng.range(cfg.c.lo, cfg.c.hi);
    // Study the gap on satisfiable instances only (resample until one
    // appears; small random formulas are satisfiable most of the time).
    CnfFormula f = random_cnf(rng, v, c);
    while (!brute_force_sat(f)) f = random_cnf(rng, v, c);

    GadgetInstance g = build_gadget(f, kind);
    ProblemSpec spec;
    spec.kind = ProblemKind::wachter;
    spec.model = g.regressor;
    spec.x_orig = g.x_orig;
    spec.target = Output::number(g.y_cf);
    spec.cost = g.cost;
    spec.lambda = g.lambda;
    Solution exact = solve_wachter(spec, opts);

    PreparedModel prep(g.regressor);
    auto greedy = greedy_wachter_descent(prep, g.x_orig, g.y_cf, g.lambda, g.cost);

    if (greedy.second < *exact.objective) ++below_exact;
    Rational ratio = *exact.objective == 0 ? Rational(1) : greedy.second / *exact.objective;
    ratios.push_back(ratio);
    nlohmann::json row;
    row["trial"] = t;
    row["kind"] = gadget_kind_name(kind);
    row["v"] = v;
    row["c"] = c;
    row["exact"] = format_rational(*exact.objective);
    row["greedy"] = format_rational(greedy.second);
    row["ratio"] = format_rational(ratio);
    rows.push_back(row);
    csv += std::string(gadget_kind_name(kind)) + "," + std::to_string(v) + "," +
           std::to_string(c) + "," + std::to_string(t) + "," +
           format_rational(*exact.objective) + "," + format_rational(greedy.second) + "," +
           format_rational(ratio) + "\n";
  }
  ExperimentReport rep;
  rep.summary = "ratios below 1: " + std::to_string(below_exact) + "; ratio " +
                detail::rational_stats_line(ratios);
  rep.report = detail::config_json(cfg);
  rep.report["trials"] = std::move(rows);
  rep.report["summary"] = rep.summary;
  rep.csv = std::move(csv);
  return rep;
}

inline ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                       const SolverOptions& opts = {}) {
  switch (cfg.id) {
    case ExperimentId::oracle_agreement: return run_oracle_agreement(cfg, opts);
    case ExperimentId::gadget_soundness: return run_gadget_soundness(cfg, opts);
    case ExperimentId::dichotomy: return run_dichotomy(cfg, opts);
    case ExperimentId::scaling: return run_scaling(cfg, opts);
    case ExperimentId::approximation_gap: return run_approximation_gap(cfg, opts);
  }
  throw std::logic_error("unhandled experiment id");
}

}  // namespace cfx
