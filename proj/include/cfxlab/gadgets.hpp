#pragma once

// Hardness-gadget compilers: a restricted 3-CNF formula becomes a regressor
// whose output on any binary input is exactly M times the number of
// violated constraints — so the output is either 0 or at least M, and a
// zero-output input yields a satisfying assignment. Solving the quadratic-
// loss counterfactual problem on the gadget to optimality then decides
// satisfiability: optimum <= (M-1)^2 iff the formula is satisfiable.
//
// Three regressor families:
//   relu — 2v inputs (one per literal); one hidden neuron per clause firing
//          M when the clause has no true literal input, one per variable
//          firing M when both of its literal inputs are set; linear output
//          sums the hidden layer.
//   atm  — one depth-3 tree per clause with leaf c*M on the unique
//          falsifying branch; mean aggregation.
//   knn  — 8 vectors per clause (all assignments of its three variables,
//          off-clause coordinates fixed to 1/2), label c*M on the
//          falsifying one; k = c. The 1/2 padding gives every group the
//          same base distance, so the within-group match is strictly
//          nearest with squared-distance margin >= 1.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cfxlab/cnf.hpp"
#include "cfxlab/cost.hpp"
#include "cfxlab/explain.hpp"
#include "cfxlab/generators.hpp"
#include "cfxlab/models.hpp"
#include "cfxlab/rational.hpp"

namespace cfx {

enum class GadgetKind { relu, atm, knn };

inline const char* gadget_kind_name(GadgetKind k) {
  switch (k) {
    case GadgetKind::relu: return "relu";
    case GadgetKind::atm: return "atm";
    case GadgetKind::knn: return "knn";
  }
  return "?";
}

inline std::optional<GadgetKind> parse_gadget_kind(const std::string& s) {
  if (s == "relu") return GadgetKind::relu;
  if (s == "atm") return GadgetKind::atm;
  if (s == "knn") return GadgetKind::knn;
  return std::nullopt;
}

// A compiled reduction instance: regressor plus the fixed optimization
// parameters (origin all-zeros, target 0, lambda 1, flip-count cost).
struct GadgetInstance {
  GadgetKind kind = GadgetKind::relu;
  Model regressor;
  BinaryInstance x_orig;
  Rational y_cf = 0;
  Rational lambda = 1;
  Rational M = 2;
  CostFunction cost;
  uint32_t num_vars = 0;
  uint32_t num_clauses = 0;
};

// Smallest integer s with s*s >= r (r >= 0).
inline BigInt ceil_sqrt(const Rational& r) {
  if (r <= 0) return 0;
  const BigInt& n = numerator(r);
  const BigInt& d = denominator(r);
  BigInt quotient = (n + d - 1) / d;
  BigInt s = sqrt(quotient);
  while (s * s * d < n) ++s;
  while (s > 0 && (s - 1) * (s - 1) * d >= n) --s;
  return s;
}

// Default scale: the smallest integer M >= 2 with (M-1)^2 >= max cost.
inline Rational default_gadget_scale(const CostFunction& cost) {
  BigInt m = ceil_sqrt(cost.max_value()) + 1;
  if (m < 2) m = 2;
  return Rational(m);
}

namespace detail {

inline void check_gadget_scale(const Rational& M, const CostFunction& cost) {
  if (M < 2 || (M - 1) * (M - 1) < cost.max_value())
    throw std::invalid_argument("invalid M: need M >= 2 and (M-1)^2 >= maximum cost");
}

// Input index of a literal in the 2v encoding.
inline uint32_t literal_input(const Lit& l) { return 2 * l.var + (l.neg ? 1u : 0u); }

// The variable values under which a clause is false (every literal false).
inline std::array<uint8_t, 3> falsifying_pattern(const Clause& c) {
  std::array<uint8_t, 3> p{};
  for (size_t i = 0; i < 3; ++i) p[i] = c.lits[i].neg ? 1 : 0;
  return p;
}

}  // namespace detail

// ===========================================================================
// builders
// ===========================================================================

inline GadgetInstance build_relu_gadget(const CnfFormula& f,
                                        std::optional<Rational> scale = std::nullopt) {
  uint32_t v = f.num_vars;
  uint32_t c = static_cast<uint32_t>(f.clauses.size());
  uint32_t dim = 2 * v;
  CostFunction cost = CostFunction::hamming(dim);
  Rational M = scale.value_or(default_gadget_scale(cost));
  detail::check_gadget_scale(M, cost);

  ReluNetwork net;
  net.dim = dim;
  net.classifier = false;
  ReluLayer hidden;
  hidden.weights.assign(c + v, std::vector<Rational>(dim, Rational(0)));
  hidden.bias.assign(c + v, Rational(0));
  // One neuron per clause: M - M * (sum of its literal inputs); positive
  // (= M) exactly when no literal input is set.
  for (uint32_t j = 0; j < c; ++j) {
    hidden.bias[j] = M;
    for (const Lit& l : f.clauses[j].lits) hidden.weights[j][detail::literal_input(l)] -= M;
  }
  // One neuron per variable: M * (both literal inputs) - M; positive (= M)
  // exactly when the variable is set both ways at once.
  for (uint32_t i = 0; i < v; ++i) {
    uint32_t r = c + i;
    hidden.bias[r] = -M;
    hidden.weights[r][2 * i] = M;
    hidden.weights[r][2 * i + 1] = M;
  }
  ReluLayer out;
  out.weights.assign(1, std::vector<Rational>(c + v, Rational(1)));
  out.bias.assign(1, Rational(0));
  net.layers.push_back(std::move(hidden));
  net.layers.push_back(std::move(out));

  GadgetInstance g;
  g.kind = GadgetKind::relu;
  g.regressor = std::move(net);
  g.x_orig = BinaryInstance::zeros(dim);
  g.M = M;
  g.cost = std::move(cost);
  g.num_vars = v;
  g.num_clauses = c;
  return g;
}

inline GadgetInstance build_atm_gadget(const CnfFormula& f,
                                       std::optional<Rational> scale = std::nullopt) {
  uint32_t v = f.num_vars;
  uint32_t c = static_cast<uint32_t>(f.clauses.size());
  CostFunction cost = CostFunction::hamming(v);
  Rational M = scale.value_or(default_gadget_scale(cost));
  detail::check_gadget_scale(M, cost);
  Rational high = M * c;  // mean over c trees turns this into M

  AdditiveTreeModel atm;
  atm.dim = v;
  for (uint32_t j = 0; j < c; ++j) {
    const Clause& cl = f.clauses[j];
    auto bad = detail::falsifying_pattern(cl);
    Diagram t;
    // Chain of the clause's three variables; leaving the falsifying branch
    // at any level ends in a 0 leaf, completing it ends in the c*M leaf.
    // Ids: nodes 0..2, leaves 3..6.
    for (int32_t i = 0; i < 3; ++i) {
      DiagramNode n;
      n.id = i;
      n.var = cl.lits[static_cast<size_t>(i)].var;
      int32_t on_bad = (i == 2) ? 6 : i + 1;  // continue the chain or hit c*M
      int32_t off_bad = 3 + i;                // 0 leaf
      n.hi = bad[static_cast<size_t>(i)] ? on_bad : off_bad;
      n.lo = bad[static_cast<size_t>(i)] ? off_bad : on_bad;
      t.nodes.push_back(n);
    }
    for (int32_t leaf = 3; leaf <= 5; ++leaf) t.leaves.push_back({leaf, Rational(0)});
    t.leaves.push_back({6, high});
    t.root = 0;
    atm.trees.push_back(std::move(t));
  }

  GadgetInstance g;
  g.kind = GadgetKind::atm;
  g.regressor = std::move(atm);
  g.x_orig = BinaryInstance::zeros(v);
  g.M = M;
  g.cost = std::move(cost);
  g.num_vars = v;
  g.num_clauses = c;
  return g;
}

inline GadgetInstance build_knn_gadget(const CnfFormula& f,
                                       std::optional<Rational> scale = std::nullopt) {
  uint32_t v = f.num_vars;
  uint32_t c = static_cast<uint32_t>(f.clauses.size());
  CostFunction cost = CostFunction::hamming(v);
  Rational M = scale.value_or(default_gadget_scale(cost));
  detail::check_gadget_scale(M, cost);
  Rational high = M * c;
  Rational half = Rational(1) / 2;

  KnnRegressor knn;
  knn.dim = v;
  knn.k = c;
  knn.vectors.reserve(8 * c);
  knn.labels.reserve(8 * c);
  for (uint32_t j = 0; j < c; ++j) {
    const Clause& cl = f.clauses[j];
    auto bad = detail::falsifying_pattern(cl);
    for (uint32_t code = 0; code < 8; ++code) {
      std::vector<Rational> vec(v, half);
      bool is_bad = true;
      for (uint32_t t = 0; t < 3; ++t) {
        uint8_t bit = (code >> t) & 1u;
        vec[cl.lits[t].var] = Rational(bit);
        if (bit != bad[t]) is_bad = false;
      }
      knn.vectors.push_back(std::move(vec));
      knn.labels.push_back(is_bad ? high : Rational(0));
    }
  }

  GadgetInstance g;
  g.kind = GadgetKind::knn;
  g.regressor = std::move(knn);
  g.x_orig = BinaryInstance::zeros(v);
  g.M = M;
  g.cost = std::move(cost);
  g.num_vars = v;
  g.num_clauses = c;
  return g;
}

inline GadgetInstance build_gadget(const CnfFormula& f, GadgetKind kind,
                                   std::optional<Rational> scale = std::nullopt) {
  switch (kind) {
    case GadgetKind::relu: return build_relu_gadget(f, scale);
    case GadgetKind::atm: return build_atm_gadget(f, scale);
    case GadgetKind::knn: return build_knn_gadget(f, scale);
  }
  throw std::logic_error("unhandled gadget kind");
}

// ===========================================================================
// assignments <-> inputs
// ===========================================================================

// Canonical input encoding of a truth assignment.
inline BinaryInstance encode_assignment(const GadgetInstance& g, const Assignment& a) {
  if (a.num_vars() != g.num_vars) throw DimensionMismatch("assignment has wrong variable count");
  if (g.kind == GadgetKind::relu) {
    BinaryInstance x = BinaryInstance::zeros(2 * g.num_vars);
    for (uint32_t i = 0; i < g.num_vars; ++i) x.bits[2 * i + (a.values[i] ? 0 : 1)] = 1;
    return x;
  }
  BinaryInstance x = BinaryInstance::zeros(g.num_vars);
  for (uint32_t i = 0; i < g.num_vars; ++i) x.bits[i] = a.values[i];
  return x;
}

// If the regressor outputs exactly 0 on x, read a truth assignment off the
// input (literal encoding: variable true iff its positive-literal input is
// set, unset variables default to false; variable encoding: read directly).
// Returns nothing when the output is nonzero.
inline std::optional<Assignment> extract_assignment(const GadgetInstance& g,
                                                    const BinaryInstance& x) {
  if (evaluate(g.regressor, x).numeric() != 0) return std::nullopt;
  Assignment a;
  a.values.assign(g.num_vars, 0);
  if (g.kind == GadgetKind::relu) {
    for (uint32_t i = 0; i < g.num_vars; ++i) a.values[i] = x[2 * i];
  } else {
    for (uint32_t i = 0; i < g.num_vars; ++i) a.values[i] = x[i];
  }
  return a;
}

// ===========================================================================
// verification
// ===========================================================================

struct GadgetReport {
  uint64_t inputs_checked = 0;
  uint64_t assignments_checked = 0;
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

struct VerifyMode {
  bool exhaustive = true;
  uint64_t samples = 0;
  uint64_t seed = 0;

  static VerifyMode all() { return {true, 0, 0}; }
  static VerifyMode sampled(uint64_t n, uint64_t seed) { return {false, n, seed}; }
};

// Checks, over the chosen inputs/assignments:
//  (a) output is 0 or >= M (never strictly between),
//  (b) output 0 implies the extracted assignment satisfies the formula,
//  (c) every satisfying assignment's canonical encoding evaluates to 0.
inline GadgetReport verify_gadget(const GadgetInstance& g, const CnfFormula& f,
                                  const VerifyMode& mode = VerifyMode::all(),
                                  size_t exhaustive_cap = 20) {
  GadgetReport rep;
  uint32_t dim = static_cast<uint32_t>(g.x_orig.dim());
  PreparedModel prep(g.regressor);

  auto check_input = [&](const BinaryInstance& x) {
    ++rep.inputs_checked;
    Rational out = prep.eval(x).numeric();
    if (out != 0 && out < g.M) {
      rep.violations.push_back("output " + format_rational(out) + " in (0, M) at input " +
                               x.to_string());
      return;
    }
    if (out == 0) {
      auto a = extract_assignment(g, x);
      if (!a) {
        rep.violations.push_back("zero output but no assignment extracted at input " +
                                 x.to_string());
      } else if (!satisfies(*a, f)) {
        rep.violations.push_back("extracted assignment does not satisfy the formula at input " +
                                 x.to_string());
      }
    }
  };
  auto check_assignment = [&](const Assignment& a) {
    ++rep.assignments_checked;
    if (!satisfies(a, f)) return;
    BinaryInstance x = encode_assignment(g, a);
    Rational out = prep.eval(x).numeric();
    if (out != 0)
      rep.violations.push_back("satisfying assignment encodes to nonzero output " +
                               format_rational(out) + " at input " + x.to_string());
  };

  if (mode.exhaustive) {
    if (dim > exhaustive_cap)
      throw CapExceeded("exhaustive gadget sweep: dimension " + std::to_string(dim) +
                        " exceeds enumeration cap " + std::to_string(exhaustive_cap));
    uint64_t total = uint64_t(1) << dim;
    for (uint64_t code = 0; code < total; ++code)
      check_input(BinaryInstance::from_index(code, dim));
    uint64_t tot_a = uint64_t(1) << g.num_vars;
    for (uint64_t code = 0; code < tot_a; ++code) {
      Assignment a;
      a.values.resize(g.num_vars);
      for (uint32_t i = 0; i < g.num_vars; ++i) a.values[i] = (code >> i) & 1u;
      check_assignment(a);
    }
  } else {
    Rng rng(mode.seed);
    for (uint64_t s = 0; s < mode.samples; ++s) check_input(random_instance(rng, dim));
    for (uint64_t s = 0; s < mode.samples; ++s) {
      Assignment a;
      a.values.resize(g.num_vars);
      for (uint32_t i = 0; i < g.num_vars; ++i) a.values[i] = static_cast<uint8_t>(rng.coin());
      check_assignment(a);
    }
  }
  return rep;
}

// ===========================================================================
// the reduction pipeline
// ===========================================================================

struct ReductionOutcome {
  bool satisfiable = false;
  std::optional<Assignment> assignment;
  Rational objective;       // exact optimum of the quadratic-loss problem
  Rational threshold;       // (M-1)^2
  std::string certificate;  // from the inner solver
};

// Builds the gadget, solves the quadratic-loss counterfactual problem to
// optimality, and decides satisfiability by comparing the optimum against
// (M-1)^2. An optimum in the open gap ((M-1)^2, M^2) is impossible for a
// sound gadget and reported as an invariant violation.
inline ReductionOutcome run_reduction(const GadgetInstance& g, const CnfFormula& f,
                                      const SolverOptions& opts = {}) {
  ProblemSpec spec;
  spec.kind = ProblemKind::wachter;
  spec.model = g.regressor;
  spec.x_orig = g.x_orig;
  spec.target = Output::number(g.y_cf);
  spec.cost = g.cost;
  spec.lambda = g.lambda;
  Solution sol = solve_wachter(spec, opts);

  ReductionOutcome out;
  out.objective = *sol.objective;
  out.threshold = (g.M - 1) * (g.M - 1);
  out.certificate = sol.certificate;
  if (out.objective <= out.threshold) {
    BinaryInstance x = apply_delta(g.x_orig, *sol.witness_delta);
    auto a = extract_assignment(g, x);
    if (!a || !satisfies(*a, f))
      throw InvariantViolation("optimum below threshold but no satisfying assignment extracted");
    out.satisfiable = true;
    out.assignment = std::move(a);
  } else {
    if (out.objective < g.M * g.M)
      throw InvariantViolation("optimum in the impossible gap between (M-1)^2 and M^2");
    out.satisfiable = false;
  }
  return out;
}

inline ReductionOutcome run_reduction(const CnfFormula& f, GadgetKind kind,
                                      std::optional<Rational> scale = std::nullopt,
                                      const SolverOptions& opts = {}) {
  return run_reduction(build_gadget(f, kind, scale), f, opts);
}

inline std::optional<Assignment> sat_via_cfe(const CnfFormula& f, GadgetKind kind,
                                             std::optional<Rational> scale = std::nullopt,
                                             const SolverOptions& opts = {}) {
  return run_reduction(f, kind, scale, opts).assignment;
}

}  // namespace cfx
