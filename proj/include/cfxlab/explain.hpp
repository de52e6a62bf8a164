#pragma once

// Explanation problems and exact solvers.
//
// Eight problem kinds over one spec type. Every solver is exact: optima are
// true optima, feasibility answers are decisive, and all arithmetic is
// rational. Brute-force enumeration backs every kind below a dimension cap;
// linear classifiers and branching diagrams get specialized polynomial
// algorithms; the quadratic-loss optimizer gets an exact branch-and-bound
// that scales past the enumeration cap on structured models.
//
// Tie rule everywhere: among equal-objective witnesses, the
// lexicographically smallest flip set wins (specialized solvers guarantee
// the exact optimum and a valid witness; the flip-set tie rule is guaranteed
// on the enumeration and branch-and-bound paths, and on the linear greedy).

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "cfxlab/bits.hpp"
#include "cfxlab/cost.hpp"
#include "cfxlab/models.hpp"
#include "cfxlab/rational.hpp"

namespace cfx {

struct CapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvariantViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ===========================================================================
// problem specifications
// ===========================================================================

enum class ProblemKind {
  classic_cf,
  wachter,
  mcr,
  plausible_mcr,
  robust_cf,
  msr,
  plausible_msr,
  mca,
};

inline const char* problem_kind_name(ProblemKind k) {
  switch (k) {
    case ProblemKind::classic_cf: return "classic-cf";
    case ProblemKind::wachter: return "wachter";
    case ProblemKind::mcr: return "mcr";
    case ProblemKind::plausible_mcr: return "plausible-mcr";
    case ProblemKind::robust_cf: return "robust-cf";
    case ProblemKind::msr: return "msr";
    case ProblemKind::plausible_msr: return "plausible-msr";
    case ProblemKind::mca: return "mca";
  }
  return "?";
}

inline std::optional<ProblemKind> parse_problem_kind(const std::string& s) {
  for (ProblemKind k :
       {ProblemKind::classic_cf, ProblemKind::wachter, ProblemKind::mcr,
        ProblemKind::plausible_mcr, ProblemKind::robust_cf, ProblemKind::msr,
        ProblemKind::plausible_msr, ProblemKind::mca})
    if (s == problem_kind_name(k)) return k;
  return std::nullopt;
}

struct ProblemSpec {
  ProblemKind kind = ProblemKind::classic_cf;
  Model model;
  BinaryInstance x_orig;
  std::optional<Output> target;     // y_cf; absent for semi-factual kinds
  CostFunction cost;
  std::optional<Rational> k;        // bound for decision kinds
  std::optional<Rational> lambda;   // quadratic-loss trade-off weight
  std::optional<Model> pi;          // plausibility indicator (classifier)
  std::vector<Model> model_set;     // robust kind: explicit model neighborhood
};

struct Solution {
  bool feasible = false;
  std::optional<Delta> witness_delta;
  std::optional<PartialInstance> witness_partial;
  std::optional<BinaryInstance> witness_instance;
  std::optional<Rational> objective;
  std::string certificate;
};

struct SolverOptions {
  size_t max_dim = 24;      // cap for full 2^d enumerations
  size_t msr_max_dim = 20;  // cap for subset x completion enumerations
  size_t bb_max_dim = 40;   // cap for the branch-and-bound optimizer
  unsigned threads = 1;     // enumeration may be partitioned; results identical
};

namespace detail {

inline void require_cap(size_t d, size_t cap, const char* what) {
  if (d > cap)
    throw CapExceeded(std::string(what) + ": dimension " + std::to_string(d) +
                      " exceeds enumeration cap " + std::to_string(cap) +
                      " (raise with --max-dim or CFXLAB_MAX_DIM)");
}

inline void require_spec_dim(const ProblemSpec& spec) {
  uint32_t d = input_dim(spec.model);
  if (spec.x_orig.dim() != d)
    throw DimensionMismatch("dimension mismatch: origin instance vs model");
  if (spec.cost.dim != d) throw DimensionMismatch("dimension mismatch: cost function vs model");
  if (spec.pi && input_dim(*spec.pi) != d)
    throw DimensionMismatch("dimension mismatch: plausibility model vs model");
  for (const Model& m : spec.model_set)
    if (input_dim(m) != d) throw DimensionMismatch("dimension mismatch inside model_set");
}

inline const Output& require_target(const ProblemSpec& spec) {
  if (!spec.target) throw ParseError("problem kind requires a target output");
  return *spec.target;
}

inline Rational require_k(const ProblemSpec& spec) {
  if (!spec.k) throw ParseError("problem kind requires the bound k");
  return *spec.k;
}

inline const Model& require_pi(const ProblemSpec& spec) {
  if (!spec.pi) throw ParseError("plausible kinds require the indicator model pi");
  if (!is_classifier(*spec.pi)) throw ParseError("plausibility indicator must be a classifier");
  return *spec.pi;
}

// ---------------------------------------------------------------------------
// exhaustive sweeps (optionally partitioned across threads; results are
// identical for any partition because the (cost, flip-set) order is total)
// ---------------------------------------------------------------------------

struct SweepBest {
  std::optional<Delta> delta;
  Rational cost;
  uint64_t hits = 0;  // points satisfying the predicate
};

// make_pred() is called once per worker and returns pred(x) -> bool.
template <typename PredFactory>
SweepBest sweep_min_cost(uint32_t dim, const BinaryInstance& x_orig, const CostFunction& cost,
                         const SolverOptions& opts, PredFactory make_pred) {
  uint64_t total = uint64_t(1) << dim;
  unsigned workers = std::max(1u, opts.threads);
  if (uint64_t(workers) > total) workers = static_cast<unsigned>(total);

  auto run_range = [&](uint64_t lo, uint64_t hi, SweepBest& out) {
    auto pred = make_pred();
    for (uint64_t code = lo; code < hi; ++code) {
      BinaryInstance x = BinaryInstance::from_index(code, dim);
      if (!pred(x)) continue;
      ++out.hits;
      Delta d = delta_between(x_orig, x);
      Rational c = cost.of(d);
      if (!out.delta || c < out.cost || (c == out.cost && Delta::lex_less(d, *out.delta))) {
        out.delta = std::move(d);
        out.cost = std::move(c);
      }
    }
  };

  std::vector<SweepBest> parts(workers);
  if (workers == 1) {
    run_range(0, total, parts[0]);
  } else {
    std::vector<std::thread> pool;
    uint64_t chunk = total / workers;
    for (unsigned w = 0; w < workers; ++w) {
      uint64_t lo = w * chunk;
      uint64_t hi = (w + 1 == workers) ? total : lo + chunk;
      pool.emplace_back(run_range, lo, hi, std::ref(parts[w]));
    }
    for (auto& t : pool) t.join();
  }

  SweepBest merged;
  for (SweepBest& p : parts) {
    merged.hits += p.hits;
    if (!p.delta) continue;
    if (!merged.delta || p.cost < merged.cost ||
        (p.cost == merged.cost && Delta::lex_less(*p.delta, *merged.delta))) {
      merged.delta = std::move(p.delta);
      merged.cost = std::move(p.cost);
    }
  }
  return merged;
}

inline std::string exhaustive_certificate(uint32_t dim) {
  return "exhaustive: " + std::to_string(uint64_t(1) << dim) + " points";
}

}  // namespace detail

// ===========================================================================
// specialized solver: linear classifier, flip-count cost
// ===========================================================================

// Exact minimum number of flips moving a linear classifier to the target
// class, with the lexicographically smallest witness among minimum-size flip
// sets. Greedy on score gains is exact here: with t flips the best reachable
// score is the original score plus the t largest gains, so the minimum t is
// found by scanning gains in decreasing order; the witness is then refined
// index-by-index to the lexicographically smallest feasible choice.
inline Solution perceptron_mcr_fast(const Perceptron& p, const BinaryInstance& x_orig,
                                    int y_cf, std::optional<Rational> k = std::nullopt) {
  if (x_orig.dim() != p.dim) throw DimensionMismatch("input has wrong dimension");
  Solution sol;
  sol.certificate = "greedy-linear";
  Rational score = detail::perceptron_score(p, x_orig);
  int current = score > 0 ? 1 : 0;
  if (current == y_cf) {
    sol.feasible = !k || Rational(0) <= *k;
    sol.witness_delta = Delta{};
    sol.objective = 0;
    return sol;
  }

  // Gain of flipping bit i, oriented so "helpful" is positive.
  // Target 1 needs score > 0; target 0 needs -score >= 0.
  bool to_one = (y_cf == 1);
  Rational base = to_one ? score : -score;
  std::vector<Rational> gain(p.dim);
  for (uint32_t i = 0; i < p.dim; ++i) {
    Rational g = x_orig[i] ? -p.weights[i] : p.weights[i];
    gain[i] = to_one ? g : -g;
  }
  auto crossed = [&](const Rational& s) { return to_one ? s > 0 : s >= 0; };

  std::vector<uint32_t> order(p.dim);
  for (uint32_t i = 0; i < p.dim; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
    return gain[a] != gain[b] ? gain[a] > gain[b] : a < b;
  });

  // Minimum flip count: extend by descending gain while it helps.
  size_t t = 0;
  {
    Rational s = base;
    bool ok = false;
    for (uint32_t idx : order) {
      if (crossed(s)) {
        ok = true;
        break;
      }
      if (gain[idx] <= 0) break;  // no remaining flip can raise the score
      s += gain[idx];
      ++t;
    }
    if (!ok && !crossed(s)) {
      sol.feasible = false;
      return sol;  // target class unreachable
    }
  }

  // Lexicographically smallest witness of size t: choose indices ascending,
  // keeping the check "remaining budget of best gains still crosses".
  std::vector<uint32_t> chosen;
  std::vector<bool> used(p.dim, false);
  Rational s = base;
  for (size_t slot = 0; slot < t; ++slot) {
    size_t budget = t - slot - 1;
    for (uint32_t i = 0; i < p.dim; ++i) {
      if (used[i]) continue;
      Rational s2 = s + gain[i];
      Rational reach = s2;
      size_t left = budget;
      for (uint32_t idx : order) {
        if (left == 0) break;
        if (used[idx] || idx == i || gain[idx] <= 0) continue;
        reach += gain[idx];
        --left;
      }
      if (crossed(reach)) {
        used[i] = true;
        chosen.push_back(i);
        s = std::move(s2);
        break;
      }
    }
  }
  if (chosen.size() != t || !crossed(s))
    throw InvariantViolation("linear greedy failed to reproduce its own bound");

  sol.objective = Rational(static_cast<int64_t>(t));
  sol.witness_delta = Delta(std::move(chosen));
  sol.feasible = !k || *sol.objective <= *k;
  if (k && *sol.objective > *k) sol.witness_delta.reset();
  return sol;
}

// ===========================================================================
// specialized solver: branching diagrams (FBDD / decision tree)
// ===========================================================================

namespace detail {

// Shortest path from the root to a leaf labelled y_cf, where an edge costs
// the flip weight of its variable when the branch disagrees with x_orig.
// Read-once guarantees forced bits along a path are distinct, so path costs
// add up exactly. Untested variables keep their original values.
inline Solution diagram_cf_fast(const Diagram& g, uint32_t dim, const BinaryInstance& x_orig,
                                int y_cf, const CostFunction& cost) {
  if (x_orig.dim() != dim) throw DimensionMismatch("input has wrong dimension");
  DiagramIndex ix(g);
  if (!ix.duplicate_ids.empty()) throw EvalError("diagram has duplicate ids");

  // Reverse-topological order by repeated passes (sizes are small).
  std::vector<int32_t> order;
  std::unordered_map<int32_t, bool> done;
  bool progress = true;
  while (order.size() < g.nodes.size() && progress) {
    progress = false;
    for (const DiagramNode& n : g.nodes) {
      if (done[n.id]) continue;
      auto ready = [&](int32_t ch) { return ix.leaf_at.count(ch) || done[ch]; };
      if (ready(n.lo) && ready(n.hi)) {
        done[n.id] = true;
        order.push_back(n.id);
        progress = true;
      }
    }
  }
  if (order.size() < g.nodes.size()) throw EvalError("diagram is not acyclic");

  std::unordered_map<int32_t, std::optional<Rational>> best;
  for (const DiagramLeaf& l : g.leaves)
    best[l.id] = (l.value == y_cf) ? std::optional<Rational>(Rational(0)) : std::nullopt;
  auto edge_cost = [&](uint32_t var, uint8_t branch) {
    return x_orig[var] == branch ? Rational(0) : cost.weight(var);
  };
  for (int32_t id : order) {
    const DiagramNode& n = g.nodes[ix.node_at.at(id)];
    std::optional<Rational> lo = best[n.lo], hi = best[n.hi];
    std::optional<Rational> b;
    if (lo) b = *lo + edge_cost(n.var, 0);
    if (hi) {
      Rational h = *hi + edge_cost(n.var, 1);
      if (!b || h < *b) b = h;
    }
    best[n.id] = b;
  }

  Solution sol;
  sol.certificate = "diagram-shortest-path";
  std::optional<Rational> opt =
      ix.leaf_at.count(g.root)
          ? (g.leaves[ix.leaf_at.at(g.root)].value == y_cf ? std::optional<Rational>(Rational(0))
                                                           : std::nullopt)
          : best[g.root];
  if (!opt) {
    sol.feasible = false;
    return sol;
  }

  // Reconstruct one optimal path. Preference on ties: the branch agreeing
  // with x_orig, then the low branch.
  std::vector<uint32_t> flips;
  int32_t cur = g.root;
  Rational remaining = *opt;
  while (!ix.leaf_at.count(cur)) {
    const DiagramNode& n = g.nodes[ix.node_at.at(cur)];
    struct Cand {
      int32_t child;
      uint8_t branch;
    };
    std::optional<Cand> pick;
    uint8_t agree = x_orig[n.var];
    for (uint8_t branch : {agree, static_cast<uint8_t>(1 - agree)}) {
      int32_t child = branch ? n.hi : n.lo;
      std::optional<Rational> sub =
          ix.leaf_at.count(child)
              ? (g.leaves[ix.leaf_at.at(child)].value == y_cf
                     ? std::optional<Rational>(Rational(0))
                     : std::nullopt)
              : best[child];
      if (sub && *sub + edge_cost(n.var, branch) == remaining) {
        pick = Cand{child, branch};
        break;
      }
    }
    if (!pick) throw InvariantViolation("diagram path reconstruction failed");
    if (x_orig[n.var] != pick->branch) flips.push_back(n.var);
    remaining -= edge_cost(n.var, pick->branch);
    cur = pick->child;
  }

  sol.feasible = true;
  sol.objective = *opt;
  sol.witness_delta = Delta(std::move(flips));
  return sol;
}

}  // namespace detail

inline Solution fbdd_cf_fast(const Fbdd& m, const BinaryInstance& x_orig, int y_cf,
                             const CostFunction& cost) {
  return detail::diagram_cf_fast(m.graph, m.dim, x_orig, y_cf, cost);
}

inline Solution fbdd_cf_fast(const DecisionTree& m, const BinaryInstance& x_orig, int y_cf,
                             const CostFunction& cost) {
  return detail::diagram_cf_fast(m.graph, m.dim, x_orig, y_cf, cost);
}

// ===========================================================================
// quadratic-loss optimizer
// ===========================================================================

// Greedy single-flip descent on loss + lambda * cost. Used to prime the
// branch-and-bound and by the harness as the heuristic under study. Exact
// arithmetic; deterministic (strict improvement, lowest index on ties).
inline std::pair<Delta, Rational> greedy_wachter_descent(const PreparedModel& prep,
                                                         const BinaryInstance& x_orig,
                                                         const Rational& y,
                                                         const Rational& lambda,
                                                         const CostFunction& cost) {
  uint32_t d = static_cast<uint32_t>(x_orig.dim());
  BinaryInstance cur = x_orig;
  auto objective = [&](const BinaryInstance& x) {
    Rational diff = prep.eval(x).numeric() - y;
    return diff * diff + lambda * cost.between(x_orig, x);
  };
  Rational best = objective(cur);
  bool improved = true;
  while (improved) {
    improved = false;
    uint32_t best_i = 0;
    Rational best_val = best;
    for (uint32_t i = 0; i < d; ++i) {
      cur.bits[i] ^= 1u;
      Rational v = objective(cur);
      cur.bits[i] ^= 1u;
      if (v < best_val) {
        best_val = std::move(v);
        best_i = i;
        improved = true;
      }
    }
    if (improved) {
      cur.bits[best_i] ^= 1u;
      best = std::move(best_val);
    }
  }
  return {delta_between(x_orig, cur), std::move(best)};
}

namespace detail {

// Sound output-interval tracker over a partially fixed input, with O(column)
// incremental updates. Integer fast path for networks whose weights are
// integral and whose activations provably fit in int64.
class BoundTracker {
 public:
  virtual ~BoundTracker() = default;
  virtual void push(uint32_t var, uint8_t value) = 0;
  virtual void pop(uint32_t var, uint8_t value) = 0;
  virtual Interval current() = 0;
};

class GenericBoundTracker final : public BoundTracker {
 public:
  GenericBoundTracker(const Model& m, uint32_t dim)
      : model_(&m), box_(PartialInstance::all_unset(dim)) {}
  void push(uint32_t var, uint8_t value) override { box_.bits[var] = static_cast<int8_t>(value); }
  void pop(uint32_t var, uint8_t) override { box_.bits[var] = kUnset; }
  Interval current() override { return output_interval(*model_, box_); }

 private:
  const Model* model_;
  PartialInstance box_;
};

class ReluIntBoundTracker final : public BoundTracker {
 public:
  // Caller must have verified integrality and int64 fit (PreparedRelu).
  explicit ReluIntBoundTracker(const ReluNetwork& net) : net_(&net) {
    const ReluLayer& L0 = net.layers.front();
    size_t rows = L0.out_width(), cols = L0.in_width();
    w0_.resize(rows * cols);
    lo_.assign(rows, 0);
    hi_.assign(rows, 0);
    col_.resize(cols);
    for (size_t r = 0; r < rows; ++r) {
      int64_t b;
      integral_int64(L0.bias[r], b);
      int64_t lo = b, hi = b;
      for (size_t c = 0; c < cols; ++c) {
        int64_t w;
        integral_int64(L0.weights[r][c], w);
        w0_[r * cols + c] = w;
        if (w != 0) col_[c].push_back(static_cast<uint32_t>(r));
        if (w < 0)
          lo += w;
        else
          hi += w;
      }
      lo_[r] = lo;
      hi_[r] = hi;
    }
    for (size_t li = 1; li < net.layers.size(); ++li) {
      const ReluLayer& L = net.layers[li];
      auto& lw = deeper_w_.emplace_back();
      auto& lb = deeper_b_.emplace_back();
      lw.reserve(L.out_width() * L.in_width());
      lb.resize(L.out_width());
      for (size_t r = 0; r < L.out_width(); ++r) {
        integral_int64(L.bias[r], lb[r]);
        for (const Rational& wv : L.weights[r]) {
          int64_t w;
          integral_int64(wv, w);
          lw.push_back(w);
        }
      }
      widths_.push_back(L.out_width());
    }
    size_t mw = lo_.size();
    for (size_t w : widths_) mw = std::max(mw, w);
    buf_lo_.resize(mw);
    buf_hi_.resize(mw);
    buf_lo2_.resize(mw);
    buf_hi2_.resize(mw);
  }

  void push(uint32_t var, uint8_t value) override { adjust(var, value, +1); }
  void pop(uint32_t var, uint8_t value) override { adjust(var, value, -1); }

  Interval current() override {
    size_t rows = lo_.size();
    bool only_layer = deeper_w_.empty();
    if (only_layer) return {Rational(lo_[0]), Rational(hi_[0])};
    int64_t* clo = buf_lo_.data();
    int64_t* chi = buf_hi_.data();
    for (size_t r = 0; r < rows; ++r) {  // rectifier after the first layer
      clo[r] = lo_[r] < 0 ? 0 : lo_[r];
      chi[r] = hi_[r] < 0 ? 0 : hi_[r];
    }
    size_t in_w = rows;
    int64_t* nlo = buf_lo2_.data();
    int64_t* nhi = buf_hi2_.data();
    for (size_t li = 0; li < deeper_w_.size(); ++li) {
      size_t out_w = widths_[li];
      bool hidden = li + 1 < deeper_w_.size();
      const int64_t* lw = deeper_w_[li].data();
      const int64_t* lb = deeper_b_[li].data();
      for (size_t r = 0; r < out_w; ++r) {
        int64_t lo = lb[r], hi = lb[r];
        const int64_t* row = lw + r * in_w;
        for (size_t c = 0; c < in_w; ++c) {
          int64_t w = row[c];
          if (w > 0) {
            lo += w * clo[c];
            hi += w * chi[c];
          } else if (w < 0) {
            lo += w * chi[c];
            hi += w * clo[c];
          }
        }
        if (hidden) {
          lo = lo < 0 ? 0 : lo;
          hi = hi < 0 ? 0 : hi;
        }
        nlo[r] = lo;
        nhi[r] = hi;
      }
      std::swap(clo, nlo);
      std::swap(chi, nhi);
      in_w = out_w;
    }
    return {Rational(clo[0]), Rational(chi[0])};
  }

 private:
  void adjust(uint32_t var, uint8_t value, int dir) {
    size_t cols = net_->layers.front().in_width();
    for (uint32_t r : col_[var]) {
      int64_t w = w0_[r * cols + var];
      // Unset contributes [min(0,w), max(0,w)]; fixed contributes w*value.
      int64_t fixed = value ? w : 0;
      int64_t dlo = fixed - (w < 0 ? w : 0);
      int64_t dhi = fixed - (w > 0 ? w : 0);
      lo_[r] += dir * dlo;
      hi_[r] += dir * dhi;
    }
  }

  const ReluNetwork* net_;
  std::vector<int64_t> w0_;
  std::vector<std::vector<uint32_t>> col_;
  std::vector<int64_t> lo_, hi_;  // first-layer pre-activation bounds
  std::vector<std::vector<int64_t>> deeper_w_;
  std::vector<std::vector<int64_t>> deeper_b_;
  std::vector<size_t> widths_;
  std::vector<int64_t> buf_lo_, buf_hi_, buf_lo2_, buf_hi2_;
};

inline std::unique_ptr<BoundTracker> make_bound_tracker(const Model& m, uint32_t dim) {
  if (m.is<ReluNetwork>()) {
    const auto& net = m.as<ReluNetwork>();
    if (!net.classifier && PreparedRelu(net).use_int)
      return std::make_unique<ReluIntBoundTracker>(net);
  }
  return std::make_unique<GenericBoundTracker>(m, dim);
}

struct WachterSearch {
  const Model& model;
  const BinaryInstance& x_orig;
  Rational y;
  Rational lambda;
  const CostFunction& cost;

  PreparedModel prep{model};
  std::unique_ptr<BoundTracker> tracker;
  BinaryInstance cur;
  std::vector<uint32_t> flips;
  Rational committed = 0;  // lambda * cost of flips fixed so far
  Rational best_obj;
  Delta best_delta;
  uint64_t nodes = 0;

  WachterSearch(const Model& m, const BinaryInstance& x0, Rational y_, Rational lambda_,
                const CostFunction& c)
      : model(m), x_orig(x0), y(std::move(y_)), lambda(std::move(lambda_)), cost(c), cur(x0) {
    tracker = make_bound_tracker(model, static_cast<uint32_t>(x0.dim()));
    auto primed = greedy_wachter_descent(prep, x_orig, y, lambda, cost);
    best_delta = std::move(primed.first);
    best_obj = std::move(primed.second);
  }

  void leaf() {
    Rational diff = prep.eval(cur).numeric() - y;
    Rational obj = diff * diff + committed;
    // flips is kept in ascending index order by construction
    if (obj < best_obj ||
        (obj == best_obj && std::lexicographical_compare(flips.begin(), flips.end(),
                                                         best_delta.flips.begin(),
                                                         best_delta.flips.end()))) {
      best_obj = std::move(obj);
      best_delta.flips = flips;
    }
  }

  void visit(uint32_t i) {
    ++nodes;
    uint32_t d = static_cast<uint32_t>(x_orig.dim());
    if (i == d) {
      leaf();
      return;
    }
    uint8_t orig = x_orig[i];
    for (int phase = 0; phase < 2; ++phase) {
      uint8_t v = phase == 0 ? orig : static_cast<uint8_t>(1 - orig);
      bool flip = phase == 1;
      tracker->push(i, v);
      cur.bits[i] = v;
      if (flip) {
        committed += lambda * cost.weight(i);
        flips.push_back(i);
      }
      Rational lb = committed + squared_gap(tracker->current(), y);
      if (!(lb > best_obj)) visit(i + 1);  // keep ties: lex rule needs them
      if (flip) {
        committed -= lambda * cost.weight(i);
        flips.pop_back();
      }
      cur.bits[i] = orig;
      tracker->pop(i, v);
    }
  }

  void run() { visit(0); }
};

}  // namespace detail

// ===========================================================================
// solvers
// ===========================================================================

inline Solution solve_classic_cf(const ProblemSpec& spec, const SolverOptions& opts = {}) {
  detail::require_spec_dim(spec);
  const Output& y = detail::require_target(spec);
  uint32_t d = input_dim(spec.model);

  if (y.is_label && spec.model.is<Perceptron>() && spec.cost.kind == CostFunction::Kind::hamming)
    return perceptron_mcr_fast(spec.model.as<Perceptron>(), spec.x_orig, y.label_value());
  if (y.is_label && spec.model.is<Fbdd>())
    return fbdd_cf_fast(spec.model.as<Fbdd>(), spec.x_orig, y.label_value(), spec.cost);
  if (y.is_label && spec.model.is<DecisionTree>())
    return fbdd_cf_fast(spec.model.as<DecisionTree>(), spec.x_orig, y.label_value(), spec.cost);

  detail::require_cap(d, opts.max_dim, "classic counterfactual search");
  auto best = detail::sweep_min_cost(d, spec.x_orig, spec.cost, opts, [&] {
    auto prep = std::make_shared<PreparedModel>(spec.model);
    return [prep, &y](const BinaryInstance& x) { return prep->eval(x) == y; };
  });
  Solution sol;
  sol.certificate = detail::exhaustive_certificate(d);
  if (!best.delta) {
    sol.feasible = false;
    return sol;
  }
  sol.feasible = true;
  sol.objective = best.cost;
  sol.witness_delta = std::move(best.delta);
  return sol;
}

inline Solution solve_mcr(const ProblemSpec& spec, const SolverOptions& opts = {}) {
  ProblemSpec c = spec;
  c.kind = ProblemKind::classic_cf;
  Rational k = detail::require_k(spec);
  Solution sol = solve_classic_cf(c, opts);
  if (!sol.feasible) return sol;
  if (*sol.objective > k) {
    sol.feasible = false;
    sol.witness_delta.reset();
    sol.objective.reset();
  }
  return sol;
}

inline Solution solve_wachter(const ProblemSpec& spec, const SolverOptions& opts = {}) {
  detail::require_spec_dim(spec);
  const Output& target = detail::require_target(spec);
  if (!spec.lambda || *spec.lambda <= 0) throw ParseError("lambda must be positive");
  Rational y = target.numeric();
  uint32_t d = input_dim(spec.model);

  Solution sol;
  sol.feasible = true;  // unconstrained minimization always has an optimum

  bool interval_informative = !spec.model.is<KnnRegressor>();
  if (d <= 16 || !interval_informative) {
    detail::require_cap(d, std::max<size_t>(opts.max_dim, 16), "quadratic-loss search");
    PreparedModel prep(spec.model);
    uint64_t total = uint64_t(1) << d;
    std::optional<Rational> best;
    Delta best_delta;
    for (uint64_t code = 0; code < total; ++code) {
      BinaryInstance x = BinaryInstance::from_index(code, d);
      Rational diff = prep.eval(x).numeric() - y;
      Delta dl = delta_between(spec.x_orig, x);
      Rational obj = diff * diff + *spec.lambda * spec.cost.of(dl);
      if (!best || obj < *best || (obj == *best && Delta::lex_less(dl, best_delta))) {
        best = std::move(obj);
        best_delta = std::move(dl);
      }
    }
    sol.objective = std::move(*best);
    sol.witness_delta = std::move(best_delta);
    sol.certificate = detail::exhaustive_certificate(d);
    return sol;
  }

  detail::require_cap(d, opts.bb_max_dim, "quadratic-loss branch-and-bound");
  detail::WachterSearch search(spec.model, spec.x_orig, y, *spec.lambda, spec.cost);
  search.run();
  sol.objective = std::move(search.best_obj);
  sol.witness_delta = std::move(search.best_delta);
  sol.certificate = "branch-and-bound: " + std::to_string(search.nodes) + " nodes";
  return sol;
}

inline Solution solve_robust_cf(const ProblemSpec& spec, const SolverOptions& opts = {}) {
  detail::require_spec_dim(spec);
  const Output& y = detail::require_target(spec);
  if (spec.model_set.empty()) throw ParseError("robust kind requires a nonempty model_set");
  uint32_t d = input_dim(spec.model);
  detail::require_cap(d, opts.max_dim, "robust counterfactual search");

  auto best = detail::sweep_min_cost(d, spec.x_orig, spec.cost, opts, [&] {
    auto preps = std::make_shared<std::vector<PreparedModel>>();
    for (const Model& m : spec.model_set) preps->emplace_back(m);
    return [preps, &y](const BinaryInstance& x) {
      for (const PreparedModel& p : *preps)
        if (!(p.eval(x) == y)) return false;
      return true;
    };
  });
  Solution sol;
  sol.certificate = detail::exhaustive_certificate(d);
  if (!best.delta) {
    sol.feasible = false;
    return sol;
  }
  sol.feasible = true;
  sol.objective = best.cost;
  sol.witness_delta = std::move(best.delta);
  return sol;
}

inline Solution solve_plausible_mcr(const ProblemSpec& spec, const SolverOptions& opts = {}) {
  detail::require_spec_dim(spec);
  const Output& y = detail::require_target(spec);
  const Model& pi = detail::require_pi(spec);
  Rational k = detail::require_k(spec);
  uint32_t d = input_dim(spec.model);
  detail::require_cap(d, opts.max_dim, "plausible counterfactual search");

  auto best = detail::sweep_min_cost(d, spec.x_orig, spec.cost, opts, [&] {
    auto prep = std::make_shared<PreparedModel>(spec.model);
    auto prep_pi = std::make_shared<PreparedModel>(pi);
    return [prep, prep_pi, &y](const BinaryInstance& x) {
      return prep->eval(x) == y && prep_pi->eval(x).label_value() == 1;
    };
  });
  Solution sol;
  sol.certificate = detail::exhaustive_certificate(d);
  if (!best.delta || best.cost > k) {
    sol.feasible = false;
    return sol;
  }
  sol.feasible = true;
  sol.objective = best.cost;
  sol.witness_delta = std::move(best.delta);
  return sol;
}

// True iff fixing `subset` to x_orig's values forces the model's label on
// every completion of the remaining features.
inline bool check_sufficiency(const Model& model, const BinaryInstance& x_orig,
                              const std::vector<uint32_t>& subset,
                              const SolverOptions& opts = {}) {
  uint32_t d = input_dim(model);
  if (x_orig.dim() != d) throw DimensionMismatch("input has wrong dimension");
  std::vector<uint32_t> free_vars;
  {
    std::vector<bool> fixed(d, false);
    for (uint32_t i : subset) {
      if (i >= d) throw DimensionMismatch("subset index out of range");
      fixed[i] = true;
    }
    for (uint32_t i = 0; i < d; ++i)
      if (!fixed[i]) free_vars.push_back(i);
  }
  detail::require_cap(free_vars.size(), opts.max_dim, "sufficiency check");
  PreparedModel prep(model);
  Output base = prep.eval(x_orig);
  BinaryInstance z = x_orig;
  uint64_t total = uint64_t(1) << free_vars.size();
  for (uint64_t code = 0; code < total; ++code) {
    for (size_t j = 0; j < free_vars.size(); ++j)
      z.bits[free_vars[j]] = static_cast<uint8_t>((code >> j) & 1u);
    if (!(prep.eval(z) == base)) return false;
  }
  return true;
}

namespace detail {

// Minimum-size subset passing `accept`, enumerated by ascending size and
// lexicographic order within one size. Always terminates: the full feature
// set is tested last.
template <typename Accept>
std::optional<std::vector<uint32_t>> min_subset(uint32_t d, Accept accept, uint64_t& checked) {
  std::vector<uint32_t> comb;
  for (uint32_t s = 0; s <= d; ++s) {
    comb.resize(s);
    for (uint32_t i = 0; i < s; ++i) comb[i] = i;
    while (true) {
      ++checked;
      if (accept(comb)) return comb;
      // next combination
      int32_t i = static_cast<int32_t>(s) - 1;
      while (i >= 0 && comb[i] == d - s + i) --i;
      if (i < 0) break;
      ++comb[i];
      for (uint32_t j = static_cast<uint32_t>(i) + 1; j < s; ++j) comb[j] = comb[j - 1] + 1;
    }
  }
  return std::nullopt;
}

inline PartialInstance subset_witness(const BinaryInstance& x_orig,
                                      const std::vector<uint32_t>& subset) {
  PartialInstance p = PartialInstance::all_unset(x_orig.dim());
  for (uint32_t i : subset) p.bits[i] = static_cast<int8_t>(x_orig[i]);
  return p;
}

}  // namespace detail

inline Solution solve_msr(const ProblemSpec& spec, const SolverOptions& opts = {}) {
  detail::require_spec_dim(spec);
  Rational k = detail::require_k(spec);
  uint32_t d = input_dim(spec.model);
  detail::require_cap(d, opts.msr_max_dim, "sufficient-reason search");

  uint64_t checked = 0;
  auto found = detail::min_subset(
      d,
      [&](const std::vector<uint32_t>& comb) {
        return check_sufficiency(spec.model, spec.x_orig, comb, opts);
      },
      checked);
  Solution sol;
  sol.certificate = "subset-enumeration: " + std::to_string(checked) + " subsets";
  // The full set is always sufficient, so found is always present.
  if (!found) throw InvariantViolation("no sufficient subset found, not even all features");
  sol.objective = Rational(static_cast<uint64_t>(found->size()));
  sol.witness_partial = detail::subset_witness(spec.x_orig, *found);
  sol.feasible = *sol.objective <= k;
  return sol;
}

inline Solution solve_plausible_msr(const ProblemSpec& spec, const SolverOptions& opts = {}) {
  detail::require_spec_dim(spec);
  const Model& pi = detail::require_pi(spec);
  Rational k = detail::require_k(spec);
  uint32_t d = input_dim(spec.model);
  detail::require_cap(d, opts.msr_max_dim, "plausible sufficient-reason search");

  uint64_t checked = 0;
  PreparedModel prep_pi(pi);
  auto found = detail::min_subset(
      d,
      [&](const std::vector<uint32_t>& comb) {
        // Plausibility first (cheap), on the canonical completion that sets
        // every unfixed feature to 0.
        BinaryInstance z = detail::subset_witness(spec.x_orig, comb).complete_zero();
        if (prep_pi.eval(z).label_value() != 1) return false;
        return check_sufficiency(spec.model, spec.x_orig, comb, opts);
      },
      checked);
  Solution sol;
  sol.certificate = "subset-enumeration: " + std::to_string(checked) + " subsets";
  if (!found) {
    sol.feasible = false;  // pi rejects every candidate, including all features
    return sol;
  }
  sol.objective = Rational(static_cast<uint64_t>(found->size()));
  sol.witness_partial = detail::subset_witness(spec.x_orig, *found);
  sol.feasible = *sol.objective <= k;
  return sol;
}

inline Solution solve_mca(const ProblemSpec& spec, const SolverOptions& opts = {}) {
  detail::require_spec_dim(spec);
  Rational k = detail::require_k(spec);
  uint32_t d = input_dim(spec.model);
  detail::require_cap(d, opts.max_dim, "distant same-label search");

  PreparedModel prep(spec.model);
  Output base = prep.eval(spec.x_orig);
  uint64_t total = uint64_t(1) << d;
  size_t best_dist = 0;
  std::optional<BinaryInstance> best_x;
  std::optional<Delta> best_delta;
  for (uint64_t code = 0; code < total; ++code) {
    BinaryInstance x = BinaryInstance::from_index(code, d);
    if (!(prep.eval(x) == base)) continue;
    size_t dist = hamming_distance(spec.x_orig, x);
    if (!best_x || dist > best_dist) {
      best_dist = dist;
      best_x = std::move(x);
      best_delta.reset();
    } else if (dist == best_dist) {
      Delta cand = delta_between(spec.x_orig, x);
      if (!best_delta) best_delta = delta_between(spec.x_orig, *best_x);
      if (Delta::lex_less(cand, *best_delta)) {
        best_x = std::move(x);
        best_delta = std::move(cand);
      }
    }
  }
  Solution sol;
  sol.certificate = detail::exhaustive_certificate(d);
  // x_orig itself always qualifies, so a witness always exists.
  if (!best_x) throw InvariantViolation("no same-label point found, not even the origin");
  sol.objective = Rational(static_cast<uint64_t>(best_dist));
  sol.witness_instance = std::move(best_x);
  sol.feasible = *sol.objective >= k;
  return sol;
}

inline Solution solve(const ProblemSpec& spec, const SolverOptions& opts = {}) {
  switch (spec.kind) {
    case ProblemKind::classic_cf: return solve_classic_cf(spec, opts);
    case ProblemKind::wachter: return solve_wachter(spec, opts);
    case ProblemKind::mcr: return solve_mcr(spec, opts);
    case ProblemKind::plausible_mcr: return solve_plausible_mcr(spec, opts);
    case ProblemKind::robust_cf: return solve_robust_cf(spec, opts);
    case ProblemKind::msr: return solve_msr(spec, opts);
    case ProblemKind::plausible_msr: return solve_plausible_msr(spec, opts);
    case ProblemKind::mca: return solve_mca(spec, opts);
  }
  throw std::logic_error("unhandled problem kind");
}

// ===========================================================================
// independent witness verification
// ===========================================================================

// Re-checks every constraint of the spec against the solution's witness.
// Infeasible solutions pass vacuously (there is nothing to re-check).
inline bool verify_solution(const ProblemSpec& spec, const Solution& sol,
                            const SolverOptions& opts = {}) {
  if (!sol.feasible) return true;
  switch (spec.kind) {
    case ProblemKind::classic_cf:
    case ProblemKind::mcr:
    case ProblemKind::robust_cf:
    case ProblemKind::plausible_mcr: {
      if (!sol.witness_delta || !sol.objective) return false;
      BinaryInstance x = apply_delta(spec.x_orig, *sol.witness_delta);
      if (spec.cost.of(*sol.witness_delta) != *sol.objective) return false;
      if (!(evaluate(spec.model, x) == *spec.target)) return false;
      if (spec.kind == ProblemKind::robust_cf)
        for (const Model& m : spec.model_set)
          if (!(evaluate(m, x) == *spec.target)) return false;
      if (spec.kind == ProblemKind::plausible_mcr &&
          evaluate(*spec.pi, x).label_value() != 1)
        return false;
      if ((spec.kind == ProblemKind::mcr || spec.kind == ProblemKind::plausible_mcr) &&
          *sol.objective > *spec.k)
        return false;
      return true;
    }
    case ProblemKind::wachter: {
      if (!sol.witness_delta || !sol.objective) return false;
      BinaryInstance x = apply_delta(spec.x_orig, *sol.witness_delta);
      Rational diff = evaluate(spec.model, x).numeric() - spec.target->numeric();
      return diff * diff + *spec.lambda * spec.cost.of(*sol.witness_delta) == *sol.objective;
    }
    case ProblemKind::msr:
    case ProblemKind::plausible_msr: {
      if (!sol.witness_partial || !sol.objective) return false;
      std::vector<uint32_t> subset;
      for (uint32_t i = 0; i < sol.witness_partial->dim(); ++i)
        if (sol.witness_partial->is_set(i)) {
          if (sol.witness_partial->bits[i] != static_cast<int8_t>(spec.x_orig[i])) return false;
          subset.push_back(i);
        }
      if (Rational(static_cast<uint64_t>(subset.size())) != *sol.objective) return false;
      if (*sol.objective > *spec.k) return false;
      if (spec.kind == ProblemKind::plausible_msr &&
          evaluate(*spec.pi, sol.witness_partial->complete_zero()).label_value() != 1)
        return false;
      return check_sufficiency(spec.model, spec.x_orig, subset, opts);
    }
    case ProblemKind::mca: {
      if (!sol.witness_instance || !sol.objective) return false;
      if (!(evaluate(spec.model, *sol.witness_instance) == evaluate(spec.model, spec.x_orig)))
        return false;
      Rational dist(
          static_cast<uint64_t>(hamming_distance(spec.x_orig, *sol.witness_instance)));
      return dist == *sol.objective && dist >= *spec.k;
    }
  }
  return false;
}

// ===========================================================================
// counterfactual enumeration (oracle-grade, streaming)
// ===========================================================================

// Calls `sink(delta, cost)` for every input attaining the target, in
// ascending input-code order (variable 0 = least significant bit).
template <typename Sink>
void enumerate_counterfactuals(const Model& model, const BinaryInstance& x_orig,
                               const Output& target, const CostFunction& cost, Sink sink,
                               const SolverOptions& opts = {}) {
  uint32_t d = input_dim(model);
  if (x_orig.dim() != d) throw DimensionMismatch("input has wrong dimension");
  detail::require_cap(d, opts.max_dim, "counterfactual enumeration");
  PreparedModel prep(model);
  uint64_t total = uint64_t(1) << d;
  for (uint64_t code = 0; code < total; ++code) {
    BinaryInstance x = BinaryInstance::from_index(code, d);
    if (prep.eval(x) == target) {
      Delta dl = delta_between(x_orig, x);
      Rational c = cost.of(dl);
      sink(dl, c);
    }
  }
}

}  // namespace cfx
