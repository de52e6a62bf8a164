#pragma once

// Seeded random generators for instances, models, cost functions, and
// restricted 3-CNF formulas. Everything here is deterministic given the
// seed: the engine is the standardized mt19937_64 and all bounded draws use
// explicit rejection sampling (std::uniform_int_distribution is
// implementation-defined and would break cross-run reproducibility).

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cfxlab/bits.hpp"
#include "cfxlab/cnf.hpp"
#include "cfxlab/cost.hpp"
#include "cfxlab/models.hpp"
#include "cfxlab/rational.hpp"

namespace cfx {

// splitmix64; used to derive independent stream seeds from a master seed.
inline uint64_t derive_seed(uint64_t master, uint64_t stream) {
  uint64_t z = master + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next() { return eng_(); }

  // Uniform in [0, n), unbiased.
  uint64_t below(uint64_t n) {
    if (n == 0) throw std::invalid_argument("below(0)");
    uint64_t threshold = (0 - n) % n;
    while (true) {
      uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  // Uniform integer in [lo, hi], inclusive.
  int64_t range(int64_t lo, int64_t hi) {
    if (lo > hi) throw std::invalid_argument("empty range");
    return lo + static_cast<int64_t>(below(static_cast<uint64_t>(hi - lo) + 1));
  }

  bool coin() { return next() & 1u; }

  // True with probability num/den.
  bool chance(uint64_t num, uint64_t den) { return below(den) < num; }

 private:
  std::mt19937_64 eng_;
};

// ===========================================================================
// instances and costs
// ===========================================================================

inline BinaryInstance random_instance(Rng& rng, uint32_t d) {
  std::vector<uint8_t> bits(d);
  for (uint32_t i = 0; i < d; ++i) bits[i] = static_cast<uint8_t>(rng.coin());
  return BinaryInstance(std::move(bits));
}

// Flip-count cost, or (1 in 3) positive integer/half-integer weights.
inline CostFunction random_cost(Rng& rng, uint32_t d) {
  if (!rng.chance(1, 3)) return CostFunction::hamming(d);
  std::vector<Rational> w(d);
  for (uint32_t i = 0; i < d; ++i) {
    w[i] = Rational(rng.range(1, 8));
    if (rng.chance(1, 4)) w[i] /= 2;
  }
  return CostFunction::weighted_l1(std::move(w));
}

// ===========================================================================
// models (integer weights in [-8, 8]; occasional half-integers to exercise
// the rational paths)
// ===========================================================================

inline Rational random_weight(Rng& rng, bool allow_halves = true) {
  Rational w(rng.range(-8, 8));
  if (allow_halves && rng.chance(1, 4)) w /= 2;
  return w;
}

inline Perceptron random_perceptron(Rng& rng, uint32_t d) {
  Perceptron p;
  p.dim = d;
  p.weights.resize(d);
  for (uint32_t i = 0; i < d; ++i) p.weights[i] = random_weight(rng);
  p.bias = random_weight(rng);
  return p;
}

namespace detail {

// Random layered diagram: levels test distinct variables in a fixed order,
// children always point strictly deeper, so every path is read-once.
inline Diagram random_layered_diagram(Rng& rng, uint32_t d, bool binary_leaves) {
  uint32_t depth = static_cast<uint32_t>(rng.range(1, std::min<int64_t>(d, 5)));
  std::vector<uint32_t> vars(d);
  for (uint32_t i = 0; i < d; ++i) vars[i] = i;
  for (uint32_t i = d; i > 1; --i) std::swap(vars[i - 1], vars[rng.below(i)]);
  vars.resize(depth);

  Diagram g;
  int32_t next_id = 0;
  std::vector<std::vector<int32_t>> level_ids(depth);
  for (uint32_t lv = 0; lv < depth; ++lv) {
    uint32_t width = lv == 0 ? 1 : static_cast<uint32_t>(rng.range(1, 3));
    for (uint32_t j = 0; j < width; ++j) level_ids[lv].push_back(next_id++);
  }
  std::vector<int32_t> leaf_ids;
  uint32_t leaf_count = binary_leaves ? 2 : static_cast<uint32_t>(rng.range(2, 4));
  for (uint32_t j = 0; j < leaf_count; ++j) leaf_ids.push_back(next_id++);

  for (uint32_t lv = 0; lv < depth; ++lv) {
    for (int32_t id : level_ids[lv]) {
      DiagramNode n;
      n.id = id;
      n.var = vars[lv];
      auto pick_child = [&]() -> int32_t {
        // Deeper level node, or a leaf.
        std::vector<int32_t> pool = leaf_ids;
        for (uint32_t dl = lv + 1; dl < depth; ++dl)
          for (int32_t cid : level_ids[dl]) pool.push_back(cid);
        return pool[rng.below(pool.size())];
      };
      n.lo = pick_child();
      n.hi = pick_child();
      g.nodes.push_back(n);
    }
  }
  for (uint32_t j = 0; j < leaf_count; ++j) {
    DiagramLeaf l;
    l.id = leaf_ids[j];
    if (binary_leaves)
      l.value = Rational(j % 2);
    else
      l.value = random_weight(rng);
    g.leaves.push_back(l);
  }
  g.root = level_ids[0][0];
  return g;
}

// Random proper tree with distinct variables along each path.
inline void random_tree_rec(Rng& rng, std::vector<uint32_t> avail, uint32_t depth_left,
                            bool binary_leaves, Diagram& g, int32_t& next_id, int32_t& out_id) {
  bool make_leaf = avail.empty() || depth_left == 0 || rng.chance(1, 3);
  if (make_leaf) {
    DiagramLeaf l;
    l.id = next_id++;
    l.value = binary_leaves ? Rational(rng.coin() ? 1 : 0) : random_weight(rng);
    g.leaves.push_back(l);
    out_id = l.id;
    return;
  }
  size_t pick = rng.below(avail.size());
  uint32_t var = avail[pick];
  avail.erase(avail.begin() + static_cast<ptrdiff_t>(pick));
  DiagramNode n;
  n.id = next_id++;
  n.var = var;
  size_t node_pos = g.nodes.size();
  g.nodes.push_back(n);  // placeholder; children filled below
  int32_t lo_id = 0, hi_id = 0;
  random_tree_rec(rng, avail, depth_left - 1, binary_leaves, g, next_id, lo_id);
  random_tree_rec(rng, avail, depth_left - 1, binary_leaves, g, next_id, hi_id);
  g.nodes[node_pos].lo = lo_id;
  g.nodes[node_pos].hi = hi_id;
  out_id = g.nodes[node_pos].id;
}

inline Diagram random_tree_diagram(Rng& rng, uint32_t d, bool binary_leaves) {
  Diagram g;
  int32_t next_id = 0;
  int32_t root = 0;
  std::vector<uint32_t> avail(d);
  for (uint32_t i = 0; i < d; ++i) avail[i] = i;
  uint32_t depth = static_cast<uint32_t>(rng.range(1, std::min<int64_t>(d, 4)));
  // Force at least one test at the root so the tree is not trivially constant.
  size_t pick = rng.below(avail.size());
  uint32_t var = avail[pick];
  avail.erase(avail.begin() + static_cast<ptrdiff_t>(pick));
  DiagramNode n;
  n.id = next_id++;
  n.var = var;
  g.nodes.push_back(n);
  int32_t lo_id = 0, hi_id = 0;
  random_tree_rec(rng, avail, depth - 1, binary_leaves, g, next_id, lo_id);
  random_tree_rec(rng, avail, depth - 1, binary_leaves, g, next_id, hi_id);
  g.nodes[0].lo = lo_id;
  g.nodes[0].hi = hi_id;
  g.root = root;
  return g;
}

}  // namespace detail

inline Fbdd random_fbdd(Rng& rng, uint32_t d) {
  Fbdd m;
  m.dim = d;
  m.graph = detail::random_layered_diagram(rng, d, /*binary_leaves=*/true);
  return m;
}

inline DecisionTree random_decision_tree(Rng& rng, uint32_t d) {
  DecisionTree m;
  m.dim = d;
  m.graph = detail::random_tree_diagram(rng, d, /*binary_leaves=*/true);
  return m;
}

inline DecisionList random_decision_list(Rng& rng, uint32_t d) {
  DecisionList m;
  m.dim = d;
  uint32_t rules = static_cast<uint32_t>(rng.range(1, 4));
  for (uint32_t r = 0; r < rules; ++r) {
    DecisionRule rule;
    uint32_t tests = static_cast<uint32_t>(rng.range(1, std::min<int64_t>(d, 3)));
    std::vector<uint32_t> vars(d);
    for (uint32_t i = 0; i < d; ++i) vars[i] = i;
    for (uint32_t i = d; i > 1; --i) std::swap(vars[i - 1], vars[rng.below(i)]);
    for (uint32_t t = 0; t < tests; ++t)
      rule.tests.push_back({vars[t], static_cast<uint8_t>(rng.coin())});
    rule.label = static_cast<uint8_t>(rng.coin());
    m.rules.push_back(std::move(rule));
  }
  m.default_label = static_cast<uint8_t>(rng.coin());
  return m;
}

inline ReluNetwork random_relu(Rng& rng, uint32_t d, bool classifier) {
  ReluNetwork m;
  m.dim = d;
  m.classifier = classifier;
  uint32_t layers = static_cast<uint32_t>(rng.range(1, 3));
  size_t in_w = d;
  for (uint32_t li = 0; li < layers; ++li) {
    size_t out_w = (li + 1 == layers) ? 1 : static_cast<size_t>(rng.range(1, 4));
    ReluLayer L;
    L.weights.assign(out_w, std::vector<Rational>(in_w));
    L.bias.resize(out_w);
    for (size_t r = 0; r < out_w; ++r) {
      for (size_t c = 0; c < in_w; ++c) L.weights[r][c] = random_weight(rng);
      L.bias[r] = random_weight(rng);
    }
    m.layers.push_back(std::move(L));
    in_w = out_w;
  }
  return m;
}

inline KnnRegressor random_knn(Rng& rng, uint32_t d) {
  KnnRegressor m;
  m.dim = d;
  uint32_t n = static_cast<uint32_t>(rng.range(3, 8));
  m.vectors.resize(n);
  m.labels.resize(n);
  for (uint32_t i = 0; i < n; ++i) {
    m.vectors[i].resize(d);
    for (uint32_t j = 0; j < d; ++j) {
      m.vectors[i][j] = Rational(rng.coin() ? 1 : 0);
      if (rng.chance(1, 8)) m.vectors[i][j] = Rational(1) / 2;
    }
    m.labels[i] = Rational(rng.range(-8, 8));
  }
  m.k = static_cast<uint32_t>(rng.range(1, n));
  return m;
}

inline AdditiveTreeModel random_atm(Rng& rng, uint32_t d) {
  AdditiveTreeModel m;
  m.dim = d;
  uint32_t trees = static_cast<uint32_t>(rng.range(1, 4));
  for (uint32_t t = 0; t < trees; ++t)
    m.trees.push_back(detail::random_tree_diagram(rng, d, /*binary_leaves=*/false));
  return m;
}

// Ensemble of random ReLU regressors with (possibly) unequal depths.
inline Ensemble random_relu_ensemble(Rng& rng, uint32_t d) {
  Ensemble e;
  e.aggregation = Ensemble::Aggregation::mean;
  uint32_t members = static_cast<uint32_t>(rng.range(2, 4));
  for (uint32_t i = 0; i < members; ++i) e.members.push_back(random_relu(rng, d, false));
  return e;
}

inline Ensemble random_classifier_ensemble(Rng& rng, uint32_t d) {
  Ensemble e;
  e.aggregation = Ensemble::Aggregation::majority;
  uint32_t members = static_cast<uint32_t>(rng.range(2, 4)) | 1u;  // odd helps avoid ties
  for (uint32_t i = 0; i < members; ++i) {
    switch (rng.below(3)) {
      case 0: e.members.push_back(random_perceptron(rng, d)); break;
      case 1: e.members.push_back(random_decision_tree(rng, d)); break;
      default: e.members.push_back(random_fbdd(rng, d)); break;
    }
  }
  // Keep the family homogeneous: redo members with a single family.
  ModelKind k0 = e.members.front().kind();
  for (Model& m : e.members)
    if (m.kind() != k0) {
      switch (k0) {
        case ModelKind::perceptron: m = random_perceptron(rng, d); break;
        case ModelKind::dt: m = random_decision_tree(rng, d); break;
        default: m = random_fbdd(rng, d); break;
      }
    }
  return e;
}

// A random classifier from any classifier family.
inline Model random_classifier(Rng& rng, uint32_t d) {
  switch (rng.below(6)) {
    case 0: return random_perceptron(rng, d);
    case 1: return random_fbdd(rng, d);
    case 2: return random_decision_tree(rng, d);
    case 3: return random_decision_list(rng, d);
    case 4: return random_relu(rng, d, true);
    default: return random_classifier_ensemble(rng, d);
  }
}

// A random regressor from any regressor family.
inline Model random_regressor(Rng& rng, uint32_t d) {
  switch (rng.below(3)) {
    case 0: return random_relu(rng, d, false);
    case 1: return random_knn(rng, d);
    default: return random_atm(rng, d);
  }
}

// ===========================================================================
// formulas
// ===========================================================================

// Random restricted 3-CNF: every clause gets three distinct variables
// (partial Fisher-Yates) and independent random signs.
inline CnfFormula random_cnf(Rng& rng, uint32_t num_vars, uint32_t num_clauses) {
  if (num_vars < 3) throw std::invalid_argument("restricted 3-CNF needs at least 3 variables");
  if (num_clauses < 1) throw std::invalid_argument("formula needs at least one clause");
  CnfFormula f;
  f.num_vars = num_vars;
  std::vector<uint32_t> vars(num_vars);
  for (uint32_t i = 0; i < num_vars; ++i) vars[i] = i;
  for (uint32_t ci = 0; ci < num_clauses; ++ci) {
    for (uint32_t j = 0; j < 3; ++j) {
      uint32_t pick = j + static_cast<uint32_t>(rng.below(num_vars - j));
      std::swap(vars[j], vars[pick]);
    }
    Clause c;
    for (uint32_t j = 0; j < 3; ++j) c.lits[j] = {vars[j], rng.coin()};
    f.clauses.push_back(c);
  }
  return f;
}

}  // namespace cfx
