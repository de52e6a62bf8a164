#pragma once

// The eight model families, exact evaluation, structural validation, sound
// output bounds over partial inputs, prepared (accelerated) evaluators, and
// ensemble flattening.
//
// All families consume binary feature vectors and produce either a class
// label in {0,1} or an exact rational. Classifier thresholds are strict:
// class 1 iff score > 0. Majority votes break ties toward class 0.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "cfxlab/bits.hpp"
#include "cfxlab/rational.hpp"

namespace cfx {

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ===========================================================================
// model output
// ===========================================================================

struct Output {
  bool is_label = false;
  Rational value;  // 0/1 for labels

  static Output label(int l) {
    if (l != 0 && l != 1) throw EvalError("class label must be 0 or 1");
    Output o;
    o.is_label = true;
    o.value = l;
    return o;
  }
  static Output number(Rational v) {
    Output o;
    o.is_label = false;
    o.value = std::move(v);
    return o;
  }

  int label_value() const {
    if (!is_label) throw EvalError("output is not a class label");
    return value == 1 ? 1 : 0;
  }
  // Numeric view: labels read as the rationals 0/1.
  const Rational& numeric() const { return value; }

  bool operator==(const Output& o) const { return is_label == o.is_label && value == o.value; }
  bool operator!=(const Output& o) const { return !(*this == o); }
};

// ===========================================================================
// branching diagrams (shared by FBDD, decision trees, additive trees)
// ===========================================================================

// Inner node: tests one variable, branches to the child whose id matches the
// bit value. Ids live in one shared space covering nodes and leaves.
struct DiagramNode {
  int32_t id = 0;
  uint32_t var = 0;
  int32_t lo = 0;  // child id when the tested bit is 0
  int32_t hi = 0;  // child id when the tested bit is 1

  bool operator==(const DiagramNode&) const = default;
};

struct DiagramLeaf {
  int32_t id = 0;
  Rational value;

  bool operator==(const DiagramLeaf&) const = default;
};

struct Diagram {
  int32_t root = 0;
  std::vector<DiagramNode> nodes;
  std::vector<DiagramLeaf> leaves;

  bool operator==(const Diagram&) const = default;
};

namespace detail {

// Id -> position maps for one diagram. Duplicate ids are recorded rather
// than rejected so validation can report them.
struct DiagramIndex {
  std::unordered_map<int32_t, size_t> node_at;
  std::unordered_map<int32_t, size_t> leaf_at;
  std::vector<int32_t> duplicate_ids;

  explicit DiagramIndex(const Diagram& g) {
    for (size_t i = 0; i < g.nodes.size(); ++i)
      if (!node_at.emplace(g.nodes[i].id, i).second) duplicate_ids.push_back(g.nodes[i].id);
    for (size_t i = 0; i < g.leaves.size(); ++i) {
      if (node_at.count(g.leaves[i].id) || !leaf_at.emplace(g.leaves[i].id, i).second)
        duplicate_ids.push_back(g.leaves[i].id);
    }
  }
};

inline const Rational& eval_diagram(const Diagram& g, const DiagramIndex& ix,
                                    const BinaryInstance& x) {
  int32_t cur = g.root;
  for (size_t steps = 0; steps <= g.nodes.size(); ++steps) {
    if (auto it = ix.leaf_at.find(cur); it != ix.leaf_at.end()) return g.leaves[it->second].value;
    auto it = ix.node_at.find(cur);
    if (it == ix.node_at.end()) throw EvalError("diagram references missing id");
    const DiagramNode& n = g.nodes[it->second];
    if (n.var >= x.dim()) throw EvalError("diagram tests variable beyond input dimension");
    cur = x[n.var] ? n.hi : n.lo;
  }
  throw EvalError("diagram evaluation did not reach a leaf (cycle?)");
}

// min/max over leaves reachable under a partial assignment; memoized per id.
inline Interval diagram_interval(const Diagram& g, const DiagramIndex& ix,
                                 const PartialInstance& box, int32_t id,
                                 std::unordered_map<int32_t, Interval>& memo) {
  if (auto m = memo.find(id); m != memo.end()) return m->second;
  Interval result;
  if (auto it = ix.leaf_at.find(id); it != ix.leaf_at.end()) {
    result = Interval::point(g.leaves[it->second].value);
  } else {
    auto it2 = ix.node_at.find(id);
    if (it2 == ix.node_at.end()) throw EvalError("diagram references missing id");
    const DiagramNode& n = g.nodes[it2->second];
    if (n.var >= box.dim()) throw EvalError("diagram tests variable beyond input dimension");
    if (box.bits[n.var] == 0) {
      result = diagram_interval(g, ix, box, n.lo, memo);
    } else if (box.bits[n.var] == 1) {
      result = diagram_interval(g, ix, box, n.hi, memo);
    } else {
      Interval a = diagram_interval(g, ix, box, n.lo, memo);
      Interval b = diagram_interval(g, ix, box, n.hi, memo);
      result = {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
    }
  }
  memo.emplace(id, result);
  return result;
}

}  // namespace detail

// ===========================================================================
// model families
// ===========================================================================

// Free binary decision diagram: rooted DAG, read-once per path, 0/1 leaves.
struct Fbdd {
  uint32_t dim = 0;
  Diagram graph;

  bool operator==(const Fbdd&) const = default;
};

// Decision tree: an Fbdd whose graph is a tree (every node one parent).
struct DecisionTree {
  uint32_t dim = 0;
  Diagram graph;

  bool operator==(const DecisionTree&) const = default;
};

struct LiteralTest {
  uint32_t var = 0;
  uint8_t value = 0;  // required bit value

  bool operator==(const LiteralTest&) const = default;
};

struct DecisionRule {
  std::vector<LiteralTest> tests;  // conjunction
  uint8_t label = 0;

  bool operator==(const DecisionRule&) const = default;
};

// Ordered IF-THEN rules; first matching rule fires, else the default label.
struct DecisionList {
  uint32_t dim = 0;
  std::vector<DecisionRule> rules;
  uint8_t default_label = 0;

  bool operator==(const DecisionList&) const = default;
};

// Linear classifier: class 1 iff w.x + b > 0.
struct Perceptron {
  uint32_t dim = 0;
  std::vector<Rational> weights;
  Rational bias;

  bool operator==(const Perceptron&) const = default;
};

struct ReluLayer {
  std::vector<std::vector<Rational>> weights;  // [out][in]
  std::vector<Rational> bias;                  // [out]

  size_t out_width() const { return weights.size(); }
  size_t in_width() const { return weights.empty() ? 0 : weights[0].size(); }

  bool operator==(const ReluLayer&) const = default;
};

// Fully-connected network; rectifier after every layer except the last,
// identity on the last. Output width 1: a rational regressor, or a
// classifier thresholding the final score at > 0.
struct ReluNetwork {
  uint32_t dim = 0;
  std::vector<ReluLayer> layers;
  bool classifier = false;

  bool operator==(const ReluNetwork&) const = default;
};

// k-nearest-neighbor regressor under squared Euclidean distance. Stored
// points may have rational coordinates; queries are binary. If several
// points tie at the k-th smallest distance, the lowest-indexed ones are
// included. Output: mean label of the chosen k.
struct KnnRegressor {
  uint32_t dim = 0;
  uint32_t k = 1;
  std::vector<std::vector<Rational>> vectors;
  std::vector<Rational> labels;

  bool operator==(const KnnRegressor&) const = default;
};

// Additive tree model: mean of regression-tree outputs (rational leaves).
struct AdditiveTreeModel {
  uint32_t dim = 0;
  std::vector<Diagram> trees;

  bool operator==(const AdditiveTreeModel&) const = default;
};

struct Model;

// Homogeneous collection of models: majority vote over classifiers (ties go
// to class 0) or mean of regressor outputs.
struct Ensemble {
  enum class Aggregation { majority, mean };

  Aggregation aggregation = Aggregation::majority;
  std::vector<Model> members;
};

enum class ModelKind { fbdd, dt, dl, perceptron, relu, knn, atm, ensemble };

inline const char* kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::fbdd: return "fbdd";
    case ModelKind::dt: return "dt";
    case ModelKind::dl: return "dl";
    case ModelKind::perceptron: return "perceptron";
    case ModelKind::relu: return "relu";
    case ModelKind::knn: return "knn";
    case ModelKind::atm: return "atm";
    case ModelKind::ensemble: return "ensemble";
  }
  return "?";
}

struct Model {
  using Variant = std::variant<Fbdd, DecisionTree, DecisionList, Perceptron, ReluNetwork,
                               KnnRegressor, AdditiveTreeModel, Ensemble>;
  Variant node;

  Model() : node(Fbdd{}) {}
  template <typename T,
            typename = std::enable_if_t<std::is_constructible_v<Variant, T&&>>>
  Model(T&& t) : node(std::forward<T>(t)) {}  // NOLINT: implicit by design

  ModelKind kind() const { return static_cast<ModelKind>(node.index()); }

  template <typename T>
  const T& as() const {
    return std::get<T>(node);
  }
  template <typename T>
  bool is() const {
    return std::holds_alternative<T>(node);
  }
};

bool operator==(const Model& a, const Model& b);

inline bool operator==(const Ensemble& a, const Ensemble& b) {
  return a.aggregation == b.aggregation && a.members == b.members;
}
inline bool operator==(const Model& a, const Model& b) { return a.node == b.node; }
inline bool operator!=(const Model& a, const Model& b) { return !(a == b); }

// ===========================================================================
// basic queries
// ===========================================================================

inline uint32_t input_dim(const Model& m) {
  return std::visit(
      [](const auto& v) -> uint32_t {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Ensemble>)
          return v.members.empty() ? 0 : input_dim(v.members.front());
        else
          return v.dim;
      },
      m.node);
}

inline bool is_classifier(const Model& m) {
  return std::visit(
      [](const auto& v) -> bool {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Fbdd> || std::is_same_v<T, DecisionTree> ||
                      std::is_same_v<T, DecisionList> || std::is_same_v<T, Perceptron>)
          return true;
        else if constexpr (std::is_same_v<T, ReluNetwork>)
          return v.classifier;
        else if constexpr (std::is_same_v<T, KnnRegressor> ||
                           std::is_same_v<T, AdditiveTreeModel>)
          return false;
        else
          return v.aggregation == Ensemble::Aggregation::majority;
      },
      m.node);
}

// ===========================================================================
// evaluation
// ===========================================================================

Output evaluate(const Model& m, const BinaryInstance& x);

namespace detail {

inline void require_dim(uint32_t need, const BinaryInstance& x) {
  if (x.dim() != need) throw DimensionMismatch("input has wrong dimension");
}

inline Rational perceptron_score(const Perceptron& p, const BinaryInstance& x) {
  Rational s = p.bias;
  for (size_t i = 0; i < p.weights.size(); ++i)
    if (x[i]) s += p.weights[i];
  return s;
}

inline std::vector<Rational> relu_forward(const ReluNetwork& n, const BinaryInstance& x) {
  std::vector<Rational> act(n.dim);
  for (size_t i = 0; i < act.size(); ++i) act[i] = x[i];
  for (size_t li = 0; li < n.layers.size(); ++li) {
    const ReluLayer& L = n.layers[li];
    if (L.in_width() != act.size()) throw EvalError("layer width mismatch");
    std::vector<Rational> next(L.out_width());
    for (size_t r = 0; r < L.out_width(); ++r) {
      Rational s = L.bias[r];
      for (size_t c = 0; c < act.size(); ++c)
        if (act[c] != 0) s += L.weights[r][c] * act[c];
      if (li + 1 < n.layers.size() && s < 0) s = 0;  // rectifier on hidden layers
      next[r] = std::move(s);
    }
    act = std::move(next);
  }
  return act;
}

inline Rational knn_average(const KnnRegressor& m, std::vector<std::pair<Rational, size_t>>& d) {
  // d holds (squared distance, index); choose the k smallest under
  // (distance, index) order, then average their labels.
  auto cmp = [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : a.second < b.second;
  };
  size_t k = m.k;
  std::nth_element(d.begin(), d.begin() + (k - 1), d.end(), cmp);
  Rational sum = 0;
  for (size_t i = 0; i < k; ++i) sum += m.labels[d[i].second];
  return sum / k;
}

}  // namespace detail

inline Output evaluate(const Fbdd& m, const BinaryInstance& x) {
  detail::require_dim(m.dim, x);
  detail::DiagramIndex ix(m.graph);
  const Rational& v = detail::eval_diagram(m.graph, ix, x);
  if (v != 0 && v != 1) throw EvalError("classifier diagram has non-binary leaf");
  return Output::label(v == 1 ? 1 : 0);
}

inline Output evaluate(const DecisionTree& m, const BinaryInstance& x) {
  detail::require_dim(m.dim, x);
  detail::DiagramIndex ix(m.graph);
  const Rational& v = detail::eval_diagram(m.graph, ix, x);
  if (v != 0 && v != 1) throw EvalError("classifier diagram has non-binary leaf");
  return Output::label(v == 1 ? 1 : 0);
}

inline Output evaluate(const DecisionList& m, const BinaryInstance& x) {
  detail::require_dim(m.dim, x);
  for (const DecisionRule& r : m.rules) {
    bool match = true;
    for (const LiteralTest& t : r.tests) {
      if (t.var >= x.dim()) throw EvalError("rule tests variable beyond input dimension");
      if (x[t.var] != t.value) {
        match = false;
        break;
      }
    }
    if (match) return Output::label(r.label);
  }
  return Output::label(m.default_label);
}

inline Output evaluate(const Perceptron& m, const BinaryInstance& x) {
  detail::require_dim(m.dim, x);
  return Output::label(detail::perceptron_score(m, x) > 0 ? 1 : 0);
}

inline Output evaluate(const ReluNetwork& m, const BinaryInstance& x) {
  detail::require_dim(m.dim, x);
  std::vector<Rational> out = detail::relu_forward(m, x);
  if (out.size() != 1) throw EvalError("network output width must be 1");
  if (m.classifier) return Output::label(out[0] > 0 ? 1 : 0);
  return Output::number(std::move(out[0]));
}

inline Output evaluate(const KnnRegressor& m, const BinaryInstance& x) {
  detail::require_dim(m.dim, x);
  std::vector<std::pair<Rational, size_t>> d(m.vectors.size());
  for (size_t i = 0; i < m.vectors.size(); ++i) {
    Rational s = 0;
    for (size_t j = 0; j < m.dim; ++j) {
      Rational diff = m.vectors[i][j] - x[j];
      s += diff * diff;
    }
    d[i] = {std::move(s), i};
  }
  return Output::number(detail::knn_average(m, d));
}

inline Output evaluate(const AdditiveTreeModel& m, const BinaryInstance& x) {
  detail::require_dim(m.dim, x);
  Rational sum = 0;
  for (const Diagram& t : m.trees) {
    detail::DiagramIndex ix(t);
    sum += detail::eval_diagram(t, ix, x);
  }
  return Output::number(sum / Rational(m.trees.size()));
}

inline Output evaluate(const Ensemble& m, const BinaryInstance& x) {
  if (m.members.empty()) throw EvalError("empty ensemble");
  if (m.aggregation == Ensemble::Aggregation::majority) {
    size_t ones = 0;
    for (const Model& mem : m.members) ones += evaluate(mem, x).label_value();
    return Output::label(2 * ones > m.members.size() ? 1 : 0);
  }
  Rational sum = 0;
  for (const Model& mem : m.members) sum += evaluate(mem, x).numeric();
  return Output::number(sum / Rational(m.members.size()));
}

inline Output evaluate(const Model& m, const BinaryInstance& x) {
  return std::visit([&](const auto& v) { return evaluate(v, x); }, m.node);
}

// ===========================================================================
// validation
// ===========================================================================

struct ValidationReport {
  std::vector<std::string> problems;

  bool ok() const { return problems.empty(); }
  void add(std::string p) { problems.push_back(std::move(p)); }
};

ValidationReport validate(const Model& m);

namespace detail {

// Checks shared by every diagram: ids resolve, DAG (no cycle), every path
// reaches a leaf, read-once, variables within dimension.
// `leaf_check`: 0 = any rational leaf, 1 = leaves must be 0/1.
inline void validate_diagram(const Diagram& g, uint32_t dim, bool binary_leaves, bool tree,
                             const std::string& where, ValidationReport& rep) {
  DiagramIndex ix(g);
  for (int32_t id : ix.duplicate_ids) rep.add(where + "duplicate id " + std::to_string(id));
  if (!ix.duplicate_ids.empty()) return;
  if (g.leaves.empty()) {
    rep.add(where + "diagram has no leaves");
    return;
  }
  if (!ix.node_at.count(g.root) && !ix.leaf_at.count(g.root)) {
    rep.add(where + "root id " + std::to_string(g.root) + " does not exist");
    return;
  }
  for (const DiagramNode& n : g.nodes) {
    if (n.var >= dim)
      rep.add(where + "node " + std::to_string(n.id) + " tests variable " + std::to_string(n.var) +
              " beyond dimension " + std::to_string(dim));
    for (int32_t ch : {n.lo, n.hi})
      if (!ix.node_at.count(ch) && !ix.leaf_at.count(ch))
        rep.add(where + "node " + std::to_string(n.id) + " has dangling child " +
                std::to_string(ch));
  }
  if (binary_leaves)
    for (const DiagramLeaf& l : g.leaves)
      if (l.value != 0 && l.value != 1)
        rep.add(where + "leaf " + std::to_string(l.id) + " is not a 0/1 class label");
  if (!rep.ok()) return;

  // Cycle detection (iterative coloring over reachable nodes).
  enum : uint8_t { white, grey, black };
  std::unordered_map<int32_t, uint8_t> color;
  {
    std::vector<std::pair<int32_t, int>> stack{{g.root, 0}};
    while (!stack.empty()) {
      auto& [id, phase] = stack.back();
      if (ix.leaf_at.count(id)) {
        stack.pop_back();
        continue;
      }
      const DiagramNode& n = g.nodes[ix.node_at.at(id)];
      if (phase == 0) {
        uint8_t& c = color[id];
        if (c == grey) {
          rep.add(where + "cycle through id " + std::to_string(id));
          return;
        }
        if (c == black) {
          stack.pop_back();
          continue;
        }
        c = grey;
        phase = 1;
        stack.push_back({n.lo, 0});
      } else if (phase == 1) {
        phase = 2;
        stack.push_back({n.hi, 0});
      } else {
        color[id] = black;
        stack.pop_back();
      }
    }
  }

  // Read-once: a node's variable must not be testable again below it.
  // vars_below[id] = set of variables tested anywhere under id.
  {
    std::unordered_map<int32_t, std::vector<bool>> vars_below;
    // Process nodes in reverse topological order via repeated passes
    // (diagram sizes here are small; quadratic worst case is fine).
    std::vector<int32_t> order;
    std::unordered_set<int32_t> done;
    bool progress = true;
    while (progress) {
      progress = false;
      for (const DiagramNode& n : g.nodes) {
        if (done.count(n.id)) continue;
        auto ready = [&](int32_t ch) { return ix.leaf_at.count(ch) || done.count(ch); };
        if (ready(n.lo) && ready(n.hi)) {
          done.insert(n.id);
          order.push_back(n.id);
          progress = true;
        }
      }
    }
    for (int32_t id : order) {
      const DiagramNode& n = g.nodes[ix.node_at.at(id)];
      std::vector<bool> below(dim, false);
      for (int32_t ch : {n.lo, n.hi}) {
        auto it = vars_below.find(ch);
        if (it != vars_below.end())
          for (uint32_t v = 0; v < dim; ++v)
            if (it->second[v]) below[v] = true;
      }
      if (n.var < dim && below[n.var])
        rep.add(where + "read-once violated: variable " + std::to_string(n.var) +
                " re-tested below node " + std::to_string(id));
      if (n.var < dim) below[n.var] = true;
      vars_below.emplace(id, std::move(below));
    }
  }

  if (tree) {
    // Every reachable id except the root has exactly one parent.
    std::unordered_map<int32_t, int> indeg;
    for (const DiagramNode& n : g.nodes) {
      ++indeg[n.lo];
      ++indeg[n.hi];
    }
    for (const auto& [id, deg] : indeg)
      if (deg > 1) rep.add(where + "id " + std::to_string(id) + " has " + std::to_string(deg) +
                           " parents (not a tree)");
    if (indeg.count(g.root)) rep.add(where + "root has a parent (not a tree)");
  }
}

}  // namespace detail

inline ValidationReport validate(const Fbdd& m) {
  ValidationReport rep;
  if (m.dim == 0) rep.add("dimension must be positive");
  detail::validate_diagram(m.graph, m.dim, /*binary_leaves=*/true, /*tree=*/false, "", rep);
  return rep;
}

inline ValidationReport validate(const DecisionTree& m) {
  ValidationReport rep;
  if (m.dim == 0) rep.add("dimension must be positive");
  detail::validate_diagram(m.graph, m.dim, /*binary_leaves=*/true, /*tree=*/true, "", rep);
  return rep;
}

inline ValidationReport validate(const DecisionList& m) {
  ValidationReport rep;
  if (m.dim == 0) rep.add("dimension must be positive");
  if (m.default_label > 1) rep.add("default label must be 0 or 1");
  for (size_t ri = 0; ri < m.rules.size(); ++ri) {
    const DecisionRule& r = m.rules[ri];
    if (r.label > 1) rep.add("rule " + std::to_string(ri) + ": label must be 0 or 1");
    std::unordered_set<uint32_t> seen;
    for (const LiteralTest& t : r.tests) {
      if (t.var >= m.dim)
        rep.add("rule " + std::to_string(ri) + ": variable " + std::to_string(t.var) +
                " beyond dimension");
      if (t.value > 1) rep.add("rule " + std::to_string(ri) + ": test value must be 0 or 1");
      if (!seen.insert(t.var).second)
        rep.add("rule " + std::to_string(ri) + ": variable " + std::to_string(t.var) +
                " tested twice");
    }
  }
  return rep;
}

inline ValidationReport validate(const Perceptron& m) {
  ValidationReport rep;
  if (m.dim == 0) rep.add("dimension must be positive");
  if (m.weights.size() != m.dim)
    rep.add("weight count " + std::to_string(m.weights.size()) + " differs from dimension " +
            std::to_string(m.dim));
  return rep;
}

inline ValidationReport validate(const ReluNetwork& m) {
  ValidationReport rep;
  if (m.dim == 0) rep.add("dimension must be positive");
  if (m.layers.empty()) {
    rep.add("network needs at least one layer");
    return rep;
  }
  size_t width = m.dim;
  for (size_t li = 0; li < m.layers.size(); ++li) {
    const ReluLayer& L = m.layers[li];
    if (L.out_width() == 0) rep.add("layer " + std::to_string(li) + " has no rows");
    if (L.bias.size() != L.out_width())
      rep.add("layer " + std::to_string(li) + " bias width differs from row count");
    for (const auto& row : L.weights)
      if (row.size() != width) {
        rep.add("layer " + std::to_string(li) + " expects input width " + std::to_string(width) +
                " but a row has " + std::to_string(row.size()) + " weights");
        break;
      }
    width = L.out_width();
  }
  if (width != 1) rep.add("output layer must have width 1");
  return rep;
}

inline ValidationReport validate(const KnnRegressor& m) {
  ValidationReport rep;
  if (m.dim == 0) rep.add("dimension must be positive");
  if (m.vectors.empty()) rep.add("no stored vectors");
  if (m.k < 1) rep.add("k must be at least 1");
  if (m.k > m.vectors.size()) rep.add("k exceeds number of stored vectors");
  if (m.labels.size() != m.vectors.size()) rep.add("label count differs from vector count");
  for (size_t i = 0; i < m.vectors.size(); ++i)
    if (m.vectors[i].size() != m.dim) {
      rep.add("vector " + std::to_string(i) + " has wrong dimension");
      break;
    }
  return rep;
}

inline ValidationReport validate(const AdditiveTreeModel& m) {
  ValidationReport rep;
  if (m.dim == 0) rep.add("dimension must be positive");
  if (m.trees.empty()) rep.add("no trees");
  for (size_t t = 0; t < m.trees.size(); ++t)
    detail::validate_diagram(m.trees[t], m.dim, /*binary_leaves=*/false, /*tree=*/true,
                             "tree " + std::to_string(t) + ": ", rep);
  return rep;
}

inline ValidationReport validate(const Ensemble& m) {
  ValidationReport rep;
  if (m.members.empty()) {
    rep.add("ensemble has no members");
    return rep;
  }
  ModelKind k0 = m.members.front().kind();
  uint32_t d0 = input_dim(m.members.front());
  for (size_t i = 0; i < m.members.size(); ++i) {
    const Model& mem = m.members[i];
    if (mem.kind() != k0) rep.add("member " + std::to_string(i) + " has a different family");
    if (input_dim(mem) != d0)
      rep.add("member " + std::to_string(i) + " has a different input dimension");
    bool cls = is_classifier(mem);
    if (m.aggregation == Ensemble::Aggregation::majority && !cls)
      rep.add("member " + std::to_string(i) + " is a regressor under majority aggregation");
    if (m.aggregation == Ensemble::Aggregation::mean && cls)
      rep.add("member " + std::to_string(i) + " is a classifier under mean aggregation");
    ValidationReport sub = validate(mem);
    for (std::string& p : sub.problems)
      rep.add("member " + std::to_string(i) + ": " + p);
  }
  return rep;
}

inline ValidationReport validate(const Model& m) {
  return std::visit([](const auto& v) { return validate(v); }, m.node);
}

// ===========================================================================
// sound output bounds over a partial input
// ===========================================================================
//
// Returns a closed interval guaranteed to contain the (numeric) output of
// the model on every completion of the box. Classifier outputs are read as
// the numbers 0/1. Bounds need not be tight; they must only be sound.

Interval output_interval(const Model& m, const PartialInstance& box);

namespace detail {

inline Interval score_interval(const std::vector<Rational>& w, const Rational& b,
                               const PartialInstance& box) {
  Interval s = Interval::point(b);
  for (size_t i = 0; i < w.size(); ++i) {
    if (box.bits[i] == kUnset) {
      if (w[i] > 0)
        s.hi += w[i];
      else
        s.lo += w[i];
    } else if (box.bits[i] == 1) {
      s.lo += w[i];
      s.hi += w[i];
    }
  }
  return s;
}

inline Interval threshold_interval(const Interval& score) {
  if (score.lo > 0) return Interval::point(1);
  if (score.hi <= 0) return Interval::point(0);
  return {Rational(0), Rational(1)};
}

}  // namespace detail

inline Interval output_interval(const Fbdd& m, const PartialInstance& box) {
  detail::DiagramIndex ix(m.graph);
  std::unordered_map<int32_t, Interval> memo;
  return detail::diagram_interval(m.graph, ix, box, m.graph.root, memo);
}

inline Interval output_interval(const DecisionTree& m, const PartialInstance& box) {
  detail::DiagramIndex ix(m.graph);
  std::unordered_map<int32_t, Interval> memo;
  return detail::diagram_interval(m.graph, ix, box, m.graph.root, memo);
}

inline Interval output_interval(const DecisionList& m, const PartialInstance& box) {
  bool can0 = false, can1 = false;
  for (const DecisionRule& r : m.rules) {
    bool definite = true, possible = true;
    for (const LiteralTest& t : r.tests) {
      if (box.bits[t.var] == kUnset)
        definite = false;
      else if (box.bits[t.var] != static_cast<int8_t>(t.value)) {
        possible = false;
        break;
      }
    }
    if (!possible) continue;
    (r.label ? can1 : can0) = true;
    if (definite) {
      // Rule always fires from here on; later rules and the default are dead.
      Rational lo = can0 ? 0 : 1, hi = can1 ? 1 : 0;
      return {lo, hi};
    }
  }
  (m.default_label ? can1 : can0) = true;
  return {Rational(can0 ? 0 : 1), Rational(can1 ? 1 : 0)};
}

inline Interval output_interval(const Perceptron& m, const PartialInstance& box) {
  return detail::threshold_interval(detail::score_interval(m.weights, m.bias, box));
}

inline Interval output_interval(const ReluNetwork& m, const PartialInstance& box) {
  std::vector<Interval> act(m.dim);
  for (size_t i = 0; i < act.size(); ++i) {
    if (box.bits[i] == kUnset)
      act[i] = {Rational(0), Rational(1)};
    else
      act[i] = Interval::point(Rational(static_cast<int>(box.bits[i])));
  }
  for (size_t li = 0; li < m.layers.size(); ++li) {
    const ReluLayer& L = m.layers[li];
    std::vector<Interval> next(L.out_width());
    for (size_t r = 0; r < L.out_width(); ++r) {
      Interval s = Interval::point(L.bias[r]);
      for (size_t c = 0; c < act.size(); ++c) s += L.weights[r][c] * act[c];
      next[r] = (li + 1 < m.layers.size()) ? s.relu() : s;
    }
    act = std::move(next);
  }
  if (m.classifier) return detail::threshold_interval(act[0]);
  return act[0];
}

inline Interval output_interval(const KnnRegressor& m, const PartialInstance&) {
  // Box-independent: the output is an average of k stored labels, so it lies
  // between the mean of the k smallest and the mean of the k largest labels.
  std::vector<Rational> sorted = m.labels;
  std::sort(sorted.begin(), sorted.end());
  Rational lo = 0, hi = 0;
  for (size_t i = 0; i < m.k; ++i) {
    lo += sorted[i];
    hi += sorted[sorted.size() - 1 - i];
  }
  return {lo / m.k, hi / m.k};
}

inline Interval output_interval(const AdditiveTreeModel& m, const PartialInstance& box) {
  Interval sum = Interval::point(Rational(0));
  for (const Diagram& t : m.trees) {
    detail::DiagramIndex ix(t);
    std::unordered_map<int32_t, Interval> memo;
    sum += detail::diagram_interval(t, ix, box, t.root, memo);
  }
  Rational inv = Rational(1) / Rational(m.trees.size());
  return inv * sum;
}

inline Interval output_interval(const Ensemble& m, const PartialInstance& box) {
  if (m.aggregation == Ensemble::Aggregation::mean) {
    Interval sum = Interval::point(Rational(0));
    for (const Model& mem : m.members) sum += output_interval(mem, box);
    return (Rational(1) / Rational(m.members.size())) * sum;
  }
  size_t sure1 = 0, sure0 = 0, n = m.members.size();
  for (const Model& mem : m.members) {
    Interval iv = output_interval(mem, box);
    if (iv.lo == 1) ++sure1;
    if (iv.hi == 0) ++sure0;
  }
  // Majority is class 1 iff ones > n/2; ties go to 0.
  if (2 * sure1 > n) return Interval::point(1);
  if (2 * (n - sure0) <= n) return Interval::point(0);
  return {Rational(0), Rational(1)};
}

inline Interval output_interval(const Model& m, const PartialInstance& box) {
  if (box.dim() != input_dim(m)) throw DimensionMismatch("box has wrong dimension");
  return std::visit([&](const auto& v) { return output_interval(v, box); }, m.node);
}

// ===========================================================================
// prepared evaluators
// ===========================================================================
//
// A PreparedModel caches index maps and, where exactness allows, switches to
// 64-bit integer arithmetic (weights integral, all intermediate magnitudes
// proven to fit at preparation time). Results are identical to evaluate().
// The prepared object borrows the model; keep the model alive.

namespace detail {

inline bool fits_int64(const BigInt& v) {
  static const BigInt lim = BigInt(1) << 62;
  return v > -lim && v < lim;
}

inline bool integral_int64(const Rational& r, int64_t& out) {
  if (denominator(r) != 1) return false;
  const BigInt& n = numerator(r);
  if (!fits_int64(n)) return false;
  out = static_cast<int64_t>(n);
  return true;
}

// Dense child encoding: >= 0 is a node index, < 0 is ~(leaf index).
struct PreparedDiagram {
  struct Node {
    uint32_t var;
    int32_t lo;
    int32_t hi;
  };
  std::vector<Node> nodes;
  std::vector<Rational> leaf_values;
  std::vector<int64_t> leaf_ints;  // parallel; valid iff all_int
  int32_t root = 0;
  bool all_int = false;

  explicit PreparedDiagram(const Diagram& g) {
    DiagramIndex ix(g);
    if (!ix.duplicate_ids.empty()) throw EvalError("diagram has duplicate ids");
    auto enc = [&](int32_t id) -> int32_t {
      if (auto it = ix.node_at.find(id); it != ix.node_at.end())
        return static_cast<int32_t>(it->second);
      if (auto it = ix.leaf_at.find(id); it != ix.leaf_at.end())
        return ~static_cast<int32_t>(it->second);
      throw EvalError("diagram references missing id");
    };
    nodes.reserve(g.nodes.size());
    for (const DiagramNode& n : g.nodes) nodes.push_back({n.var, enc(n.lo), enc(n.hi)});
    leaf_values.reserve(g.leaves.size());
    leaf_ints.assign(g.leaves.size(), 0);
    all_int = true;
    for (size_t i = 0; i < g.leaves.size(); ++i) {
      leaf_values.push_back(g.leaves[i].value);
      if (!integral_int64(g.leaves[i].value, leaf_ints[i])) all_int = false;
    }
    root = enc(g.root);
  }

  // Index of the leaf reached on x.
  size_t run(const BinaryInstance& x) const {
    int32_t cur = root;
    for (size_t steps = 0; steps <= nodes.size(); ++steps) {
      if (cur < 0) return static_cast<size_t>(~cur);
      const Node& n = nodes[static_cast<size_t>(cur)];
      cur = x[n.var] ? n.hi : n.lo;
    }
    throw EvalError("diagram evaluation did not reach a leaf (cycle?)");
  }
};

struct PreparedKnn {
  const KnnRegressor* m;
  bool use_int = false;
  int64_t scale = 1;  // common denominator of all coordinates
  std::vector<std::vector<int64_t>> scaled;  // scale * coordinate
  bool labels_int = false;
  std::vector<int64_t> label_ints;
  mutable std::vector<std::pair<int64_t, size_t>> scratch_int;
  mutable std::vector<std::pair<Rational, size_t>> scratch_rat;

  explicit PreparedKnn(const KnnRegressor& knn) : m(&knn) {
    BigInt lcm_den = 1;
    for (const auto& v : knn.vectors)
      for (const Rational& c : v) lcm_den = boost::multiprecision::lcm(lcm_den, denominator(c));
    if (fits_int64(lcm_den)) {
      BigInt s = lcm_den;
      BigInt maxabs = 0;
      bool ok = true;
      for (const auto& v : knn.vectors)
        for (const Rational& c : v) {
          BigInt sc = numerator(c) * (s / denominator(c));
          if (abs(sc) > maxabs) maxabs = abs(sc);
          if (!fits_int64(sc)) ok = false;
        }
      // Worst per-coordinate gap is |scaled| + scale; the squared sum over
      // dim coordinates must stay below the int64 guard.
      BigInt worst = (maxabs + s) * (maxabs + s) * BigInt(knn.dim);
      if (ok && fits_int64(worst)) {
        use_int = true;
        scale = static_cast<int64_t>(s);
        scaled.resize(knn.vectors.size());
        for (size_t i = 0; i < knn.vectors.size(); ++i) {
          scaled[i].resize(knn.dim);
          for (size_t j = 0; j < knn.dim; ++j) {
            const Rational& c = knn.vectors[i][j];
            scaled[i][j] = static_cast<int64_t>(numerator(c) * (s / denominator(c)));
          }
        }
      }
    }
    label_ints.assign(knn.labels.size(), 0);
    labels_int = true;
    for (size_t i = 0; i < knn.labels.size(); ++i)
      if (!integral_int64(knn.labels[i], label_ints[i])) {
        labels_int = false;
        break;
      }
  }

  Rational eval(const BinaryInstance& x) const {
    if (!use_int) {
      auto& d = scratch_rat;
      d.resize(m->vectors.size());
      for (size_t i = 0; i < m->vectors.size(); ++i) {
        Rational s = 0;
        for (size_t j = 0; j < m->dim; ++j) {
          Rational diff = m->vectors[i][j] - x[j];
          s += diff * diff;
        }
        d[i] = {std::move(s), i};
      }
      return knn_average(*m, d);
    }
    auto& d = scratch_int;
    d.resize(scaled.size());
    for (size_t i = 0; i < scaled.size(); ++i) {
      int64_t s = 0;
      const int64_t* row = scaled[i].data();
      for (size_t j = 0; j < m->dim; ++j) {
        int64_t diff = row[j] - (x[j] ? scale : 0);
        s += diff * diff;
      }
      d[i] = {s, i};
    }
    auto cmp = [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first < b.first : a.second < b.second;
    };
    size_t k = m->k;
    std::nth_element(d.begin(), d.begin() + (k - 1), d.end(), cmp);
    if (labels_int) {
      int64_t sum = 0;
      for (size_t i = 0; i < k; ++i) sum += label_ints[d[i].second];
      return Rational(sum) / Rational(static_cast<int64_t>(k));
    }
    Rational sum = 0;
    for (size_t i = 0; i < k; ++i) sum += m->labels[d[i].second];
    return sum / k;
  }
};

struct PreparedRelu {
  const ReluNetwork* m;
  bool use_int = false;
  std::vector<std::vector<int64_t>> w;  // per layer, row-major
  std::vector<std::vector<int64_t>> b;
  std::vector<size_t> widths;  // widths[0] = dim, widths[i] = out of layer i-1
  mutable std::vector<int64_t> buf0, buf1;

  explicit PreparedRelu(const ReluNetwork& net) : m(&net) {
    widths.push_back(net.dim);
    bool all_int = true;
    BigInt bound = 1;  // max |activation| so far (inputs are 0/1)
    for (const ReluLayer& L : net.layers) {
      BigInt next_bound = 0;
      for (size_t r = 0; r < L.out_width(); ++r) {
        int64_t tmp;
        BigInt acc = 0;
        if (!integral_int64(L.bias[r], tmp)) all_int = false;
        acc += abs(numerator(L.bias[r]));
        for (const Rational& wv : L.weights[r]) {
          if (!integral_int64(wv, tmp)) all_int = false;
          acc += abs(numerator(wv)) * bound;
        }
        if (acc > next_bound) next_bound = acc;
      }
      bound = next_bound;
      if (!fits_int64(bound)) all_int = false;
      widths.push_back(L.out_width());
      if (!all_int) break;
    }
    if (all_int) {
      use_int = true;
      for (const ReluLayer& L : net.layers) {
        std::vector<int64_t> lw;
        lw.reserve(L.out_width() * L.in_width());
        std::vector<int64_t> lb(L.out_width());
        for (size_t r = 0; r < L.out_width(); ++r) {
          integral_int64(L.bias[r], lb[r]);
          for (const Rational& wv : L.weights[r]) {
            int64_t v;
            integral_int64(wv, v);
            lw.push_back(v);
          }
        }
        w.push_back(std::move(lw));
        b.push_back(std::move(lb));
      }
      size_t mw = 0;
      for (size_t width : widths) mw = std::max(mw, width);
      buf0.resize(mw);
      buf1.resize(mw);
    }
  }

  Output eval(const BinaryInstance& x) const {
    if (!use_int) {
      std::vector<Rational> out = relu_forward(*m, x);
      if (out.size() != 1) throw EvalError("network output width must be 1");
      if (m->classifier) return Output::label(out[0] > 0 ? 1 : 0);
      return Output::number(std::move(out[0]));
    }
    int64_t* cur = buf0.data();
    int64_t* nxt = buf1.data();
    size_t in_w = widths[0];
    for (size_t i = 0; i < in_w; ++i) cur[i] = x[i];
    for (size_t li = 0; li < w.size(); ++li) {
      size_t out_w = widths[li + 1];
      const int64_t* lw = w[li].data();
      const int64_t* lb = b[li].data();
      bool hidden = li + 1 < w.size();
      for (size_t r = 0; r < out_w; ++r) {
        int64_t s = lb[r];
        const int64_t* row = lw + r * in_w;
        for (size_t c = 0; c < in_w; ++c)
          if (cur[c]) s += row[c] * cur[c];
        nxt[r] = (hidden && s < 0) ? 0 : s;
      }
      std::swap(cur, nxt);
      in_w = out_w;
    }
    if (m->classifier) return Output::label(cur[0] > 0 ? 1 : 0);
    return Output::number(Rational(cur[0]));
  }
};

}  // namespace detail

class PreparedModel {
 public:
  explicit PreparedModel(const Model& m) : model_(&m) {
    std::visit([&](const auto& v) { prepare(v); }, m.node);
  }
  // The prepared form points into the source model, so it must outlive this
  // object; binding a temporary would dangle.
  explicit PreparedModel(Model&&) = delete;

  Output eval(const BinaryInstance& x) const {
    detail::require_dim(input_dim(*model_), x);
    return eval_unchecked(x);
  }

  const Model& model() const { return *model_; }

 private:
  struct DiagramEval {
    detail::PreparedDiagram pd;
    bool binary;  // classifier semantics
  };
  struct ForestEval {
    std::vector<detail::PreparedDiagram> trees;
    bool all_int;
  };
  struct EnsembleEval {
    std::vector<PreparedModel> members;
    bool majority;
  };
  struct PlainEval {};  // evaluate() directly (perceptron, decision list)

  const Model* model_;
  std::variant<PlainEval, DiagramEval, ForestEval, EnsembleEval, detail::PreparedKnn,
               detail::PreparedRelu>
      impl_{PlainEval{}};

  void prepare(const Fbdd& m) { impl_ = DiagramEval{detail::PreparedDiagram(m.graph), true}; }
  void prepare(const DecisionTree& m) {
    impl_ = DiagramEval{detail::PreparedDiagram(m.graph), true};
  }
  void prepare(const DecisionList&) { impl_ = PlainEval{}; }
  void prepare(const Perceptron&) { impl_ = PlainEval{}; }
  void prepare(const ReluNetwork& m) { impl_ = detail::PreparedRelu(m); }
  void prepare(const KnnRegressor& m) { impl_ = detail::PreparedKnn(m); }
  void prepare(const AdditiveTreeModel& m) {
    ForestEval fe;
    fe.all_int = true;
    for (const Diagram& t : m.trees) {
      fe.trees.emplace_back(t);
      fe.all_int = fe.all_int && fe.trees.back().all_int;
    }
    impl_ = std::move(fe);
  }
  void prepare(const Ensemble& m) {
    EnsembleEval ee;
    ee.majority = m.aggregation == Ensemble::Aggregation::majority;
    ee.members.reserve(m.members.size());
    for (const Model& mem : m.members) ee.members.emplace_back(mem);
    impl_ = std::move(ee);
  }

  Output eval_unchecked(const BinaryInstance& x) const {
    if (std::holds_alternative<PlainEval>(impl_)) return evaluate(*model_, x);
    if (const auto* de = std::get_if<DiagramEval>(&impl_)) {
      size_t leaf = de->pd.run(x);
      const Rational& v = de->pd.leaf_values[leaf];
      if (v != 0 && v != 1) throw EvalError("classifier diagram has non-binary leaf");
      return Output::label(v == 1 ? 1 : 0);
    }
    if (const auto* fe = std::get_if<ForestEval>(&impl_)) {
      size_t n = fe->trees.size();
      if (fe->all_int) {
        int64_t sum = 0;
        for (const auto& t : fe->trees) sum += t.leaf_ints[t.run(x)];
        return Output::number(Rational(sum) / Rational(static_cast<int64_t>(n)));
      }
      Rational sum = 0;
      for (const auto& t : fe->trees) sum += t.leaf_values[t.run(x)];
      return Output::number(sum / n);
    }
    if (const auto* ee = std::get_if<EnsembleEval>(&impl_)) {
      if (ee->majority) {
        size_t ones = 0;
        for (const PreparedModel& mem : ee->members) ones += mem.eval_unchecked(x).label_value();
        return Output::label(2 * ones > ee->members.size() ? 1 : 0);
      }
      Rational sum = 0;
      for (const PreparedModel& mem : ee->members) sum += mem.eval_unchecked(x).numeric();
      return Output::number(sum / ee->members.size());
    }
    if (const auto* kn = std::get_if<detail::PreparedKnn>(&impl_))
      return Output::number(kn->eval(x));
    return std::get<detail::PreparedRelu>(impl_).eval(x);
  }
};

// ===========================================================================
// ensemble flattening
// ===========================================================================

// Rewrites a mean-aggregated ensemble of ReLU regressors as one network
// computing the identical function on every binary input. Members of
// unequal depth are first padded with identity layers directly after the
// input (sound because raw inputs are nonnegative, so the rectifier is the
// identity there). Hidden layers then stack block-diagonally and the output
// layer concatenates the members' output rows scaled by 1/m.
inline ReluNetwork flatten_ensemble(const Ensemble& e) {
  if (e.members.empty()) throw std::invalid_argument("cannot flatten an empty ensemble");
  if (e.aggregation != Ensemble::Aggregation::mean)
    throw std::invalid_argument("flattening requires mean aggregation");
  std::vector<ReluNetwork> nets;
  nets.reserve(e.members.size());
  uint32_t dim = input_dim(e.members.front());
  size_t depth = 0;
  for (const Model& mem : e.members) {
    if (!mem.is<ReluNetwork>())
      throw std::invalid_argument("flattening requires ReLU network members");
    const auto& n = mem.as<ReluNetwork>();
    if (n.classifier) throw std::invalid_argument("flattening requires regressor members");
    if (n.dim != dim) throw std::invalid_argument("members disagree on input dimension");
    nets.push_back(n);
    depth = std::max(depth, n.layers.size());
  }
  auto identity_layer = [&](size_t width) {
    ReluLayer L;
    L.weights.assign(width, std::vector<Rational>(width, Rational(0)));
    for (size_t i = 0; i < width; ++i) L.weights[i][i] = 1;
    L.bias.assign(width, Rational(0));
    return L;
  };
  for (ReluNetwork& n : nets) {
    while (n.layers.size() < depth)
      n.layers.insert(n.layers.begin(), identity_layer(dim));
  }

  ReluNetwork out;
  out.dim = dim;
  out.classifier = false;
  size_t m = nets.size();
  for (size_t li = 0; li < depth; ++li) {
    ReluLayer L;
    bool last = li + 1 == depth;
    bool first = li == 0;
    size_t in_total = 0;
    std::vector<size_t> in_off(m);
    for (size_t i = 0; i < m; ++i) {
      in_off[i] = in_total;
      in_total += first ? dim : nets[i].layers[li - 1].out_width();
    }
    if (first) in_total = dim;  // all members read the shared input directly
    if (last) {
      // Single output row: concatenation of member output rows, scaled 1/m.
      std::vector<Rational> row(in_total, Rational(0));
      Rational bias = 0;
      Rational inv = Rational(1) / Rational(static_cast<int64_t>(m));
      for (size_t i = 0; i < m; ++i) {
        const ReluLayer& src = nets[i].layers[li];
        for (size_t c = 0; c < src.in_width(); ++c)
          row[(first ? 0 : in_off[i]) + c] += inv * src.weights[0][c];
        bias += inv * src.bias[0];
      }
      L.weights.push_back(std::move(row));
      L.bias.push_back(std::move(bias));
    } else {
      for (size_t i = 0; i < m; ++i) {
        const ReluLayer& src = nets[i].layers[li];
        for (size_t r = 0; r < src.out_width(); ++r) {
          std::vector<Rational> row(in_total, Rational(0));
          for (size_t c = 0; c < src.in_width(); ++c)
            row[(first ? 0 : in_off[i]) + c] = src.weights[r][c];
          L.weights.push_back(std::move(row));
          L.bias.push_back(src.bias[r]);
        }
      }
    }
    out.layers.push_back(std::move(L));
  }
  return out;
}

}  // namespace cfx
