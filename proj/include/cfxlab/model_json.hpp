#pragma once

// JSON (de)serialization for models.
//
// Schema: {"kind": "fbdd"|"dt"|"dl"|"perceptron"|"relu"|"knn"|"atm"|"ensemble",
//          "dim": int, ...kind-specific fields...}.
// Rationals appear as JSON integers or as "p/q" strings; floating-point
// numbers are rejected to keep every value exact. parse -> serialize ->
// parse is the identity.

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cfxlab/models.hpp"
#include "cfxlab/rational.hpp"

namespace cfx {

using Json = nlohmann::json;

// ===========================================================================
// rationals
// ===========================================================================

inline Rational rational_from_json(const Json& j) {
  if (j.is_number_integer()) return Rational(j.get<int64_t>());
  if (j.is_number_unsigned()) return Rational(j.get<uint64_t>());
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_float())
    throw ParseError("floating-point numbers are not accepted; use \"p/q\" strings");
  throw ParseError("expected a rational (integer or \"p/q\" string)");
}

inline Json rational_to_json(const Rational& r) {
  if (denominator(r) == 1) {
    const BigInt& n = numerator(r);
    if (n >= std::numeric_limits<int64_t>::min() && n <= std::numeric_limits<int64_t>::max())
      return Json(static_cast<int64_t>(n));
  }
  return Json(format_rational(r));
}

namespace detail {

inline const Json& field(const Json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) throw ParseError(std::string("missing field \"") + name + "\"");
  return *it;
}

inline uint32_t uint_field(const Json& j, const char* name) {
  const Json& f = field(j, name);
  if (!f.is_number_integer() && !f.is_number_unsigned())
    throw ParseError(std::string("field \"") + name + "\" must be an integer");
  int64_t v = f.get<int64_t>();
  if (v < 0) throw ParseError(std::string("field \"") + name + "\" must be nonnegative");
  return static_cast<uint32_t>(v);
}

inline std::vector<Rational> rational_vector(const Json& j, const char* what) {
  if (!j.is_array()) throw ParseError(std::string(what) + " must be an array");
  std::vector<Rational> out;
  out.reserve(j.size());
  for (const Json& e : j) out.push_back(rational_from_json(e));
  return out;
}

inline Json rational_vector_to_json(const std::vector<Rational>& v) {
  Json a = Json::array();
  for (const Rational& r : v) a.push_back(rational_to_json(r));
  return a;
}

inline Diagram diagram_from_json(const Json& j) {
  Diagram g;
  g.root = static_cast<int32_t>(field(j, "root").get<int64_t>());
  for (const Json& n : field(j, "nodes")) {
    DiagramNode dn;
    dn.id = static_cast<int32_t>(field(n, "id").get<int64_t>());
    dn.var = uint_field(n, "var");
    dn.lo = static_cast<int32_t>(field(n, "lo").get<int64_t>());
    dn.hi = static_cast<int32_t>(field(n, "hi").get<int64_t>());
    g.nodes.push_back(dn);
  }
  for (const Json& l : field(j, "leaves")) {
    DiagramLeaf dl;
    dl.id = static_cast<int32_t>(field(l, "id").get<int64_t>());
    dl.value = rational_from_json(field(l, "value"));
    g.leaves.push_back(dl);
  }
  return g;
}

inline Json diagram_to_json(const Diagram& g) {
  Json j;
  j["root"] = g.root;
  Json nodes = Json::array();
  for (const DiagramNode& n : g.nodes)
    nodes.push_back(Json{{"id", n.id}, {"var", n.var}, {"lo", n.lo}, {"hi", n.hi}});
  j["nodes"] = std::move(nodes);
  Json leaves = Json::array();
  for (const DiagramLeaf& l : g.leaves)
    leaves.push_back(Json{{"id", l.id}, {"value", rational_to_json(l.value)}});
  j["leaves"] = std::move(leaves);
  return j;
}

}  // namespace detail

// ===========================================================================
// models
// ===========================================================================

Model model_from_json(const Json& j);
Json model_to_json(const Model& m);

namespace detail {

inline Fbdd fbdd_from_json(const Json& j) {
  Fbdd m;
  m.dim = uint_field(j, "dim");
  m.graph = diagram_from_json(j);
  return m;
}

inline DecisionTree dt_from_json(const Json& j) {
  DecisionTree m;
  m.dim = uint_field(j, "dim");
  m.graph = diagram_from_json(j);
  return m;
}

inline DecisionList dl_from_json(const Json& j) {
  DecisionList m;
  m.dim = uint_field(j, "dim");
  for (const Json& r : field(j, "rules")) {
    DecisionRule rule;
    for (const Json& t : field(r, "if")) {
      LiteralTest lt;
      lt.var = uint_field(t, "var");
      lt.value = static_cast<uint8_t>(uint_field(t, "is"));
      rule.tests.push_back(lt);
    }
    rule.label = static_cast<uint8_t>(uint_field(r, "then"));
    m.rules.push_back(std::move(rule));
  }
  m.default_label = static_cast<uint8_t>(uint_field(j, "default"));
  return m;
}

inline Perceptron perceptron_from_json(const Json& j) {
  Perceptron m;
  m.dim = uint_field(j, "dim");
  m.weights = rational_vector(field(j, "weights"), "weights");
  m.bias = rational_from_json(field(j, "bias"));
  return m;
}

inline ReluNetwork relu_from_json(const Json& j) {
  ReluNetwork m;
  m.dim = uint_field(j, "dim");
  for (const Json& lj : field(j, "layers")) {
    ReluLayer L;
    for (const Json& row : field(lj, "weights"))
      L.weights.push_back(rational_vector(row, "weight row"));
    L.bias = rational_vector(field(lj, "bias"), "bias");
    m.layers.push_back(std::move(L));
  }
  std::string out = field(j, "output").get<std::string>();
  if (out == "classifier")
    m.classifier = true;
  else if (out == "regressor")
    m.classifier = false;
  else
    throw ParseError("field \"output\" must be \"classifier\" or \"regressor\"");
  return m;
}

inline KnnRegressor knn_from_json(const Json& j) {
  KnnRegressor m;
  m.dim = uint_field(j, "dim");
  m.k = uint_field(j, "k");
  for (const Json& v : field(j, "vectors")) m.vectors.push_back(rational_vector(v, "vector"));
  m.labels = rational_vector(field(j, "labels"), "labels");
  return m;
}

inline AdditiveTreeModel atm_from_json(const Json& j) {
  AdditiveTreeModel m;
  m.dim = uint_field(j, "dim");
  for (const Json& t : field(j, "trees")) m.trees.push_back(diagram_from_json(t));
  return m;
}

inline Ensemble ensemble_from_json(const Json& j) {
  Ensemble m;
  std::string agg = field(j, "aggregation").get<std::string>();
  if (agg == "majority")
    m.aggregation = Ensemble::Aggregation::majority;
  else if (agg == "mean")
    m.aggregation = Ensemble::Aggregation::mean;
  else
    throw ParseError("field \"aggregation\" must be \"majority\" or \"mean\"");
  for (const Json& mem : field(j, "members")) m.members.push_back(model_from_json(mem));
  return m;
}

}  // namespace detail

inline Model model_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("model must be a JSON object");
  std::string kind = detail::field(j, "kind").get<std::string>();
  if (kind == "fbdd") return detail::fbdd_from_json(j);
  if (kind == "dt") return detail::dt_from_json(j);
  if (kind == "dl") return detail::dl_from_json(j);
  if (kind == "perceptron") return detail::perceptron_from_json(j);
  if (kind == "relu") return detail::relu_from_json(j);
  if (kind == "knn") return detail::knn_from_json(j);
  if (kind == "atm") return detail::atm_from_json(j);
  if (kind == "ensemble") return detail::ensemble_from_json(j);
  throw ParseError("unknown model kind \"" + kind + "\"");
}

inline Json model_to_json(const Model& m) {
  Json j;
  j["kind"] = kind_name(m.kind());
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Fbdd> || std::is_same_v<T, DecisionTree>) {
          j["dim"] = v.dim;
          Json g = detail::diagram_to_json(v.graph);
          j["root"] = g["root"];
          j["nodes"] = g["nodes"];
          j["leaves"] = g["leaves"];
        } else if constexpr (std::is_same_v<T, DecisionList>) {
          j["dim"] = v.dim;
          Json rules = Json::array();
          for (const DecisionRule& r : v.rules) {
            Json tests = Json::array();
            for (const LiteralTest& t : r.tests)
              tests.push_back(Json{{"var", t.var}, {"is", t.value}});
            rules.push_back(Json{{"if", std::move(tests)}, {"then", r.label}});
          }
          j["rules"] = std::move(rules);
          j["default"] = v.default_label;
        } else if constexpr (std::is_same_v<T, Perceptron>) {
          j["dim"] = v.dim;
          j["weights"] = detail::rational_vector_to_json(v.weights);
          j["bias"] = rational_to_json(v.bias);
        } else if constexpr (std::is_same_v<T, ReluNetwork>) {
          j["dim"] = v.dim;
          Json layers = Json::array();
          for (const ReluLayer& L : v.layers) {
            Json rows = Json::array();
            for (const auto& row : L.weights) rows.push_back(detail::rational_vector_to_json(row));
            layers.push_back(
                Json{{"weights", std::move(rows)}, {"bias", detail::rational_vector_to_json(L.bias)}});
          }
          j["layers"] = std::move(layers);
          j["output"] = v.classifier ? "classifier" : "regressor";
        } else if constexpr (std::is_same_v<T, KnnRegressor>) {
          j["dim"] = v.dim;
          j["k"] = v.k;
          Json vecs = Json::array();
          for (const auto& vec : v.vectors) vecs.push_back(detail::rational_vector_to_json(vec));
          j["vectors"] = std::move(vecs);
          j["labels"] = detail::rational_vector_to_json(v.labels);
        } else if constexpr (std::is_same_v<T, AdditiveTreeModel>) {
          j["dim"] = v.dim;
          Json trees = Json::array();
          for (const Diagram& t : v.trees) trees.push_back(detail::diagram_to_json(t));
          j["trees"] = std::move(trees);
        } else {  // Ensemble
          j["aggregation"] =
              v.aggregation == Ensemble::Aggregation::majority ? "majority" : "mean";
          Json members = Json::array();
          for (const Model& mem : v.members) members.push_back(model_to_json(mem));
          j["members"] = std::move(members);
        }
      },
      m.node);
  return j;
}

inline Model parse_model(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  return model_from_json(j);
}

inline std::string serialize_model(const Model& m, int indent = 2) {
  return model_to_json(m).dump(indent);
}

}  // namespace cfx
