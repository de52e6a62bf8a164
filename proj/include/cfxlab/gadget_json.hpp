#pragma once

// JSON form of a compiled gadget: the regressor plus everything needed to
// reproduce the reduction (scale, origin, cost, input encoding).

#include <string>

#include <nlohmann/json.hpp>

#include "cfxlab/gadgets.hpp"
#include "cfxlab/model_json.hpp"

namespace cfx {

inline Json gadget_to_json(const GadgetInstance& g) {
  Json j;
  j["kind"] = gadget_kind_name(g.kind);
  j["num_vars"] = g.num_vars;
  j["num_clauses"] = g.num_clauses;
  j["M"] = rational_to_json(g.M);
  j["x_orig"] = g.x_orig.to_string();
  j["y_cf"] = rational_to_json(g.y_cf);
  j["lambda"] = rational_to_json(g.lambda);
  // Input layout: relu gadgets use one input per literal (2i = positive,
  // 2i+1 = negative); the tree/kNN gadgets use one input per variable.
  j["encoding"] = g.kind == GadgetKind::relu ? "literal-pair" : "per-variable";
  j["regressor"] = model_to_json(g.regressor);
  return j;
}

inline GadgetInstance gadget_from_json(const Json& j) {
  GadgetInstance g;
  std::string kind_str = detail::field(j, "kind").get<std::string>();
  auto kind = parse_gadget_kind(kind_str);
  if (!kind) throw ParseError("unknown gadget kind: " + kind_str);
  g.kind = *kind;
  g.num_vars = detail::uint_field(j, "num_vars");
  g.num_clauses = detail::uint_field(j, "num_clauses");
  g.M = rational_from_json(detail::field(j, "M"));
  g.x_orig = BinaryInstance::from_string(detail::field(j, "x_orig").get<std::string>());
  g.y_cf = rational_from_json(detail::field(j, "y_cf"));
  g.lambda = rational_from_json(detail::field(j, "lambda"));
  g.regressor = model_from_json(detail::field(j, "regressor"));
  g.cost = CostFunction::hamming(static_cast<uint32_t>(g.x_orig.dim()));
  return g;
}

inline std::string serialize_gadget(const GadgetInstance& g, int indent = 2) {
  return gadget_to_json(g).dump(indent);
}

inline GadgetInstance parse_gadget(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  return gadget_from_json(j);
}

}  // namespace cfx
