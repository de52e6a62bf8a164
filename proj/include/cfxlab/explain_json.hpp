#pragma once

// JSON forms of explanation problem specs and solutions.
//
// Spec schema:
//   {"kind": "classic-cf"|"wachter"|"mcr"|"plausible-mcr"|"robust-cf"|
//            "msr"|"plausible-msr"|"mca",
//    "model": <model object> | "<path to model JSON file>",
//    "x_orig": "0101...",
//    "target": int | "p/q"            (flip kinds; label vs number follows
//                                      the model being a classifier),
//    "cost": {"kind": "hamming", "dim": d} |
//            {"kind": "weighted-l1", "weights": [..]}   (default: hamming),
//    "k": int | "p/q", "lambda": int | "p/q",
//    "pi": <model object> | "<path>",
//    "model_set": [<model or path>, ...]}
//
// Solutions serialize with exact rational objectives (never floats) and the
// solver's certificate string.

#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "cfxlab/cost.hpp"
#include "cfxlab/explain.hpp"
#include "cfxlab/model_json.hpp"

namespace cfx {

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A model field is either an inline model object or a string path to a
// model JSON file, resolved relative to the process working directory.
// Models entering through this boundary are structurally validated.
inline Model model_from_json_or_file(const Json& j) {
  Model m = j.is_string() ? parse_model(read_text_file(j.get<std::string>()))
                          : model_from_json(j);
  ValidationReport report = validate(m);
  if (!report.ok()) throw ParseError("invalid model: " + report.problems.front());
  return m;
}

inline CostFunction cost_from_json(const Json& j, uint32_t dim) {
  std::string kind = j.value("kind", std::string("hamming"));
  if (kind == "hamming") {
    uint32_t d = j.contains("dim") ? j.at("dim").get<uint32_t>() : dim;
    return CostFunction::hamming(d);
  }
  if (kind == "weighted-l1") {
    if (!j.contains("weights")) throw ParseError("weighted-l1 cost requires \"weights\"");
    return CostFunction::weighted_l1(detail::rational_vector(j.at("weights"), "cost weights"));
  }
  throw ParseError("unknown cost kind: " + kind);
}

inline Json cost_to_json(const CostFunction& c) {
  Json j;
  if (c.kind == CostFunction::Kind::hamming) {
    j["kind"] = "hamming";
    j["dim"] = c.dim;
  } else {
    j["kind"] = "weighted-l1";
    j["weights"] = detail::rational_vector_to_json(c.weights);
  }
  return j;
}

inline ProblemSpec problem_spec_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("problem spec must be a JSON object");
  ProblemSpec spec;
  std::string kind_str = detail::field(j, "kind").get<std::string>();
  auto kind = parse_problem_kind(kind_str);
  if (!kind) throw ParseError("unknown problem kind: " + kind_str);
  spec.kind = *kind;
  spec.model = model_from_json_or_file(detail::field(j, "model"));
  spec.x_orig = BinaryInstance::from_string(detail::field(j, "x_orig").get<std::string>());
  if (j.contains("target")) {
    Rational v = rational_from_json(j.at("target"));
    if (spec.kind != ProblemKind::wachter && is_classifier(spec.model)) {
      if (v != 0 && v != 1) throw ParseError("classifier target must be 0 or 1");
      spec.target = Output::label(v == 1 ? 1 : 0);
    } else {
      spec.target = Output::number(std::move(v));
    }
  }
  spec.cost = j.contains("cost")
                  ? cost_from_json(j.at("cost"), static_cast<uint32_t>(spec.x_orig.dim()))
                  : CostFunction::hamming(static_cast<uint32_t>(spec.x_orig.dim()));
  if (j.contains("k")) spec.k = rational_from_json(j.at("k"));
  if (j.contains("lambda")) spec.lambda = rational_from_json(j.at("lambda"));
  if (j.contains("pi")) spec.pi = model_from_json_or_file(j.at("pi"));
  if (j.contains("model_set")) {
    if (!j.at("model_set").is_array()) throw ParseError("\"model_set\" must be an array");
    for (const Json& m : j.at("model_set")) spec.model_set.push_back(model_from_json_or_file(m));
  }
  return spec;
}

inline ProblemSpec parse_problem_spec(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  return problem_spec_from_json(j);
}

inline Json solution_to_json(const Solution& sol) {
  Json j;
  j["feasible"] = sol.feasible;
  if (sol.witness_delta) {
    Json flips = Json::array();
    for (uint32_t i : sol.witness_delta->flips) flips.push_back(i);
    j["witness_delta"] = std::move(flips);
  }
  if (sol.witness_partial) j["witness_subset"] = sol.witness_partial->to_string();
  if (sol.witness_instance) j["witness_instance"] = sol.witness_instance->to_string();
  if (sol.objective) j["objective"] = format_rational(*sol.objective);
  j["certificate"] = sol.certificate;
  return j;
}

inline std::string serialize_solution(const Solution& sol, int indent = 2) {
  return solution_to_json(sol).dump(indent);
}

}  // namespace cfx
