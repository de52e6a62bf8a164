#pragma once

// Machine-readable registry of published complexity results for
// counterfactual and semi-factual explanation problems, keyed by
// (model family, problem kind, single-or-ensemble). Lookup is total:
// combinations with no published result return an explicit "unknown"
// record. The registry never derives or upgrades a class — entries are
// stored exactly as published (e.g. NP-hard stays NP-hard even where
// membership in NP would be easy to argue).

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace cfx {

enum class AtlasFamily {
  any_model,
  monotonic,
  knn,
  gnn,
  perceptron,
  relu,
  dt,
  dl,
  fbdd,
  extended_linear,
  additive_trees,
  random_forest,
};

enum class AtlasProblem {
  classic_single,
  classic_enumerate,
  robust,
  plausible,
  global,
  msr,
  plausible_msr,
  mca,
};

enum class AtlasComplexity {
  ptime,
  np_hard,
  np_complete,
  sigma2p_complete,
  dp_complete,
  unknown,
};

inline const char* atlas_family_name(AtlasFamily f) {
  switch (f) {
    case AtlasFamily::any_model: return "any";
    case AtlasFamily::monotonic: return "monotonic";
    case AtlasFamily::knn: return "knn";
    case AtlasFamily::gnn: return "gnn";
    case AtlasFamily::perceptron: return "perceptron";
    case AtlasFamily::relu: return "relu";
    case AtlasFamily::dt: return "dt";
    case AtlasFamily::dl: return "dl";
    case AtlasFamily::fbdd: return "fbdd";
    case AtlasFamily::extended_linear: return "extended-linear";
    case AtlasFamily::additive_trees: return "additive-trees";
    case AtlasFamily::random_forest: return "random-forest";
  }
  return "?";
}

inline const char* atlas_problem_name(AtlasProblem p) {
  switch (p) {
    case AtlasProblem::classic_single: return "classic-single";
    case AtlasProblem::classic_enumerate: return "classic-enumerate";
    case AtlasProblem::robust: return "robust";
    case AtlasProblem::plausible: return "plausible";
    case AtlasProblem::global: return "global";
    case AtlasProblem::msr: return "msr";
    case AtlasProblem::plausible_msr: return "plausible-msr";
    case AtlasProblem::mca: return "mca";
  }
  return "?";
}

inline const char* atlas_complexity_name(AtlasComplexity c) {
  switch (c) {
    case AtlasComplexity::ptime: return "PTIME";
    case AtlasComplexity::np_hard: return "NP-hard";
    case AtlasComplexity::np_complete: return "NP-complete";
    case AtlasComplexity::sigma2p_complete: return "Sigma2p-complete";
    case AtlasComplexity::dp_complete: return "Dp-complete";
    case AtlasComplexity::unknown: return "unknown";
  }
  return "?";
}

inline std::optional<AtlasFamily> parse_atlas_family(const std::string& s) {
  static const AtlasFamily all[] = {
      AtlasFamily::any_model,  AtlasFamily::monotonic,       AtlasFamily::knn,
      AtlasFamily::gnn,        AtlasFamily::perceptron,      AtlasFamily::relu,
      AtlasFamily::dt,         AtlasFamily::dl,              AtlasFamily::fbdd,
      AtlasFamily::extended_linear, AtlasFamily::additive_trees, AtlasFamily::random_forest};
  for (AtlasFamily f : all)
    if (s == atlas_family_name(f)) return f;
  return std::nullopt;
}

inline std::optional<AtlasProblem> parse_atlas_problem(const std::string& s) {
  static const AtlasProblem all[] = {
      AtlasProblem::classic_single, AtlasProblem::classic_enumerate, AtlasProblem::robust,
      AtlasProblem::plausible,      AtlasProblem::global,            AtlasProblem::msr,
      AtlasProblem::plausible_msr,  AtlasProblem::mca};
  for (AtlasProblem p : all)
    if (s == atlas_problem_name(p)) return p;
  return std::nullopt;
}

struct AtlasEntry {
  AtlasFamily family = AtlasFamily::any_model;
  AtlasProblem problem = AtlasProblem::classic_single;
  bool ensemble = false;
  AtlasComplexity complexity = AtlasComplexity::unknown;
  std::string source;  // citation, empty for unknown
  std::string caveat;  // scope notes (norms, domains, indicator assumptions)
};

// The indicator-function caveat shared by every "plausible" column entry.
inline constexpr const char* kPlausibilityCaveat =
    "assumes a worst-case ReLU network implements the plausibility indicator; "
    "other indicator families can be easier";

// All published cells. Order: counterfactual results first (single models,
// then ensembles), then semi-factual results (same split).
inline const std::vector<AtlasEntry>& atlas_entries() {
  using F = AtlasFamily;
  using P = AtlasProblem;
  using C = AtlasComplexity;
  static const std::vector<AtlasEntry> entries = {
      // --- counterfactuals, single models ---
      {F::any_model, P::classic_enumerate, false, C::np_hard,
       "Tsirtsis & Gomez-Rodriguez (2020)", ""},
      {F::monotonic, P::classic_single, false, C::ptime, "Marques-Silva et al. (2021)", ""},
      {F::monotonic, P::classic_enumerate, false, C::np_complete,
       "Marques-Silva et al. (2021)", ""},
      {F::knn, P::classic_single, false, C::np_complete, "Barcelo et al. (2025)",
       "for k >= 1 under the l1 norm; PTIME under the l2 norm; always NP-complete on a "
       "binary domain"},
      {F::gnn, P::classic_single, false, C::np_complete, "Verma et al. (2024)", ""},
      {F::gnn, P::global, false, C::np_hard, "Kosan et al. (2024)", ""},
      {F::perceptron, P::classic_single, false, C::ptime, "Barcelo et al. (2020)", ""},
      {F::perceptron, P::plausible, false, C::np_complete, "Amir et al. (2024)",
       kPlausibilityCaveat},
      {F::relu, P::classic_single, false, C::np_complete, "Barcelo et al. (2020)", ""},
      {F::relu, P::robust, false, C::np_hard, "Marzari et al. (2024)", ""},
      {F::relu, P::plausible, false, C::np_complete, "Amir et al. (2024)", kPlausibilityCaveat},
      {F::dt, P::classic_single, false, C::ptime, "Huang et al. (2021)", ""},
      {F::dt, P::classic_enumerate, false, C::ptime, "Huang et al. (2021)", ""},
      {F::fbdd, P::classic_single, false, C::ptime, "Barcelo et al. (2020)", ""},
      {F::fbdd, P::plausible, false, C::np_complete, "Amir et al. (2024)", kPlausibilityCaveat},
      // --- counterfactuals, ensembles ---
      {F::perceptron, P::classic_single, true, C::np_complete, "Bassan et al. (2025)", ""},
      {F::relu, P::classic_single, true, C::np_complete, "Bassan et al. (2025)", ""},
      {F::relu, P::robust, true, C::np_hard,
       "implied by Bassan et al. (2025) via mean-ensemble flattening", ""},
      {F::relu, P::plausible, true, C::np_complete,
       "implied by Bassan et al. (2025) via mean-ensemble flattening", kPlausibilityCaveat},
      {F::additive_trees, P::classic_single, true, C::np_hard, "Cui et al. (2015)",
       "recorded as NP-hard only; membership in NP is not claimed"},
      {F::fbdd, P::classic_single, true, C::np_complete, "Bassan et al. (2025)", ""},
      // --- semi-factuals, single models ---
      {F::monotonic, P::msr, false, C::ptime, "Marques-Silva et al. (2021)", ""},
      {F::knn, P::msr, false, C::np_hard, "Barcelo et al. (2025)",
       "for any k >= 1, on continuous or binary domains, under any norm"},
      {F::perceptron, P::msr, false, C::ptime, "Barcelo et al. (2020)", ""},
      {F::perceptron, P::plausible_msr, false, C::sigma2p_complete, "Amir et al. (2024)",
       kPlausibilityCaveat},
      {F::perceptron, P::mca, false, C::ptime, "Alfano et al. (2024)", ""},
      {F::relu, P::msr, false, C::sigma2p_complete, "Barcelo et al. (2020)", ""},
      {F::relu, P::plausible_msr, false, C::sigma2p_complete, "Amir et al. (2024)",
       kPlausibilityCaveat},
      {F::relu, P::mca, false, C::np_complete, "Alfano et al. (2024)", ""},
      {F::extended_linear, P::msr, false, C::ptime, "Marques-Silva et al. (2020)", ""},
      {F::dt, P::msr, false, C::ptime, "Izza et al. (2020)", ""},
      {F::dl, P::msr, false, C::np_hard, "Ignatiev & Marques-Silva (2021)", ""},
      {F::fbdd, P::msr, false, C::np_complete, "Barcelo et al. (2020)", ""},
      {F::fbdd, P::plausible_msr, false, C::sigma2p_complete, "Amir et al. (2024)",
       kPlausibilityCaveat},
      {F::fbdd, P::mca, false, C::ptime, "Alfano et al. (2024)", ""},
      // --- semi-factuals, ensembles ---
      {F::perceptron, P::msr, true, C::sigma2p_complete, "Bassan et al. (2025)", ""},
      {F::relu, P::msr, true, C::sigma2p_complete, "Bassan et al. (2025)", ""},
      {F::fbdd, P::msr, true, C::sigma2p_complete, "Bassan et al. (2025)", ""},
      {F::random_forest, P::msr, true, C::dp_complete, "Izza & Marques-Silva (2021)", ""},
  };
  return entries;
}

constexpr size_t kAtlasEntryCount = 39;

// Total lookup: the published entry, or an "unknown" record with empty
// source for combinations no published result covers.
inline AtlasEntry atlas_lookup(AtlasFamily family, AtlasProblem problem, bool ensemble) {
  for (const AtlasEntry& e : atlas_entries())
    if (e.family == family && e.problem == problem && e.ensemble == ensemble) return e;
  AtlasEntry unknown;
  unknown.family = family;
  unknown.problem = problem;
  unknown.ensemble = ensemble;
  unknown.complexity = AtlasComplexity::unknown;
  return unknown;
}

inline nlohmann::json atlas_entry_to_json(const AtlasEntry& e) {
  nlohmann::json j;
  j["family"] = atlas_family_name(e.family);
  j["problem"] = atlas_problem_name(e.problem);
  j["ensemble"] = e.ensemble;
  j["complexity"] = atlas_complexity_name(e.complexity);
  j["source"] = e.source;
  j["caveat"] = e.caveat;
  return j;
}

inline nlohmann::json atlas_to_json() {
  nlohmann::json arr = nlohmann::json::array();
  for (const AtlasEntry& e : atlas_entries()) arr.push_back(atlas_entry_to_json(e));
  return arr;
}

}  // namespace cfx
