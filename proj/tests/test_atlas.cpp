#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <set>
#include <tuple>

#include "cfxlab/atlas.hpp"
#include "cfxlab/explain_json.hpp"  // read_text_file

using namespace cfx;

#ifndef CFXLAB_REPO_ROOT
#define CFXLAB_REPO_ROOT "."
#endif

TEST_CASE("the complexity table has exactly the published cells") {
  CHECK(atlas_entries().size() == kAtlasEntryCount);
  CHECK(kAtlasEntryCount == 39);
}

TEST_CASE("table keys are unique") {
  std::set<std::tuple<AtlasFamily, AtlasProblem, bool>> keys;
  for (const AtlasEntry& e : atlas_entries())
    keys.insert({e.family, e.problem, e.ensemble});
  CHECK(keys.size() == atlas_entries().size());
}

TEST_CASE("every published entry names its source") {
  for (const AtlasEntry& e : atlas_entries()) {
    CHECK(e.complexity != AtlasComplexity::unknown);
    CHECK(!e.source.empty());
  }
}

TEST_CASE("spot checks against the published results") {
  SECTION("single networks are hard to explain counterfactually") {
    AtlasEntry e = atlas_lookup(AtlasFamily::relu, AtlasProblem::classic_single, false);
    CHECK(e.complexity == AtlasComplexity::np_complete);
    CHECK(e.source.find("Barcelo") != std::string::npos);
  }
  SECTION("single linear classifiers are easy both ways") {
    CHECK(atlas_lookup(AtlasFamily::perceptron, AtlasProblem::classic_single, false).complexity ==
          AtlasComplexity::ptime);
    CHECK(atlas_lookup(AtlasFamily::perceptron, AtlasProblem::mca, false).complexity ==
          AtlasComplexity::ptime);
  }
  SECTION("decision trees stay easy even for enumeration") {
    CHECK(atlas_lookup(AtlasFamily::dt, AtlasProblem::classic_enumerate, false).complexity ==
          AtlasComplexity::ptime);
  }
  SECTION("sufficiency for single networks climbs the hierarchy") {
    CHECK(atlas_lookup(AtlasFamily::relu, AtlasProblem::msr, false).complexity ==
          AtlasComplexity::sigma2p_complete);
  }
  SECTION("forest sufficiency lands in the difference hierarchy") {
    AtlasEntry e = atlas_lookup(AtlasFamily::random_forest, AtlasProblem::msr, true);
    CHECK(e.complexity == AtlasComplexity::dp_complete);
  }
  SECTION("ensembles of easy families become hard") {
    CHECK(atlas_lookup(AtlasFamily::perceptron, AtlasProblem::classic_single, true).complexity ==
          AtlasComplexity::np_complete);
    CHECK(atlas_lookup(AtlasFamily::fbdd, AtlasProblem::classic_single, true).complexity ==
          AtlasComplexity::np_complete);
  }
  SECTION("ensemble robustness and plausibility cite the corollaries") {
    CHECK(atlas_lookup(AtlasFamily::relu, AtlasProblem::robust, true).source ==
          "implied by Bassan et al. (2025) via mean-ensemble flattening");
    CHECK(atlas_lookup(AtlasFamily::relu, AtlasProblem::plausible, true).source ==
          "implied by Bassan et al. (2025) via mean-ensemble flattening");
  }
}

TEST_CASE("lookups never fail, even off the published table") {
  AtlasEntry e = atlas_lookup(AtlasFamily::gnn, AtlasProblem::robust, false);
  CHECK(e.complexity == AtlasComplexity::unknown);
  CHECK(e.source.empty());
  CHECK(atlas_lookup(AtlasFamily::monotonic, AtlasProblem::mca, true).complexity ==
        AtlasComplexity::unknown);
}

TEST_CASE("scope caveats are recorded where results are conditional") {
  // neighbor-based results depend on the norm and domain
  CHECK(!atlas_lookup(AtlasFamily::knn, AtlasProblem::classic_single, false).caveat.empty());
  CHECK(!atlas_lookup(AtlasFamily::knn, AtlasProblem::msr, false).caveat.empty());
  // plausibility results assume a worst-case indicator implementation
  AtlasEntry p = atlas_lookup(AtlasFamily::perceptron, AtlasProblem::plausible, false);
  CHECK(p.caveat == kPlausibilityCaveat);
  // additive trees: hardness only, no membership claim
  CHECK(!atlas_lookup(AtlasFamily::additive_trees, AtlasProblem::classic_single, true)
             .caveat.empty());
}

TEST_CASE("name maps round-trip") {
  for (const AtlasEntry& e : atlas_entries()) {
    auto f = parse_atlas_family(atlas_family_name(e.family));
    REQUIRE(f.has_value());
    CHECK(*f == e.family);
    auto p = parse_atlas_problem(atlas_problem_name(e.problem));
    REQUIRE(p.has_value());
    CHECK(*p == e.problem);
  }
  CHECK(!parse_atlas_family("transformer").has_value());
  CHECK(!parse_atlas_problem("alibi").has_value());
}

TEST_CASE("the shipped table file matches the in-code table") {
  std::string text = read_text_file(CFXLAB_REPO_ROOT "/data/atlas.json");
  nlohmann::json shipped = nlohmann::json::parse(text);
  CHECK(shipped == atlas_to_json());
}
