#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "invplan/agent.hpp"
#include "invplan/legend.hpp"
#include "invplan/pddl.hpp"

namespace invplan {

// A self-contained benchmark domain: PDDL text (the source of truth for the
// DomainSpec), template objects, default agent config, cell legend and the
// static facts every initial state carries (colors, key ids, agent codes).
struct DomainBundle {
  std::string name;
  std::string pddl_text;
  DomainSpec spec;
  ObjectSet objects;
  GridDims grid;
  AgentConfig config;
  Legend legend;
  std::vector<GoalSpec::Literal> static_facts;
  struct IntFact {
    std::string function;
    std::vector<std::string> args;
    long long value;
  };
  std::vector<IntFact> static_int_facts;
  bool use_manhattan = false;  // builders opt in when movement is unit-step

  GroundedEnvironment ground_env(const GroundOptions& opts = {}) const;
  // Applies static facts to a blank or decoded state.
  void apply_static_facts(const GroundedEnvironment& env, WorldState& s) const;
};

enum class DkgVariant { Single, Double, Reuse, Inverse };
DkgVariant dkg_variant_from_string(const std::string& s);
std::string dkg_variant_name(DkgVariant v);

struct DkgParams {
  DkgVariant variant = DkgVariant::Single;
  GridDims grid{7, 7};
  std::vector<std::string> colors = {"blue", "red"};
  // key-color -> door-color bijection; required for Inverse.
  std::map<std::string, std::string> inverse_mapping;
  std::vector<std::pair<std::string, std::string>> keys;   // name, color
  std::vector<std::pair<std::string, std::string>> doors;  // name, color
  std::vector<std::string> gems = {"gemA", "gemB", "gemC", "gemD"};
  std::string agent = "player";
  bool multiagent = false;
  std::string assistant = "helper";
  bool assistant_carries_gems = false;
  double move_cost = 1.0;
  double pickup_cost = 1.0;
  double unlock_cost = 1.0;
  double wait_cost = 1.0;
  double temperature = 1.0;
};

// Doors-Keys-Gems. Unlock semantics per variant: Single consumes one
// same-color key per door; Double requires and consumes two same-color keys;
// Reuse keeps the key; Inverse consumes a key of the mapped color.
DomainBundle build_dkg(const DkgParams& params);

// Two agents (principal + assistant) with strict turn alternation; shared
// goal of delivering a gem to the principal, planned as one team.
DomainBundle build_multiagent_dkg(const DkgParams& params);

struct FoodtruckParams {
  GridDims grid{7, 7};
  std::vector<std::string> trucks = {"truck1", "truck2"};
  std::vector<std::string> spots = {"spot1", "spot2"};
  std::string agent = "student";
  bool allow_absent = false;
  VisibilityMode visibility = VisibilityMode::LineOfSight;
  double move_cost = 1.0;
  double eat_cost = 1.0;
  double temperature = 1.0;
};

// Partial observability: trucks are hidden in parking spots behind buildings;
// goals are eating at each truck; the belief space enumerates truck-to-spot
// assignments.
DomainBundle build_foodtruck(const FoodtruckParams& params);

struct AstronautParams {
  GridDims grid{7, 7};
  std::vector<std::string> terrains = {"white", "purple"};
  std::vector<std::string> packages = {"pkg1", "pkg2"};
  std::string agent = "astronaut";
  std::string station = "station";
  std::vector<double> cost_grid = {0.1, 1, 2, 4, 8};  // per-terrain costs
  std::vector<double> reward_values = {0, 5, 10};     // per-package rewards
  double pickup_cost = 1.0;
  double temperature = 1.0;
};

// Per-terrain movement costs (hypothesis grid over terrain costs) and
// per-package rewards (hypothesis grid over package values); goals are the
// subsets of packages collected on the way to the station.
DomainBundle build_astronaut(const AstronautParams& params);

// Dispatch on {"builtin": "dkg"|"foodtruck"|"astronaut", ...} or
// {"bundle_dir": path}.
DomainBundle build_builtin(const nlohmann::json& domain_ref);

// On-disk bundle: domain.pddl + config.json + objects.json + legend.json +
// meta.json; every built-in domain is reproducible from files alone.
void save_bundle(const DomainBundle& bundle, const std::filesystem::path& dir);
DomainBundle load_bundle(const std::filesystem::path& dir);

}  // namespace invplan
