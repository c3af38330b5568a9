#include "invplan/domains.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "invplan/validate.hpp"

namespace invplan {

// ---------------------------------------------------------------------------
// Legend

const LegendEntry* Legend::find(const std::string& symbol) const {
  auto it = entries.find(symbol);
  return it == entries.end() ? nullptr : &it->second;
}

std::string Legend::symbol_for(const std::string& object) const {
  for (const auto& [sym, entry] : entries) {
    for (const auto& o : entry.objects) {
      if (o == object) return sym;
    }
  }
  return "";
}

nlohmann::json Legend::to_json() const {
  nlohmann::json doc;
  doc["empty_symbol"] = empty_symbol;
  doc["default_terrain"] = default_terrain;
  nlohmann::json ents = nlohmann::json::object();
  for (const auto& [sym, e] : entries) {
    nlohmann::json j;
    j["objects"] = e.objects;
    if (!e.type.empty()) j["type"] = e.type;
    if (!e.category.empty()) j["category"] = e.category;
    if (!e.terrain.empty()) j["terrain"] = e.terrain;
    if (!e.on_grid_facts.empty()) {
      nlohmann::json facts = nlohmann::json::array();
      for (const auto& f : e.on_grid_facts) facts.push_back(literal_to_string(f));
      j["on_grid_facts"] = facts;
    }
    ents[sym] = std::move(j);
  }
  doc["entries"] = std::move(ents);
  return doc;
}

Legend Legend::from_json(const nlohmann::json& doc) {
  Legend legend;
  if (auto it = doc.find("empty_symbol"); it != doc.end()) {
    legend.empty_symbol = it->get<std::string>();
  }
  if (auto it = doc.find("default_terrain"); it != doc.end()) {
    legend.default_terrain = it->get<std::string>();
  }
  const auto& ents = doc.at("entries");
  for (auto it = ents.begin(); it != ents.end(); ++it) {
    LegendEntry e;
    const auto& j = it.value();
    if (auto o = j.find("objects"); o != j.end()) {
      for (const auto& name : *o) e.objects.push_back(name.get<std::string>());
    }
    if (auto t = j.find("type"); t != j.end()) e.type = t->get<std::string>();
    if (auto c = j.find("category"); c != j.end()) {
      e.category = c->get<std::string>();
    }
    if (auto t = j.find("terrain"); t != j.end()) {
      e.terrain = t->get<std::string>();
    }
    if (auto f = j.find("on_grid_facts"); f != j.end()) {
      for (const auto& s : *f) {
        e.on_grid_facts.push_back(parse_literal(s.get<std::string>()));
      }
    }
    legend.entries[it.key()] = std::move(e);
  }
  return legend;
}

ObjectTag object_tag_from_category(const std::string& category) {
  if (category == "agent") return ObjectTag::Agent;
  if (category == "unique") return ObjectTag::Unique;
  if (category == "background") return ObjectTag::Background;
  return ObjectTag::Generic;
}

// ---------------------------------------------------------------------------
// Bundle helpers

GroundedEnvironment DomainBundle::ground_env(const GroundOptions& opts) const {
  return ground(spec, objects, grid, opts);
}

void DomainBundle::apply_static_facts(const GroundedEnvironment& env,
                                      WorldState& s) const {
  for (const auto& f : static_facts) {
    env.set_bool(s, f.predicate, f.args, !f.negated);
  }
  for (const auto& f : static_int_facts) {
    env.set_int(s, f.function, f.args, f.value);
  }
}

// ---------------------------------------------------------------------------
// Shared PDDL snippets

namespace {

// Movement in 4 directions over a set of blocking matrices, optionally
// restricted to a source terrain (per-terrain action naming).
void emit_move_actions(std::ostringstream& os, const std::string& suffix,
                       const std::string& source_terrain,
                       const std::vector<std::string>& blockers,
                       const std::string& turn_guard,
                       const std::string& turn_toggle) {
  struct Dir {
    const char* name;
    const char* bound;
    const char* target_row;
    const char* target_col;
    const char* coord_effect;
  };
  const Dir dirs[] = {
      {"up", "(> (yloc ?a) 1)", "(- (yloc ?a) 1)", "(xloc ?a)",
       "(decrease (yloc ?a) 1)"},
      {"down", "(< (yloc ?a) (gridheight))", "(+ (yloc ?a) 1)", "(xloc ?a)",
       "(increase (yloc ?a) 1)"},
      {"left", "(> (xloc ?a) 1)", "(yloc ?a)", "(- (xloc ?a) 1)",
       "(decrease (xloc ?a) 1)"},
      {"right", "(< (xloc ?a) (gridwidth))", "(yloc ?a)", "(+ (xloc ?a) 1)",
       "(increase (xloc ?a) 1)"},
  };
  for (const Dir& d : dirs) {
    os << "    (:action " << d.name << suffix
       << "\n     :parameters (?a - agent)\n     :precondition (and ";
    if (!turn_guard.empty()) os << turn_guard << " ";
    os << d.bound;
    if (!source_terrain.empty()) {
      os << " (= (get-index " << source_terrain
         << " (yloc ?a) (xloc ?a)) true)";
    }
    for (const auto& b : blockers) {
      os << " (= (get-index " << b << " " << d.target_row << " "
         << d.target_col << ") false)";
    }
    os << ")\n     :effect (and " << d.coord_effect;
    if (!turn_toggle.empty()) os << " " << turn_toggle;
    os << ")\n    )\n";
  }
}

void emit_adjacency(std::ostringstream& os) {
  os << "    (:derived (at ?a - agent ?o - object) "
        "(and (= (xloc ?a) (xloc ?o)) (= (yloc ?a) (yloc ?o))))\n";
  os << "    (:derived (adjacent ?a - agent ?o - object) (or "
        "(and (= (yloc ?a) (yloc ?o)) (= (+ (xloc ?a) 1) (xloc ?o))) "
        "(and (= (yloc ?a) (yloc ?o)) (= (- (xloc ?a) 1) (xloc ?o))) "
        "(and (= (xloc ?a) (xloc ?o)) (= (+ (yloc ?a) 1) (yloc ?o))) "
        "(and (= (xloc ?a) (xloc ?o)) (= (- (yloc ?a) 1) (yloc ?o)))))\n";
}

std::string gem_symbol(const std::string& name) {
  if (name.rfind("gem", 0) == 0 && name.size() > 3) return name.substr(3);
  return name;
}

}  // namespace

// ---------------------------------------------------------------------------
// Doors, Keys, Gems

DkgVariant dkg_variant_from_string(const std::string& s) {
  if (s == "single") return DkgVariant::Single;
  if (s == "double") return DkgVariant::Double;
  if (s == "reuse") return DkgVariant::Reuse;
  if (s == "inverse") return DkgVariant::Inverse;
  throw SchemaError("unknown dkg variant '" + s + "'");
}

std::string dkg_variant_name(DkgVariant v) {
  switch (v) {
    case DkgVariant::Single: return "single";
    case DkgVariant::Double: return "double";
    case DkgVariant::Reuse: return "reuse";
    case DkgVariant::Inverse: return "inverse";
  }
  return "?";
}

DomainBundle build_dkg(const DkgParams& params_in) {
  DkgParams params = params_in;
  if (params.keys.empty()) params.keys = {{"key1", params.colors.front()}};
  if (params.doors.empty()) params.doors = {{"door1", params.colors.front()}};
  if (params.variant == DkgVariant::Inverse && params.inverse_mapping.empty()) {
    throw SchemaError(
        "dkg inverse requires an explicit key-color -> door-color bijection");
  }

  bool multi = params.multiagent;
  std::string turn_guard = multi ? "(= (turn) (agentcode ?a))" : "";
  std::string turn_toggle = multi ? "(assign (turn) (- 1 (turn)))" : "";

  std::ostringstream os;
  os << "(define (domain dkg-" << dkg_variant_name(params.variant)
     << (multi ? "-team" : "") << ")\n";
  os << "    (:requirements :fluents :adl :typing)\n";
  os << "    (:types\n        key gem - item\n        item door agent - "
        "object\n        color\n    )\n";
  os << "    (:predicates\n"
        "        (has ?a - agent ?i - item)\n"
        "        (at ?a - agent ?o - object)\n"
        "        (adjacent ?a - agent ?o - object)\n"
        "        (iscolor ?o - object ?c - color)\n"
        "        (locked ?d - door)\n";
  if (params.variant == DkgVariant::Inverse) {
    os << "        (keyunlocks ?kc - color ?dc - color)\n";
  }
  os << "    )\n";
  os << "    (:constants\n       ";
  for (const auto& c : params.colors) os << " " << c;
  os << " - color\n    )\n";
  os << "    (:functions\n"
        "        (gridheight) - integer\n"
        "        (gridwidth) - integer\n"
        "        (xloc ?o - object) (yloc ?o - object) - integer\n"
        "        (keyid ?k - key) - integer\n";
  if (multi) {
    os << "        (agentcode ?a - agent) - integer\n"
          "        (turn) - integer\n";
  }
  os << "        (wall) (doorcell) - bit-matrix\n    )\n";
  emit_adjacency(os);

  emit_move_actions(os, "", "", {"wall", "doorcell"}, turn_guard, turn_toggle);

  auto emit_pickup = [&](const std::string& name, const std::string& item_type,
                         const std::string& extra_guard) {
    os << "    (:action " << name
       << "\n     :parameters (?a - agent ?i - " << item_type
       << ")\n     :precondition (and ";
    if (!turn_guard.empty()) os << turn_guard << " ";
    if (!extra_guard.empty()) os << extra_guard << " ";
    os << "(not (has ?a ?i)) (or (at ?a ?i) (adjacent ?a ?i)))\n"
          "     :effect (and (has ?a ?i) "
          "(assign (xloc ?i) -1) (assign (yloc ?i) -1)";
    if (!turn_toggle.empty()) os << " " << turn_toggle;
    os << ")\n    )\n";
  };
  if (multi) {
    emit_pickup("pickup-key", "key", "");
    emit_pickup("pickup-gem", "gem",
                params.assistant_carries_gems ? "" : "(= (agentcode ?a) 0)");
  } else {
    emit_pickup("pickup", "item", "");
  }

  // Unlock semantics per variant.
  os << "    (:action unlock\n     :parameters (?a - agent ?d - door ?k - key";
  if (params.variant == DkgVariant::Double) os << " ?k2 - key";
  if (params.variant == DkgVariant::Inverse) {
    os << " ?kc - color ?dc - color";
  } else {
    os << " ?c - color";
  }
  os << ")\n     :precondition (and ";
  if (!turn_guard.empty()) os << turn_guard << " ";
  os << "(locked ?d) (adjacent ?a ?d) (has ?a ?k)";
  switch (params.variant) {
    case DkgVariant::Single:
    case DkgVariant::Reuse:
      os << " (iscolor ?k ?c) (iscolor ?d ?c)";
      break;
    case DkgVariant::Double:
      os << " (has ?a ?k2) (< (keyid ?k) (keyid ?k2)) (iscolor ?k ?c) "
            "(iscolor ?k2 ?c) (iscolor ?d ?c)";
      break;
    case DkgVariant::Inverse:
      os << " (iscolor ?k ?kc) (iscolor ?d ?dc) (keyunlocks ?kc ?dc)";
      break;
  }
  os << ")\n     :effect (and (not (locked ?d)) "
        "(assign (get-index doorcell (yloc ?d) (xloc ?d)) false) "
        "(assign (xloc ?d) -1) (assign (yloc ?d) -1)";
  if (params.variant != DkgVariant::Reuse) os << " (not (has ?a ?k))";
  if (params.variant == DkgVariant::Double) os << " (not (has ?a ?k2))";
  if (!turn_toggle.empty()) os << " " << turn_toggle;
  os << ")\n    )\n";

  if (multi) {
    os << "    (:action wait\n     :parameters (?a - agent)\n"
          "     :precondition (and "
       << turn_guard << ")\n     :effect (and " << turn_toggle << ")\n    )\n";
  }
  os << ")\n";

  DomainBundle bundle;
  bundle.name = std::string("dkg_") + dkg_variant_name(params.variant) +
                (multi ? "_team" : "");
  bundle.pddl_text = os.str();
  bundle.spec = parse_domain(bundle.pddl_text);
  ValidationReport report = validate_domain(bundle.spec);
  if (!report.valid()) {
    throw InternalError("generated dkg domain is invalid:\n" +
                        report.summary());
  }
  bundle.grid = params.grid;
  bundle.use_manhattan = true;

  bundle.objects.add(params.agent, "agent", ObjectTag::Agent);
  if (multi) bundle.objects.add(params.assistant, "agent", ObjectTag::Agent);
  for (const auto& [name, color] : params.keys) {
    bundle.objects.add(name, "key");
    bundle.static_facts.push_back({"iscolor", {name, color}, false});
  }
  for (const auto& [name, color] : params.doors) {
    bundle.objects.add(name, "door");
    bundle.static_facts.push_back({"iscolor", {name, color}, false});
  }
  for (const auto& name : params.gems) {
    bundle.objects.add(name, "gem", ObjectTag::Unique);
  }
  for (std::size_t i = 0; i < params.keys.size(); ++i) {
    bundle.static_int_facts.push_back(
        {"keyid", {params.keys[i].first}, static_cast<long long>(i + 1)});
  }
  if (multi) {
    bundle.static_int_facts.push_back({"agentcode", {params.agent}, 0});
    bundle.static_int_facts.push_back({"agentcode", {params.assistant}, 1});
  }
  if (params.variant == DkgVariant::Inverse) {
    std::set<std::string> mapped_doors;
    for (const auto& [kc, dc] : params.inverse_mapping) {
      if (!mapped_doors.insert(dc).second) {
        throw SchemaError("inverse mapping must be a bijection");
      }
      bundle.static_facts.push_back({"keyunlocks", {kc, dc}, false});
    }
  }

  // Default agent config: uniform prior over one goal per gem.
  AgentConfig cfg;
  cfg.grid_size = params.grid;
  cfg.partial = false;
  for (const auto& gem : params.gems) {
    GoalSpec g;
    g.literals.push_back({"has", {params.agent, gem}, false});
    g.label = gem;
    cfg.goals.push_back(std::move(g));
  }
  CostProfile costs;
  costs.label = "default";
  for (const char* m : {"up", "down", "left", "right"}) {
    costs.costs[m] = microcost_from_double(params.move_cost);
  }
  if (multi) {
    costs.costs["pickup-key"] = microcost_from_double(params.pickup_cost);
    costs.costs["pickup-gem"] = microcost_from_double(params.pickup_cost);
    costs.costs["wait"] = microcost_from_double(params.wait_cost);
  } else {
    costs.costs["pickup"] = microcost_from_double(params.pickup_cost);
  }
  costs.costs["unlock"] = microcost_from_double(params.unlock_cost);
  cfg.costs.push_back(std::move(costs));
  cfg.query.push_back(QueryKind::Goal);
  cfg.temperature = params.temperature;
  bundle.config = std::move(cfg);

  // Default cell legend.
  Legend legend;
  legend.empty_symbol = ".";
  legend.entries["#"] = {{}, "", "background", "wall", {}};
  legend.entries["@"] = {{params.agent}, "agent", "agent", "", {}};
  if (multi) {
    legend.entries["&"] = {{params.assistant}, "agent", "agent", "", {}};
  }
  for (const auto& name : params.gems) {
    legend.entries[gem_symbol(name)] = {{name}, "gem", "unique", "", {}};
  }
  for (std::size_t i = 0; i < params.keys.size(); ++i) {
    legend.entries["k" + std::to_string(i + 1)] = {
        {params.keys[i].first}, "key", "generic", "", {}};
  }
  for (std::size_t i = 0; i < params.doors.size(); ++i) {
    LegendEntry e{{params.doors[i].first}, "door", "generic", "doorcell", {}};
    e.on_grid_facts.push_back({"locked", {params.doors[i].first}, false});
    legend.entries["d" + std::to_string(i + 1)] = std::move(e);
  }
  bundle.legend = std::move(legend);
  return bundle;
}

DomainBundle build_multiagent_dkg(const DkgParams& params_in) {
  DkgParams params = params_in;
  params.multiagent = true;
  return build_dkg(params);
}

// ---------------------------------------------------------------------------
// Food trucks

DomainBundle build_foodtruck(const FoodtruckParams& params) {
  if (params.trucks.empty()) throw SchemaError("foodtruck: need >= 1 truck");
  if (params.spots.size() < params.trucks.size()) {
    throw SchemaError("foodtruck: need at least as many spots as trucks");
  }
  std::ostringstream os;
  os << "(define (domain foodtruck)\n"
        "    (:requirements :fluents :adl :typing)\n"
        "    (:types\n        truck spot agent - object\n    )\n"
        "    (:predicates\n"
        "        (ate ?a - agent ?t - truck)\n"
        "        (at ?a - agent ?o - object)\n"
        "        (adjacent ?a - agent ?o - object)\n"
        "    )\n"
        "    (:functions\n"
        "        (gridheight) - integer\n"
        "        (gridwidth) - integer\n"
        "        (xloc ?o - object) (yloc ?o - object) - integer\n"
        "        (building) - bit-matrix\n    )\n";
  emit_adjacency(os);
  emit_move_actions(os, "", "", {"building"}, "", "");
  os << "    (:action eat\n     :parameters (?a - agent ?t - truck)\n"
        "     :precondition (and (at ?a ?t) (not (ate ?a ?t)))\n"
        "     :effect (and (ate ?a ?t))\n    )\n";
  os << ")\n";

  DomainBundle bundle;
  bundle.name = "foodtruck";
  bundle.pddl_text = os.str();
  bundle.spec = parse_domain(bundle.pddl_text);
  bundle.grid = params.grid;
  bundle.use_manhattan = false;  // eat-goals carry no coordinate lower bound

  bundle.objects.add(params.agent, "agent", ObjectTag::Agent);
  for (const auto& t : params.trucks) bundle.objects.add(t, "truck");
  for (const auto& s : params.spots) {
    bundle.objects.add(s, "spot", ObjectTag::Background);
  }

  AgentConfig cfg;
  cfg.grid_size = params.grid;
  cfg.partial = true;
  BeliefConfig bc;
  bc.belief_object = "truck";
  bc.belief_container = "spot";
  bc.barrier = "building";
  bc.agent = params.agent;
  bc.visibility = params.visibility;
  bc.hidden_objects = params.trucks;  // hidden regardless of the true frame
  bc.allow_absent = params.allow_absent;
  cfg.belief = std::move(bc);
  for (const auto& t : params.trucks) {
    GoalSpec g;
    g.literals.push_back({"ate", {params.agent, t}, false});
    g.label = t;
    cfg.goals.push_back(std::move(g));
  }
  CostProfile costs;
  costs.label = "default";
  for (const char* m : {"up", "down", "left", "right"}) {
    costs.costs[m] = microcost_from_double(params.move_cost);
  }
  costs.costs["eat"] = microcost_from_double(params.eat_cost);
  cfg.costs.push_back(std::move(costs));
  cfg.query = {QueryKind::Belief, QueryKind::Goal};
  cfg.temperature = params.temperature;
  bundle.config = std::move(cfg);

  Legend legend;
  legend.empty_symbol = ".";
  legend.entries["#"] = {{}, "", "background", "building", {}};
  legend.entries["@"] = {{params.agent}, "agent", "agent", "", {}};
  for (std::size_t i = 0; i < params.spots.size(); ++i) {
    legend.entries["s" + std::to_string(i + 1)] = {
        {params.spots[i]}, "spot", "background", "", {}};
  }
  bundle.legend = std::move(legend);
  return bundle;
}

// ---------------------------------------------------------------------------
// Astronaut

DomainBundle build_astronaut(const AstronautParams& params) {
  if (params.terrains.size() < 2) {
    throw SchemaError("astronaut: need >= 2 terrain types");
  }
  std::ostringstream os;
  os << "(define (domain astronaut)\n"
        "    (:requirements :fluents :adl :typing)\n"
        "    (:types\n        package station agent - object\n    )\n"
        "    (:predicates\n"
        "        (has ?a - agent ?p - package)\n"
        "        (at ?a - agent ?o - object)\n"
        "        (adjacent ?a - agent ?o - object)\n"
        "    )\n"
        "    (:functions\n"
        "        (gridheight) - integer\n"
        "        (gridwidth) - integer\n"
        "        (xloc ?o - object) (yloc ?o - object) - integer\n"
        "       ";
  for (const auto& t : params.terrains) os << " (" << t << ")";
  os << " - bit-matrix\n    )\n";
  emit_adjacency(os);
  // Movement cost depends on the terrain the agent stands on, so each terrain
  // gets its own action family.
  for (const auto& t : params.terrains) {
    emit_move_actions(os, "-" + t, t, {}, "", "");
  }
  os << "    (:action pickup\n     :parameters (?a - agent ?p - package)\n"
        "     :precondition (and (not (has ?a ?p)) "
        "(or (at ?a ?p) (adjacent ?a ?p)))\n"
        "     :effect (and (has ?a ?p) (assign (xloc ?p) -1) "
        "(assign (yloc ?p) -1))\n    )\n";
  os << ")\n";

  DomainBundle bundle;
  bundle.name = "astronaut";
  bundle.pddl_text = os.str();
  bundle.spec = parse_domain(bundle.pddl_text);
  bundle.grid = params.grid;
  bundle.use_manhattan = true;

  bundle.objects.add(params.agent, "agent", ObjectTag::Agent);
  bundle.objects.add(params.station, "station", ObjectTag::Unique);
  for (const auto& p : params.packages) {
    bundle.objects.add(p, "package", ObjectTag::Unique);
  }

  AgentConfig cfg;
  cfg.grid_size = params.grid;
  cfg.partial = false;
  // Goals: reach the station having collected each subset of packages.
  std::size_t n = params.packages.size();
  std::size_t n_subsets = std::size_t{1} << n;
  for (std::size_t mask = 0; mask < n_subsets; ++mask) {
    GoalSpec g;
    g.literals.push_back({"at", {params.agent, params.station}, false});
    std::string label = params.station;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::size_t{1} << i)) {
        g.literals.push_back(
            {"has", {params.agent, params.packages[i]}, false});
        label += "+" + params.packages[i];
      }
    }
    g.label = label;
    cfg.goals.push_back(std::move(g));
  }
  // Reward profiles: one per combination of per-package values; the reward of
  // a goal is the sum over the packages it collects.
  std::vector<RewardProfile> rewards;
  std::vector<std::size_t> idx(n, 0);
  for (;;) {
    RewardProfile rp;
    std::string label;
    for (std::size_t i = 0; i < n; ++i) {
      double v = params.reward_values[idx[i]];
      rp.components[params.packages[i]] = v;
      if (i) label += ",";
      label += params.packages[i] + "=" + std::to_string(v);
    }
    rp.label = label;
    for (std::size_t mask = 0; mask < n_subsets; ++mask) {
      double sum = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (mask & (std::size_t{1} << i)) sum += params.reward_values[idx[i]];
      }
      rp.goal_rewards.push_back(sum);
    }
    rewards.push_back(std::move(rp));
    if (n == 0) break;
    std::size_t k = 0;
    while (k < n && ++idx[k] == params.reward_values.size()) {
      idx[k] = 0;
      ++k;
    }
    if (k == n) break;
  }
  cfg.rewards = std::move(rewards);
  // Cost profiles: one per combination of per-terrain movement costs.
  std::size_t m = params.terrains.size();
  std::vector<std::size_t> cidx(m, 0);
  for (;;) {
    CostProfile cp;
    std::string label;
    for (std::size_t i = 0; i < m; ++i) {
      double v = params.cost_grid[cidx[i]];
      for (const char* d : {"up", "down", "left", "right"}) {
        cp.costs[std::string(d) + "-" + params.terrains[i]] =
            microcost_from_double(v);
      }
      if (i) label += ",";
      label += params.terrains[i] + "=" + std::to_string(v);
    }
    cp.costs["pickup"] = microcost_from_double(params.pickup_cost);
    cp.label = label;
    cfg.costs.push_back(std::move(cp));
    std::size_t k = 0;
    while (k < m && ++cidx[k] == params.cost_grid.size()) {
      cidx[k] = 0;
      ++k;
    }
    if (k == m) break;
  }
  cfg.query = {QueryKind::Cost, QueryKind::Reward};
  cfg.temperature = params.temperature;
  bundle.config = std::move(cfg);

  Legend legend;
  legend.empty_symbol = ".";
  legend.default_terrain = params.terrains.front();
  for (std::size_t i = 1; i < params.terrains.size(); ++i) {
    const char* syms[] = {"*", "%", "~"};
    if (i - 1 < 3) {
      legend.entries[syms[i - 1]] = {
          {}, "", "background", params.terrains[i], {}};
    }
  }
  legend.entries["@"] = {{params.agent}, "agent", "agent", "", {}};
  legend.entries["S"] = {{params.station}, "station", "unique", "", {}};
  for (std::size_t i = 0; i < params.packages.size(); ++i) {
    legend.entries["P" + std::to_string(i + 1)] = {
        {params.packages[i]}, "package", "unique", "", {}};
  }
  bundle.legend = std::move(legend);
  return bundle;
}

// ---------------------------------------------------------------------------
// Dispatch and persistence

DomainBundle build_builtin(const nlohmann::json& ref) {
  if (ref.is_string()) {
    return build_builtin(nlohmann::json{{"builtin", ref.get<std::string>()}});
  }
  if (auto dir = ref.find("bundle_dir"); dir != ref.end()) {
    return load_bundle(dir->get<std::string>());
  }
  std::string builtin = ref.at("builtin").get<std::string>();
  GridDims grid{7, 7};
  if (auto g = ref.find("grid"); g != ref.end()) {
    grid = {(*g)[0].get<int>(), (*g)[1].get<int>()};
  }
  auto get_names = [&](const char* field, std::vector<std::string> defaults) {
    if (auto it = ref.find(field); it != ref.end()) {
      std::vector<std::string> out;
      for (const auto& v : *it) out.push_back(v.get<std::string>());
      return out;
    }
    return defaults;
  };
  auto get_pairs = [&](const char* field) {
    std::vector<std::pair<std::string, std::string>> out;
    if (auto it = ref.find(field); it != ref.end()) {
      for (const auto& v : *it) {
        out.emplace_back(v[0].get<std::string>(), v[1].get<std::string>());
      }
    }
    return out;
  };

  if (builtin == "dkg") {
    DkgParams p;
    p.grid = grid;
    if (auto v = ref.find("variant"); v != ref.end()) {
      std::string name = v->get<std::string>();
      if (name == "multiagent") {
        p.multiagent = true;
      } else {
        p.variant = dkg_variant_from_string(name);
      }
    }
    if (auto v = ref.find("multiagent"); v != ref.end()) {
      p.multiagent = v->get<bool>();
    }
    p.colors = get_names("colors", p.colors);
    p.gems = get_names("gems", p.gems);
    auto keys = get_pairs("keys");
    if (!keys.empty()) p.keys = keys;
    auto doors = get_pairs("doors");
    if (!doors.empty()) p.doors = doors;
    if (auto m2 = ref.find("inverse_mapping"); m2 != ref.end()) {
      for (auto it = m2->begin(); it != m2->end(); ++it) {
        p.inverse_mapping[it.key()] = it.value().get<std::string>();
      }
    }
    if (auto a = ref.find("agent"); a != ref.end()) {
      p.agent = a->get<std::string>();
    }
    if (auto t = ref.find("temperature"); t != ref.end()) {
      p.temperature = t->get<double>();
    }
    if (auto f = ref.find("assistant_carries_gems"); f != ref.end()) {
      p.assistant_carries_gems = f->get<bool>();
    }
    return p.multiagent ? build_multiagent_dkg(p) : build_dkg(p);
  }
  if (builtin == "foodtruck") {
    FoodtruckParams p;
    p.grid = grid;
    p.trucks = get_names("trucks", p.trucks);
    p.spots = get_names("spots", p.spots);
    if (auto a = ref.find("agent"); a != ref.end()) {
      p.agent = a->get<std::string>();
    }
    if (auto v = ref.find("allow_absent"); v != ref.end()) {
      p.allow_absent = v->get<bool>();
    }
    if (auto v = ref.find("visibility"); v != ref.end()) {
      p.visibility = v->get<std::string>() == "region"
                         ? VisibilityMode::Region
                         : VisibilityMode::LineOfSight;
    }
    if (auto t = ref.find("temperature"); t != ref.end()) {
      p.temperature = t->get<double>();
    }
    return build_foodtruck(p);
  }
  if (builtin == "astronaut") {
    AstronautParams p;
    p.grid = grid;
    p.terrains = get_names("terrains", p.terrains);
    p.packages = get_names("packages", p.packages);
    if (auto a = ref.find("agent"); a != ref.end()) {
      p.agent = a->get<std::string>();
    }
    if (auto v = ref.find("cost_grid"); v != ref.end()) {
      p.cost_grid.clear();
      for (const auto& x : *v) p.cost_grid.push_back(x.get<double>());
    }
    if (auto v = ref.find("reward_values"); v != ref.end()) {
      p.reward_values.clear();
      for (const auto& x : *v) p.reward_values.push_back(x.get<double>());
    }
    if (auto t = ref.find("temperature"); t != ref.end()) {
      p.temperature = t->get<double>();
    }
    return build_astronaut(p);
  }
  throw SchemaError("unknown builtin domain '" + builtin + "'");
}

void save_bundle(const DomainBundle& bundle,
                 const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "domain.pddl");
    out << bundle.pddl_text;
  }
  {
    std::ofstream out(dir / "config.json");
    out << agent_config_to_json(bundle.config).dump(2) << "\n";
  }
  {
    nlohmann::json objs = nlohmann::json::array();
    for (const auto& e : bundle.objects.entries) {
      const char* tag = e.tag == ObjectTag::Agent        ? "agent"
                        : e.tag == ObjectTag::Unique     ? "unique"
                        : e.tag == ObjectTag::Background ? "background"
                                                         : "generic";
      objs.push_back({{"name", e.name}, {"type", e.type}, {"tag", tag}});
    }
    std::ofstream out(dir / "objects.json");
    out << objs.dump(2) << "\n";
  }
  {
    std::ofstream out(dir / "legend.json");
    out << bundle.legend.to_json().dump(2) << "\n";
  }
  {
    nlohmann::json meta;
    meta["name"] = bundle.name;
    meta["grid"] = {bundle.grid.rows, bundle.grid.cols};
    meta["use_manhattan"] = bundle.use_manhattan;
    nlohmann::json facts = nlohmann::json::array();
    for (const auto& f : bundle.static_facts) {
      facts.push_back(literal_to_string(f));
    }
    meta["static_facts"] = std::move(facts);
    nlohmann::json ifacts = nlohmann::json::array();
    for (const auto& f : bundle.static_int_facts) {
      ifacts.push_back(
          {{"function", f.function}, {"args", f.args}, {"value", f.value}});
    }
    meta["static_int_facts"] = std::move(ifacts);
    std::ofstream out(dir / "meta.json");
    out << meta.dump(2) << "\n";
  }
}

namespace {

nlohmann::json read_json_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw UserError("cannot open " + p.string());
  return nlohmann::json::parse(in);
}

}  // namespace

DomainBundle load_bundle(const std::filesystem::path& dir) {
  DomainBundle bundle;
  {
    std::ifstream in(dir / "domain.pddl");
    if (!in) throw UserError("cannot open " + (dir / "domain.pddl").string());
    std::ostringstream os;
    os << in.rdbuf();
    bundle.pddl_text = os.str();
  }
  bundle.spec = parse_domain(bundle.pddl_text);
  bundle.config = parse_agent_config(read_json_file(dir / "config.json"));
  for (const auto& o : read_json_file(dir / "objects.json")) {
    bundle.objects.add(
        o.at("name").get<std::string>(), o.at("type").get<std::string>(),
        object_tag_from_category(o.at("tag").get<std::string>()));
  }
  bundle.legend = Legend::from_json(read_json_file(dir / "legend.json"));
  nlohmann::json meta = read_json_file(dir / "meta.json");
  bundle.name = meta.at("name").get<std::string>();
  bundle.grid = {meta.at("grid")[0].get<int>(), meta.at("grid")[1].get<int>()};
  bundle.use_manhattan = meta.value("use_manhattan", false);
  for (const auto& f : meta.at("static_facts")) {
    bundle.static_facts.push_back(parse_literal(f.get<std::string>()));
  }
  for (const auto& f : meta.at("static_int_facts")) {
    DomainBundle::IntFact fact;
    fact.function = f.at("function").get<std::string>();
    for (const auto& a : f.at("args")) {
      fact.args.push_back(a.get<std::string>());
    }
    fact.value = f.at("value").get<long long>();
    bundle.static_int_facts.push_back(std::move(fact));
  }
  return bundle;
}

}  // namespace invplan
