#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "invplan/agent.hpp"

namespace invplan {

// Maps one grid-cell symbol to its decoded content.
struct LegendEntry {
  std::vector<std::string> objects;  // object instances drawn by this symbol
  std::string type;                  // pddl type of those objects
  std::string category;              // generic | unique | background | agent
  std::string terrain;               // bit-matrix set true at the cell, or ""
  // Facts asserted while the symbol is on the grid (e.g. locked(door1)).
  std::vector<GoalSpec::Literal> on_grid_facts;
};

struct Legend {
  std::map<std::string, LegendEntry> entries;
  std::string empty_symbol = ".";
  std::string default_terrain;  // terrain for cells without an explicit one

  const LegendEntry* find(const std::string& symbol) const;
  // Reverse lookup: the unique symbol drawing an object, or "".
  std::string symbol_for(const std::string& object) const;

  nlohmann::json to_json() const;
  static Legend from_json(const nlohmann::json& doc);
};

ObjectTag object_tag_from_category(const std::string& category);

}  // namespace invplan
