#include "invplan/stimulus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace invplan {

// ---------------------------------------------------------------------------
// Parsing

QuerySpec parse_query_spec(const nlohmann::json& doc) {
  QuerySpec q;
  if (!doc.is_array()) throw SchemaError("query must be an array");
  for (const auto& part : doc) {
    SubQuery sub;
    if (part.is_string()) {
      std::string kind = part.get<std::string>();
      if (kind == "goal" || kind == "goals") {
        sub.kind = QueryKind::Goal;
      } else if (kind == "belief" || kind == "beliefs") {
        sub.kind = QueryKind::Belief;
      } else if (kind == "reward" || kind == "rewards") {
        sub.kind = QueryKind::Reward;
      } else if (kind == "cost" || kind == "costs") {
        sub.kind = QueryKind::Cost;
      } else {
        throw SchemaError("unknown query kind '" + kind + "'");
      }
    } else if (part.is_object()) {
      sub = parse_query_spec(nlohmann::json::array({part.at("kind")})).parts[0];
      if (auto s = part.find("subjects"); s != part.end()) {
        for (const auto& v : *s) sub.subjects.push_back(v.get<std::string>());
      }
    } else {
      throw SchemaError("query entries must be strings or objects");
    }
    q.parts.push_back(std::move(sub));
  }
  return q;
}

nlohmann::json query_spec_to_json(const QuerySpec& q) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& part : q.parts) {
    nlohmann::json p;
    p["kind"] = query_kind_name(part.kind);
    if (!part.subjects.empty()) p["subjects"] = part.subjects;
    arr.push_back(std::move(p));
  }
  return arr;
}

Stimulus parse_stimulus(const nlohmann::json& doc) {
  Stimulus stim;
  stim.id = doc.at("id").get<std::string>();
  stim.domain_ref = doc.at("domain");
  const auto& gs = doc.at("grid_size");
  stim.grid = {gs.at(0).get<int>(), gs.at(1).get<int>()};
  if (stim.grid.rows <= 0 || stim.grid.cols <= 0) {
    throw SchemaError("stimulus grid_size must be positive");
  }
  stim.legend = Legend::from_json(doc.at("legend"));

  const auto& frames = doc.at("frames");
  if (!frames.is_array() || frames.empty()) {
    throw SchemaError("stimulus needs at least one frame");
  }
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const auto& fj = frames[t];
    FrameGrid frame;
    const auto& grid = fj.is_object() ? fj.at("grid") : fj;
    if (!grid.is_array() || static_cast<int>(grid.size()) != stim.grid.rows) {
      throw SchemaError("frame " + std::to_string(t) + " has " +
                        std::to_string(grid.size()) + " rows, expected " +
                        std::to_string(stim.grid.rows));
    }
    for (const auto& row : grid) {
      std::vector<std::string> cells;
      if (!row.is_array() || static_cast<int>(row.size()) != stim.grid.cols) {
        throw SchemaError("frame " + std::to_string(t) +
                          " is ragged or has the wrong width");
      }
      for (const auto& sym : row) cells.push_back(sym.get<std::string>());
      frame.cells.push_back(std::move(cells));
    }
    if (fj.is_object()) {
      if (auto of = fj.find("overflow"); of != fj.end()) {
        for (auto it = of->begin(); it != of->end(); ++it) {
          std::string key = it.key();
          auto comma = key.find(',');
          if (comma == std::string::npos) {
            throw SchemaError("overflow keys must be \"row,col\"");
          }
          int y = std::stoi(key.substr(0, comma));
          int x = std::stoi(key.substr(comma + 1));
          std::vector<std::string> syms;
          for (const auto& s : it.value()) syms.push_back(s.get<std::string>());
          frame.overflow[{y, x}] = std::move(syms);
        }
      }
      if (auto tn = fj.find("turn"); tn != fj.end() && !tn->is_null()) {
        frame.turn = tn->get<int>();
      }
    }
    stim.frames.push_back(std::move(frame));
  }

  // Every symbol must be covered by the legend.
  for (std::size_t t = 0; t < stim.frames.size(); ++t) {
    const FrameGrid& f = stim.frames[t];
    auto check = [&](const std::string& sym, int y, int x) {
      if (sym == stim.legend.empty_symbol) return;
      if (stim.legend.find(sym) == nullptr) {
        throw SchemaError("frame " + std::to_string(t) + ": unknown symbol '" +
                          sym + "' at cell (" + std::to_string(y) + "," +
                          std::to_string(x) + ")");
      }
    };
    for (int y = 1; y <= f.rows(); ++y) {
      for (int x = 1; x <= f.cols(); ++x) check(f.cells[y - 1][x - 1], y, x);
    }
    for (const auto& [cell, syms] : f.overflow) {
      for (const auto& s : syms) check(s, cell.first, cell.second);
    }
  }

  if (auto hp = doc.find("hidden_placements"); hp != doc.end()) {
    for (auto it = hp->begin(); it != hp->end(); ++it) {
      stim.hidden_placements[it.key()] = it.value().get<std::string>();
    }
  }
  if (auto q = doc.find("query"); q != doc.end()) {
    stim.query = parse_query_spec(*q);
  }
  if (auto s = doc.find("scenario"); s != doc.end()) {
    stim.scenario = s->get<std::string>();
  }
  if (auto c = doc.find("agent_config"); c != doc.end() && !c->is_null()) {
    stim.agent_config = *c;
  }
  return stim;
}

Stimulus load_stimulus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UserError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  try {
    return parse_stimulus(doc);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

nlohmann::json stimulus_to_json(const Stimulus& stim) {
  nlohmann::json doc;
  doc["schema_version"] = 1;
  doc["id"] = stim.id;
  doc["domain"] = stim.domain_ref;
  doc["grid_size"] = {stim.grid.rows, stim.grid.cols};
  doc["legend"] = stim.legend.to_json();
  nlohmann::json frames = nlohmann::json::array();
  for (const auto& f : stim.frames) {
    nlohmann::json fj;
    nlohmann::json grid = nlohmann::json::array();
    for (const auto& row : f.cells) grid.push_back(row);
    fj["grid"] = std::move(grid);
    if (!f.overflow.empty()) {
      nlohmann::json of = nlohmann::json::object();
      for (const auto& [cell, syms] : f.overflow) {
        of[std::to_string(cell.first) + "," + std::to_string(cell.second)] =
            syms;
      }
      fj["overflow"] = std::move(of);
    }
    if (f.turn) fj["turn"] = *f.turn;
    frames.push_back(std::move(fj));
  }
  doc["frames"] = std::move(frames);
  if (!stim.hidden_placements.empty()) {
    doc["hidden_placements"] = stim.hidden_placements;
  }
  if (!stim.query.parts.empty()) {
    doc["query"] = query_spec_to_json(stim.query);
  }
  if (!stim.scenario.empty()) doc["scenario"] = stim.scenario;
  if (stim.agent_config) doc["agent_config"] = *stim.agent_config;
  return doc;
}

// ---------------------------------------------------------------------------
// Frame decoding

namespace {

struct VisibleFrame {
  std::map<std::string, std::pair<int, int>> placements;  // object -> (x, y)
  std::map<std::string, BitMatrix> mats;
  std::vector<GoalSpec::Literal> facts;
  std::optional<int> turn;
};

std::set<std::string> covered_terrains(const Legend& legend) {
  std::set<std::string> out;
  for (const auto& [sym, e] : legend.entries) {
    if (!e.terrain.empty()) out.insert(e.terrain);
  }
  if (!legend.default_terrain.empty()) out.insert(legend.default_terrain);
  return out;
}

std::set<std::string> drawable_objects(const Legend& legend) {
  std::set<std::string> out;
  for (const auto& [sym, e] : legend.entries) {
    for (const auto& o : e.objects) out.insert(o);
  }
  return out;
}

// Per-cell decoding: each cell is interpreted independently from its symbols
// (main + overflow) and merged into the frame view.
VisibleFrame decode_frame(const Legend& legend, const FrameGrid& frame,
                          GridDims grid) {
  VisibleFrame out;
  out.turn = frame.turn;
  for (const auto& t : covered_terrains(legend)) {
    out.mats.emplace(t, BitMatrix(grid.rows, grid.cols));
  }
  for (int y = 1; y <= grid.rows; ++y) {
    for (int x = 1; x <= grid.cols; ++x) {
      std::vector<std::string> symbols;
      const std::string& main = frame.cells[y - 1][x - 1];
      if (main != legend.empty_symbol) symbols.push_back(main);
      if (auto it = frame.overflow.find({y, x}); it != frame.overflow.end()) {
        for (const auto& s : it->second) symbols.push_back(s);
      }
      std::set<std::string> terrains;
      for (const auto& sym : symbols) {
        const LegendEntry* entry = legend.find(sym);
        if (entry == nullptr) {
          throw SchemaError("unknown symbol '" + sym + "' at cell (" +
                            std::to_string(y) + "," + std::to_string(x) + ")");
        }
        for (const auto& obj : entry->objects) {
          auto [it2, fresh] = out.placements.emplace(obj, std::make_pair(x, y));
          if (!fresh && it2->second != std::make_pair(x, y)) {
            throw SchemaError("object '" + obj +
                              "' appears in two cells of one frame");
          }
        }
        for (const auto& f : entry->on_grid_facts) out.facts.push_back(f);
        if (!entry->terrain.empty()) terrains.insert(entry->terrain);
      }
      if (terrains.empty() && !legend.default_terrain.empty()) {
        terrains.insert(legend.default_terrain);
      }
      for (const auto& t : terrains) out.mats.at(t).set(y, x, true);
    }
  }
  return out;
}

bool on_grid(const GroundedEnvironment& env, long long x, long long y) {
  return x >= 1 && x <= env.grid().cols && y >= 1 && y <= env.grid().rows;
}

// Does the state's visible part equal the decoded frame? Hidden fluents
// (held objects, beliefs about absent things) are unconstrained.
bool visible_match(const GroundedEnvironment& env, const WorldState& s,
                   const VisibleFrame& target,
                   const std::set<std::string>& drawable) {
  for (const auto& obj : drawable) {
    long long x = env.get_int(s, "xloc", {obj});
    long long y = env.get_int(s, "yloc", {obj});
    auto it = target.placements.find(obj);
    if (it == target.placements.end()) {
      if (on_grid(env, x, y)) return false;  // state shows it, frame does not
    } else if (x != it->second.first || y != it->second.second) {
      return false;
    }
  }
  for (const auto& [name, bm] : target.mats) {
    if (!(s.mats[env.mat_id(name)] == bm)) return false;
  }
  for (const auto& f : target.facts) {
    if (env.get_bool(s, f.predicate, f.args) == f.negated) return false;
  }
  if (target.turn && env.spec().find_function("turn") != nullptr) {
    if (env.get_int(s, "turn", {}) != *target.turn) return false;
  }
  return true;
}

std::string describe_mismatch(const GroundedEnvironment& env,
                              const WorldState& s, const VisibleFrame& target,
                              const std::set<std::string>& drawable) {
  std::ostringstream os;
  for (const auto& obj : drawable) {
    long long x = env.get_int(s, "xloc", {obj});
    long long y = env.get_int(s, "yloc", {obj});
    auto it = target.placements.find(obj);
    if (it == target.placements.end()) {
      if (on_grid(env, x, y)) {
        os << " " << obj << ": simulated (" << x << "," << y
           << ") vs absent in frame;";
      }
    } else if (x != it->second.first || y != it->second.second) {
      os << " " << obj << ": simulated (" << x << "," << y << ") vs frame ("
         << it->second.first << "," << it->second.second << ");";
    }
  }
  return os.str();
}

}  // namespace

std::vector<WorldState> frames_to_states(const Stimulus& stim,
                                         const DomainBundle& bundle,
                                         const GroundedEnvironment& env,
                                         std::vector<std::string>* warnings) {
  if (stim.grid.rows != env.grid().rows || stim.grid.cols != env.grid().cols) {
    throw SchemaError("stimulus grid does not match the environment grid");
  }
  auto warn = [&](const std::string& msg) {
    if (warnings != nullptr) warnings->push_back(msg);
  };
  bool has_turn = env.spec().find_function("turn") != nullptr;
  std::set<std::string> drawable = drawable_objects(stim.legend);

  // Frame 0 assembles the initial state directly.
  VisibleFrame v0 = decode_frame(stim.legend, stim.frames[0], stim.grid);
  WorldState s = env.initial_state();
  bundle.apply_static_facts(env, s);
  for (const auto& [obj, cell] : v0.placements) {
    env.set_int(s, "xloc", {obj}, cell.first);
    env.set_int(s, "yloc", {obj}, cell.second);
  }
  for (const auto& [name, bm] : v0.mats) {
    s.mats[env.mat_id(name)] = bm;
  }
  for (const auto& f : v0.facts) {
    env.set_bool(s, f.predicate, f.args, !f.negated);
  }
  if (has_turn) {
    int turn = v0.turn.value_or(0);
    if (turn != 0 && turn != 1) {
      throw SchemaError("frame 0: turn must be 0 or 1, got " +
                        std::to_string(turn));
    }
    env.set_int(s, "turn", {}, turn);
  }
  for (const auto& [obj, where] : stim.hidden_placements) {
    if (v0.placements.count(obj)) {
      throw SchemaError("hidden placement for '" + obj +
                        "' conflicts with a drawn symbol");
    }
    long long x, y;
    auto comma = where.find(',');
    if (comma != std::string::npos &&
        where.find_first_not_of("0123456789,") == std::string::npos) {
      x = std::stoll(where.substr(0, comma));
      y = std::stoll(where.substr(comma + 1));
    } else {
      x = env.get_int(s, "xloc", {where});
      y = env.get_int(s, "yloc", {where});
      if (!on_grid(env, x, y)) {
        throw SchemaError("hidden placement container '" + where +
                          "' has no position in frame 0");
      }
    }
    env.set_int(s, "xloc", {obj}, x);
    env.set_int(s, "yloc", {obj}, y);
  }
  for (const auto& e : env.objects().entries) {
    long long x = env.get_int(s, "xloc", {e.name});
    long long y = env.get_int(s, "yloc", {e.name});
    if (!on_grid(env, x, y)) {
      warn("object '" + e.name + "' has no position at t=0");
    }
  }

  std::vector<WorldState> states = {s};

  // Later frames: find the single-step transition whose visible part matches.
  // This pass is what recovers hidden fluents such as held objects (an item
  // that disappears while the agent stands next to it was picked up).
  for (std::size_t t = 1; t < stim.frames.size(); ++t) {
    VisibleFrame target = decode_frame(stim.legend, stim.frames[t], stim.grid);
    if (target.turn && *target.turn != 0 && *target.turn != 1) {
      throw SchemaError("frame " + std::to_string(t) +
                        ": turn must be 0 or 1");
    }
    const WorldState& prev = states.back();
    std::vector<std::pair<int, WorldState>> matches;
    for (const auto& a : env.actions()) {
      if (!env.eval_bool(a.precondition, prev)) continue;
      WorldState cand = apply(env, prev, a);
      if (visible_match(env, cand, target, drawable)) {
        matches.emplace_back(a.id, std::move(cand));
      }
    }
    if (matches.empty()) {
      if (visible_match(env, prev, target, drawable)) {
        states.push_back(prev);  // repeated frame: no-op
        continue;
      }
      throw UserError("frame " + std::to_string(t) +
                      " is inconsistent with any reachable state:" +
                      describe_mismatch(env, prev, target, drawable));
    }
    bool distinct = false;
    for (std::size_t i = 1; i < matches.size(); ++i) {
      if (!(matches[i].second == matches[0].second)) distinct = true;
    }
    if (distinct) {
      std::ostringstream os;
      os << "frame " << t << " is ambiguous; candidate actions:";
      for (const auto& [id, cand] : matches) {
        os << ' ' << env.actions()[id].display;
      }
      throw UserError(os.str());
    }
    if (matches.size() > 1) {
      warn("frame " + std::to_string(t) + ": tie between " +
           std::to_string(matches.size()) +
           " actions with identical outcomes; canonical-first chosen");
    }
    states.push_back(matches[0].second);
  }
  return states;
}

std::vector<FrameGrid> states_to_frames(const GroundedEnvironment& env,
                                        const Legend& legend,
                                        const std::vector<WorldState>& states,
                                        bool annotate_turn) {
  std::set<std::string> covered = covered_terrains(legend);
  // Reverse lookup for pure-terrain symbols.
  std::map<std::string, std::string> terrain_symbol;
  for (const auto& [sym, e] : legend.entries) {
    if (!e.terrain.empty() && e.objects.empty() &&
        !terrain_symbol.count(e.terrain)) {
      terrain_symbol[e.terrain] = sym;
    }
  }
  auto category_rank = [](const std::string& c) {
    if (c == "agent") return 0;
    if (c == "unique") return 1;
    if (c == "generic") return 2;
    return 3;
  };

  std::vector<FrameGrid> frames;
  for (const auto& s : states) {
    FrameGrid frame;
    frame.cells.assign(env.grid().rows,
                       std::vector<std::string>(env.grid().cols,
                                                legend.empty_symbol));
    // Object symbols per cell, ordered agent > unique > generic > background.
    std::map<std::pair<int, int>, std::vector<std::pair<int, std::string>>>
        at_cell;
    for (const auto& [sym, e] : legend.entries) {
      for (const auto& obj : e.objects) {
        long long x = env.get_int(s, "xloc", {obj});
        long long y = env.get_int(s, "yloc", {obj});
        if (!on_grid(env, x, y)) continue;
        at_cell[{static_cast<int>(y), static_cast<int>(x)}].emplace_back(
            category_rank(e.category), sym);
      }
    }
    for (int y = 1; y <= env.grid().rows; ++y) {
      for (int x = 1; x <= env.grid().cols; ++x) {
        std::vector<std::string> syms;
        std::set<std::string> implied;
        if (auto it = at_cell.find({y, x}); it != at_cell.end()) {
          std::sort(it->second.begin(), it->second.end());
          for (const auto& [rank, sym] : it->second) {
            syms.push_back(sym);
            const LegendEntry* e = legend.find(sym);
            if (!e->terrain.empty()) implied.insert(e->terrain);
          }
        }
        std::set<std::string> actual;
        for (const auto& t : covered) {
          if (env.get_mat(s, t, y, x)) actual.insert(t);
        }
        // Terrain symbols added so that decoding reproduces `actual`.
        std::set<std::string> want = actual;
        if (implied.empty() && want.size() == 1 &&
            *want.begin() == legend.default_terrain) {
          want.clear();  // the default applies with no extra symbol
        }
        for (const auto& t : implied) {
          if (!actual.count(t)) {
            throw InternalError("state cannot be encoded: cell (" +
                                std::to_string(x) + "," + std::to_string(y) +
                                ") lacks terrain '" + t + "'");
          }
          want.erase(t);
        }
        for (const auto& t : want) {
          auto it = terrain_symbol.find(t);
          if (it == terrain_symbol.end()) {
            throw InternalError("no legend symbol draws terrain '" + t + "'");
          }
          syms.push_back(it->second);
        }
        if (syms.empty()) continue;
        frame.cells[y - 1][x - 1] = syms[0];
        if (syms.size() > 1) {
          frame.overflow[{y, x}] =
              std::vector<std::string>(syms.begin() + 1, syms.end());
        }
      }
    }
    if (annotate_turn && env.spec().find_function("turn") != nullptr) {
      frame.turn = static_cast<int>(env.get_int(s, "turn", {}));
    }
    frames.push_back(std::move(frame));
  }
  return frames;
}

std::vector<Reconstructed> derive_actions(const GroundedEnvironment& env,
                                          const std::vector<WorldState>& states,
                                          std::vector<std::string>* warnings) {
  if (states.size() < 2) return {};
  std::vector<Reconstructed> actions;
  for (std::size_t i = 0; i + 1 < states.size(); ++i) {
    try {
      Reconstructed r = reconstruct_action(env, states[i], states[i + 1]);
      if (r.tie && warnings != nullptr) {
        warnings->push_back("step " + std::to_string(i + 1) +
                            ": action tie; canonical-first chosen");
      }
      actions.push_back(r);
    } catch (const ReconstructError& e) {
      throw ReconstructError(
          "step " + std::to_string(i + 1) + ": " + e.what(), e.diffs);
    }
  }
  return actions;
}

// ---------------------------------------------------------------------------
// Human data

HumanDataTable load_human_data(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("human data CSV is empty");
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
      if (c == ',') {
        out.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur.push_back(c);
      }
    }
    out.push_back(cur);
    return out;
  };
  std::vector<std::string> header = split(line);
  auto col = [&](const std::string& name) -> int {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
  };
  int c_stim = col("stimulus_id");
  int c_q = col("question_id");
  int c_mean = col("mean");
  int c_std = col("std");
  if (c_stim < 0 || c_q < 0 || c_mean < 0) {
    throw SchemaError(
        "human data CSV needs columns stimulus_id, question_id, mean");
  }

  HumanDataTable table;
  std::set<std::pair<std::string, std::string>> seen;
  std::map<std::string, double> sums;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields = split(line);
    if (static_cast<int>(fields.size()) <= std::max({c_stim, c_q, c_mean})) {
      throw SchemaError("human data line " + std::to_string(lineno) +
                        ": too few columns");
    }
    HumanDataTable::Row row;
    row.stimulus_id = fields[c_stim];
    row.question_id = fields[c_q];
    try {
      std::size_t used = 0;
      row.mean = std::stod(fields[c_mean], &used);
      if (used != fields[c_mean].size()) throw std::invalid_argument("trail");
    } catch (const std::exception&) {
      throw SchemaError("human data line " + std::to_string(lineno) +
                        ": non-numeric mean '" + fields[c_mean] + "'");
    }
    if (!std::isfinite(row.mean)) {
      throw SchemaError("human data line " + std::to_string(lineno) +
                        ": rating must be finite");
    }
    if (c_std >= 0 && static_cast<int>(fields.size()) > c_std &&
        !fields[c_std].empty()) {
      try {
        row.stddev = std::stod(fields[c_std]);
      } catch (const std::exception&) {
        throw SchemaError("human data line " + std::to_string(lineno) +
                          ": non-numeric std");
      }
    }
    if (!seen.emplace(row.stimulus_id, row.question_id).second) {
      throw SchemaError("duplicate (stimulus, question) pair: (" +
                        row.stimulus_id + ", " + row.question_id + ")");
    }
    sums[row.stimulus_id] += row.mean;
    table.rows.push_back(std::move(row));
  }
  for (const auto& [stim, sum] : sums) {
    if (std::abs(sum - 1.0) <= 0.01) table.normalized_stimuli.insert(stim);
  }
  return table;
}

HumanDataTable load_human_data(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UserError("cannot open " + path.string());
  return load_human_data(in);
}

std::string state_to_problem_init(const GroundedEnvironment& env,
                                  const WorldState& s) {
  std::ostringstream os;
  os << "(:init\n";
  const FluentIndex& fl = env.fluents();
  auto emit_call = [&](const std::string& key) {
    // key is "name|arg1,arg2"; rendered as (name arg1 arg2).
    auto bar = key.find('|');
    os << '(' << key.substr(0, bar);
    std::string args = key.substr(bar + 1);
    std::size_t start = 0;
    while (start < args.size()) {
      auto comma = args.find(',', start);
      if (comma == std::string::npos) comma = args.size();
      os << ' ' << args.substr(start, comma - start);
      start = comma + 1;
    }
    os << ')';
  };
  for (std::size_t i = 0; i < fl.int_names.size(); ++i) {
    os << "    (= ";
    emit_call(fl.int_names[i]);
    os << ' ' << s.ints[i] << ")\n";
  }
  for (std::size_t i = 0; i < fl.bool_names.size(); ++i) {
    if (!s.bools[i]) continue;
    os << "    ";
    emit_call(fl.bool_names[i]);
    os << "\n";
  }
  for (std::size_t i = 0; i < fl.mat_names.size(); ++i) {
    for (int y = 1; y <= env.grid().rows; ++y) {
      for (int x = 1; x <= env.grid().cols; ++x) {
        if (s.mats[i].get(y, x)) {
          os << "    (= (get-index " << fl.mat_names[i] << ' ' << y << ' '
             << x << ") true)\n";
        }
      }
    }
  }
  os << ")\n";
  return os.str();
}

}  // namespace invplan

