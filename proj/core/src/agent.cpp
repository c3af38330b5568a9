#include "invplan/agent.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <set>
#include <sstream>

#include "invplan/mathutil.hpp"
#include "invplan/planner.hpp"
#include "invplan/sexpr.hpp"

namespace invplan {

// ---------------------------------------------------------------------------
// Goals, costs, rewards

GoalSpec::Literal parse_literal(const std::string& text) {
  std::vector<SExpr> forms = parse_sexprs(text);
  if (forms.size() != 1 || forms[0].is_atom || forms[0].items.empty()) {
    throw SchemaError("goal literal must be one (pred args...) form: " + text);
  }
  const SExpr* atom = &forms[0];
  GoalSpec::Literal lit;
  if (atom->head_is("not")) {
    if (atom->size() != 2 || atom->items[1].is_atom) {
      throw SchemaError("negated literal must be (not (pred args...)): " +
                        text);
    }
    lit.negated = true;
    atom = &atom->items[1];
  }
  for (const auto& item : atom->items) {
    if (!item.is_atom) {
      throw SchemaError("goal literal arguments must be object names: " +
                        text);
    }
  }
  lit.predicate = atom->items[0].text;
  for (std::size_t i = 1; i < atom->size(); ++i) {
    lit.args.push_back(atom->items[i].text);
  }
  return lit;
}

std::string literal_to_string(const GoalSpec::Literal& lit) {
  std::string s = "(" + lit.predicate;
  for (const auto& a : lit.args) s += " " + a;
  s += ")";
  if (lit.negated) s = "(not " + s + ")";
  return s;
}

GoalSpec parse_goal(const std::vector<std::string>& literal_strings,
                    const std::string& label) {
  if (literal_strings.empty()) {
    throw SchemaError("goal must contain at least one literal");
  }
  GoalSpec g;
  for (const auto& s : literal_strings) g.literals.push_back(parse_literal(s));
  g.label = label.empty() ? g.canonical() : label;
  return g;
}

std::string GoalSpec::canonical() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < literals.size(); ++i) {
    if (i) os << '&';
    const auto& lit = literals[i];
    if (lit.negated) os << '!';
    os << lit.predicate << '(';
    for (std::size_t j = 0; j < lit.args.size(); ++j) {
      if (j) os << ',';
      os << lit.args[j];
    }
    os << ')';
  }
  return os.str();
}

bool goal_satisfied(const GroundedEnvironment& env, const WorldState& s,
                    const GoalSpec& g) {
  for (const auto& lit : g.literals) {
    Expr atom;
    atom.kind = Expr::Kind::Atom;
    atom.name = lit.predicate;
    atom.args = lit.args;
    bool v = env.eval_bool(env.compile_ground_formula(atom), s);
    if (v == lit.negated) return false;
  }
  return true;
}

std::string CostProfile::canonical() const {
  std::ostringstream os;
  for (const auto& [name, c] : costs) os << name << '=' << c << ';';
  return os.str();
}

std::string RewardProfile::canonical() const {
  std::ostringstream os;
  for (double r : goal_rewards) os << r << ';';
  return os.str();
}

std::string query_kind_name(QueryKind k) {
  switch (k) {
    case QueryKind::Goal: return "goal";
    case QueryKind::Belief: return "belief";
    case QueryKind::Reward: return "reward";
    case QueryKind::Cost: return "cost";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

QueryKind parse_query_kind(const std::string& s) {
  if (s == "goal" || s == "goals") return QueryKind::Goal;
  if (s == "belief" || s == "beliefs") return QueryKind::Belief;
  if (s == "reward" || s == "rewards") return QueryKind::Reward;
  if (s == "cost" || s == "costs") return QueryKind::Cost;
  throw SchemaError("query: unknown kind '" + s + "'");
}

const nlohmann::json& require_field(const nlohmann::json& doc,
                                    const char* name) {
  auto it = doc.find(name);
  if (it == doc.end()) {
    throw SchemaError(std::string("missing field '") + name + "'");
  }
  return *it;
}

}  // namespace

AgentConfig parse_agent_config(const nlohmann::json& doc) {
  if (!doc.is_object()) throw SchemaError("agent config must be a JSON object");
  AgentConfig cfg;

  const auto& gs = require_field(doc, "grid_size");
  if (!gs.is_array() || gs.size() != 2 || !gs[0].is_number() ||
      !gs[1].is_number()) {
    throw SchemaError("grid_size must be [rows, cols]");
  }
  cfg.grid_size.rows = gs[0].get<int>();
  cfg.grid_size.cols = gs[1].get<int>();
  if (cfg.grid_size.rows <= 0 || cfg.grid_size.cols <= 0) {
    throw SchemaError("grid_size entries must be positive");
  }

  std::string obs = require_field(doc, "observability").get<std::string>();
  if (obs == "full") {
    cfg.partial = false;
  } else if (obs == "partial") {
    cfg.partial = true;
  } else {
    throw SchemaError("observability must be \"full\" or \"partial\"");
  }

  auto bc = doc.find("belief_config");
  bool has_bc = bc != doc.end() && bc->is_object() && !bc->empty();
  if (cfg.partial && !has_bc) {
    throw SchemaError("belief_config is required under partial observability");
  }
  if (!cfg.partial && has_bc) {
    throw SchemaError("belief_config must be empty under full observability");
  }
  if (has_bc) {
    BeliefConfig b;
    b.belief_object = require_field(*bc, "belief_object").get<std::string>();
    b.belief_container =
        require_field(*bc, "belief_container").get<std::string>();
    b.barrier = require_field(*bc, "barrier").get<std::string>();
    b.agent = require_field(*bc, "agent").get<std::string>();
    if (auto v = bc->find("visibility"); v != bc->end()) {
      std::string mode = v->get<std::string>();
      if (mode == "line_of_sight") {
        b.visibility = VisibilityMode::LineOfSight;
      } else if (mode == "region") {
        b.visibility = VisibilityMode::Region;
      } else {
        throw SchemaError("belief_config.visibility must be line_of_sight or region");
      }
    }
    if (auto h = bc->find("hidden_objects"); h != bc->end()) {
      for (const auto& o : *h) b.hidden_objects.push_back(o.get<std::string>());
    }
    if (auto aa = bc->find("allow_absent"); aa != bc->end()) {
      b.allow_absent = aa->get<bool>();
    }
    cfg.belief = std::move(b);
  }

  const auto& goals = require_field(doc, "goals");
  if (!goals.is_array() || goals.empty()) {
    throw SchemaError("goals must be a non-empty array");
  }
  std::vector<std::string> labels;
  if (auto gl = doc.find("goal_labels"); gl != doc.end()) {
    for (const auto& l : *gl) labels.push_back(l.get<std::string>());
    if (labels.size() != goals.size()) {
      throw SchemaError("goal_labels length must match goals");
    }
  }
  for (std::size_t i = 0; i < goals.size(); ++i) {
    const auto& g = goals[i];
    std::vector<std::string> lits;
    if (g.is_string()) {
      lits.push_back(g.get<std::string>());
    } else if (g.is_array()) {
      for (const auto& l : g) lits.push_back(l.get<std::string>());
    } else {
      throw SchemaError("each goal must be an array of literal strings");
    }
    cfg.goals.push_back(
        parse_goal(lits, labels.empty() ? "" : labels[i]));
  }

  if (auto rw = doc.find("rewards"); rw != doc.end() && !rw->is_null()) {
    if (!rw->is_array() || rw->empty()) {
      throw SchemaError("rewards must be a non-empty array of profiles");
    }
    std::vector<RewardProfile> profiles;
    for (std::size_t i = 0; i < rw->size(); ++i) {
      const auto& entry = (*rw)[i];
      RewardProfile p;
      p.label = "r" + std::to_string(i);
      if (entry.is_array()) {
        for (const auto& v : entry) p.goal_rewards.push_back(v.get<double>());
      } else if (entry.is_object()) {
        for (const auto& v : require_field(entry, "goal_rewards")) {
          p.goal_rewards.push_back(v.get<double>());
        }
        if (auto lab = entry.find("label"); lab != entry.end()) {
          p.label = lab->get<std::string>();
        }
        if (auto comp = entry.find("components"); comp != entry.end()) {
          for (auto it = comp->begin(); it != comp->end(); ++it) {
            p.components[it.key()] = it.value().get<double>();
          }
        }
      } else {
        throw SchemaError("rewards entries must be arrays or objects");
      }
      if (p.goal_rewards.size() != cfg.goals.size()) {
        throw SchemaError("rewards profile " + std::to_string(i) +
                          " must list one reward per goal");
      }
      profiles.push_back(std::move(p));
    }
    cfg.rewards = std::move(profiles);
  }

  const auto& costs = require_field(doc, "costs");
  if (!costs.is_array() || costs.empty()) {
    throw SchemaError("costs must be a non-empty array of profiles");
  }
  std::vector<std::string> cost_labels;
  if (auto cl = doc.find("cost_labels"); cl != doc.end()) {
    for (const auto& l : *cl) cost_labels.push_back(l.get<std::string>());
    if (cost_labels.size() != costs.size()) {
      throw SchemaError("cost_labels length must match costs");
    }
  }
  for (std::size_t i = 0; i < costs.size(); ++i) {
    const auto& entry = costs[i];
    if (!entry.is_object()) {
      throw SchemaError("each cost profile must be an object of "
                        "action -> positive number");
    }
    CostProfile p;
    p.label = cost_labels.empty() ? "cost" + std::to_string(i)
                                  : cost_labels[i];
    for (auto it = entry.begin(); it != entry.end(); ++it) {
      double v = it.value().get<double>();
      if (!(v > 0.0)) {
        throw SchemaError("costs: action '" + it.key() +
                          "' must be greater than 0");
      }
      p.costs[it.key()] = microcost_from_double(v);
    }
    cfg.costs.push_back(std::move(p));
  }

  const auto& query = require_field(doc, "query");
  if (!query.is_array()) throw SchemaError("query must be an array");
  for (const auto& q : query) {
    cfg.query.push_back(parse_query_kind(q.get<std::string>()));
  }

  if (auto t = doc.find("temperature"); t != doc.end() && !t->is_null()) {
    cfg.temperature = t->get<double>();
    if (!(cfg.temperature > 0.0)) {
      throw SchemaError("temperature must be greater than 0");
    }
  }
  return cfg;
}

nlohmann::json agent_config_to_json(const AgentConfig& cfg) {
  nlohmann::json doc;
  doc["grid_size"] = {cfg.grid_size.rows, cfg.grid_size.cols};
  doc["observability"] = cfg.partial ? "partial" : "full";
  if (cfg.belief) {
    nlohmann::json b;
    b["belief_object"] = cfg.belief->belief_object;
    b["belief_container"] = cfg.belief->belief_container;
    b["barrier"] = cfg.belief->barrier;
    b["agent"] = cfg.belief->agent;
    b["visibility"] = cfg.belief->visibility == VisibilityMode::LineOfSight
                          ? "line_of_sight"
                          : "region";
    if (!cfg.belief->hidden_objects.empty()) {
      b["hidden_objects"] = cfg.belief->hidden_objects;
    }
    if (cfg.belief->allow_absent) b["allow_absent"] = true;
    doc["belief_config"] = std::move(b);
  } else {
    doc["belief_config"] = nlohmann::json::object();
  }
  nlohmann::json goals = nlohmann::json::array();
  nlohmann::json goal_labels = nlohmann::json::array();
  for (const auto& g : cfg.goals) {
    nlohmann::json lits = nlohmann::json::array();
    for (const auto& lit : g.literals) lits.push_back(literal_to_string(lit));
    goals.push_back(lits);
    goal_labels.push_back(g.label);
  }
  doc["goals"] = std::move(goals);
  doc["goal_labels"] = std::move(goal_labels);
  if (cfg.rewards) {
    nlohmann::json rewards = nlohmann::json::array();
    for (const auto& r : *cfg.rewards) {
      nlohmann::json entry;
      entry["label"] = r.label;
      entry["goal_rewards"] = r.goal_rewards;
      if (!r.components.empty()) entry["components"] = r.components;
      rewards.push_back(entry);
    }
    doc["rewards"] = std::move(rewards);
  }
  nlohmann::json costs = nlohmann::json::array();
  nlohmann::json cost_labels = nlohmann::json::array();
  for (const auto& c : cfg.costs) {
    nlohmann::json entry;
    for (const auto& [name, v] : c.costs) entry[name] = microcost_to_double(v);
    costs.push_back(entry);
    cost_labels.push_back(c.label);
  }
  doc["costs"] = std::move(costs);
  doc["cost_labels"] = std::move(cost_labels);
  nlohmann::json query = nlohmann::json::array();
  for (QueryKind k : cfg.query) query.push_back(query_kind_name(k));
  doc["query"] = std::move(query);
  doc["temperature"] = cfg.temperature;
  return doc;
}

void bind_config(const GroundedEnvironment& env, const AgentConfig& cfg) {
  if (cfg.grid_size.rows != env.grid().rows ||
      cfg.grid_size.cols != env.grid().cols) {
    throw SchemaError("config grid_size does not match the environment grid");
  }
  for (const auto& g : cfg.goals) {
    for (const auto& lit : g.literals) {
      Expr atom;
      atom.kind = Expr::Kind::Atom;
      atom.name = lit.predicate;
      atom.args = lit.args;
      try {
        (void)env.compile_ground_formula(atom);
      } catch (const UserError& e) {
        throw SchemaError("goal literal " + g.label +
                          " does not ground: " + e.what());
      }
    }
  }
  std::set<std::string> schema_names;
  for (const auto& a : env.spec().actions) schema_names.insert(a.name);
  for (const auto& c : cfg.costs) {
    for (const auto& name : schema_names) {
      if (!c.costs.count(name)) {
        throw SchemaError("cost profile '" + c.label +
                          "' is missing action '" + name + "'");
      }
    }
    for (const auto& [name, v] : c.costs) {
      if (name != "no-op" && !schema_names.count(name)) {
        throw SchemaError("cost profile '" + c.label +
                          "' names unknown action '" + name + "'");
      }
    }
  }
  if (cfg.rewards) {
    for (const auto& r : *cfg.rewards) {
      if (r.goal_rewards.size() != cfg.goals.size()) {
        throw SchemaError("reward profile '" + r.label +
                          "' must list one reward per goal");
      }
    }
  }
  if (cfg.belief) {
    const BeliefConfig& b = *cfg.belief;
    if (!env.spec().type_declared(b.belief_object)) {
      throw SchemaError("belief_object type '" + b.belief_object +
                        "' is not declared");
    }
    if (!env.spec().type_declared(b.belief_container)) {
      throw SchemaError("belief_container type '" + b.belief_container +
                        "' is not declared");
    }
    const FunctionDecl* barrier = env.spec().find_function(b.barrier);
    if (barrier == nullptr || barrier->range != FluentRange::BitMatrix) {
      throw SchemaError("belief barrier '" + b.barrier +
                        "' is not a bit-matrix terrain");
    }
    if (env.object_type(b.agent) == nullptr) {
      throw SchemaError("belief agent '" + b.agent + "' is not an object");
    }
    for (const auto& h : b.hidden_objects) {
      const std::string* t = env.object_type(h);
      if (t == nullptr || !env.spec().is_subtype(*t, b.belief_object)) {
        throw SchemaError("hidden object '" + h + "' is not a " +
                          b.belief_object);
      }
    }
  }
  for (QueryKind k : cfg.query) {
    if (k == QueryKind::Belief && !cfg.partial) {
      throw SchemaError("belief query requires partial observability");
    }
    if (k == QueryKind::Reward && !cfg.rewards) {
      throw SchemaError("reward query requires a rewards section");
    }
  }
}

// ---------------------------------------------------------------------------
// Visibility and observations

namespace {

// Exact fraction comparison helpers for the segment test; denominators kept
// positive.
struct Frac {
  long long num;
  long long den;  // > 0
};

bool frac_less(const Frac& a, const Frac& b) {
  return a.num * b.den < b.num * a.den;
}

}  // namespace

bool segment_crosses_cell(int ax, int ay, int bx, int by, int cx, int cy) {
  // Scale by 2: centers at even coordinates, open cell interiors between odd
  // bounds. Everything stays integral, so the test is exact and symmetric.
  long long Ax = 2LL * ax, Ay = 2LL * ay;
  long long Bx = 2LL * bx, By = 2LL * by;
  long long dx = Bx - Ax, dy = By - Ay;
  Frac lo{0, 1}, hi{1, 1};

  auto clip_axis = [&](long long a0, long long d, long long lo_b,
                       long long hi_b) -> bool {
    if (d == 0) return a0 > lo_b && a0 < hi_b;
    long long den = d;
    long long n1 = lo_b - a0, n2 = hi_b - a0;
    if (den < 0) {
      den = -den;
      n1 = -(n1);
      n2 = -(n2);
      std::swap(n1, n2);
    }
    Frac t1{n1, den}, t2{n2, den};
    if (frac_less(lo, t1)) lo = t1;
    if (frac_less(t2, hi)) hi = t2;
    return frac_less(lo, hi);
  };

  if (!clip_axis(Ax, dx, 2LL * cx - 1, 2LL * cx + 1)) return false;
  if (!clip_axis(Ay, dy, 2LL * cy - 1, 2LL * cy + 1)) return false;
  return frac_less(lo, hi);
}

BitMatrix visible_cells(const GroundedEnvironment& env, const WorldState& s,
                        const std::string& barrier_matrix, int ax, int ay,
                        VisibilityMode mode) {
  GridDims grid = env.grid();
  BitMatrix vis(grid.rows, grid.cols);
  const BitMatrix& barrier = s.mats[env.mat_id(barrier_matrix)];

  if (!vis.in_bounds(ay, ax)) return vis;  // agent off-grid sees nothing

  if (mode == VisibilityMode::Region) {
    // 4-connected non-barrier component around the agent.
    std::deque<std::pair<int, int>> queue;
    if (!barrier.get(ay, ax)) {
      vis.set(ay, ax, true);
      queue.emplace_back(ax, ay);
    }
    while (!queue.empty()) {
      auto [x, y] = queue.front();
      queue.pop_front();
      const int dxs[] = {1, -1, 0, 0}, dys[] = {0, 0, 1, -1};
      for (int k = 0; k < 4; ++k) {
        int nx = x + dxs[k], ny = y + dys[k];
        if (!vis.in_bounds(ny, nx) || vis.get(ny, nx)) continue;
        if (barrier.get(ny, nx)) continue;
        vis.set(ny, nx, true);
        queue.emplace_back(nx, ny);
      }
    }
    return vis;
  }

  // Line of sight: blocked by any barrier cell whose open interior is crossed
  // by the open segment between cell centers.
  for (int ty = 1; ty <= grid.rows; ++ty) {
    for (int tx = 1; tx <= grid.cols; ++tx) {
      bool blocked = false;
      for (int by = 1; by <= grid.rows && !blocked; ++by) {
        for (int bx = 1; bx <= grid.cols && !blocked; ++bx) {
          if (!barrier.get(by, bx)) continue;
          if ((bx == ax && by == ay) || (bx == tx && by == ty)) continue;
          if (segment_crosses_cell(ax, ay, tx, ty, bx, by)) blocked = true;
        }
      }
      vis.set(ty, tx, !blocked);
    }
  }
  return vis;
}

Observation observe(const GroundedEnvironment& env, const WorldState& s,
                    const AgentConfig& cfg) {
  Observation obs;
  obs.truth = s;
  if (!cfg.partial) {
    obs.full = true;
    obs.visible = BitMatrix(env.grid().rows, env.grid().cols);
    for (int y = 1; y <= env.grid().rows; ++y) {
      for (int x = 1; x <= env.grid().cols; ++x) obs.visible.set(y, x, true);
    }
    return obs;
  }
  const BeliefConfig& b = *cfg.belief;
  obs.full = false;
  int ax = static_cast<int>(env.get_int(s, "xloc", {b.agent}));
  int ay = static_cast<int>(env.get_int(s, "yloc", {b.agent}));
  obs.visible = visible_cells(env, s, b.barrier, ax, ay, b.visibility);
  for (const auto& name : env.objects_of_type(b.belief_object)) {
    obs.tracked.push_back(name);
    obs.tracked_ids.emplace_back(env.int_id("xloc", {name}),
                                 env.int_id("yloc", {name}));
  }
  return obs;
}

std::vector<std::string> Observation::revealed() const {
  std::vector<std::string> out;
  if (full) {
    out.push_back("(all fluents)");
    return out;
  }
  for (std::size_t i = 0; i < tracked.size(); ++i) {
    long long x = truth.ints[tracked_ids[i].first];
    long long y = truth.ints[tracked_ids[i].second];
    if (x >= 1 && y >= 1 && visible.get(y, x)) {
      out.push_back(tracked[i] + "@(" + std::to_string(x) + "," +
                    std::to_string(y) + ")");
    } else {
      out.push_back(tracked[i] + ":hidden");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Beliefs

void Belief::normalize() {
  std::vector<double> ws;
  for (const auto& p : particles) ws.push_back(p.log_weight);
  double z = logsumexp(ws);
  if (!std::isfinite(z)) return;  // dead belief; nothing to scale
  for (auto& p : particles) p.log_weight -= z;
}

bool Belief::alive() const {
  return std::any_of(particles.begin(), particles.end(), [](const auto& p) {
    return std::isfinite(p.log_weight);
  });
}

Belief belief_advance(const GroundedEnvironment& env, const Belief& b,
                      const GroundAction& a) {
  Belief out;
  for (const auto& p : b.particles) {
    if (!std::isfinite(p.log_weight)) continue;
    if (a.is_noop()) {
      out.particles.push_back(p);
      continue;
    }
    if (!env.eval_bool(a.precondition, p.state)) continue;  // refuted world
    out.particles.push_back({apply(env, p.state, a), p.log_weight});
  }
  return out;
}

bool particle_consistent(const GroundedEnvironment& env,
                         const WorldState& particle, const Observation& obs) {
  if (obs.full) return particle == obs.truth;
  GridDims grid = env.grid();
  auto on_grid = [&](long long x, long long y) {
    return x >= 1 && x <= grid.cols && y >= 1 && y <= grid.rows;
  };
  for (const auto& [xid, yid] : obs.tracked_ids) {
    long long px = particle.ints[xid], py = particle.ints[yid];
    long long tx = obs.truth.ints[xid], ty = obs.truth.ints[yid];
    bool pinned = (on_grid(px, py) && obs.visible.get(py, px)) ||
                  (on_grid(tx, ty) && obs.visible.get(ty, tx));
    if (pinned && (px != tx || py != ty)) return false;
  }
  return true;
}

Belief belief_update(const GroundedEnvironment& env, const Belief& b,
                     const Observation& obs) {
  Belief out;
  for (const auto& p : b.particles) {
    if (!std::isfinite(p.log_weight)) continue;
    if (particle_consistent(env, p.state, obs)) out.particles.push_back(p);
  }
  if (!out.alive()) {
    throw ImpossibleObservationError(
        "every belief particle contradicts the observation (wrong belief "
        "space?)");
  }
  out.normalize();
  return out;
}

// ---------------------------------------------------------------------------
// Hypothesis space

std::vector<BeliefSeed> enumerate_belief_space(const GroundedEnvironment& env,
                                               const AgentConfig& cfg,
                                               const WorldState& s0) {
  if (!cfg.partial) return {};
  const BeliefConfig& bc = *cfg.belief;

  std::vector<std::string> containers = env.objects_of_type(bc.belief_container);
  if (containers.empty()) {
    throw SchemaError("no instances of belief container type '" +
                      bc.belief_container + "'");
  }

  std::vector<std::string> hidden = bc.hidden_objects;
  if (hidden.empty()) {
    // Default rule: belief objects that are off-grid and unheld in s0.
    for (const auto& name : env.objects_of_type(bc.belief_object)) {
      long long x = env.get_int(s0, "xloc", {name});
      long long y = env.get_int(s0, "yloc", {name});
      if (x >= 1 && y >= 1) continue;
      bool held = false;
      for (const auto& agent : env.agent_names()) {
        auto id = env.try_bool_id("has", {agent, name});
        if (id && s0.bools[*id]) held = true;
      }
      if (!held) hidden.push_back(name);
    }
  }
  std::sort(hidden.begin(), hidden.end());

  std::vector<BeliefSeed> seeds;
  if (hidden.empty()) {
    seeds.push_back({"none", s0});
    return seeds;
  }

  bool injective = hidden.size() <= containers.size();
  std::vector<std::string> choice(hidden.size());
  std::vector<bool> used(containers.size(), false);

  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == hidden.size()) {
      WorldState world = s0;
      std::string label;
      for (std::size_t k = 0; k < hidden.size(); ++k) {
        if (k) label += "+";
        if (choice[k].empty()) {
          env.set_int(world, "xloc", {hidden[k]}, -1);
          env.set_int(world, "yloc", {hidden[k]}, -1);
          label += hidden[k] + "@absent";
        } else {
          long long cx = env.get_int(s0, "xloc", {choice[k]});
          long long cy = env.get_int(s0, "yloc", {choice[k]});
          if (cx < 1 || cy < 1) {
            throw SchemaError("belief container '" + choice[k] +
                              "' has no position in the initial state");
          }
          env.set_int(world, "xloc", {hidden[k]}, cx);
          env.set_int(world, "yloc", {hidden[k]}, cy);
          label += hidden[k] + "@" + choice[k];
        }
      }
      seeds.push_back({label, std::move(world)});
      return;
    }
    for (std::size_t c = 0; c < containers.size(); ++c) {
      if (injective && used[c]) continue;
      used[c] = true;
      choice[i] = containers[c];
      rec(i + 1);
      used[c] = false;
    }
    if (bc.allow_absent) {
      choice[i].clear();
      rec(i + 1);
    }
  };
  rec(0);
  return seeds;
}

HypothesisPrior initial_hypotheses(const GroundedEnvironment& env,
                                   const AgentConfig& cfg, const WorldState& s0,
                                   Planner& planner) {
  if (cfg.goals.empty()) throw SchemaError("goal space is empty");
  if (cfg.costs.empty()) throw SchemaError("cost space is empty");

  HypothesisPrior out;
  out.belief_space = enumerate_belief_space(env, cfg, s0);

  std::size_t n_goals = cfg.goals.size();
  std::size_t n_rewards = cfg.rewards ? cfg.rewards->size() : 1;
  std::size_t n_costs = cfg.costs.size();
  std::size_t n_beliefs = cfg.partial ? out.belief_space.size() : 1;
  double beta = cfg.beta();

  double log_unif_r = cfg.rewards ? -std::log(double(n_rewards)) : 0.0;
  double log_unif_c = -std::log(double(n_costs));
  double log_unif_b = cfg.partial ? -std::log(double(n_beliefs)) : 0.0;

  for (std::size_t g = 0; g < n_goals; ++g) {
    for (std::size_t r = 0; r < n_rewards; ++r) {
      for (std::size_t c = 0; c < n_costs; ++c) {
        for (std::size_t b = 0; b < n_beliefs; ++b) {
          PriorHypothesis h;
          h.goal = static_cast<int>(g);
          h.reward = cfg.rewards ? static_cast<int>(r) : -1;
          h.cost = static_cast<int>(c);
          h.belief = cfg.partial ? static_cast<int>(b) : -1;

          double goal_factor;
          if (!cfg.rewards) {
            goal_factor = -std::log(double(n_goals));
          } else {
            // Boltzmann over net utility: goal reward minus shortest-path
            // cost from the hypothesis' initial world.
            const WorldState& world =
                cfg.partial ? out.belief_space[b].world : s0;
            std::vector<double> nets(n_goals, kNegInf);
            for (std::size_t g2 = 0; g2 < n_goals; ++g2) {
              PathResult pr =
                  planner.path_cost(world, cfg.goals[g2], cfg.costs[c]);
              if (pr.reachable) {
                nets[g2] = (*cfg.rewards)[r].goal_rewards[g2] -
                           microcost_to_double(pr.cost);
              }
            }
            std::vector<double> logits(n_goals);
            for (std::size_t g2 = 0; g2 < n_goals; ++g2) {
              logits[g2] = std::isfinite(nets[g2]) ? beta * nets[g2] : kNegInf;
            }
            double z = logsumexp(logits);
            if (!std::isfinite(z)) {
              // No goal reachable: fall back to uniform and record it.
              goal_factor = -std::log(double(n_goals));
              if (b == 0 && g == 0) {
                out.warnings.push_back(
                    "no goal reachable under cost profile '" +
                    cfg.costs[c].label + "'; uniform goal prior used");
              }
            } else {
              goal_factor = logits[g] - z;
            }
          }
          h.log_prior = goal_factor + log_unif_r + log_unif_c + log_unif_b;
          out.hypotheses.push_back(h);
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Boltzmann-rational action selection

double ActionDistribution::log_prob_of(int action_id) const {
  for (std::size_t i = 0; i < action_ids.size(); ++i) {
    if (action_ids[i] == action_id) return log_probs[i];
  }
  return kNegInf;
}

namespace {

ActionDistribution softmax_over(const std::vector<int>& ids,
                                const std::vector<double>& utilities,
                                double beta) {
  ActionDistribution dist;
  dist.action_ids = ids;
  std::vector<double> logits(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    logits[i] = std::isfinite(utilities[i]) ? beta * utilities[i] : kNegInf;
  }
  double z = logsumexp(logits);
  if (!std::isfinite(z)) {
    // All utilities -inf: uniform fallback, recorded as a degeneracy.
    dist.degenerate = true;
    double u = -std::log(double(ids.size()));
    dist.log_probs.assign(ids.size(), u);
    return dist;
  }
  dist.log_probs.resize(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    dist.log_probs[i] = logits[i] - z;
  }
  return dist;
}

}  // namespace

ActionDistribution action_distribution(const GroundedEnvironment& env,
                                       Planner& planner, const GoalSpec& goal,
                                       const CostProfile& cost,
                                       double goal_reward, double beta,
                                       const WorldState& s) {
  std::vector<int> ids = valid_action_ids(env, s);
  std::vector<double> utilities;
  utilities.reserve(ids.size());
  for (int id : ids) {
    QEstimate q =
        planner.q_value(s, env.actions()[id], goal, cost, goal_reward);
    utilities.push_back(q.reachable ? q.utility : kNegInf);
  }
  return softmax_over(ids, utilities, beta);
}

ActionDistribution action_distribution(const GroundedEnvironment& env,
                                       Planner& planner, const GoalSpec& goal,
                                       const CostProfile& cost,
                                       double goal_reward, double beta,
                                       const Belief& b) {
  // Candidates: union of per-particle valid actions, canonical order.
  std::set<int> id_set;
  for (const auto& p : b.particles) {
    if (!std::isfinite(p.log_weight)) continue;
    for (int id : valid_action_ids(env, p.state)) id_set.insert(id);
  }
  std::vector<int> ids(id_set.begin(), id_set.end());
  std::vector<double> utilities;
  utilities.reserve(ids.size());
  for (int id : ids) {
    QEstimate q =
        planner.belief_q_value(b, env.actions()[id], goal, cost, goal_reward);
    utilities.push_back(q.reachable ? q.utility : kNegInf);
  }
  return softmax_over(ids, utilities, beta);
}

}  // namespace invplan
