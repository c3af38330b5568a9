#include "invplan/planner.hpp"

#include <algorithm>
#include <mutex>
#include <queue>

#include "invplan/mathutil.hpp"

namespace invplan {

Planner::Planner(const GroundedEnvironment& env, PlannerOptions opts)
    : env_(env), opts_(opts) {}

Microcost Planner::action_cost(const GroundAction& a,
                               const CostProfile& costs) {
  if (a.is_noop()) {
    auto it = costs.costs.find("no-op");
    return it == costs.costs.end() ? 0 : it->second;
  }
  return profile_costs(costs)[a.schema_index];
}

const std::vector<Microcost>& Planner::profile_costs(const CostProfile& costs) {
  std::string key = costs.canonical();
  {
    std::shared_lock lock(mu_);
    auto it = profiles_.find(key);
    if (it != profiles_.end()) return it->second;
  }
  // Profiles must key exactly the domain's action schemas.
  std::vector<Microcost> by_schema(env_.spec().actions.size(), 0);
  for (std::size_t i = 0; i < env_.spec().actions.size(); ++i) {
    const std::string& name = env_.spec().actions[i].name;
    auto it = costs.costs.find(name);
    if (it == costs.costs.end()) {
      throw SchemaError("cost profile '" + costs.label +
                        "' is missing action '" + name + "'");
    }
    if (it->second <= 0) {
      throw SchemaError("cost profile '" + costs.label + "': cost of '" +
                        name + "' must be > 0");
    }
    by_schema[i] = it->second;
  }
  for (const auto& [name, value] : costs.costs) {
    if (name != "no-op" && env_.spec().find_action(name) == nullptr) {
      throw SchemaError("cost profile '" + costs.label +
                        "' names unknown action '" + name + "'");
    }
  }
  std::unique_lock lock(mu_);
  return profiles_.emplace(key, std::move(by_schema)).first->second;
}

const Planner::CompiledGoal& Planner::compiled_goal(const GoalSpec& goal) {
  std::string key = goal.canonical();
  {
    std::shared_lock lock(mu_);
    auto it = goals_.find(key);
    if (it != goals_.end()) return it->second;
  }
  CompiledGoal cg;
  Expr conj;
  conj.kind = Expr::Kind::And;
  for (const auto& lit : goal.literals) {
    Expr atom;
    atom.kind = Expr::Kind::Atom;
    atom.name = lit.predicate;
    atom.args = lit.args;
    if (lit.negated) {
      Expr neg;
      neg.kind = Expr::Kind::Not;
      neg.kids.push_back(std::move(atom));
      conj.kids.push_back(std::move(neg));
    } else {
      conj.kids.push_back(std::move(atom));
    }
  }
  cg.test = env_.compile_ground_formula(conj);

  if (opts_.use_manhattan) {
    cg.heuristic_ok = true;
    for (const auto& lit : goal.literals) {
      if (lit.negated || lit.args.size() != 2 ||
          (lit.predicate != "has" && lit.predicate != "at" &&
           lit.predicate != "ate")) {
        continue;  // no lower bound from this literal
      }
      const std::string& agent = lit.args[0];
      const std::string& target = lit.args[1];
      try {
        CompiledGoal::HLiteral h;
        h.agent_x = env_.int_id("xloc", {agent});
        h.agent_y = env_.int_id("yloc", {agent});
        h.target_x = env_.int_id("xloc", {target});
        h.target_y = env_.int_id("yloc", {target});
        h.possession = lit.predicate == "has";
        cg.hliterals.push_back(h);
      } catch (const GroundingError&) {
        // Target without coordinates; skip.
      }
    }
  }
  std::unique_lock lock(mu_);
  return goals_.emplace(key, std::move(cg)).first->second;
}

Microcost Planner::heuristic(const CompiledGoal& g, const WorldState& s,
                             Microcost min_step) const {
  if (!g.heuristic_ok || min_step <= 0) return 0;
  Microcost best = 0;
  for (const auto& h : g.hliterals) {
    long long ax = s.ints[h.agent_x], ay = s.ints[h.agent_y];
    long long tx = s.ints[h.target_x], ty = s.ints[h.target_y];
    if (ax < 1 || ay < 1 || tx < 1 || ty < 1) continue;  // off-grid
    long long manh = std::llabs(ax - tx) + std::llabs(ay - ty);
    if (h.possession && manh > 0) manh -= 1;  // adjacency suffices
    best = std::max(best, static_cast<Microcost>(manh) * min_step);
  }
  return best;
}

PathResult Planner::path_cost(const WorldState& s, const GoalSpec& goal,
                              const CostProfile& costs) {
  const CompiledGoal& cg = compiled_goal(goal);
  const std::vector<Microcost>& by_schema = profile_costs(costs);

  std::string key = s.digest();
  key.push_back('\x01');
  key += goal.canonical();
  key.push_back('\x01');
  key += costs.canonical();
  {
    std::shared_lock lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) {
      ++hits_;
      return {it->second, it->second != kUnreachableCost};
    }
  }

  Microcost min_step = by_schema.empty()
                           ? 0
                           : *std::min_element(by_schema.begin(), by_schema.end());
  Microcost result = run_astar(s, cg, by_schema, min_step);

  std::unique_lock lock(mu_);
  ++misses_;
  cache_.emplace(std::move(key), result);
  return {result, result != kUnreachableCost};
}

Microcost Planner::run_astar(const WorldState& start, const CompiledGoal& goal,
                             const std::vector<Microcost>& costs,
                             Microcost min_step) {
  if (env_.eval_bool(goal.test, start)) return 0;

  struct Node {
    Microcost f;
    Microcost g;
    int idx;
    bool operator>(const Node& o) const {
      return f != o.f ? f > o.f : g > o.g;
    }
  };

  std::vector<WorldState> states;
  std::vector<Microcost> gval;
  std::unordered_map<std::string, int> seen;
  auto intern = [&](const WorldState& s) {
    std::string d = s.digest();
    auto it = seen.find(d);
    if (it != seen.end()) return it->second;
    int idx = static_cast<int>(states.size());
    seen.emplace(std::move(d), idx);
    states.push_back(s);
    gval.push_back(kUnreachableCost);
    return idx;
  };

  std::priority_queue<Node, std::vector<Node>, std::greater<Node>> open;
  int s0 = intern(start);
  gval[s0] = 0;
  open.push({heuristic(goal, start, min_step), 0, s0});

  std::uint64_t pops = 0;
  while (!open.empty()) {
    Node top = open.top();
    open.pop();
    if (top.g != gval[top.idx]) continue;  // stale entry
    if (++pops > opts_.node_budget) {
      throw BudgetError("A* node budget exceeded (" +
                        std::to_string(opts_.node_budget) + ")");
    }
    WorldState cur = states[top.idx];
    if (env_.eval_bool(goal.test, cur)) return top.g;

    for (const auto& a : env_.actions()) {
      if (!env_.eval_bool(a.precondition, cur)) continue;
      WorldState next = apply(env_, cur, a);
      Microcost ng = top.g + costs[a.schema_index];
      int nidx = intern(next);
      if (ng < gval[nidx]) {
        gval[nidx] = ng;
        open.push({ng + heuristic(goal, states[nidx], min_step), ng, nidx});
      }
    }
  }
  return kUnreachableCost;
}

QEstimate Planner::q_value(const WorldState& s, const GroundAction& a,
                           const GoalSpec& goal, const CostProfile& costs,
                           double goal_reward) {
  Microcost step = action_cost(a, costs);
  WorldState next = a.is_noop() ? s : apply(env_, s, a);
  PathResult rest = path_cost(next, goal, costs);
  if (!rest.reachable) return {kNegInf, false};
  // Sum in integer micro-units first so the conversion is a single rounding.
  Microcost total = step + rest.cost;
  return {goal_reward - microcost_to_double(total), true};
}

QEstimate Planner::belief_q_value(const Belief& b, const GroundAction& a,
                                  const GoalSpec& goal,
                                  const CostProfile& costs,
                                  double goal_reward) {
  std::vector<const Belief::Particle*> live;
  std::vector<bool> valid;
  bool any_valid = false, all_valid = true;
  for (const auto& p : b.particles) {
    if (!std::isfinite(p.log_weight)) continue;
    live.push_back(&p);
    bool v = a.is_noop() || env_.eval_bool(a.precondition, p.state);
    valid.push_back(v);
    any_valid |= v;
    all_valid &= v;
  }
  if (!any_valid) {
    throw UserError("action " + a.display +
                    " is invalid in every belief particle");
  }
  if (!all_valid && !opts_.skip_invalid_particles) {
    return {kNegInf, false};  // invalid in any particle eliminates the action
  }
  bool dead_end = false;
  std::vector<double> weights;  // log weights of contributing particles
  std::vector<double> utilities;
  for (std::size_t i = 0; i < live.size(); ++i) {
    if (!valid[i]) continue;
    QEstimate q = q_value(live[i]->state, a, goal, costs, goal_reward);
    if (!q.reachable) {
      dead_end = true;
      continue;
    }
    weights.push_back(live[i]->log_weight);
    utilities.push_back(q.utility);
  }
  if (dead_end || utilities.empty()) {
    return {kNegInf, false};
  }
  double mass = std::exp(logsumexp(weights));
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    double w = std::exp(weights[i]);
    acc += (opts_.skip_invalid_particles ? w / mass : w) * utilities[i];
  }
  return {acc, true};
}

CacheStats Planner::cache_stats() const {
  std::shared_lock lock(mu_);
  return {hits_.load(), misses_.load(), cache_.size()};
}

void Planner::clear_cache() {
  std::unique_lock lock(mu_);
  cache_.clear();
  hits_ = 0;
  misses_ = 0;
}

}  // namespace invplan
