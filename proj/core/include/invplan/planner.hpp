#pragma once

#include <atomic>
#include <cstdint>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "invplan/agent.hpp"
#include "invplan/cost.hpp"
#include "invplan/dynamics.hpp"

namespace invplan {

struct PlannerOptions {
  std::uint64_t node_budget = 1'000'000;
  // Admissible Manhattan lower bound for location/possession goals. Off by
  // default; domain builders that guarantee unit-step movement turn it on.
  bool use_manhattan = false;
  // Belief-space Q: skip particles where the action is invalid and
  // renormalize, instead of treating them as -inf.
  bool skip_invalid_particles = false;
};

struct PathResult {
  Microcost cost = 0;
  bool reachable = true;
};

struct QEstimate {
  double utility = 0.0;
  bool reachable = true;  // false => treated as -inf by the softmax
};

struct CacheStats {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::size_t entries = 0;
};

// Exact shortest-path costs over the grounded transition graph, memoized by
// (state digest, goal, cost profile). A* with cost 0 heuristic (uniform-cost
// search) by default; optional Manhattan heuristic where admissible. Cached
// values equal fresh searches bit-exactly. Concurrent readers are safe; the
// cache serializes writers internally.
class Planner {
public:
  explicit Planner(const GroundedEnvironment& env, PlannerOptions opts = {});

  // Minimal total action cost from s to any state satisfying goal, exact.
  // Throws BudgetError past the node budget -- never returns a wrong cost.
  PathResult path_cost(const WorldState& s, const GoalSpec& goal,
                       const CostProfile& costs);

  // Q(s, a) = goal_reward - cost(a) - path_cost(apply(s, a), goal, costs).
  QEstimate q_value(const WorldState& s, const GroundAction& a,
                    const GoalSpec& goal, const CostProfile& costs,
                    double goal_reward = 0.0);

  // Q_Bel(b, a) = sum over particles of w * Q(particle, a); invalid particles
  // contribute -inf (default) or are skipped per options. Throws UserError
  // if a is invalid in every particle.
  QEstimate belief_q_value(const Belief& b, const GroundAction& a,
                           const GoalSpec& goal, const CostProfile& costs,
                           double goal_reward = 0.0);

  Microcost action_cost(const GroundAction& a, const CostProfile& costs);

  const GroundedEnvironment& env() const { return env_; }
  const PlannerOptions& options() const { return opts_; }
  CacheStats cache_stats() const;
  void clear_cache();

private:
  struct CompiledGoal {
    CExpr test;
    // Manhattan heuristic inputs per literal: (agent xy ids, target xy ids,
    // needs_adjacent_only). Empty when the heuristic does not apply.
    struct HLiteral {
      int agent_x, agent_y, target_x, target_y;
      bool possession;  // has-style: distance-1 suffices
    };
    std::vector<HLiteral> hliterals;
    bool heuristic_ok = false;
  };

  const CompiledGoal& compiled_goal(const GoalSpec& goal);
  const std::vector<Microcost>& profile_costs(const CostProfile& costs);
  Microcost heuristic(const CompiledGoal& g, const WorldState& s,
                      Microcost min_step) const;
  Microcost run_astar(const WorldState& s, const CompiledGoal& goal,
                      const std::vector<Microcost>& costs, Microcost min_step);

  const GroundedEnvironment& env_;
  PlannerOptions opts_;

  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, Microcost> cache_;
  std::unordered_map<std::string, CompiledGoal> goals_;
  std::unordered_map<std::string, std::vector<Microcost>> profiles_;
  mutable std::atomic<std::uint64_t> hits_ = 0;
  mutable std::atomic<std::uint64_t> misses_ = 0;
};

}  // namespace invplan
