#pragma once

#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "invplan/agent.hpp"
#include "invplan/dynamics.hpp"
#include "invplan/siam.hpp"

namespace invplan {

// Brute-force verification path: explicit reachable graph, Bellman-sweep
// cost-to-go and a direct Bayes computation. Shares environment semantics and
// types with the main engines but none of the planner/siam internals, so
// agreement is a genuine cross-check. Test scale only.

struct ReachableGraph {
  std::vector<WorldState> states;
  std::unordered_map<std::string, int> index;           // digest -> id
  std::vector<std::vector<std::pair<int, int>>> edges;  // (action id, succ)
};

struct OracleOptions {
  std::size_t state_cap = 5000;
  std::size_t max_hypotheses = 200;
};

// BFS closure under valid_actions/apply from the root states.
ReachableGraph reachable_graph(const GroundedEnvironment& env,
                               const std::vector<WorldState>& roots,
                               std::size_t state_cap = 5000);

// Fixed point of the Bellman backup on the deterministic graph; entries are
// kUnreachableCost where no path reaches the goal.
std::vector<Microcost> exact_cost_to_go(const GroundedEnvironment& env,
                                        const ReachableGraph& graph,
                                        const GoalSpec& goal,
                                        const CostProfile& costs);

// Convenience form: cost-to-go over the reachable set of s0, keyed by digest.
std::unordered_map<std::string, Microcost> exact_cost_to_go(
    const GroundedEnvironment& env, const WorldState& s0, const GoalSpec& goal,
    const CostProfile& costs, std::size_t state_cap = 5000);

struct OraclePosterior {
  std::vector<PriorHypothesis> keys;
  std::vector<BeliefSeed> belief_space;
  // Unnormalized log weights after every step; snapshots[0] is the prior.
  std::vector<std::vector<double>> snapshots;

  const std::vector<double>& final_weights() const { return snapshots.back(); }
};

// Direct product of priors and Boltzmann action likelihoods, with all Q
// values taken from exact_cost_to_go.
OraclePosterior exact_posterior(const GroundedEnvironment& env,
                                const AgentConfig& cfg,
                                const std::vector<WorldState>& states,
                                const std::vector<Reconstructed>& actions,
                                const OracleOptions& opts = {});

// Marginals/expectations over one snapshot (timestep = -1 for the final one).
std::vector<MarginalEntry> oracle_marginal(const OraclePosterior& post,
                                           const AgentConfig& cfg,
                                           MarginalDim dim, int timestep = -1);
double oracle_expectation(
    const OraclePosterior& post,
    const std::function<double(const PriorHypothesis&)>& f, int timestep = -1);

}  // namespace invplan
