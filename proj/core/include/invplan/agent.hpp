#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "invplan/cost.hpp"
#include "invplan/dynamics.hpp"
#include "invplan/ground.hpp"

namespace invplan {

class Planner;

// A conjunction of ground literals, e.g. has(player, gemA).
struct GoalSpec {
  struct Literal {
    std::string predicate;
    std::vector<std::string> args;
    bool negated = false;
    bool operator==(const Literal&) const = default;
  };
  std::vector<Literal> literals;
  std::string label;

  std::string canonical() const;
  bool operator==(const GoalSpec&) const = default;
};

// Parses "(has human baseball)" or "(not (locked door1))".
GoalSpec::Literal parse_literal(const std::string& text);
std::string literal_to_string(const GoalSpec::Literal& lit);
GoalSpec parse_goal(const std::vector<std::string>& literal_strings,
                    const std::string& label = "");

// True when every literal of g holds in s.
bool goal_satisfied(const GroundedEnvironment& env, const WorldState& s,
                    const GoalSpec& g);

struct CostProfile {
  std::string label;
  std::map<std::string, Microcost> costs;  // action-schema name -> cost > 0
  std::string canonical() const;
};

struct RewardProfile {
  std::string label;
  std::vector<double> goal_rewards;            // aligned with AgentConfig.goals
  std::map<std::string, double> components;    // optional named parts
  std::string canonical() const;
};

enum class QueryKind { Goal, Belief, Reward, Cost };
std::string query_kind_name(QueryKind k);

enum class VisibilityMode { LineOfSight, Region };

struct BeliefConfig {
  std::string belief_object;     // hidden object type
  std::string belief_container;  // container type
  std::string barrier;           // bit-matrix terrain that obstructs view
  std::string agent;
  VisibilityMode visibility = VisibilityMode::LineOfSight;
  std::vector<std::string> hidden_objects;  // explicit override of instances
  bool allow_absent = false;
};

// Agent-model parameters; field names mirror the JSON configuration schema
// (grid_size, observability, belief_config, goals, costs, query, temperature).
struct AgentConfig {
  GridDims grid_size;
  bool partial = false;
  std::optional<BeliefConfig> belief;
  std::vector<GoalSpec> goals;
  std::optional<std::vector<RewardProfile>> rewards;
  std::vector<CostProfile> costs;
  std::vector<QueryKind> query;
  double temperature = 1.0;  // lower = more rational

  double beta() const { return 1.0 / temperature; }
};

// Schema-validated parse; beta defaults to 1.0 via temperature = 1.0.
// Throws SchemaError naming the offending field.
AgentConfig parse_agent_config(const nlohmann::json& doc);
nlohmann::json agent_config_to_json(const AgentConfig& cfg);

// Environment-level checks that need the grounded domain: goal literals
// reference known fluents, cost profiles key exactly the action schemas,
// belief types exist. Throws SchemaError.
void bind_config(const GroundedEnvironment& env, const AgentConfig& cfg);

// ---------------------------------------------------------------------------
// Observations and beliefs

// What the observed agent can see in one frame. Under full observability the
// observation is the complete fluent set; under partial observability the
// locations of belief objects whose cell (true or believed) is not visible
// are excluded.
struct Observation {
  bool full = true;
  WorldState truth;
  BitMatrix visible;                  // cell visibility from the agent's cell
  std::vector<std::string> tracked;   // belief-object instances
  std::vector<std::pair<int, int>> tracked_ids;  // their (xloc, yloc) int ids

  // Human-readable revealed facts, e.g. "truck1@(3,2)" or "truck1:hidden".
  std::vector<std::string> revealed() const;
};

Observation observe(const GroundedEnvironment& env, const WorldState& s,
                    const AgentConfig& cfg);

// Cells visible from (ax, ay): line-of-sight blocked by barrier cells
// strictly between cell centers, or a 4-connected non-barrier region.
BitMatrix visible_cells(const GroundedEnvironment& env, const WorldState& s,
                        const std::string& barrier_matrix, int ax, int ay,
                        VisibilityMode mode);

// Exact integer test used by line-of-sight: does the open segment between
// the centers of (ax, ay) and (bx, by) intersect the open unit cell (cx, cy)?
bool segment_crosses_cell(int ax, int ay, int bx, int by, int cx, int cy);

struct Belief {
  struct Particle {
    WorldState state;
    double log_weight = 0.0;
  };
  std::vector<Particle> particles;

  void normalize();  // log weights sum to 1 in probability space
  bool alive() const;
};

class ImpossibleObservationError : public UserError {
public:
  using UserError::UserError;
};

// Applies the agent's own action to every particle; particles where the
// action is invalid are eliminated (weight 0).
Belief belief_advance(const GroundedEnvironment& env, const Belief& b,
                      const GroundAction& a);

// Conditions on an observation: particles contradicting any observed fact
// get weight 0, survivors renormalize. Throws ImpossibleObservationError if
// no particle survives.
Belief belief_update(const GroundedEnvironment& env, const Belief& b,
                     const Observation& obs);

bool particle_consistent(const GroundedEnvironment& env, const WorldState& particle,
                         const Observation& obs);

// ---------------------------------------------------------------------------
// Hypothesis space

// One candidate initial belief: an assignment of hidden belief objects to
// containers, realized as a concrete world.
struct BeliefSeed {
  std::string label;  // "truck1@spot2" or "none"
  WorldState world;
};

// Enumerates the initial belief space from s0. Hidden instances default to
// belief-object-typed objects that are off-grid and unheld in s0; the config
// may list them explicitly instead.
std::vector<BeliefSeed> enumerate_belief_space(const GroundedEnvironment& env,
                                               const AgentConfig& cfg,
                                               const WorldState& s0);

struct PriorHypothesis {
  int goal = 0;
  int reward = -1;  // -1 when the config has no rewards
  int cost = 0;
  int belief = -1;  // -1 under full observability
  double log_prior = 0.0;
};

struct HypothesisPrior {
  std::vector<PriorHypothesis> hypotheses;  // goal-major enumeration order
  std::vector<BeliefSeed> belief_space;
  std::vector<std::string> warnings;
};

// Cartesian product over goals x rewards x costs x initial beliefs. Goal
// prior is uniform without rewards, Boltzmann in net utility (goal reward
// minus shortest-path cost from the hypothesis' initial world) with rewards;
// uniform over the other dimensions. Unreachable goals keep -inf weight.
HypothesisPrior initial_hypotheses(const GroundedEnvironment& env,
                                   const AgentConfig& cfg, const WorldState& s0,
                                   Planner& planner);

// ---------------------------------------------------------------------------
// Boltzmann-rational action choice

struct ActionDistribution {
  std::vector<int> action_ids;    // candidate actions, canonical order
  std::vector<double> log_probs;  // aligned; sums to 1 in probability space
  bool degenerate = false;        // all utilities -inf -> uniform fallback

  double log_prob_of(int action_id) const;
};

// Full observability: softmax over exp(beta * Q*(s, a)).
ActionDistribution action_distribution(const GroundedEnvironment& env,
                                       Planner& planner, const GoalSpec& goal,
                                       const CostProfile& cost,
                                       double goal_reward, double beta,
                                       const WorldState& s);

// Partial observability: softmax over belief-space Q values; candidates are
// the union of per-particle valid actions.
ActionDistribution action_distribution(const GroundedEnvironment& env,
                                       Planner& planner, const GoalSpec& goal,
                                       const CostProfile& cost,
                                       double goal_reward, double beta,
                                       const Belief& b);

}  // namespace invplan
