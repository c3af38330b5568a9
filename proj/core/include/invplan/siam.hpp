#pragma once

#include <functional>
#include <string>
#include <vector>

#include "invplan/agent.hpp"
#include "invplan/dynamics.hpp"
#include "invplan/planner.hpp"

namespace invplan {

enum class MarginalDim { Goal, RewardProfile, CostProfile, InitialBelief };

struct MarginalEntry {
  std::string label;
  double prob;
};

struct SubQuery {
  QueryKind kind;
  std::vector<std::string> subjects;  // empty = the dimension's default labels
};

struct QuerySpec {
  std::vector<SubQuery> parts;
};

struct Rating {
  QueryKind kind;
  std::string label;
  double value;
};

struct QueryResult {
  std::vector<Rating> ratings;  // ordered to match the query's sub-questions
};

// One hypothesis being filtered: indices into the configured spaces, the
// running unnormalized log weight and (under partial observability) the
// agent's simulated belief.
struct HypothesisState {
  PriorHypothesis key;
  double log_weight = 0.0;
  Belief belief;
  bool eliminated = false;
  int eliminated_at = -1;
  std::string eliminated_why;
  double last_loglik = 0.0;
};

struct PosteriorTable {
  int timestep = 0;
  std::vector<HypothesisState> hyps;
  std::vector<BeliefSeed> belief_space;
  std::vector<std::string> events;  // degeneracies, eliminations, warnings
  // The action consumed by the next belief advance (beliefs advance by the
  // previous step's action, then condition on the new frame).
  int pending_action = kNoPending;
  static constexpr int kNoPending = -2;

  std::size_t alive_count() const;
};

struct SiamOptions {
  std::size_t max_hypotheses = 100'000;
  // Per-hypothesis work in step() is independent; with jobs > 1 it runs on
  // that many threads. Each hypothesis' arithmetic is self-contained, so the
  // weights are bit-identical to a single-threaded run.
  int jobs = 1;
};

// Sequential inverse agent modeling: exact Bayesian filtering over the
// hypothesis space goals x rewards x costs x initial beliefs. Weights stay
// unnormalized in log space; normalization happens in marginal/expectation.
class SiamEngine {
public:
  SiamEngine(const GroundedEnvironment& env, const AgentConfig& cfg,
             Planner& planner, SiamOptions opts = {});

  // Enumerates hypotheses with their priors; beliefs are seeded from the
  // assignment worlds and conditioned on the observation at s0.
  PosteriorTable init(const WorldState& s0);

  // One filtering step for the transition (s_prev, a, s_t): per hypothesis,
  // advance the belief by the previous action, condition on the observation
  // at s_t, then multiply in the Boltzmann likelihood of a. Throws
  // DegenerateError when every hypothesis reaches -inf.
  void step(PosteriorTable& table, const WorldState& s_prev,
            const Reconstructed& a, const WorldState& s_t);

  // Folds step over the whole trajectory.
  PosteriorTable run(const std::vector<WorldState>& states,
                     const std::vector<Reconstructed>& actions);

  std::vector<MarginalEntry> marginal(const PosteriorTable& table,
                                      MarginalDim dim) const;
  double expectation(
      const PosteriorTable& table,
      const std::function<double(const PriorHypothesis&)>& f) const;
  QueryResult answer_query(const PosteriorTable& table,
                           const QuerySpec& q) const;

  const AgentConfig& config() const { return cfg_; }
  const GroundedEnvironment& env() const { return env_; }

private:
  double step_loglik(HypothesisState& h, const WorldState& s_prev,
                     const Reconstructed& a);
  double hypothesis_reward(const PriorHypothesis& key) const;

  const GroundedEnvironment& env_;
  const AgentConfig& cfg_;
  Planner& planner_;
  SiamOptions opts_;
};

}  // namespace invplan
