#include "invplan/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>

#include "invplan/mathutil.hpp"

namespace invplan {

ReachableGraph reachable_graph(const GroundedEnvironment& env,
                               const std::vector<WorldState>& roots,
                               std::size_t state_cap) {
  ReachableGraph g;
  std::deque<int> frontier;
  auto intern = [&](const WorldState& s) {
    std::string d = s.digest();
    auto it = g.index.find(d);
    if (it != g.index.end()) return it->second;
    if (g.states.size() >= state_cap) {
      throw CapError("reachable graph exceeds the state cap of " +
                     std::to_string(state_cap));
    }
    int id = static_cast<int>(g.states.size());
    g.index.emplace(std::move(d), id);
    g.states.push_back(s);
    g.edges.emplace_back();
    frontier.push_back(id);
    return id;
  };
  for (const auto& r : roots) intern(r);
  while (!frontier.empty()) {
    int id = frontier.front();
    frontier.pop_front();
    WorldState cur = g.states[id];
    for (const auto& a : env.actions()) {
      if (!env.eval_bool(a.precondition, cur)) continue;
      int succ = intern(apply(env, cur, a));
      g.edges[id].emplace_back(a.id, succ);
    }
  }
  return g;
}

namespace {

std::vector<Microcost> profile_by_schema(const GroundedEnvironment& env,
                                         const CostProfile& costs) {
  std::vector<Microcost> out(env.spec().actions.size(), 0);
  for (std::size_t i = 0; i < env.spec().actions.size(); ++i) {
    auto it = costs.costs.find(env.spec().actions[i].name);
    if (it == costs.costs.end()) {
      throw SchemaError("cost profile '" + costs.label +
                        "' is missing action '" + env.spec().actions[i].name +
                        "'");
    }
    out[i] = it->second;
  }
  return out;
}

}  // namespace

std::vector<Microcost> exact_cost_to_go(const GroundedEnvironment& env,
                                        const ReachableGraph& graph,
                                        const GoalSpec& goal,
                                        const CostProfile& costs) {
  std::vector<Microcost> by_schema = profile_by_schema(env, costs);
  std::vector<Microcost> value(graph.states.size(), kUnreachableCost);
  for (std::size_t i = 0; i < graph.states.size(); ++i) {
    if (goal_satisfied(env, graph.states[i], goal)) value[i] = 0;
  }
  // Plain Bellman sweeps to the fixed point; positive costs guarantee
  // convergence within |S| passes.
  for (;;) {
    bool changed = false;
    for (std::size_t i = 0; i < graph.states.size(); ++i) {
      if (value[i] == 0) continue;  // goal states stay at zero
      Microcost best = value[i];
      for (const auto& [aid, succ] : graph.edges[i]) {
        if (value[succ] == kUnreachableCost) continue;
        Microcost via =
            by_schema[env.actions()[aid].schema_index] + value[succ];
        if (best == kUnreachableCost || via < best) best = via;
      }
      if (best != value[i]) {
        value[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return value;
}

std::unordered_map<std::string, Microcost> exact_cost_to_go(
    const GroundedEnvironment& env, const WorldState& s0, const GoalSpec& goal,
    const CostProfile& costs, std::size_t state_cap) {
  ReachableGraph graph = reachable_graph(env, {s0}, state_cap);
  std::vector<Microcost> value = exact_cost_to_go(env, graph, goal, costs);
  std::unordered_map<std::string, Microcost> out;
  for (std::size_t i = 0; i < graph.states.size(); ++i) {
    out.emplace(graph.states[i].digest(), value[i]);
  }
  return out;
}

namespace {

// The oracle's own filtering state: one belief per hypothesis, plus lazily
// computed cost-to-go tables per (goal, cost-profile) pair.
class ExhaustiveBayes {
public:
  ExhaustiveBayes(const GroundedEnvironment& env, const AgentConfig& cfg,
                  const std::vector<WorldState>& states,
                  const OracleOptions& opts)
      : env_(env), cfg_(cfg), opts_(opts) {
    seeds_ = enumerate_belief_space(env, cfg, states.at(0));
    std::vector<WorldState> roots = states;
    for (const auto& s : seeds_) roots.push_back(s.world);
    graph_ = reachable_graph(env, roots, opts.state_cap);
  }

  const std::vector<BeliefSeed>& seeds() const { return seeds_; }

  const std::vector<Microcost>& ctg(int goal, int cost) {
    auto key = std::make_pair(goal, cost);
    auto it = tables_.find(key);
    if (it != tables_.end()) return it->second;
    std::vector<Microcost> v =
        exact_cost_to_go(env_, graph_, cfg_.goals[goal], cfg_.costs[cost]);
    return tables_.emplace(key, std::move(v)).first->second;
  }

  Microcost remaining(const WorldState& s, int goal, int cost) {
    auto it = graph_.index.find(s.digest());
    if (it == graph_.index.end()) {
      throw InternalError("oracle graph does not cover a queried state");
    }
    return ctg(goal, cost)[it->second];
  }

  // Q(s, a) from the Bellman table.
  double q_of(const WorldState& s, const GroundAction& a, int goal, int cost,
              double reward) {
    Microcost step;
    WorldState next = s;
    if (a.is_noop()) {
      auto it = cfg_.costs[cost].costs.find("no-op");
      step = it == cfg_.costs[cost].costs.end() ? 0 : it->second;
    } else {
      step = cfg_.costs[cost].costs.at(env_.spec().actions[a.schema_index].name);
      next = apply(env_, s, a);
    }
    Microcost rest = remaining(next, goal, cost);
    if (rest == kUnreachableCost) return kNegInf;
    return reward - microcost_to_double(step + rest);
  }

private:
  const GroundedEnvironment& env_;
  const AgentConfig& cfg_;
  OracleOptions opts_;
  std::vector<BeliefSeed> seeds_;
  ReachableGraph graph_;
  std::map<std::pair<int, int>, std::vector<Microcost>> tables_;
};

}  // namespace

OraclePosterior exact_posterior(const GroundedEnvironment& env,
                                const AgentConfig& cfg,
                                const std::vector<WorldState>& states,
                                const std::vector<Reconstructed>& actions,
                                const OracleOptions& opts) {
  if (states.empty()) throw UserError("need at least one frame");
  ExhaustiveBayes bayes(env, cfg, states, opts);

  OraclePosterior post;
  post.belief_space = bayes.seeds();
  std::size_t n_goals = cfg.goals.size();
  std::size_t n_rewards = cfg.rewards ? cfg.rewards->size() : 1;
  std::size_t n_costs = cfg.costs.size();
  std::size_t n_beliefs = cfg.partial ? bayes.seeds().size() : 1;
  std::size_t total = n_goals * n_rewards * n_costs * n_beliefs;
  if (total > opts.max_hypotheses) {
    throw CapError("oracle hypothesis cap exceeded (" + std::to_string(total) +
                   " > " + std::to_string(opts.max_hypotheses) + ")");
  }
  double beta = cfg.beta();

  // Priors, written out directly from the generative model.
  std::vector<double> weights;
  std::vector<Belief> beliefs;
  for (std::size_t g = 0; g < n_goals; ++g) {
    for (std::size_t r = 0; r < n_rewards; ++r) {
      for (std::size_t c = 0; c < n_costs; ++c) {
        for (std::size_t b = 0; b < n_beliefs; ++b) {
          PriorHypothesis key;
          key.goal = static_cast<int>(g);
          key.reward = cfg.rewards ? static_cast<int>(r) : -1;
          key.cost = static_cast<int>(c);
          key.belief = cfg.partial ? static_cast<int>(b) : -1;
          double lp;
          if (!cfg.rewards) {
            lp = -std::log(double(n_goals));
          } else {
            const WorldState& world =
                cfg.partial ? bayes.seeds()[b].world : states[0];
            std::vector<double> logits(n_goals, kNegInf);
            for (std::size_t g2 = 0; g2 < n_goals; ++g2) {
              Microcost rest =
                  bayes.remaining(world, static_cast<int>(g2), key.cost);
              if (rest == kUnreachableCost) continue;
              logits[g2] = beta * ((*cfg.rewards)[r].goal_rewards[g2] -
                                   microcost_to_double(rest));
            }
            double z = logsumexp(logits);
            lp = std::isfinite(z) ? logits[g] - z
                                  : -std::log(double(n_goals));
          }
          if (cfg.rewards) lp += -std::log(double(n_rewards));
          lp += -std::log(double(n_costs));
          if (cfg.partial) lp += -std::log(double(n_beliefs));
          post.keys.push_back(key);
          weights.push_back(lp);

          Belief belief;
          if (cfg.partial) {
            belief.particles.push_back({bayes.seeds()[b].world, 0.0});
          }
          beliefs.push_back(std::move(belief));
        }
      }
    }
  }

  // Condition initial beliefs on the first observation.
  if (cfg.partial) {
    Observation obs0 = observe(env, states[0], cfg);
    for (std::size_t i = 0; i < beliefs.size(); ++i) {
      try {
        beliefs[i] = belief_update(env, beliefs[i], obs0);
      } catch (const ImpossibleObservationError&) {
        weights[i] = kNegInf;
      }
    }
  }
  post.snapshots.push_back(weights);

  int pending = -2;
  for (std::size_t t = 0; t < actions.size(); ++t) {
    const WorldState& s_prev = states[t];
    const WorldState& s_t = states[t + 1];
    const Reconstructed& act = actions[t];
    Observation obs;
    if (cfg.partial) obs = observe(env, s_t, cfg);

    for (std::size_t i = 0; i < post.keys.size(); ++i) {
      if (!std::isfinite(weights[i])) continue;
      const PriorHypothesis& key = post.keys[i];
      double reward = 0.0;
      if (cfg.rewards && key.reward >= 0) {
        reward = (*cfg.rewards)[key.reward].goal_rewards[key.goal];
      }
      if (cfg.partial) {
        if (pending != -2) {
          const GroundAction& prev =
              pending < 0 ? env.noop() : env.actions()[pending];
          beliefs[i] = belief_advance(env, beliefs[i], prev);
          if (!beliefs[i].alive()) {
            weights[i] = kNegInf;
            continue;
          }
        }
        try {
          beliefs[i] = belief_update(env, beliefs[i], obs);
        } catch (const ImpossibleObservationError&) {
          weights[i] = kNegInf;
          continue;
        }
      }

      bool priced_noop = cfg.costs[key.cost].costs.count("no-op") > 0;
      if (act.noop && !priced_noop) continue;  // likelihood-neutral frame

      // Candidate actions and their utilities.
      std::vector<int> labels;
      std::vector<double> logits;
      auto add_candidate = [&](int label, double utility) {
        labels.push_back(label);
        logits.push_back(std::isfinite(utility) ? beta * utility : kNegInf);
      };
      if (cfg.partial) {
        std::set<int> ids;
        for (const auto& p : beliefs[i].particles) {
          if (!std::isfinite(p.log_weight)) continue;
          for (int id : valid_action_ids(env, p.state)) ids.insert(id);
        }
        for (int id : ids) {
          const GroundAction& a = env.actions()[id];
          double u = 0.0;
          bool invalid_somewhere = false, dead_end = false;
          for (const auto& p : beliefs[i].particles) {
            if (!std::isfinite(p.log_weight)) continue;
            if (!env.eval_bool(a.precondition, p.state)) {
              invalid_somewhere = true;
              break;
            }
            double q = bayes.q_of(p.state, a, key.goal, key.cost, reward);
            if (!std::isfinite(q)) {
              dead_end = true;
              break;
            }
            u += std::exp(p.log_weight) * q;
          }
          add_candidate(id, (invalid_somewhere || dead_end) ? kNegInf : u);
        }
        if (priced_noop) {
          double u = 0.0;
          bool dead_end = false;
          for (const auto& p : beliefs[i].particles) {
            if (!std::isfinite(p.log_weight)) continue;
            double q =
                bayes.q_of(p.state, env.noop(), key.goal, key.cost, reward);
            if (!std::isfinite(q)) {
              dead_end = true;
              break;
            }
            u += std::exp(p.log_weight) * q;
          }
          add_candidate(-1, dead_end ? kNegInf : u);
        }
      } else {
        for (int id : valid_action_ids(env, s_prev)) {
          add_candidate(id, bayes.q_of(s_prev, env.actions()[id], key.goal,
                                       key.cost, reward));
        }
        if (priced_noop) {
          add_candidate(-1, bayes.q_of(s_prev, env.noop(), key.goal, key.cost,
                                       reward));
        }
      }

      int want = act.noop ? -1 : act.action_id;
      double z = logsumexp(logits);
      double ll = kNegInf;
      for (std::size_t k = 0; k < labels.size(); ++k) {
        if (labels[k] != want) continue;
        ll = std::isfinite(z) ? logits[k] - z
                              : -std::log(double(labels.size()));
      }
      weights[i] += ll;
    }
    pending = act.noop ? -1 : act.action_id;
    post.snapshots.push_back(weights);
  }
  return post;
}

std::vector<MarginalEntry> oracle_marginal(const OraclePosterior& post,
                                           const AgentConfig& cfg,
                                           MarginalDim dim, int timestep) {
  const std::vector<double>& ws =
      timestep < 0 ? post.final_weights()
                   : post.snapshots.at(static_cast<std::size_t>(timestep));
  std::vector<std::string> labels;
  std::function<int(const PriorHypothesis&)> index_of;
  switch (dim) {
    case MarginalDim::Goal:
      for (const auto& g : cfg.goals) labels.push_back(g.label);
      index_of = [](const PriorHypothesis& h) { return h.goal; };
      break;
    case MarginalDim::RewardProfile:
      for (const auto& r : *cfg.rewards) labels.push_back(r.label);
      index_of = [](const PriorHypothesis& h) { return h.reward; };
      break;
    case MarginalDim::CostProfile:
      for (const auto& c : cfg.costs) labels.push_back(c.label);
      index_of = [](const PriorHypothesis& h) { return h.cost; };
      break;
    case MarginalDim::InitialBelief:
      for (const auto& b : post.belief_space) labels.push_back(b.label);
      index_of = [](const PriorHypothesis& h) { return h.belief; };
      break;
  }
  std::vector<std::vector<double>> groups(labels.size());
  std::vector<double> all;
  for (std::size_t i = 0; i < post.keys.size(); ++i) {
    if (!std::isfinite(ws[i])) continue;
    groups[index_of(post.keys[i])].push_back(ws[i]);
    all.push_back(ws[i]);
  }
  double z = logsumexp(all);
  if (!std::isfinite(z)) {
    throw DegenerateError("oracle posterior is degenerate");
  }
  std::vector<MarginalEntry> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    double g = logsumexp(groups[i]);
    out.push_back({labels[i], std::isfinite(g) ? std::exp(g - z) : 0.0});
  }
  return out;
}

double oracle_expectation(
    const OraclePosterior& post,
    const std::function<double(const PriorHypothesis&)>& f, int timestep) {
  const std::vector<double>& ws =
      timestep < 0 ? post.final_weights()
                   : post.snapshots.at(static_cast<std::size_t>(timestep));
  std::vector<double> finite;
  for (double w : ws) {
    if (std::isfinite(w)) finite.push_back(w);
  }
  double z = logsumexp(finite);
  if (!std::isfinite(z)) {
    throw DegenerateError("oracle posterior is degenerate");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < post.keys.size(); ++i) {
    if (!std::isfinite(ws[i])) continue;
    acc += std::exp(ws[i] - z) * f(post.keys[i]);
  }
  return acc;
}

}  // namespace invplan
