#include "invplan/siam.hpp"

#include <algorithm>
#include <cmath>
#include <atomic>
#include <set>
#include <thread>
#include <sstream>

#include "invplan/mathutil.hpp"

namespace invplan {

std::size_t PosteriorTable::alive_count() const {
  std::size_t n = 0;
  for (const auto& h : hyps) {
    if (!h.eliminated && std::isfinite(h.log_weight)) ++n;
  }
  return n;
}

SiamEngine::SiamEngine(const GroundedEnvironment& env, const AgentConfig& cfg,
                       Planner& planner, SiamOptions opts)
    : env_(env), cfg_(cfg), planner_(planner), opts_(opts) {}

double SiamEngine::hypothesis_reward(const PriorHypothesis& key) const {
  if (key.reward < 0 || !cfg_.rewards) return 0.0;
  return (*cfg_.rewards)[key.reward].goal_rewards[key.goal];
}

PosteriorTable SiamEngine::init(const WorldState& s0) {
  PosteriorTable table;
  HypothesisPrior prior = initial_hypotheses(env_, cfg_, s0, planner_);
  std::size_t total = prior.hypotheses.size();
  if (total > opts_.max_hypotheses) {
    throw CapError("hypothesis space has " + std::to_string(total) +
                   " elements, over the cap of " +
                   std::to_string(opts_.max_hypotheses) +
                   "; reduce goals/rewards/costs/beliefs");
  }
  table.belief_space = prior.belief_space;
  for (const auto& w : prior.warnings) table.events.push_back(w);

  Observation obs;
  if (cfg_.partial) obs = observe(env_, s0, cfg_);

  for (const auto& ph : prior.hypotheses) {
    HypothesisState h;
    h.key = ph;
    h.log_weight = ph.log_prior;
    if (cfg_.partial) {
      Belief b;
      b.particles.push_back({table.belief_space[ph.belief].world, 0.0});
      try {
        h.belief = belief_update(env_, b, obs);
      } catch (const ImpossibleObservationError&) {
        h.eliminated = true;
        h.eliminated_at = 0;
        h.eliminated_why = "initial belief contradicts the first observation";
        h.log_weight = kNegInf;
        table.events.push_back("t=0: eliminated belief '" +
                               table.belief_space[ph.belief].label + "'");
      }
    }
    table.hyps.push_back(std::move(h));
  }
  if (table.alive_count() == 0) {
    throw DegenerateError(
        "every hypothesis is eliminated by the first observation (wrong "
        "belief space?)");
  }
  return table;
}

// Likelihood of the observed action under one hypothesis. Under partial
// observability the hypothesis' belief particles sit at the s_prev frame,
// already conditioned on the s_t observation: the belief advances by the
      // previous action and conditions on the newly revealed frame before
      // the current action's likelihood is scored.
double SiamEngine::step_loglik(HypothesisState& h, const WorldState& s_prev,
                               const Reconstructed& act) {
  const GoalSpec& goal = cfg_.goals[h.key.goal];
  const CostProfile& cost = cfg_.costs[h.key.cost];
  double reward = hypothesis_reward(h.key);
  double beta = cfg_.beta();
  bool priced_noop = cost.costs.count("no-op") > 0;

  if (act.noop && !priced_noop) {
    // Repeated frame with no no-op in the cost model: likelihood-neutral.
    return 0.0;
  }

  // Candidate actions: valid ones (union over particles when partial), plus
  // the no-op when the cost model prices it.
  std::vector<int> ids;
  if (cfg_.partial) {
    std::set<int> set;
    for (const auto& p : h.belief.particles) {
      if (!std::isfinite(p.log_weight)) continue;
      for (int id : valid_action_ids(env_, p.state)) set.insert(id);
    }
    ids.assign(set.begin(), set.end());
  } else {
    ids = valid_action_ids(env_, s_prev);
  }

  auto utility_of = [&](const GroundAction& a) -> double {
    if (cfg_.partial) {
      try {
        QEstimate q = planner_.belief_q_value(h.belief, a, goal, cost, reward);
        return q.reachable ? q.utility : kNegInf;
      } catch (const UserError&) {
        return kNegInf;  // invalid in every particle
      }
    }
    QEstimate q = planner_.q_value(s_prev, a, goal, cost, reward);
    return q.reachable ? q.utility : kNegInf;
  };

  std::vector<int> labels;  // action id, -1 for no-op
  std::vector<double> logits;
  for (int id : ids) {
    labels.push_back(id);
    double u = utility_of(env_.actions()[id]);
    logits.push_back(std::isfinite(u) ? beta * u : kNegInf);
  }
  if (priced_noop) {
    labels.push_back(-1);
    double u = utility_of(env_.noop());
    logits.push_back(std::isfinite(u) ? beta * u : kNegInf);
  }
  if (labels.empty()) return kNegInf;

  double z = logsumexp(logits);
  int want = act.noop ? -1 : act.action_id;
  std::size_t at = labels.size();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == want) at = i;
  }
  if (at == labels.size()) return kNegInf;  // observed action unavailable
  if (!std::isfinite(z)) {
    // All utilities -inf (e.g. unreachable goal): uniform over candidates.
    return -std::log(double(labels.size()));
  }
  return logits[at] - z;
}

void SiamEngine::step(PosteriorTable& table, const WorldState& s_prev,
                      const Reconstructed& act, const WorldState& s_t) {
  // Contract: the supplied action must explain the frame pair.
  if (act.noop) {
    if (!(s_prev == s_t)) {
      throw InternalError("no-op step with differing frames");
    }
  } else if (!(apply(env_, s_prev, env_.actions()[act.action_id]) == s_t)) {
    throw InternalError("step action does not explain the frame pair");
  }

  int t = table.timestep + 1;
  Observation obs;
  if (cfg_.partial) obs = observe(env_, s_t, cfg_);

  std::vector<std::string> event_buffer(table.hyps.size());
  auto process = [&](std::size_t index) {
    HypothesisState& h = table.hyps[index];
    if (h.eliminated) return;
    if (cfg_.partial) {
      if (table.pending_action != PosteriorTable::kNoPending) {
        const GroundAction& prev =
            table.pending_action < 0 ? env_.noop()
                                     : env_.actions()[table.pending_action];
        h.belief = belief_advance(env_, h.belief, prev);
        if (!h.belief.alive()) {
          h.eliminated = true;
          h.eliminated_at = t;
          h.eliminated_why = "agent's own action impossible in every particle";
          h.log_weight = kNegInf;
          event_buffer[index] =
              "t=" + std::to_string(t) +
              ": eliminated (belief advance) hypothesis goal=" +
              cfg_.goals[h.key.goal].label;
          return;
        }
      }
      try {
        h.belief = belief_update(env_, h.belief, obs);
      } catch (const ImpossibleObservationError&) {
        h.eliminated = true;
        h.eliminated_at = t;
        h.eliminated_why = "belief contradicted by observation";
        h.log_weight = kNegInf;
        event_buffer[index] =
            "t=" + std::to_string(t) + ": eliminated belief '" +
            (h.key.belief >= 0 ? table.belief_space[h.key.belief].label
                               : std::string("-")) +
            "'";
        return;
      }
    }
    double ll = step_loglik(h, s_prev, act);
    h.last_loglik = ll;
    h.log_weight += ll;
    if (!std::isfinite(h.log_weight)) {
      h.eliminated = true;
      h.eliminated_at = t;
      h.eliminated_why = "zero action likelihood";
    }
  };

  if (opts_.jobs <= 1 || table.hyps.size() < 2) {
    for (std::size_t i = 0; i < table.hyps.size(); ++i) process(i);
  } else {
    // Hypotheses are independent; events land in an indexed buffer and are
    // appended in index order afterwards, so the log stays deterministic.
    std::vector<std::thread> workers;
    std::atomic<std::size_t> next{0};
    int jobs = std::min<int>(opts_.jobs, static_cast<int>(table.hyps.size()));
    for (int j = 0; j < jobs; ++j) {
      workers.emplace_back([&] {
        for (;;) {
          std::size_t i = next.fetch_add(1);
          if (i >= table.hyps.size()) return;
          process(i);
        }
      });
    }
    for (auto& w : workers) w.join();
  }
  for (auto& e : event_buffer) {
    if (!e.empty()) table.events.push_back(std::move(e));
  }

  table.pending_action = act.noop ? -1 : act.action_id;
  table.timestep = t;

  if (table.alive_count() == 0) {
    std::ostringstream os;
    os << "posterior degenerate at t=" << t
       << "; last state per hypothesis:";
    for (const auto& h : table.hyps) {
      os << "\n  goal=" << cfg_.goals[h.key.goal].label;
      if (h.key.belief >= 0) {
        os << " belief=" << table.belief_space[h.key.belief].label;
      }
      os << " eliminated_at=" << h.eliminated_at << " (" << h.eliminated_why
         << ") last_loglik=" << h.last_loglik;
    }
    throw DegenerateError(os.str());
  }
}

PosteriorTable SiamEngine::run(const std::vector<WorldState>& states,
                               const std::vector<Reconstructed>& actions) {
  if (states.empty()) throw UserError("need at least one frame");
  if (actions.size() + 1 != states.size()) {
    throw UserError("need exactly one action per consecutive frame pair");
  }
  PosteriorTable table = init(states[0]);
  for (std::size_t t = 0; t < actions.size(); ++t) {
    step(table, states[t], actions[t], states[t + 1]);
  }
  return table;
}

std::vector<MarginalEntry> SiamEngine::marginal(const PosteriorTable& table,
                                                MarginalDim dim) const {
  std::vector<std::string> labels;
  std::function<int(const PriorHypothesis&)> index_of;
  switch (dim) {
    case MarginalDim::Goal:
      for (const auto& g : cfg_.goals) labels.push_back(g.label);
      index_of = [](const PriorHypothesis& h) { return h.goal; };
      break;
    case MarginalDim::RewardProfile:
      if (!cfg_.rewards) throw UserError("no reward space configured");
      for (const auto& r : *cfg_.rewards) labels.push_back(r.label);
      index_of = [](const PriorHypothesis& h) { return h.reward; };
      break;
    case MarginalDim::CostProfile:
      for (const auto& c : cfg_.costs) labels.push_back(c.label);
      index_of = [](const PriorHypothesis& h) { return h.cost; };
      break;
    case MarginalDim::InitialBelief:
      if (!cfg_.partial) {
        throw UserError("no belief space under full observability");
      }
      for (const auto& b : table.belief_space) labels.push_back(b.label);
      index_of = [](const PriorHypothesis& h) { return h.belief; };
      break;
  }
  std::vector<std::vector<double>> groups(labels.size());
  std::vector<double> all;
  for (const auto& h : table.hyps) {
    if (!std::isfinite(h.log_weight)) continue;
    groups[index_of(h.key)].push_back(h.log_weight);
    all.push_back(h.log_weight);
  }
  double z = logsumexp(all);
  if (!std::isfinite(z)) {
    throw DegenerateError("all hypotheses eliminated; no marginal exists");
  }
  std::vector<MarginalEntry> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    double g = logsumexp(groups[i]);
    out.push_back({labels[i], std::isfinite(g) ? std::exp(g - z) : 0.0});
  }
  return out;
}

double SiamEngine::expectation(
    const PosteriorTable& table,
    const std::function<double(const PriorHypothesis&)>& f) const {
  std::vector<double> ws;
  for (const auto& h : table.hyps) {
    if (std::isfinite(h.log_weight)) ws.push_back(h.log_weight);
  }
  double z = logsumexp(ws);
  if (!std::isfinite(z)) {
    throw DegenerateError("all hypotheses eliminated; no expectation exists");
  }
  double acc = 0.0;
  for (const auto& h : table.hyps) {
    if (!std::isfinite(h.log_weight)) continue;
    acc += std::exp(h.log_weight - z) * f(h.key);
  }
  return acc;
}

QueryResult SiamEngine::answer_query(const PosteriorTable& table,
                                     const QuerySpec& q) const {
  QueryResult result;
  for (const auto& part : q.parts) {
    if (std::find(cfg_.query.begin(), cfg_.query.end(), part.kind) ==
        cfg_.query.end()) {
      throw UserError("query kind '" + query_kind_name(part.kind) +
                      "' is not configured for this agent");
    }
    auto emit_marginal = [&](MarginalDim dim) {
      std::vector<MarginalEntry> m = marginal(table, dim);
      if (part.subjects.empty()) {
        for (const auto& e : m) {
          result.ratings.push_back({part.kind, e.label, e.prob});
        }
        return;
      }
      for (const auto& subject : part.subjects) {
        auto it = std::find_if(m.begin(), m.end(), [&](const MarginalEntry& e) {
          return e.label == subject;
        });
        if (it == m.end()) {
          throw UserError("unknown query subject '" + subject + "'");
        }
        result.ratings.push_back({part.kind, subject, it->prob});
      }
    };
    switch (part.kind) {
      case QueryKind::Goal:
        emit_marginal(MarginalDim::Goal);
        break;
      case QueryKind::Belief:
        emit_marginal(MarginalDim::InitialBelief);
        break;
      case QueryKind::Cost: {
        std::vector<std::string> subjects = part.subjects;
        if (subjects.empty()) {
          for (const auto& a : env_.spec().actions) subjects.push_back(a.name);
        }
        for (const auto& schema : subjects) {
          bool known = std::any_of(
              cfg_.costs.begin(), cfg_.costs.end(),
              [&](const CostProfile& c) { return c.costs.count(schema) > 0; });
          if (!known) {
            throw UserError("unknown cost query subject '" + schema + "'");
          }
          double e = expectation(table, [&](const PriorHypothesis& h) {
            const auto& costs = cfg_.costs[h.cost].costs;
            auto it = costs.find(schema);
            return it == costs.end() ? 0.0 : microcost_to_double(it->second);
          });
          result.ratings.push_back({part.kind, schema, e});
        }
        break;
      }
      case QueryKind::Reward: {
        if (!cfg_.rewards) throw UserError("no reward space configured");
        bool has_components = !(*cfg_.rewards)[0].components.empty();
        std::vector<std::string> subjects = part.subjects;
        if (subjects.empty()) {
          if (has_components) {
            for (const auto& [k, v] : (*cfg_.rewards)[0].components) {
              subjects.push_back(k);
            }
          } else {
            for (const auto& g : cfg_.goals) subjects.push_back(g.label);
          }
        }
        for (const auto& subject : subjects) {
          double e;
          if (has_components) {
            if (!(*cfg_.rewards)[0].components.count(subject)) {
              throw UserError("unknown reward query subject '" + subject +
                              "'");
            }
            e = expectation(table, [&](const PriorHypothesis& h) {
              return (*cfg_.rewards)[h.reward].components.at(subject);
            });
          } else {
            auto it = std::find_if(
                cfg_.goals.begin(), cfg_.goals.end(),
                [&](const GoalSpec& g) { return g.label == subject; });
            if (it == cfg_.goals.end()) {
              throw UserError("unknown reward query subject '" + subject +
                              "'");
            }
            std::size_t gi = it - cfg_.goals.begin();
            e = expectation(table, [&](const PriorHypothesis& h) {
              return (*cfg_.rewards)[h.reward].goal_rewards[gi];
            });
          }
          result.ratings.push_back({part.kind, subject, e});
        }
        break;
      }
    }
  }
  return result;
}

}  // namespace invplan
