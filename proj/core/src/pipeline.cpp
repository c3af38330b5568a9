#include "invplan/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

#include "invplan/evalstats.hpp"
#include "invplan/planner.hpp"

namespace invplan {

namespace {

nlohmann::json marginal_to_json(const std::vector<MarginalEntry>& m) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : m) {
    arr.push_back({{"label", e.label}, {"p", e.prob}});
  }
  return arr;
}

nlohmann::json ratings_to_json(const std::vector<Rating>& ratings) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : ratings) {
    arr.push_back({{"kind", query_kind_name(r.kind)},
                   {"label", r.label},
                   {"value", r.value}});
  }
  return arr;
}

QuerySpec effective_query(const Stimulus& stim, const AgentConfig& cfg) {
  if (!stim.query.parts.empty()) return stim.query;
  QuerySpec q;
  for (QueryKind k : cfg.query) q.parts.push_back({k, {}});
  return q;
}

nlohmann::json snapshot_marginals(const SiamEngine& engine,
                                  const PosteriorTable& table,
                                  const AgentConfig& cfg) {
  nlohmann::json out;
  out["t"] = table.timestep;
  out["goal"] = marginal_to_json(engine.marginal(table, MarginalDim::Goal));
  if (cfg.partial) {
    out["belief"] =
        marginal_to_json(engine.marginal(table, MarginalDim::InitialBelief));
  }
  if (cfg.rewards && cfg.rewards->size() > 1) {
    out["reward_profile"] =
        marginal_to_json(engine.marginal(table, MarginalDim::RewardProfile));
  }
  if (cfg.costs.size() > 1) {
    out["cost_profile"] =
        marginal_to_json(engine.marginal(table, MarginalDim::CostProfile));
  }
  return out;
}

}  // namespace

RunOutcome run_stimulus(const Stimulus& stim, const RunOptions& opts) {
  RunOutcome out;
  try {
    out.bundle = build_builtin(stim.domain_ref);
  } catch (const UserError& e) {
    throw UserError("[domain] " + std::string(e.what()));
  }
  out.cfg = out.bundle.config;
  if (stim.agent_config) {
    try {
      out.cfg = parse_agent_config(*stim.agent_config);
    } catch (const UserError& e) {
      throw UserError("[config] " + std::string(e.what()));
    }
  }
  if (opts.beta_override) {
    if (!(*opts.beta_override > 0)) throw UserError("[config] beta must be > 0");
    out.cfg.temperature = 1.0 / *opts.beta_override;
  }
  try {
    out.env = std::make_shared<GroundedEnvironment>(out.bundle.ground_env());
    bind_config(*out.env, out.cfg);
  } catch (const UserError& e) {
    throw UserError("[ground] " + std::string(e.what()));
  }

  std::vector<std::string> warnings;
  try {
    out.states = frames_to_states(stim, out.bundle, *out.env, &warnings);
    out.actions = derive_actions(*out.env, out.states, &warnings);
  } catch (const UserError& e) {
    throw UserError("[parse-frames] " + std::string(e.what()));
  }

  Planner planner(*out.env,
                  PlannerOptions{.use_manhattan = out.bundle.use_manhattan});
  SiamEngine engine(*out.env, out.cfg, planner);

  nlohmann::json trace = nlohmann::json::array();
  PosteriorTable table = [&] {
    try {
      PosteriorTable t = engine.init(out.states[0]);
      if (opts.trace) trace.push_back(snapshot_marginals(engine, t, out.cfg));
      for (std::size_t i = 0; i < out.actions.size(); ++i) {
        engine.step(t, out.states[i], out.actions[i], out.states[i + 1]);
        if (opts.trace) trace.push_back(snapshot_marginals(engine, t, out.cfg));
      }
      return t;
    } catch (const UserError& e) {
      throw UserError("[siam] " + std::string(e.what()));
    }
  }();

  QueryResult result = [&] {
    try {
      return engine.answer_query(table, effective_query(stim, out.cfg));
    } catch (const UserError& e) {
      throw UserError("[query] " + std::string(e.what()));
    }
  }();
  out.ratings = result.ratings;

  nlohmann::json eliminated = nlohmann::json::array();
  for (const auto& h : table.hyps) {
    if (!h.eliminated) continue;
    eliminated.push_back({{"goal", out.cfg.goals[h.key.goal].label},
                          {"belief", h.key.belief >= 0
                                         ? table.belief_space[h.key.belief].label
                                         : ""},
                          {"at", h.eliminated_at},
                          {"why", h.eliminated_why}});
  }
  CacheStats cache = planner.cache_stats();
  nlohmann::json report;
  report["schema_version"] = 1;
  report["stimulus"] = stim.id;
  report["domain"] = out.bundle.name;
  report["frames"] = out.states.size();
  if (opts.trace) report["timesteps"] = std::move(trace);
  report["result"] = ratings_to_json(out.ratings);
  report["diagnostics"] = {
      {"hypothesis_count", table.hyps.size()},
      {"alive", table.alive_count()},
      {"eliminated", std::move(eliminated)},
      {"events", table.events},
      {"warnings", warnings},
      {"cache", {{"hits", cache.hits},
                 {"misses", cache.misses},
                 {"entries", cache.entries}}}};
  out.report = std::move(report);
  return out;
}

// ---------------------------------------------------------------------------
// Batch evaluation against human data

namespace {

std::vector<std::filesystem::path> stimulus_files(
    const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  if (!std::filesystem::is_directory(dir)) {
    throw UserError(dir.string() + " is not a directory");
  }
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::string question_id(const Rating& r) {
  return query_kind_name(r.kind) + "/" + r.label;
}

}  // namespace

nlohmann::json eval_directory(const std::filesystem::path& stimulus_dir,
                              const std::filesystem::path& human_csv,
                              const EvalOptions& opts) {
  std::vector<std::filesystem::path> files = stimulus_files(stimulus_dir);
  if (files.empty()) throw UserError("no stimuli in " + stimulus_dir.string());
  HumanDataTable human = load_human_data(human_csv);

  RunOptions ropts;
  ropts.trace = false;
  ropts.beta_override = opts.beta_override;

  std::vector<std::pair<std::string, std::vector<Rating>>> model(files.size());
  std::vector<std::string> errors(files.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        Stimulus stim = load_stimulus(files[i]);
        RunOutcome outcome = run_stimulus(stim, ropts);
        model[i] = {stim.id, outcome.ratings};
      } catch (const std::exception& e) {
        errors[i] = files[i].filename().string() + ": " + e.what();
      }
    }
  };
  int jobs = std::max(1, opts.jobs);
  if (jobs == 1) {
    work(0, files.size());
  } else {
    std::vector<std::thread> threads;
    std::size_t chunk = (files.size() + jobs - 1) / jobs;
    for (int j = 0; j < jobs; ++j) {
      std::size_t begin = j * chunk;
      std::size_t end = std::min(files.size(), begin + chunk);
      if (begin >= end) break;
      threads.emplace_back(work, begin, end);
    }
    for (auto& t : threads) t.join();
  }
  for (const auto& err : errors) {
    if (!err.empty()) throw UserError("eval: " + err);
  }

  // Join by (stimulus, question); both directions must align.
  std::map<std::pair<std::string, std::string>, double> model_ratings;
  for (const auto& [id, ratings] : model) {
    for (const auto& r : ratings) {
      model_ratings[{id, question_id(r)}] = r.value;
    }
  }
  std::set<std::pair<std::string, std::string>> human_keys;
  std::vector<std::string> orphans;
  std::vector<double> xs, ys;
  nlohmann::json scatter = nlohmann::json::array();
  for (const auto& row : human.rows) {
    auto key = std::make_pair(row.stimulus_id, row.question_id);
    human_keys.insert(key);
    auto it = model_ratings.find(key);
    if (it == model_ratings.end()) {
      orphans.push_back("human-only: " + row.stimulus_id + "/" +
                        row.question_id);
      continue;
    }
    xs.push_back(it->second);
    ys.push_back(row.mean);
    scatter.push_back({{"stimulus", row.stimulus_id},
                       {"question", row.question_id},
                       {"model", it->second},
                       {"human", row.mean}});
  }
  for (const auto& [key, value] : model_ratings) {
    if (!human_keys.count(key)) {
      orphans.push_back("model-only: " + key.first + "/" + key.second);
    }
  }
  if (!orphans.empty()) {
    std::string msg = "eval: stimulus/question ids do not align:";
    for (const auto& o : orphans) msg += "\n  " + o;
    throw UserError(msg);
  }

  double r = pearson(xs, ys);
  BootstrapCI ci = bootstrap_pearson_ci(xs, ys, opts.resamples, opts.seed);

  // Per-stimulus breakdown where defined.
  nlohmann::json per_stimulus = nlohmann::json::array();
  for (const auto& [id, ratings] : model) {
    std::vector<double> mx, my;
    for (const auto& row : human.rows) {
      if (row.stimulus_id != id) continue;
      mx.push_back(model_ratings.at({id, row.question_id}));
      my.push_back(row.mean);
    }
    nlohmann::json entry;
    entry["stimulus"] = id;
    entry["pairs"] = mx.size();
    try {
      entry["r"] = pearson(mx, my);
    } catch (const UserError&) {
      entry["r"] = nullptr;  // undefined for constant columns
    }
    per_stimulus.push_back(std::move(entry));
  }

  nlohmann::json report;
  report["schema_version"] = 1;
  report["n_pairs"] = xs.size();
  report["r"] = r;
  report["ci"] = {ci.lo, ci.hi};
  report["resamples"] = opts.resamples;
  report["seed"] = opts.seed;
  report["per_stimulus"] = std::move(per_stimulus);
  report["scatter"] = std::move(scatter);
  report["normalized_stimuli"] =
      std::vector<std::string>(human.normalized_stimuli.begin(),
                               human.normalized_stimuli.end());
  return report;
}

// ---------------------------------------------------------------------------
// Oracle cross-check

nlohmann::json verify_stimulus(const Stimulus& stim,
                               const VerifyOptions& opts) {
  RunOptions ropts;
  ropts.trace = false;
  ropts.beta_override = opts.beta_override;
  RunOutcome outcome = run_stimulus(stim, ropts);
  const GroundedEnvironment& env = *outcome.env;
  const AgentConfig& cfg = outcome.cfg;

  OraclePosterior oracle =
      exact_posterior(env, cfg, outcome.states, outcome.actions, opts.oracle);

  Planner planner(env, PlannerOptions{.use_manhattan = outcome.bundle.use_manhattan});
  SiamEngine engine(env, cfg, planner);
  PosteriorTable table = engine.init(outcome.states[0]);

  double max_div = 0.0;
  nlohmann::json checks = nlohmann::json::array();
  auto compare_marginals = [&](MarginalDim dim, const char* name, int t) {
    std::vector<MarginalEntry> a = engine.marginal(table, dim);
    std::vector<MarginalEntry> b = oracle_marginal(oracle, cfg, dim, t);
    double here = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      here = std::max(here, std::abs(a[i].prob - b[i].prob));
    }
    max_div = std::max(max_div, here);
    checks.push_back({{"t", t}, {"dim", name}, {"divergence", here}});
  };
  auto compare_all = [&](int t) {
    compare_marginals(MarginalDim::Goal, "goal", t);
    if (cfg.partial) compare_marginals(MarginalDim::InitialBelief, "belief", t);
    if (cfg.rewards) {
      compare_marginals(MarginalDim::RewardProfile, "reward_profile", t);
      // Expectations over reward components.
      if (!(*cfg.rewards)[0].components.empty()) {
        for (const auto& [label, v0] : (*cfg.rewards)[0].components) {
          auto f = [&, label = label](const PriorHypothesis& h) {
            return (*cfg.rewards)[h.reward].components.at(label);
          };
          double ea = engine.expectation(table, f);
          double eb = oracle_expectation(oracle, f, t);
          max_div = std::max(max_div, std::abs(ea - eb));
        }
      }
    }
    if (cfg.costs.size() > 1) {
      compare_marginals(MarginalDim::CostProfile, "cost_profile", t);
      for (const auto& [schema, v0] : cfg.costs[0].costs) {
        auto f = [&, schema = schema](const PriorHypothesis& h) {
          auto it = cfg.costs[h.cost].costs.find(schema);
          return it == cfg.costs[h.cost].costs.end()
                     ? 0.0
                     : microcost_to_double(it->second);
        };
        double ea = engine.expectation(table, f);
        double eb = oracle_expectation(oracle, f, t);
        max_div = std::max(max_div, std::abs(ea - eb));
      }
    }
  };
  compare_all(0);
  for (std::size_t i = 0; i < outcome.actions.size(); ++i) {
    engine.step(table, outcome.states[i], outcome.actions[i],
                outcome.states[i + 1]);
    compare_all(static_cast<int>(i) + 1);
  }

  nlohmann::json out;
  out["stimulus"] = stim.id;
  out["max_divergence"] = max_div;
  out["ok"] = max_div <= opts.tolerance;
  out["checks"] = std::move(checks);
  return out;
}

nlohmann::json verify_directory(const std::filesystem::path& stimulus_dir,
                                const VerifyOptions& opts) {
  std::vector<std::filesystem::path> files = stimulus_files(stimulus_dir);
  nlohmann::json report;
  report["schema_version"] = 1;
  report["tolerance"] = opts.tolerance;
  nlohmann::json instances = nlohmann::json::array();
  double max_div = 0.0;
  bool all_ok = true;
  std::vector<std::string> skipped;
  for (const auto& file : files) {
    Stimulus stim = load_stimulus(file);
    try {
      nlohmann::json one = verify_stimulus(stim, opts);
      all_ok = all_ok && one["ok"].get<bool>();
      max_div = std::max(max_div, one["max_divergence"].get<double>());
      instances.push_back(std::move(one));
    } catch (const CapError& e) {
      skipped.push_back(stim.id + ": " + e.what());
      all_ok = false;
    }
  }
  report["instances"] = std::move(instances);
  report["max_divergence"] = max_div;
  report["cap_exceeded"] = skipped;
  report["ok"] = all_ok;
  report["empty"] = files.empty();
  return report;
}

}  // namespace invplan
