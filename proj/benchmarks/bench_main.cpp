// Micro-benchmarks for the hot paths: parsing+grounding, transition
// application, memoized shortest-path queries and full filtering runs.

#include <benchmark/benchmark.h>

#include "invplan/domains.hpp"
#include "invplan/oracle.hpp"
#include "invplan/pipeline.hpp"
#include "invplan/planner.hpp"
#include "invplan/siam.hpp"

using namespace invplan;

namespace {

DkgParams bench_params() {
  DkgParams p;
  p.grid = {7, 7};
  p.colors = {"blue", "red"};
  p.keys = {{"key1", "red"}, {"key2", "blue"}, {"key3", "blue"}};
  p.doors = {{"door1", "blue"},
             {"door2", "blue"},
             {"door3", "blue"},
             {"door4", "red"}};
  p.gems = {"gemA", "gemB", "gemC", "gemD"};
  return p;
}

WorldState bench_state(const DomainBundle& bundle,
                       const GroundedEnvironment& env) {
  WorldState s = env.initial_state();
  bundle.apply_static_facts(env, s);
  auto put = [&](const char* obj, int x, int y) {
    env.set_int(s, "xloc", {obj}, x);
    env.set_int(s, "yloc", {obj}, y);
  };
  put("player", 4, 5);
  put("gemA", 1, 1);
  put("gemB", 7, 2);
  put("gemC", 1, 7);
  put("gemD", 7, 7);
  put("key1", 1, 5);
  put("key2", 2, 4);
  put("key3", 6, 1);
  auto door = [&](const char* d, int x, int y) {
    put(d, x, y);
    env.set_bool(s, "locked", {d}, true);
    env.set_mat(s, "doorcell", y, x, true);
  };
  door("door1", 2, 1);
  door("door2", 3, 1);
  door("door3", 2, 7);
  door("door4", 6, 7);
  for (auto [x, y] : {std::pair{1, 2}, {2, 2}, {3, 2}, {3, 3}, {3, 4},
                      {1, 6}, {7, 6}}) {
    env.set_mat(s, "wall", y, x, true);
  }
  return s;
}

void BM_ParseAndGround(benchmark::State& state) {
  DomainBundle bundle = build_dkg(bench_params());
  for (auto _ : state) {
    DomainSpec spec = parse_domain(bundle.pddl_text);
    GroundedEnvironment env = ground(spec, bundle.objects, bundle.grid);
    benchmark::DoNotOptimize(env.actions().size());
  }
}
BENCHMARK(BM_ParseAndGround);

void BM_ValidActionsAndApply(benchmark::State& state) {
  DomainBundle bundle = build_dkg(bench_params());
  GroundedEnvironment env = bundle.ground_env();
  WorldState s = bench_state(bundle, env);
  for (auto _ : state) {
    std::vector<int> ids = valid_action_ids(env, s);
    WorldState next = apply(env, s, env.actions()[ids[0]]);
    benchmark::DoNotOptimize(next.ints[0]);
  }
}
BENCHMARK(BM_ValidActionsAndApply);

void BM_PathCostColdCache(benchmark::State& state) {
  DomainBundle bundle = build_dkg(bench_params());
  GroundedEnvironment env = bundle.ground_env();
  WorldState s = bench_state(bundle, env);
  for (auto _ : state) {
    Planner planner(env, PlannerOptions{.use_manhattan = true});
    PathResult r =
        planner.path_cost(s, bundle.config.goals[0], bundle.config.costs[0]);
    benchmark::DoNotOptimize(r.cost);
  }
}
BENCHMARK(BM_PathCostColdCache);

void BM_PathCostWarmCache(benchmark::State& state) {
  DomainBundle bundle = build_dkg(bench_params());
  GroundedEnvironment env = bundle.ground_env();
  WorldState s = bench_state(bundle, env);
  Planner planner(env, PlannerOptions{.use_manhattan = true});
  (void)planner.path_cost(s, bundle.config.goals[0], bundle.config.costs[0]);
  for (auto _ : state) {
    PathResult r =
        planner.path_cost(s, bundle.config.goals[0], bundle.config.costs[0]);
    benchmark::DoNotOptimize(r.cost);
  }
}
BENCHMARK(BM_PathCostWarmCache);

void BM_SiamFullRun(benchmark::State& state) {
  DomainBundle bundle = build_dkg(bench_params());
  GroundedEnvironment env = bundle.ground_env();
  WorldState s0 = bench_state(bundle, env);
  std::vector<WorldState> states = {s0};
  for (const char* name : {"up(player)", "up(player)", "right(player)"}) {
    for (const auto& a : env.actions()) {
      if (a.display == name) states.push_back(apply(env, states.back(), a));
    }
  }
  std::vector<Reconstructed> actions;
  for (std::size_t i = 0; i + 1 < states.size(); ++i) {
    actions.push_back(reconstruct_action(env, states[i], states[i + 1]));
  }
  for (auto _ : state) {
    Planner planner(env, PlannerOptions{.use_manhattan = true});
    SiamEngine engine(env, bundle.config, planner);
    PosteriorTable table = engine.run(states, actions);
    benchmark::DoNotOptimize(table.alive_count());
  }
}
BENCHMARK(BM_SiamFullRun);

void BM_OracleExactPosterior(benchmark::State& state) {
  DomainBundle bundle = build_dkg(bench_params());
  GroundedEnvironment env = bundle.ground_env();
  WorldState s0 = bench_state(bundle, env);
  std::vector<WorldState> states = {s0};
  for (const char* name : {"up(player)", "up(player)"}) {
    for (const auto& a : env.actions()) {
      if (a.display == name) states.push_back(apply(env, states.back(), a));
    }
  }
  std::vector<Reconstructed> actions;
  for (std::size_t i = 0; i + 1 < states.size(); ++i) {
    actions.push_back(reconstruct_action(env, states[i], states[i + 1]));
  }
  OracleOptions opts;
  opts.state_cap = 200000;
  for (auto _ : state) {
    OraclePosterior post =
        exact_posterior(env, bundle.config, states, actions, opts);
    benchmark::DoNotOptimize(post.final_weights().size());
  }
}
BENCHMARK(BM_OracleExactPosterior);

}  // namespace

BENCHMARK_MAIN();
