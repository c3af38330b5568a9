#include <cmath>
#include <random>

#include "doctest.h"
#include "invplan/domains.hpp"
#include "invplan/oracle.hpp"
#include "invplan/siam.hpp"
#include "testutil.hpp"

using namespace invplan;

namespace {

struct Rig {
  DomainBundle bundle;
  GroundedEnvironment env;
  Planner planner;
  SiamEngine engine;
  explicit Rig(DomainBundle b)
      : bundle(std::move(b)),
        env(bundle.ground_env()),
        planner(env, PlannerOptions{.use_manhattan = bundle.use_manhattan}),
        engine(env, bundle.config, planner) {}
};

std::vector<Reconstructed> derive(const GroundedEnvironment& env,
                                  const std::vector<WorldState>& states) {
  std::vector<Reconstructed> actions;
  for (std::size_t i = 0; i + 1 < states.size(); ++i) {
    actions.push_back(reconstruct_action(env, states[i], states[i + 1]));
  }
  return actions;
}

}  // namespace

TEST_CASE("exact cost-to-go: goal state is zero, two-state chain costs 3") {
  DkgParams p;
  p.grid = {1, 2};
  p.gems = {"gemA"};
  p.move_cost = 3.0;
  p.pickup_cost = 3.0;
  Rig r(build_dkg(p));
  // Player at (2,1); goal at(player, gemA) with gemA at (1,1): one move.
  WorldState s = testutil::dkg_state(r.bundle, r.env, {"A@"});
  GoalSpec at_goal = parse_goal({"(at player gemA)"}, "atA");
  auto ctg = exact_cost_to_go(r.env, s, at_goal, r.bundle.config.costs[0]);
  // The chain: start (cost 3) -> goal (cost 0); intermediate pickup states
  // also appear but the two anchor values are what the example pins.
  CHECK(ctg.at(s.digest()) == microcost_from_double(3.0));
  WorldState g = s;
  r.env.set_int(g, "xloc", {"player"}, 1);
  CHECK(ctg.at(g.digest()) == 0);
}

TEST_CASE("planner A* agrees with Bellman cost-to-go on random 5x5 maps") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 12; ++trial) {
    DkgParams p;
    p.grid = {5, 5};
    p.colors = {"blue"};
    p.keys = {{"key1", "blue"}};
    p.doors = {{"door1", "blue"}};
    p.gems = {"gemA", "gemB"};
    Rig r(build_dkg(p));
    std::vector<std::string> rows(5, ".....");
    auto place = [&](char c) {
      for (;;) {
        int y = rng() % 5, x = rng() % 5;
        if (rows[y][x] == '.') {
          rows[y][x] = c;
          return;
        }
      }
    };
    for (int w = 0; w < static_cast<int>(rng() % 6); ++w) place('#');
    place('@');
    place('a');
    place('1');
    place('A');
    place('B');
    WorldState s0 = testutil::dkg_state(r.bundle, r.env, rows);

    ReachableGraph graph = reachable_graph(r.env, {s0}, 5000);
    for (int g = 0; g < 2; ++g) {
      std::vector<Microcost> ctg = exact_cost_to_go(
          r.env, graph, r.bundle.config.goals[g], r.bundle.config.costs[0]);
      for (std::size_t i = 0; i < graph.states.size(); ++i) {
        PathResult pr = r.planner.path_cost(
            graph.states[i], r.bundle.config.goals[g], r.bundle.config.costs[0]);
        if (ctg[i] == kUnreachableCost) {
          CHECK(!pr.reachable);
        } else {
          REQUIRE(pr.reachable);
          CHECK(pr.cost == ctg[i]);  // bit-exact in micro units
        }
      }
    }
  }
}

TEST_CASE("exact posterior: zero actions equals the prior") {
  DkgParams p;
  p.grid = {3, 3};
  p.gems = {"gemA", "gemB"};
  Rig r(build_dkg(p));
  WorldState s0 = testutil::dkg_state(r.bundle, r.env, {"A.B", ".@.", "..."});
  OraclePosterior post = exact_posterior(r.env, r.bundle.config, {s0}, {});
  REQUIRE(post.snapshots.size() == 1);
  for (double w : post.final_weights()) {
    CHECK(w == doctest::Approx(std::log(0.5)).epsilon(1e-12));
  }
}

TEST_CASE("exact posterior: a single hypothesis stays at probability one") {
  DkgParams p;
  p.grid = {1, 4};
  p.gems = {"gemA"};
  Rig r(build_dkg(p));
  WorldState s0 = testutil::dkg_state(r.bundle, r.env, {"A.@."});
  std::vector<WorldState> states = {s0, apply(r.env, s0, r.env.actions()[
      valid_action_ids(r.env, s0)[0]])};
  OraclePosterior post =
      exact_posterior(r.env, r.bundle.config, states, derive(r.env, states));
  auto m = oracle_marginal(post, r.bundle.config, MarginalDim::Goal);
  REQUIRE(m.size() == 1);
  CHECK(m[0].prob == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("siam matches the exhaustive oracle within 1e-9 on a small maze") {
  DkgParams p;
  p.grid = {5, 5};
  p.colors = {"blue"};
  p.keys = {{"key1", "blue"}};
  p.doors = {{"door1", "blue"}};
  p.gems = {"gemA", "gemB"};
  p.temperature = 0.5;
  Rig r(build_dkg(p));
  WorldState s0 = testutil::dkg_state(
      r.bundle, r.env, {"..#A.", "a.#1.", "@.#..", ".....", "....B"});
  // Pick up the key and walk toward the door.
  std::vector<WorldState> states = {s0};
  auto act = [&](const std::string& display) {
    for (const auto& a : r.env.actions()) {
      if (a.display == display) {
        states.push_back(apply(r.env, states.back(), a));
        return;
      }
    }
    FAIL("missing action ", display);
  };
  act("pickup(player,key1)");
  act("up(player)");
  act("up(player)");
  act("right(player)");
  std::vector<Reconstructed> actions = derive(r.env, states);

  PosteriorTable table = r.engine.run(states, actions);
  OraclePosterior post =
      exact_posterior(r.env, r.bundle.config, states, actions);

  auto ms = r.engine.marginal(table, MarginalDim::Goal);
  auto mo = oracle_marginal(post, r.bundle.config, MarginalDim::Goal);
  REQUIRE(ms.size() == mo.size());
  for (std::size_t i = 0; i < ms.size(); ++i) {
    CHECK(ms[i].label == mo[i].label);
    CHECK(std::abs(ms[i].prob - mo[i].prob) < 1e-9);
  }
  // Per-timestep snapshots agree as well.
  PosteriorTable online = r.engine.init(states[0]);
  for (std::size_t t = 0; t < actions.size(); ++t) {
    auto snap_s = r.engine.marginal(online, MarginalDim::Goal);
    auto snap_o = oracle_marginal(post, r.bundle.config, MarginalDim::Goal,
                                  static_cast<int>(t));
    for (std::size_t i = 0; i < snap_s.size(); ++i) {
      CHECK(std::abs(snap_s[i].prob - snap_o[i].prob) < 1e-9);
    }
    r.engine.step(online, states[t], actions[t], states[t + 1]);
  }
}

TEST_CASE("oracle caps are errors") {
  DkgParams p;
  p.grid = {5, 5};
  p.gems = {"gemA"};
  Rig r(build_dkg(p));
  WorldState s0 = testutil::dkg_state(
      r.bundle, r.env, {"A....", ".....", "..@..", ".....", "....."});
  CHECK_THROWS_AS(reachable_graph(r.env, {s0}, 3), CapError);
  OracleOptions opts;
  opts.max_hypotheses = 0;
  CHECK_THROWS_AS(exact_posterior(r.env, r.bundle.config, {s0}, {}, opts),
                  CapError);
}
