#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "invplan/oracle.hpp"
#include "invplan/pipeline.hpp"
#include "testutil.hpp"

using namespace invplan;
namespace fs = std::filesystem;

namespace {

std::string cli() { return std::string(INVPLAN_BINARY_DIR) + "/tools/invplan"; }

int run_cli(const std::string& args) {
  std::string cmd = cli() + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("cli run: success, determinism and data-error exit codes") {
  fs::path out1 = fs::path(INVPLAN_BINARY_DIR) / "cli_run1.json";
  fs::path out2 = fs::path(INVPLAN_BINARY_DIR) / "cli_run2.json";
  std::string stim = testutil::assets_dir() + "/stimuli/dkg_paired_single.json";
  CHECK(run_cli("run " + stim + " --out " + out1.string()) == 0);
  CHECK(run_cli("run " + stim + " --out " + out2.string()) == 0);
  CHECK(slurp(out1) == slurp(out2));  // byte-identical reports
  CHECK(nlohmann::json::parse(slurp(out1)).contains("result"));

  CHECK(run_cli("run /nonexistent.json") == 1);
  CHECK(run_cli("run " + stim + " --beta -3") == 1);
}

TEST_CASE("cli verify: bundled fixtures pass; empty dir is a warning no-op") {
  std::string dir = testutil::assets_dir() + "/stimuli";
  CHECK(run_cli("verify " + dir) == 0);
  // An impossible tolerance forces the failure exit path.
  CHECK(run_cli("verify " + dir + " --tolerance -1") == 1);

  fs::path empty = fs::path(INVPLAN_BINARY_DIR) / "cli_empty_dir";
  fs::create_directories(empty);
  CHECK(run_cli("verify " + empty.string()) == 0);
}

TEST_CASE("verify detects an injected weight corruption") {
  Stimulus stim = load_stimulus(testutil::assets_dir() +
                                "/stimuli/foodtruck_empty_spot.json");
  RunOptions ropts;
  ropts.trace = false;
  RunOutcome out = run_stimulus(stim, ropts);
  Planner planner(*out.env, {});
  SiamEngine engine(*out.env, out.cfg, planner);
  PosteriorTable table = engine.run(out.states, out.actions);
  OraclePosterior oracle =
      exact_posterior(*out.env, out.cfg, out.states, out.actions);

  // Corrupt one surviving weight; marginals must now diverge past 1e-9.
  for (auto& h : table.hyps) {
    if (std::isfinite(h.log_weight)) {
      h.log_weight += 0.1;
      break;
    }
  }
  auto ms = engine.marginal(table, MarginalDim::Goal);
  auto mo = oracle_marginal(oracle, out.cfg, MarginalDim::Goal);
  double div = 0;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    div = std::max(div, std::abs(ms[i].prob - mo[i].prob));
  }
  // This fixture ends with a single goal, so corrupting the weight leaves the
  // normalized goal marginal intact -- but the belief dimension catches it
  // elsewhere. Use a multi-goal fixture for the real check below.
  Stimulus multi = load_stimulus(testutil::assets_dir() +
                                 "/stimuli/dkg_paired_single.json");
  RunOutcome mo2 = run_stimulus(multi, ropts);
  Planner planner2(*mo2.env, PlannerOptions{.use_manhattan = true});
  SiamEngine engine2(*mo2.env, mo2.cfg, planner2);
  PosteriorTable table2 = engine2.run(mo2.states, mo2.actions);
  OraclePosterior oracle2 =
      exact_posterior(*mo2.env, mo2.cfg, mo2.states, mo2.actions,
                      OracleOptions{.state_cap = 20000});
  table2.hyps[0].log_weight += 0.5;
  auto ms2 = engine2.marginal(table2, MarginalDim::Goal);
  auto mo2m = oracle_marginal(oracle2, mo2.cfg, MarginalDim::Goal);
  double div2 = 0;
  for (std::size_t i = 0; i < ms2.size(); ++i) {
    div2 = std::max(div2, std::abs(ms2[i].prob - mo2m[i].prob));
  }
  CHECK(div2 > 1e-9);
}

TEST_CASE("cli synth: replay reproduces fixtures byte-identically") {
  fs::path dir = fs::path(INVPLAN_BINARY_DIR) / "cli_synth_bundle";
  fs::remove_all(dir);
  fs::path desc = fs::path(INVPLAN_BINARY_DIR) / "cli_synth_desc.json";
  {
    nlohmann::json d;
    d["description"] =
        "A boy reaches for balls and plates placed around a small room.";
    d["objects"]["generic_objects"] = {"ball", "plate", "cabinet"};
    d["objects"]["unique_objects"] = {"tennisball", "basketball", "baseball"};
    d["objects"]["background_cells"] = {"whitespace", "blackspace"};
    d["objects"]["agent"] = {"boy"};
    std::ofstream out(desc);
    out << d.dump(2);
  }
  std::string replay = testutil::assets_dir() + "/fixtures/replay_example.json";
  CHECK(run_cli("synth " + desc.string() + " --out-dir " + dir.string() +
                " --replay " + replay) == 0);
  CHECK(slurp(dir / "domain.pddl") ==
        testutil::fixture("example_domain.pddl"));
  CHECK(slurp(dir / "config.json") ==
        testutil::fixture("example_config.json"));
  nlohmann::json log = nlohmann::json::parse(slurp(dir / "attempts_domain.json"));
  CHECK(log.size() == 1);
  CHECK(log[0]["accepted"].get<bool>());

  // Missing transport configuration fails before any request.
  CHECK(run_cli("synth " + desc.string() + " --out-dir " + dir.string()) == 1);
}

TEST_CASE("cli eval: agreement run through the binary") {
  fs::path dir = fs::path(INVPLAN_BINARY_DIR) / "cli_eval_dir";
  fs::remove_all(dir);
  fs::create_directories(dir);
  fs::copy_file(
      fs::path(testutil::assets_dir()) / "stimuli" / "dkg_paired_single.json",
      dir / "dkg_paired_single.json");
  Stimulus stim = load_stimulus(dir / "dkg_paired_single.json");
  RunOptions opts;
  opts.trace = false;
  RunOutcome outcome = run_stimulus(stim, opts);
  fs::path csv = dir / "human.csv";
  {
    std::ofstream out(csv);
    out << "stimulus_id,question_id,mean\n";
    for (const auto& r : outcome.ratings) {
      out << stim.id << "," << query_kind_name(r.kind) << "/" << r.label
          << "," << r.value << "\n";
    }
  }
  fs::path out_path = fs::path(INVPLAN_BINARY_DIR) / "cli_eval_report.json";
  CHECK(run_cli("eval " + dir.string() + " " + csv.string() + " --out " +
                out_path.string()) == 0);
  nlohmann::json report = nlohmann::json::parse(slurp(out_path));
  CHECK(report["r"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("exported problem-init blocks carry the state") {
  Stimulus stim = load_stimulus(testutil::assets_dir() +
                                "/stimuli/dkg_paired_single.json");
  DomainBundle bundle = build_builtin(stim.domain_ref);
  GroundedEnvironment env = bundle.ground_env();
  WorldState s0 = frames_to_states(stim, bundle, env)[0];
  std::string init = state_to_problem_init(env, s0);
  CHECK(init.find("(= (xloc player) 4)") != std::string::npos);
  CHECK(init.find("(locked door1)") != std::string::npos);
  CHECK(init.find("(= (get-index wall 2 1) true)") != std::string::npos);
}
