#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "invplan/domains.hpp"
#include "invplan/oracle.hpp"
#include "invplan/siam.hpp"
#include "invplan/stimulus.hpp"

namespace invplan {

struct RunOptions {
  std::optional<double> beta_override;  // replaces 1/temperature
  bool trace = true;                    // per-timestep marginals in the report
};

// Everything one inference run produces; `report` is the stable JSON surface
// (identical inputs give byte-identical JSON).
struct RunOutcome {
  nlohmann::json report;
  std::vector<Rating> ratings;
  std::shared_ptr<GroundedEnvironment> env;
  DomainBundle bundle;
  AgentConfig cfg;
  std::vector<WorldState> states;
  std::vector<Reconstructed> actions;
};

// parse -> ground -> decode frames -> derive actions -> filter -> answer.
RunOutcome run_stimulus(const Stimulus& stim, const RunOptions& opts = {});

struct EvalOptions {
  int jobs = 1;
  int resamples = 10'000;
  std::uint64_t seed = 1;
  std::optional<double> beta_override;
};

// Runs every *.json stimulus in the directory, joins the ratings with the
// human CSV by (stimulus_id, question_id) and reports pooled Pearson r with
// a seeded bootstrap CI plus scatter data.
nlohmann::json eval_directory(const std::filesystem::path& stimulus_dir,
                              const std::filesystem::path& human_csv,
                              const EvalOptions& opts = {});

struct VerifyOptions {
  double tolerance = 1e-9;
  // The exhaustive check is offline-only, so it affords a larger graph than
  // exact_posterior's conservative default.
  OracleOptions oracle{.state_cap = 20'000, .max_hypotheses = 400};
  std::optional<double> beta_override;
};

// Cross-checks the engine against the exhaustive oracle on every stimulus:
// max |siam - oracle| per marginal entry and expectation, per timestep.
nlohmann::json verify_directory(const std::filesystem::path& stimulus_dir,
                                const VerifyOptions& opts = {});
nlohmann::json verify_stimulus(const Stimulus& stim,
                               const VerifyOptions& opts = {});

// Deterministic double formatting used for report payloads.
nlohmann::json report_json_dump_check(const nlohmann::json& doc);

}  // namespace invplan
