// Command-line front end: run inference on a stimulus, batch-evaluate a
// directory against human judgments, cross-check the engine against the
// exhaustive oracle, or synthesize a new domain bundle through a language
// model transport.
//
// Exit codes: 0 success, 1 validation/data error, 2 internal invariant
// violation.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "invplan/pipeline.hpp"
#include "invplan/synthesis.hpp"

using namespace invplan;

namespace {

void write_output(const nlohmann::json& doc, const std::string& out_path) {
  std::string text = doc.dump(2);
  if (out_path.empty() || out_path == "-") {
    std::cout << text << "\n";
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw UserError("cannot write " + out_path);
  out << text << "\n";
}

Stimulus load_with_domain_override(const std::string& stimulus_path,
                                   const std::string& domain_override,
                                   const std::string& config_override) {
  Stimulus stim = load_stimulus(stimulus_path);
  if (!domain_override.empty()) {
    if (std::filesystem::is_directory(domain_override)) {
      stim.domain_ref = nlohmann::json{{"bundle_dir", domain_override}};
    } else {
      stim.domain_ref = nlohmann::json::parse(std::ifstream(domain_override));
    }
  }
  if (!config_override.empty()) {
    std::ifstream in(config_override);
    if (!in) throw UserError("cannot open " + config_override);
    stim.agent_config = nlohmann::json::parse(in);
  }
  return stim;
}

int run_command(const std::string& stimulus_path, const std::string& domain,
                const std::string& config, double beta,
                const std::string& out) {
  RunOptions opts;
  if (beta != 0.0) {
    if (!(beta > 0)) throw UserError("--beta must be greater than 0");
    opts.beta_override = beta;
  }
  Stimulus stim = load_with_domain_override(stimulus_path, domain, config);
  RunOutcome outcome = run_stimulus(stim, opts);
  write_output(outcome.report, out);
  return 0;
}

int eval_command(const std::string& dir, const std::string& csv, int jobs,
                 int resamples, std::uint64_t seed, double beta,
                 const std::string& out) {
  EvalOptions opts;
  opts.jobs = jobs;
  opts.resamples = resamples;
  opts.seed = seed;
  if (beta != 0.0) {
    if (!(beta > 0)) throw UserError("--beta must be greater than 0");
    opts.beta_override = beta;
  }
  nlohmann::json report = eval_directory(dir, csv, opts);
  write_output(report, out);
  return 0;
}

int verify_command(const std::string& dir, double tolerance, double beta,
                   std::size_t state_cap, const std::string& out) {
  VerifyOptions opts;
  opts.tolerance = tolerance;
  if (state_cap > 0) opts.oracle.state_cap = state_cap;
  if (beta != 0.0) {
    if (!(beta > 0)) throw UserError("--beta must be greater than 0");
    opts.beta_override = beta;
  }
  nlohmann::json report = verify_directory(dir, opts);
  write_output(report, out);
  if (report["empty"].get<bool>()) {
    std::cerr << "warning: no stimuli found in " << dir << "\n";
    return 0;
  }
  return report["ok"].get<bool>() ? 0 : 1;
}

int synth_command(const std::string& description_path,
                  const std::string& out_dir, const std::string& replay,
                  const std::string& transport_url, const std::string& model,
                  const std::string& assets, double temperature,
                  int max_attempts) {
  std::ifstream in(description_path);
  if (!in) throw UserError("cannot open " + description_path);
  nlohmann::json desc = nlohmann::json::parse(in);
  std::string description = desc.at("description").get<std::string>();
  nlohmann::json objects = desc.value("objects", nlohmann::json::object());

  std::unique_ptr<Transport> transport;
  if (!replay.empty()) {
    transport = std::make_unique<ReplayTransport>(ReplayTransport::from_file(replay));
  } else if (!transport_url.empty()) {
    HttpTransport::Config cfg;
    cfg.url = transport_url;
    cfg.model = model;
    cfg.temperature = temperature;
    transport = std::make_unique<HttpTransport>(cfg);
  } else {
    throw UserError("synth needs either --replay FIXTURE or --transport-url URL");
  }

  std::filesystem::path assets_dir =
      assets.empty() ? default_assets_dir() : std::filesystem::path(assets);
  PromptLibrary prompts = PromptLibrary::load(assets_dir);
  SynthesisOptions opts;
  opts.temperature = temperature;
  opts.max_attempts = max_attempts;

  std::filesystem::create_directories(out_dir);
  std::filesystem::path dir(out_dir);

  DomainSynthesis domain;
  try {
    domain = synthesize_domain(description, objects, prompts.get("env"),
                               *transport, opts);
  } catch (const SynthesisError& e) {
    nlohmann::json log;
    log["failed"] = "domain";
    log["reasons"] = e.reasons;
    write_output(log, (dir / "attempts_domain.json").string());
    throw;
  }
  {
    std::ofstream f(dir / "domain.pddl", std::ios::binary);
    f << domain.raw;  // accepted sample, byte-exact
  }
  write_output(attempts_to_json(domain.log),
               (dir / "attempts_domain.json").string());

  ConfigSynthesis config;
  try {
    config = synthesize_agent_config(description, prompts.get("agent"),
                                     *transport, opts);
  } catch (const SynthesisError& e) {
    nlohmann::json log;
    log["failed"] = "config";
    log["reasons"] = e.reasons;
    write_output(log, (dir / "attempts_config.json").string());
    throw;
  }
  {
    std::ofstream f(dir / "config.json", std::ios::binary);
    f << config.raw;
  }
  write_output(attempts_to_json(config.log),
               (dir / "attempts_config.json").string());

  std::cout << "bundle written to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grounded-planning inverse agent inference"};
  app.require_subcommand(1);

  std::string stimulus_path, domain, config, out, csv, dir;
  std::string replay, transport_url, model = "default", assets;
  double beta = 0.0, tolerance = 1e-9, temperature = 1.0;
  int jobs = 1, resamples = 10'000, max_attempts = 8;
  std::size_t state_cap = 0;
  std::uint64_t seed = 1;

  CLI::App* run = app.add_subcommand(
      "run", "Answer a stimulus' mental-state query");
  run->add_option("stimulus", stimulus_path, "stimulus JSON file")->required();
  run->add_option("--domain", domain, "domain bundle dir or reference JSON");
  run->add_option("--config", config, "agent config JSON overriding the bundle");
  run->add_option("--beta", beta, "rationality override (1/temperature)");
  run->add_option("--out", out, "output path (default stdout)");

  CLI::App* eval = app.add_subcommand(
      "eval", "Correlate a stimulus directory with human judgments");
  eval->add_option("stimuli", dir, "directory of stimulus JSON files")
      ->required();
  eval->add_option("human", csv, "human data CSV")->required();
  eval->add_option("--jobs", jobs, "parallel stimulus evaluations");
  eval->add_option("--resamples", resamples, "bootstrap resamples");
  eval->add_option("--seed", seed, "bootstrap seed");
  eval->add_option("--beta", beta, "rationality override");
  eval->add_option("--out", out, "output path (default stdout)");

  CLI::App* verify = app.add_subcommand(
      "verify", "Cross-check the engine against the exhaustive oracle");
  verify->add_option("stimuli", dir, "directory of stimulus JSON files")
      ->required();
  verify->add_option("--tolerance", tolerance, "max allowed divergence");
  verify->add_option("--state-cap", state_cap, "oracle reachable-state cap");
  verify->add_option("--beta", beta, "rationality override");
  verify->add_option("--out", out, "output path (default stdout)");

  CLI::App* synth = app.add_subcommand(
      "synth", "Synthesize a domain bundle via a language-model transport");
  synth->add_option("description", stimulus_path,
                    "task description JSON ({description, objects})")
      ->required();
  synth->add_option("--out-dir", dir, "bundle output directory")->required();
  synth->add_option("--replay", replay, "recorded-response fixture to replay");
  synth->add_option("--transport-url", transport_url, "live endpoint URL");
  synth->add_option("--model", model, "model name for live transports");
  synth->add_option("--assets", assets, "assets dir with prompt templates");
  synth->add_option("--temperature", temperature, "sampling temperature");
  synth->add_option("--max-attempts", max_attempts, "rejection-sampling cap");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return run_command(stimulus_path, domain, config, beta, out);
    }
    if (eval->parsed()) {
      return eval_command(dir, csv, jobs, resamples, seed, beta, out);
    }
    if (verify->parsed()) {
      return verify_command(dir, tolerance, beta, state_cap, out);
    }
    if (synth->parsed()) {
      return synth_command(stimulus_path, dir, replay, transport_url, model,
                           assets, temperature, max_attempts);
    }
  } catch (const UserError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
