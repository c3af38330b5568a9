#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "invplan/agent.hpp"
#include "invplan/pddl.hpp"

namespace invplan {

// Instruction-prompt template with {{slot}} placeholders.
struct PromptTemplate {
  std::string id;  // env | agent | cell
  std::string text;

  std::string render(const std::map<std::string, std::string>& values) const;
};

// Loads prompts/{env,agent,cell}_prompt.txt from an assets directory.
class PromptLibrary {
public:
  static PromptLibrary load(const std::filesystem::path& assets_dir);
  const PromptTemplate& get(const std::string& id) const;

private:
  std::map<std::string, PromptTemplate> templates_;
};

// Abstract LLM service. Three backends: live HTTP, recorded-fixture replay
// and a programmable mock; no test depends on a live endpoint.
class Transport {
public:
  virtual ~Transport() = default;
  virtual std::string request(const std::string& prompt) = 0;
  virtual bool supports_vision() const { return false; }
};

class MockTransport : public Transport {
public:
  explicit MockTransport(std::vector<std::string> responses,
                         bool vision = false)
      : responses_(std::move(responses)), vision_(vision) {}
  std::string request(const std::string& prompt) override;
  bool supports_vision() const override { return vision_; }
  const std::vector<std::string>& seen_prompts() const { return prompts_; }

private:
  std::vector<std::string> responses_;
  std::vector<std::string> prompts_;
  std::size_t next_ = 0;
  bool vision_ = false;
};

// Replays responses recorded in a JSON fixture:
//   {"responses": ["..."]} or {"response_files": ["relative/path", ...]}
// (file contents are used verbatim, preserving byte-exact replay).
class ReplayTransport : public Transport {
public:
  static ReplayTransport from_file(const std::filesystem::path& path);
  explicit ReplayTransport(std::vector<std::string> responses,
                           bool vision = true)
      : responses_(std::move(responses)), vision_(vision) {}
  std::string request(const std::string& prompt) override;
  bool supports_vision() const override { return vision_; }

private:
  std::vector<std::string> responses_;
  std::size_t next_ = 0;
  bool vision_ = true;
};

class HttpTransport : public Transport {
public:
  struct Config {
    std::string url;            // e.g. http://host:port/v1/complete
    std::string model;
    std::string api_key_env = "INVPLAN_API_KEY";
    double temperature = 1.0;
    bool vision = false;
  };
  explicit HttpTransport(Config cfg);  // throws UserError if the key is unset
  std::string request(const std::string& prompt) override;
  bool supports_vision() const override { return cfg_.vision; }

private:
  Config cfg_;
  std::string api_key_;
  std::string host_;
  std::string path_;
  int port_ = 80;
  bool https_ = false;
};

struct SynthesisAttempt {
  int index = 0;
  std::string response;
  bool accepted = false;
  std::string failure;  // empty when accepted
};

nlohmann::json attempts_to_json(const std::vector<SynthesisAttempt>& log);

struct SynthesisOptions {
  int max_attempts = 8;
  double temperature = 1.0;  // forwarded to live transports
  int samples = 1;           // accepted samples wanted (first is returned)
  GridDims trial_grid{5, 5};
};

struct DomainSynthesis {
  DomainSpec spec;
  std::string raw;  // accepted response, byte-exact
  std::vector<SynthesisAttempt> log;
};

// Rejection-sampling loop: request -> parse -> validate -> trial-ground on
// objects derived from the object dictionary. Returns the first fully valid
// sample; throws SynthesisError with all failure reasons past the cap.
DomainSynthesis synthesize_domain(const std::string& description,
                                  const nlohmann::json& objects,
                                  const PromptTemplate& tmpl,
                                  Transport& transport,
                                  const SynthesisOptions& opts = {});

struct ConfigSynthesis {
  AgentConfig config;
  std::string raw;
  std::vector<SynthesisAttempt> log;
};

// Same loop with parse_agent_config as the validator; when an environment is
// supplied, goals/costs are also checked against it.
ConfigSynthesis synthesize_agent_config(const std::string& description,
                                        const PromptTemplate& tmpl,
                                        Transport& transport,
                                        const SynthesisOptions& opts = {},
                                        const GroundedEnvironment* env = nullptr);

struct CellParse {
  std::vector<std::string> object_names;
  std::string pddl;  // facts with $i/$j placeholders
  std::vector<SynthesisAttempt> log;
};

// Optional per-cell classifier capability; not-supported transports fail
// before any request and leave the core pipeline unaffected.
CellParse classify_cell(const nlohmann::json& payload,
                        const PromptTemplate& tmpl, Transport& transport,
                        const SynthesisOptions& opts = {});

// Resolves the assets directory: explicit flag, INVPLAN_ASSETS env var, or
// the compiled-in source tree location.
std::filesystem::path default_assets_dir();

}  // namespace invplan
