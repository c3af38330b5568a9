#include "invplan/synthesis.hpp"

#include <cstdlib>
#include <optional>
#include <fstream>
#include <sstream>

#include "httplib.h"

#include "invplan/validate.hpp"

namespace invplan {

std::string PromptTemplate::render(
    const std::map<std::string, std::string>& values) const {
  std::string out = text;
  for (const auto& [slot, value] : values) {
    std::string needle = "{{" + slot + "}}";
    for (std::size_t pos = out.find(needle); pos != std::string::npos;
         pos = out.find(needle, pos + value.size())) {
      out.replace(pos, needle.size(), value);
    }
  }
  if (auto pos = out.find("{{"); pos != std::string::npos) {
    auto end = out.find("}}", pos);
    throw UserError("prompt template '" + id + "' has an unfilled slot " +
                    out.substr(pos, end == std::string::npos
                                        ? std::string::npos
                                        : end - pos + 2));
  }
  return out;
}

PromptLibrary PromptLibrary::load(const std::filesystem::path& assets_dir) {
  PromptLibrary lib;
  for (const char* id : {"env", "agent", "cell"}) {
    std::filesystem::path p =
        assets_dir / "prompts" / (std::string(id) + "_prompt.txt");
    std::ifstream in(p);
    if (!in) throw UserError("cannot open prompt template " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    lib.templates_[id] = PromptTemplate{id, os.str()};
  }
  return lib;
}

const PromptTemplate& PromptLibrary::get(const std::string& id) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) {
    throw UserError("unknown prompt template '" + id + "'");
  }
  return it->second;
}

std::string MockTransport::request(const std::string& prompt) {
  prompts_.push_back(prompt);
  if (next_ >= responses_.size()) {
    throw TransportError("mock transport has no more scripted responses");
  }
  return responses_[next_++];
}

ReplayTransport ReplayTransport::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UserError("cannot open replay fixture " + path.string());
  nlohmann::json doc = nlohmann::json::parse(in);
  std::vector<std::string> responses;
  if (auto r = doc.find("responses"); r != doc.end()) {
    for (const auto& s : *r) responses.push_back(s.get<std::string>());
  }
  if (auto rf = doc.find("response_files"); rf != doc.end()) {
    for (const auto& f : *rf) {
      std::filesystem::path p = path.parent_path() / f.get<std::string>();
      std::ifstream file(p, std::ios::binary);
      if (!file) throw UserError("cannot open replay response " + p.string());
      std::ostringstream os;
      os << file.rdbuf();
      responses.push_back(os.str());
    }
  }
  if (responses.empty()) {
    throw SchemaError("replay fixture has neither responses nor response_files");
  }
  return ReplayTransport(std::move(responses));
}

std::string ReplayTransport::request(const std::string&) {
  if (next_ >= responses_.size()) {
    throw TransportError("replay fixture exhausted after " +
                         std::to_string(next_) + " responses");
  }
  return responses_[next_++];
}

HttpTransport::HttpTransport(Config cfg) : cfg_(std::move(cfg)) {
  const char* key = std::getenv(cfg_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw UserError("environment variable " + cfg_.api_key_env +
                    " is not set; refusing to start a live transport");
  }
  api_key_ = key;
  std::string rest = cfg_.url;
  if (rest.rfind("https://", 0) == 0) {
    https_ = true;
    port_ = 443;
    rest = rest.substr(8);
  } else if (rest.rfind("http://", 0) == 0) {
    rest = rest.substr(7);
  } else {
    throw UserError("transport url must start with http:// or https://");
  }
  auto slash = rest.find('/');
  std::string hostport = slash == std::string::npos ? rest : rest.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : rest.substr(slash);
  auto colon = hostport.find(':');
  if (colon != std::string::npos) {
    host_ = hostport.substr(0, colon);
    port_ = std::stoi(hostport.substr(colon + 1));
  } else {
    host_ = hostport;
  }
}

std::string HttpTransport::request(const std::string& prompt) {
  nlohmann::json body;
  body["model"] = cfg_.model;
  body["temperature"] = cfg_.temperature;
  body["prompt"] = prompt;
  httplib::Client client(host_, port_);
  client.set_read_timeout(120, 0);
  httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};
  auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) {
    throw TransportError("transport request to " + host_ + " failed");
  }
  if (res->status != 200) {
    throw TransportError("transport returned HTTP " +
                         std::to_string(res->status));
  }
  nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
  if (reply.is_discarded()) {
    throw TransportError("transport returned non-JSON body");
  }
  if (auto t = reply.find("text"); t != reply.end()) {
    return t->get<std::string>();
  }
  if (auto c = reply.find("choices");
      c != reply.end() && c->is_array() && !c->empty()) {
    const auto& first = (*c)[0];
    if (first.contains("message")) {
      return first["message"].value("content", "");
    }
    return first.value("text", "");
  }
  throw TransportError("transport reply carries no text field");
}

nlohmann::json attempts_to_json(const std::vector<SynthesisAttempt>& log) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& a : log) {
    arr.push_back({{"index", a.index},
                   {"accepted", a.accepted},
                   {"failure", a.failure},
                   {"response", a.response}});
  }
  return arr;
}

namespace {

// Derives a throwaway object set from the prompt's object dictionary and
// grounds the candidate domain on it; any failure is a rejection reason.
std::string trial_ground(const DomainSpec& spec, const nlohmann::json& objects,
                         GridDims grid) {
  ObjectSet set;
  auto names_of = [&](const char* field) {
    std::vector<std::string> out;
    if (auto it = objects.find(field); it != objects.end()) {
      for (const auto& v : *it) out.push_back(v.get<std::string>());
    }
    return out;
  };
  for (const auto& g : names_of("generic_objects")) {
    if (!spec.type_declared(g)) {
      return "generic object type '" + g + "' is not declared in :types";
    }
    set.add(g + "-trial", g);
  }
  for (const auto& u : names_of("unique_objects")) {
    bool is_constant = false;
    for (const auto& [name, type] : spec.constants) {
      if (name == u) is_constant = true;
    }
    if (!is_constant) {
      return "unique object '" + u + "' is not declared in :constants";
    }
  }
  for (const auto& a : names_of("agent")) {
    bool is_constant = false;
    for (const auto& [name, type] : spec.constants) {
      if (name == a) is_constant = true;
    }
    if (!is_constant) {
      if (!spec.type_declared("agent")) {
        return "agent '" + a + "' is neither a constant nor typeable";
      }
      set.add(a, "agent", ObjectTag::Agent);
    }
  }
  for (const auto& b : names_of("background_cells")) {
    const FunctionDecl* f = spec.find_function(b);
    if (f == nullptr || f->range != FluentRange::BitMatrix) {
      return "background cell '" + b + "' has no bit-matrix function";
    }
  }
  try {
    (void)ground(spec, set, grid);
  } catch (const UserError& e) {
    return std::string("grounding failed: ") + e.what();
  }
  return "";
}

}  // namespace

DomainSynthesis synthesize_domain(const std::string& description,
                                  const nlohmann::json& objects,
                                  const PromptTemplate& tmpl,
                                  Transport& transport,
                                  const SynthesisOptions& opts) {
  std::string prompt = tmpl.render({{"description", description},
                                    {"objects", objects.dump()},
                                    {"grid_size",
                                     std::to_string(opts.trial_grid.rows) +
                                         " by " +
                                         std::to_string(opts.trial_grid.cols)},
                                    {"actions", "per the task instructions"}});
  DomainSynthesis result;
  std::vector<std::string> reasons;
  int accepted = 0;
  for (int attempt = 1; attempt <= opts.max_attempts; ++attempt) {
    SynthesisAttempt log;
    log.index = attempt;
    try {
      log.response = transport.request(prompt);
    } catch (const TransportError&) {
      result.log.push_back(log);
      throw;
    }
    std::string failure;
    try {
      DomainSpec spec = parse_domain(log.response);
      ValidationReport report = validate_domain(spec);
      if (!report.valid()) {
        failure = "validation: " + report.errors()[0]->message;
      } else {
        failure = trial_ground(spec, objects, opts.trial_grid);
        if (failure.empty()) {
          log.accepted = true;
          if (++accepted == 1) {
            result.spec = std::move(spec);
            result.raw = log.response;
          }
          result.log.push_back(std::move(log));
          // k accepted samples may be requested; the first one is returned.
          if (accepted >= std::max(1, opts.samples)) return result;
          continue;
        }
      }
    } catch (const ParseError& e) {
      failure = std::string("parse: ") + e.what();
    }
    log.failure = failure;
    reasons.push_back("attempt " + std::to_string(attempt) + ": " + failure);
    result.log.push_back(std::move(log));
  }
  if (accepted > 0) return result;
  throw SynthesisError("domain synthesis failed after " +
                           std::to_string(opts.max_attempts) + " attempts",
                       std::move(reasons));
}

ConfigSynthesis synthesize_agent_config(const std::string& description,
                                        const PromptTemplate& tmpl,
                                        Transport& transport,
                                        const SynthesisOptions& opts,
                                        const GroundedEnvironment* env) {
  std::string actions = "per the task instructions";
  if (env != nullptr) {
    actions.clear();
    for (const auto& a : env->spec().actions) {
      if (!actions.empty()) actions += ", ";
      actions += a.name;
    }
  }
  std::string prompt = tmpl.render(
      {{"description", description},
       {"grid_size", env == nullptr
                         ? "per the task instructions"
                         : std::to_string(env->grid().rows) + " by " +
                               std::to_string(env->grid().cols)},
       {"actions", actions}});
  ConfigSynthesis result;
  std::vector<std::string> reasons;
  for (int attempt = 1; attempt <= opts.max_attempts; ++attempt) {
    SynthesisAttempt log;
    log.index = attempt;
    log.response = transport.request(prompt);
    std::string failure;
    nlohmann::json doc = nlohmann::json::parse(log.response, nullptr, false);
    if (doc.is_discarded()) {
      failure = "json: response is not valid JSON";
    } else {
      std::optional<AgentConfig> cfg;
      try {
        cfg = parse_agent_config(doc);
      } catch (const UserError& e) {
        failure = std::string("schema: ") + e.what();
      }
      if (cfg && env != nullptr) {
        try {
          bind_config(*env, *cfg);
        } catch (const UserError& e) {
          failure = std::string("grounding: ") + e.what();
          cfg.reset();
        }
      }
      if (cfg) {
        log.accepted = true;
        result.log.push_back(log);
        result.config = std::move(*cfg);
        result.raw = result.log.back().response;
        return result;
      }
    }
    log.failure = failure;
    reasons.push_back("attempt " + std::to_string(attempt) + ": " + failure);
    result.log.push_back(std::move(log));
  }
  throw SynthesisError("agent-config synthesis failed after " +
                           std::to_string(opts.max_attempts) + " attempts",
                       std::move(reasons));
}

CellParse classify_cell(const nlohmann::json& payload,
                        const PromptTemplate& tmpl, Transport& transport,
                        const SynthesisOptions& opts) {
  if (!transport.supports_vision()) {
    throw UserError(
        "transport does not support vision payloads; cell classification "
        "unavailable");
  }
  std::string prompt =
      tmpl.render({{"description", payload.value("description", "")},
                   {"objects", payload.value("objects", nlohmann::json::object()).dump()},
                   {"predicates", payload.value("predicates", "")},
                   {"payload", payload.value("image", "")}});
  CellParse result;
  std::vector<std::string> reasons;
  for (int attempt = 1; attempt <= opts.max_attempts; ++attempt) {
    SynthesisAttempt log;
    log.index = attempt;
    log.response = transport.request(prompt);
    std::string failure;
    nlohmann::json doc = nlohmann::json::parse(log.response, nullptr, false);
    if (doc.is_discarded()) {
      failure = "json: response is not valid JSON";
    } else if (!doc.contains("object_name") || !doc["object_name"].is_array()) {
      failure = "schema: missing object_name list";
    } else if (!doc.contains("object_pddl_str") ||
               !doc["object_pddl_str"].is_string()) {
      failure = "schema: missing object_pddl_str";
    } else {
      log.accepted = true;
      result.log.push_back(log);
      for (const auto& n : doc["object_name"]) {
        result.object_names.push_back(n.get<std::string>());
      }
      result.pddl = doc["object_pddl_str"].get<std::string>();
      return result;
    }
    log.failure = failure;
    reasons.push_back("attempt " + std::to_string(attempt) + ": " + failure);
    result.log.push_back(std::move(log));
  }
  throw SynthesisError("cell classification failed after " +
                           std::to_string(opts.max_attempts) + " attempts",
                       std::move(reasons));
}

std::filesystem::path default_assets_dir() {
  if (const char* env = std::getenv("INVPLAN_ASSETS"); env && *env) {
    return env;
  }
#ifdef INVPLAN_SOURCE_ASSETS_DIR
  return INVPLAN_SOURCE_ASSETS_DIR;
#else
  return "assets";
#endif
}

}  // namespace invplan
