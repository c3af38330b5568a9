#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "invplan/pddl.hpp"

namespace invplan {

struct Violation {
  enum class Severity { Error, Warning };
  Severity severity = Severity::Error;
  std::string code;     // stable machine-readable id, e.g. "undeclared-type"
  std::string message;
};

// Semantic validity of a parsed domain. Violations are data, not failures:
// an empty error list means the domain is valid.
struct ValidationReport {
  std::vector<Violation> violations;

  bool valid() const;
  std::vector<const Violation*> errors() const;
  nlohmann::json to_json() const;
  std::string summary() const;
};

ValidationReport validate_domain(const DomainSpec& spec);

}  // namespace invplan
