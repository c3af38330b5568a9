#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace invplan {

// Recoverable problems in user input, configuration or data. The CLI maps
// these to exit code 1.
class UserError : public std::runtime_error {
public:
  explicit UserError(const std::string& what) : std::runtime_error(what) {}
};

// Broken internal contracts. The CLI maps these to exit code 2.
class InternalError : public std::logic_error {
public:
  explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

class ParseError : public UserError {
public:
  ParseError(const std::string& msg, int line, int col)
      : UserError(msg + " at line " + std::to_string(line) + ", column " +
                  std::to_string(col)),
        line(line),
        col(col) {}
  int line;
  int col;
};

// Schema violations in JSON/CSV inputs (agent configs, stimuli, human data).
class SchemaError : public UserError {
public:
  using UserError::UserError;
};

class GroundingError : public UserError {
public:
  using UserError::UserError;
};

// apply() called with an action whose precondition does not hold.
class TransitionError : public UserError {
public:
  using UserError::UserError;
};

struct FluentDiff {
  std::string fluent;
  std::string before;
  std::string after;
};

// No ground action explains an observed state pair.
class ReconstructError : public UserError {
public:
  ReconstructError(const std::string& msg, std::vector<FluentDiff> diffs)
      : UserError(msg), diffs(std::move(diffs)) {}
  std::vector<FluentDiff> diffs;
};

// Search node budget exceeded; never a wrong cost.
class BudgetError : public UserError {
public:
  using UserError::UserError;
};

// Configurable size caps (ground actions, hypothesis space, oracle graph).
class CapError : public UserError {
public:
  using UserError::UserError;
};

// Every hypothesis was driven to -inf weight.
class DegenerateError : public UserError {
public:
  using UserError::UserError;
};

class TransportError : public UserError {
public:
  using UserError::UserError;
};

// Rejection-sampling attempt cap exhausted; carries all failure reasons.
class SynthesisError : public UserError {
public:
  SynthesisError(const std::string& msg, std::vector<std::string> reasons)
      : UserError(msg), reasons(std::move(reasons)) {}
  std::vector<std::string> reasons;
};

}  // namespace invplan
