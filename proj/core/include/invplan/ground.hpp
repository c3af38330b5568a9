#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "invplan/errors.hpp"
#include "invplan/pddl.hpp"
#include "invplan/world.hpp"

namespace invplan {

struct GridDims {
  int rows = 0;  // gridheight
  int cols = 0;  // gridwidth
  bool operator==(const GridDims&) const = default;
};

enum class ObjectTag { Generic, Unique, Background, Agent };

// The concrete object universe an environment is grounded over. Domain
// :constants are added automatically and need not be listed.
struct ObjectSet {
  struct Entry {
    std::string name;
    std::string type;
    ObjectTag tag = ObjectTag::Generic;
  };
  std::vector<Entry> entries;

  void add(std::string name, std::string type,
           ObjectTag tag = ObjectTag::Generic) {
    entries.push_back({std::move(name), std::move(type), tag});
  }
  const Entry* find(const std::string& name) const;
};

// Compiled expression over fluent ids; produced once at grounding time so
// state evaluation needs no name lookups.
struct CExpr {
  enum class Kind {
    IntConst,
    BoolConst,
    IntFluent,
    MatCell,   // index = matrix, kids = {row, col}
    Add,
    Sub,
    BoolFluent,
    Derived,   // index into compiled derived instances
    And,
    Or,
    Not,
    Cmp
  };
  Kind kind = Kind::BoolConst;
  long long value = 0;
  bool truth = false;
  CmpOp cmp = CmpOp::Eq;
  int index = -1;
  std::vector<CExpr> kids;
};

struct CEffect {
  enum class Kind { SetBool, Assign, Increase, Decrease, SetMatCell, When };
  Kind kind = Kind::SetBool;
  int index = -1;
  bool truth = false;  // SetBool / SetMatCell value
  CExpr value;
  CExpr row, col;
  CExpr condition;
  std::vector<CEffect> body;
};

// Stable integer ids for every ground fluent slot.
struct FluentIndex {
  std::vector<std::string> int_names;
  std::vector<std::string> bool_names;
  std::vector<std::string> mat_names;
  std::unordered_map<std::string, int> int_ids;
  std::unordered_map<std::string, int> bool_ids;
  std::unordered_map<std::string, int> mat_ids;

  static std::string key(const std::string& name,
                         const std::vector<std::string>& args);
};

struct GroundAction {
  int id = -1;            // position in canonical order; -1 for the no-op
  int schema_index = -1;  // cost-profile lookup id; -1 for the no-op
  std::string schema;     // schema name, "no-op" for the distinguished no-op
  std::vector<std::string> args;
  std::string display;    // "pickup(boy, tennisball)"
  CExpr precondition;
  std::vector<CEffect> effects;

  bool is_noop() const { return schema_index < 0; }
};

struct GroundOptions {
  std::size_t max_ground_actions = 1'000'000;
};

namespace detail {
class EnvCompiler;
}

// A concrete environment: fluent index, canonical ground-action list and the
// compiled evaluators for preconditions, effects and derived predicates.
// Immutable after construction and safe to share across threads.
class GroundedEnvironment {
public:
  const DomainSpec& spec() const { return spec_; }
  const ObjectSet& objects() const { return objects_; }
  GridDims grid() const { return grid_; }
  const FluentIndex& fluents() const { return fluents_; }
  const std::vector<GroundAction>& actions() const { return actions_; }
  const GroundAction& noop() const { return noop_; }

  // All objects (constants + object set) of a type, in declaration order.
  const std::vector<std::string>& objects_of_type(const std::string& type) const;
  const std::string* object_type(const std::string& name) const;

  // Fluent id lookups; throw GroundingError for unknown slots.
  int int_id(const std::string& fn, const std::vector<std::string>& args) const;
  int bool_id(const std::string& pred,
              const std::vector<std::string>& args) const;
  int mat_id(const std::string& fn) const;
  std::optional<int> try_bool_id(const std::string& pred,
                                 const std::vector<std::string>& args) const;

  // Blank state: matrices all false, ints 0 except gridheight/gridwidth (and
  // all xloc/yloc set to -1, the off-grid marker).
  WorldState initial_state() const;

  long long get_int(const WorldState& s, const std::string& fn,
                    const std::vector<std::string>& args) const;
  void set_int(WorldState& s, const std::string& fn,
               const std::vector<std::string>& args, long long v) const;
  bool get_bool(const WorldState& s, const std::string& pred,
                const std::vector<std::string>& args) const;
  void set_bool(WorldState& s, const std::string& pred,
                const std::vector<std::string>& args, bool v) const;
  void set_mat(WorldState& s, const std::string& fn, int y, int x,
               bool v) const;
  bool get_mat(const WorldState& s, const std::string& fn, int y,
               int x) const;

  bool eval_bool(const CExpr& e, const WorldState& s) const;
  long long eval_int(const CExpr& e, const WorldState& s) const;

  // Compiles a ground atom/value written with concrete object names (used by
  // goal literals and tests).
  CExpr compile_ground_formula(const Expr& e) const;

  bool multi_agent() const { return multi_agent_; }
  const std::vector<std::string>& agent_names() const { return agents_; }

private:
  friend GroundedEnvironment ground(const DomainSpec&, const ObjectSet&,
                                    GridDims, const GroundOptions&);
  friend class detail::EnvCompiler;

  DomainSpec spec_;
  ObjectSet objects_;
  GridDims grid_;
  FluentIndex fluents_;
  std::vector<GroundAction> actions_;
  GroundAction noop_;
  std::map<std::string, std::vector<std::string>> by_type_;
  std::map<std::string, std::string> object_types_;
  std::vector<CExpr> derived_bodies_;  // compiled per ground derived instance
  std::unordered_map<std::string, int> derived_instance_ids_;
  std::vector<std::string> agents_;
  bool multi_agent_ = false;

  mutable std::vector<std::string> empty_;
};

// Enumerates ground actions (schemas x type-compatible object tuples, ordered
// lexicographically by action name then argument names), builds the fluent
// index and compiles derived predicates. Throws GroundingError on type
// mismatches and CapError past max_ground_actions.
GroundedEnvironment ground(const DomainSpec& spec, const ObjectSet& objects,
                           GridDims grid, const GroundOptions& opts = {});

}  // namespace invplan
