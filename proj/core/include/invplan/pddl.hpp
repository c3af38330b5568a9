#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace invplan {

// Abstract syntax for the restricted PDDL dialect: typed objects, boolean
// predicates, integer and bit-matrix fluents, derived predicates, and action
// schemas whose formulas use and/or/not, comparisons, +/- arithmetic and
// get-index over bit-matrices. Anything outside this dialect is rejected at
// parse time.

struct TypedParam {
  std::string name;  // "?a" for variables, bare name for constants
  std::string type;
  bool operator==(const TypedParam&) const = default;
};

struct PredicateDecl {
  std::string name;
  std::vector<TypedParam> params;
  bool operator==(const PredicateDecl&) const = default;
};

enum class FluentRange { Integer, BitMatrix };

struct FunctionDecl {
  std::string name;
  std::vector<TypedParam> params;
  FluentRange range = FluentRange::Integer;
  bool operator==(const FunctionDecl&) const = default;
};

enum class CmpOp { Eq, Lt, Gt, Le, Ge };

// Shared expression tree for preconditions, derived-predicate bodies and
// numeric effect right-hand sides.
//   IntConst / BoolConst  literals (true/false, possibly negative integers)
//   Func                  integer function term, e.g. (xloc ?a) or turn
//   GetIndex              bit-matrix lookup; name = matrix, kids = {row, col}
//   Add / Sub             binary arithmetic
//   Atom                  predicate or derived-predicate atom
//   And / Or / Not        connectives
//   Cmp                   comparison of two value expressions
struct Expr {
  enum class Kind {
    IntConst,
    BoolConst,
    Func,
    GetIndex,
    Add,
    Sub,
    Atom,
    And,
    Or,
    Not,
    Cmp
  };
  Kind kind = Kind::BoolConst;
  long long value = 0;
  bool truth = false;
  CmpOp cmp = CmpOp::Eq;
  std::string name;
  std::vector<std::string> args;
  std::vector<Expr> kids;
  bool operator==(const Expr&) const = default;
};

// Atomic and compound effects.
//   Add / Del     set a predicate atom true/false
//   Assign / Increase / Decrease   write an integer function term
//   AssignCell    write one bit-matrix cell: name, cell = {row, col}, truth
//   When          conditional effect with a sub-effect list
struct Effect {
  enum class Kind { Add, Del, Assign, Increase, Decrease, AssignCell, When };
  Kind kind = Kind::Add;
  std::string name;
  std::vector<std::string> args;
  Expr value;
  std::vector<Expr> cell;
  Expr condition;
  std::vector<Effect> body;
  bool operator==(const Effect&) const = default;
};

struct ActionSchema {
  std::string name;
  std::vector<TypedParam> params;
  Expr precondition;
  std::vector<Effect> effects;
  bool operator==(const ActionSchema&) const = default;
};

struct DerivedDef {
  std::string predicate;
  std::vector<TypedParam> params;
  Expr body;
  bool operator==(const DerivedDef&) const = default;
};

struct DomainSpec {
  std::string name;
  std::vector<std::string> requirements;
  // child -> parent pairs; "object" is the implicit root and needs no entry.
  std::vector<std::pair<std::string, std::string>> types;
  std::vector<PredicateDecl> predicates;
  std::vector<std::pair<std::string, std::string>> constants;
  std::vector<FunctionDecl> functions;
  std::vector<DerivedDef> deriveds;
  std::vector<ActionSchema> actions;
  bool operator==(const DomainSpec&) const = default;

  bool type_declared(std::string_view t) const;
  // True when `t` equals `ancestor` or is a (transitive) child of it.
  bool is_subtype(std::string_view t, std::string_view ancestor) const;
  const PredicateDecl* find_predicate(std::string_view name) const;
  const FunctionDecl* find_function(std::string_view name) const;
  const DerivedDef* find_derived(std::string_view name) const;
  const ActionSchema* find_action(std::string_view name) const;
  bool has_bit_matrix() const;
};

// Parses one domain document. Source locations are reported in errors.
// Throws ParseError (syntax, unknown requirement flag, duplicate declaration,
// out-of-dialect construct).
DomainSpec parse_domain(std::string_view text);

// Canonical pretty-printer; parse(print(parse(x))) == parse(x).
std::string print_domain(const DomainSpec& spec);

std::string print_expr(const Expr& e);
std::string print_effect(const Effect& e);

}  // namespace invplan
