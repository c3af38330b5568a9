#include "invplan/validate.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace invplan {

bool ValidationReport::valid() const {
  return std::none_of(violations.begin(), violations.end(), [](const auto& v) {
    return v.severity == Violation::Severity::Error;
  });
}

std::vector<const Violation*> ValidationReport::errors() const {
  std::vector<const Violation*> out;
  for (const auto& v : violations) {
    if (v.severity == Violation::Severity::Error) out.push_back(&v);
  }
  return out;
}

nlohmann::json ValidationReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& v : violations) {
    arr.push_back({{"severity", v.severity == Violation::Severity::Error
                                    ? "error"
                                    : "warning"},
                   {"code", v.code},
                   {"message", v.message}});
  }
  return {{"valid", valid()}, {"violations", arr}};
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& v : violations) {
    os << (v.severity == Violation::Severity::Error ? "error" : "warning")
       << " [" << v.code << "] " << v.message << '\n';
  }
  return os.str();
}

namespace {

class Validator {
public:
  explicit Validator(const DomainSpec& spec) : spec_(spec) {}

  ValidationReport run() {
    check_types();
    check_reserved_functions();
    for (const auto& d : spec_.deriveds) check_derived(d);
    check_derived_cycles();
    for (const auto& a : spec_.actions) check_action(a);
    return std::move(report_);
  }

private:
  void error(const std::string& code, const std::string& msg) {
    report_.violations.push_back({Violation::Severity::Error, code, msg});
  }
  void warning(const std::string& code, const std::string& msg) {
    report_.violations.push_back({Violation::Severity::Warning, code, msg});
  }

  void check_types() {
    for (const auto& [child, parent] : spec_.types) {
      if (parent != "object" && !spec_.type_declared(parent)) {
        error("undeclared-type", "type '" + child +
                                     "' has undeclared parent '" + parent +
                                     "'");
      }
    }
    auto check_params = [&](const std::vector<TypedParam>& params,
                            const std::string& ctx) {
      for (const auto& p : params) {
        if (!p.type.empty() && !spec_.type_declared(p.type)) {
          error("undeclared-type",
                ctx + " references undeclared type '" + p.type + "'");
        }
      }
    };
    for (const auto& p : spec_.predicates) {
      check_params(p.params, "predicate '" + p.name + "'");
    }
    for (const auto& f : spec_.functions) {
      check_params(f.params, "function '" + f.name + "'");
    }
    for (const auto& a : spec_.actions) {
      check_params(a.params, "action '" + a.name + "'");
    }
    for (const auto& [name, type] : spec_.constants) {
      if (!spec_.type_declared(type)) {
        error("undeclared-type", "constant '" + name +
                                     "' has undeclared type '" + type + "'");
      }
    }
  }

  void check_reserved_functions() {
    if (!spec_.has_bit_matrix()) return;
    for (const char* fn : {"gridheight", "gridwidth", "xloc", "yloc"}) {
      if (spec_.find_function(fn) == nullptr) {
        error("missing-reserved-function",
              std::string("bit-matrix functions require '") + fn +
                  "' to be declared");
      }
    }
  }

  // Value-expression checks shared by preconditions and effects. `vars` maps
  // parameter name -> type for the enclosing schema.
  void check_value(const Expr& e, const std::map<std::string, std::string>& vars,
                   const std::string& ctx) {
    switch (e.kind) {
      case Expr::Kind::IntConst:
      case Expr::Kind::BoolConst:
        return;
      case Expr::Kind::Func: {
        const FunctionDecl* f = spec_.find_function(e.name);
        if (f == nullptr) {
          error("undeclared-function",
                ctx + " references undeclared function '" + e.name + "'");
          return;
        }
        if (f->range != FluentRange::Integer) {
          error("type-mismatch", ctx + ": bit-matrix function '" + e.name +
                                     "' used as an integer term");
        }
        check_args(e.args, f->params, vars, ctx, "function '" + e.name + "'");
        return;
      }
      case Expr::Kind::GetIndex: {
        const FunctionDecl* f = spec_.find_function(e.name);
        if (f == nullptr || f->range != FluentRange::BitMatrix) {
          error("type-mismatch", ctx + ": get-index target '" + e.name +
                                     "' is not a declared bit-matrix");
        }
        for (const auto& k : e.kids) check_value(k, vars, ctx);
        return;
      }
      case Expr::Kind::Add:
      case Expr::Kind::Sub:
        for (const auto& k : e.kids) check_value(k, vars, ctx);
        return;
      default:
        error("type-mismatch", ctx + ": formula used in a value position");
    }
  }

  void check_args(const std::vector<std::string>& args,
                  const std::vector<TypedParam>& params,
                  const std::map<std::string, std::string>& vars,
                  const std::string& ctx, const std::string& target) {
    if (args.size() != params.size()) {
      error("arity-mismatch", ctx + ": " + target + " expects " +
                                  std::to_string(params.size()) +
                                  " arguments, got " +
                                  std::to_string(args.size()));
      return;
    }
    for (std::size_t i = 0; i < args.size(); ++i) {
      const std::string& a = args[i];
      std::string atype;
      if (!a.empty() && a[0] == '?') {
        auto it = vars.find(a);
        if (it == vars.end()) {
          error("unbound-variable",
                ctx + ": variable '" + a + "' is not a parameter");
          continue;
        }
        atype = it->second;
      } else {
        auto it = std::find_if(spec_.constants.begin(), spec_.constants.end(),
                               [&](const auto& c) { return c.first == a; });
        if (it == spec_.constants.end()) {
          // Objects outside :constants are supplied at grounding time; their
          // types are checked there.
          continue;
        }
        atype = it->second;
      }
      if (!params[i].type.empty() && !atype.empty() &&
          !spec_.is_subtype(atype, params[i].type)) {
        error("type-mismatch", ctx + ": argument '" + a + "' of type '" +
                                   atype + "' does not match '" +
                                   params[i].type + "' in " + target);
      }
    }
  }

  void check_formula(const Expr& e,
                     const std::map<std::string, std::string>& vars,
                     const std::string& ctx, bool negated) {
    switch (e.kind) {
      case Expr::Kind::BoolConst:
        return;
      case Expr::Kind::Atom: {
        if (const PredicateDecl* p = spec_.find_predicate(e.name)) {
          check_args(e.args, p->params, vars, ctx,
                     "predicate '" + e.name + "'");
          if (negated && spec_.find_derived(e.name) != nullptr) {
            warning("negated-derived",
                    ctx + ": negative use of derived predicate '" + e.name +
                        "'");
          }
          return;
        }
        error("undeclared-predicate",
              ctx + " references undeclared predicate '" + e.name + "'");
        return;
      }
      case Expr::Kind::And:
      case Expr::Kind::Or:
        for (const auto& k : e.kids) check_formula(k, vars, ctx, negated);
        return;
      case Expr::Kind::Not:
        check_formula(e.kids[0], vars, ctx, !negated);
        return;
      case Expr::Kind::Cmp: {
        check_value(e.kids[0], vars, ctx);
        check_value(e.kids[1], vars, ctx);
        bool lb = value_is_bool(e.kids[0]);
        bool rb = value_is_bool(e.kids[1]);
        if (lb != rb) {
          error("type-mismatch",
                ctx + ": comparison mixes boolean and integer operands");
        }
        if ((lb || rb) && e.cmp != CmpOp::Eq) {
          error("type-mismatch",
                ctx + ": ordering comparison on boolean operands");
        }
        return;
      }
      default:
        error("type-mismatch", ctx + ": value expression used as a formula");
    }
  }

  bool value_is_bool(const Expr& e) const {
    return e.kind == Expr::Kind::BoolConst || e.kind == Expr::Kind::GetIndex;
  }

  void check_derived(const DerivedDef& d) {
    std::string ctx = "derived '" + d.predicate + "'";
    if (spec_.find_predicate(d.predicate) == nullptr) {
      error("undeclared-predicate",
            ctx + " defines a predicate that is not declared");
    }
    std::map<std::string, std::string> vars;
    for (const auto& p : d.params) vars[p.name] = p.type;
    check_formula(d.body, vars, ctx, false);
  }

  // Derived predicates must form no definitional cycle.
  void check_derived_cycles() {
    std::map<std::string, std::vector<std::string>> deps;
    for (const auto& d : spec_.deriveds) {
      std::vector<std::string> used;
      collect_atoms(d.body, used);
      for (const auto& u : used) {
        if (spec_.find_derived(u) != nullptr) deps[d.predicate].push_back(u);
      }
    }
    std::set<std::string> visiting, done;
    std::function<bool(const std::string&)> dfs =
        [&](const std::string& n) -> bool {
      if (done.count(n)) return false;
      if (visiting.count(n)) return true;
      visiting.insert(n);
      for (const auto& m : deps[n]) {
        if (dfs(m)) return true;
      }
      visiting.erase(n);
      done.insert(n);
      return false;
    };
    for (const auto& d : spec_.deriveds) {
      if (dfs(d.predicate)) {
        error("derived-cycle", "derived predicate '" + d.predicate +
                                   "' participates in a definitional cycle");
        return;
      }
    }
  }

  static void collect_atoms(const Expr& e, std::vector<std::string>& out) {
    if (e.kind == Expr::Kind::Atom) out.push_back(e.name);
    for (const auto& k : e.kids) collect_atoms(k, out);
  }

  void check_effect(const Effect& e,
                    const std::map<std::string, std::string>& vars,
                    const std::string& ctx) {
    switch (e.kind) {
      case Effect::Kind::Add:
      case Effect::Kind::Del: {
        const PredicateDecl* p = spec_.find_predicate(e.name);
        if (p == nullptr) {
          error("undeclared-predicate",
                ctx + " affects undeclared predicate '" + e.name + "'");
          return;
        }
        if (spec_.find_derived(e.name) != nullptr) {
          error("effect-on-derived",
                ctx + " writes derived predicate '" + e.name + "'");
        }
        check_args(e.args, p->params, vars, ctx, "predicate '" + e.name + "'");
        return;
      }
      case Effect::Kind::Assign:
      case Effect::Kind::Increase:
      case Effect::Kind::Decrease: {
        const FunctionDecl* f = spec_.find_function(e.name);
        if (f == nullptr) {
          error("undeclared-function",
                ctx + " assigns undeclared function '" + e.name + "'");
          return;
        }
        if (f->range != FluentRange::Integer) {
          error("type-mismatch", ctx + ": '" + e.name +
                                     "' is a bit-matrix; assign a cell via "
                                     "(assign (get-index ...) ...)");
        }
        check_args(e.args, f->params, vars, ctx, "function '" + e.name + "'");
        check_value(e.value, vars, ctx);
        return;
      }
      case Effect::Kind::AssignCell: {
        const FunctionDecl* f = spec_.find_function(e.name);
        if (f == nullptr || f->range != FluentRange::BitMatrix) {
          error("type-mismatch", ctx + ": cell assignment target '" + e.name +
                                     "' is not a declared bit-matrix");
        }
        for (const auto& k : e.cell) check_value(k, vars, ctx);
        return;
      }
      case Effect::Kind::When:
        check_formula(e.condition, vars, ctx, false);
        for (const auto& sub : e.body) check_effect(sub, vars, ctx);
        return;
    }
  }

  // Cheap static unsatisfiability check: a conjunction containing both an
  // atom and its negation can never hold.
  void check_satisfiable(const ActionSchema& a) {
    std::vector<std::string> pos, neg;
    std::function<void(const Expr&, bool)> walk = [&](const Expr& e,
                                                      bool negated) {
      if (e.kind == Expr::Kind::Atom) {
        std::string key = print_expr(e);
        (negated ? neg : pos).push_back(key);
      } else if (e.kind == Expr::Kind::Not) {
        walk(e.kids[0], !negated);
      } else if (e.kind == Expr::Kind::And) {
        for (const auto& k : e.kids) walk(k, negated);
      }
      // or-branches are satisfiable independently; skip them.
    };
    walk(a.precondition, false);
    for (const auto& p : pos) {
      if (std::find(neg.begin(), neg.end(), p) != neg.end()) {
        error("unsatisfiable-precondition",
              "action '" + a.name + "' requires both " + p + " and (not " + p +
                  ")");
        return;
      }
    }
  }

  void check_action(const ActionSchema& a) {
    std::string ctx = "action '" + a.name + "'";
    std::map<std::string, std::string> vars;
    for (const auto& p : a.params) vars[p.name] = p.type;
    check_formula(a.precondition, vars, ctx, false);
    for (const auto& e : a.effects) check_effect(e, vars, ctx);
    check_satisfiable(a);
  }

  const DomainSpec& spec_;
  ValidationReport report_;
};

}  // namespace

ValidationReport validate_domain(const DomainSpec& spec) {
  return Validator(spec).run();
}

}  // namespace invplan
