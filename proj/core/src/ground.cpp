#include "invplan/ground.hpp"

#include <algorithm>
#include <cstring>
#include <functional>
#include <sstream>

namespace invplan {

const ObjectSet::Entry* ObjectSet::find(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

std::string FluentIndex::key(const std::string& name,
                             const std::vector<std::string>& args) {
  std::string k = name;
  k.push_back('|');
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) k.push_back(',');
    k += args[i];
  }
  return k;
}

std::string WorldState::digest() const {
  std::string out;
  out.reserve(ints.size() * 8 + bools.size() + mats.size() * 16);
  for (long long v : ints) {
    char buf[8];
    std::memcpy(buf, &v, 8);
    out.append(buf, 8);
  }
  out.append(reinterpret_cast<const char*>(bools.data()), bools.size());
  for (const auto& m : mats) {
    for (std::uint64_t w : m.words) {
      char buf[8];
      std::memcpy(buf, &w, 8);
      out.append(buf, 8);
    }
  }
  return out;
}

namespace {

std::string display_name(const std::string& schema,
                         const std::vector<std::string>& args) {
  if (args.empty()) return schema;
  std::string d = schema;
  d.push_back('(');
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) d.push_back(',');
    d += args[i];
  }
  d.push_back(')');
  return d;
}

}  // namespace

namespace detail {

// Builds the compiled forms for one environment. Substitution of action
// parameters happens here, so runtime evaluation needs no name lookups.
class EnvCompiler {
public:
  explicit EnvCompiler(GroundedEnvironment& env) : env_(env) {}

  CExpr expr(const Expr& e, const std::map<std::string, std::string>& binding) {
    CExpr c;
    switch (e.kind) {
      case Expr::Kind::IntConst:
        c.kind = CExpr::Kind::IntConst;
        c.value = e.value;
        return c;
      case Expr::Kind::BoolConst:
        c.kind = CExpr::Kind::BoolConst;
        c.truth = e.truth;
        return c;
      case Expr::Kind::Func: {
        c.kind = CExpr::Kind::IntFluent;
        c.index = env_.int_id(e.name, resolve(e.args, binding));
        return c;
      }
      case Expr::Kind::GetIndex: {
        c.kind = CExpr::Kind::MatCell;
        c.index = env_.mat_id(e.name);
        c.kids.push_back(expr(e.kids[0], binding));
        c.kids.push_back(expr(e.kids[1], binding));
        return c;
      }
      case Expr::Kind::Add:
      case Expr::Kind::Sub:
        c.kind = e.kind == Expr::Kind::Add ? CExpr::Kind::Add : CExpr::Kind::Sub;
        c.kids.push_back(expr(e.kids[0], binding));
        c.kids.push_back(expr(e.kids[1], binding));
        return c;
      case Expr::Kind::Atom: {
        std::vector<std::string> args = resolve(e.args, binding);
        if (const DerivedDef* dd = env_.spec().find_derived(e.name)) {
          c.kind = CExpr::Kind::Derived;
          c.index = derived_instance(*dd, args);
          return c;
        }
        c.kind = CExpr::Kind::BoolFluent;
        c.index = env_.bool_id(e.name, args);
        return c;
      }
      case Expr::Kind::And:
      case Expr::Kind::Or:
        c.kind = e.kind == Expr::Kind::And ? CExpr::Kind::And : CExpr::Kind::Or;
        for (const auto& k : e.kids) c.kids.push_back(expr(k, binding));
        return c;
      case Expr::Kind::Not:
        c.kind = CExpr::Kind::Not;
        c.kids.push_back(expr(e.kids[0], binding));
        return c;
      case Expr::Kind::Cmp:
        c.kind = CExpr::Kind::Cmp;
        c.cmp = e.cmp;
        c.kids.push_back(expr(e.kids[0], binding));
        c.kids.push_back(expr(e.kids[1], binding));
        return c;
    }
    throw InternalError("unhandled expression kind");
  }

  CEffect effect(const Effect& e,
                 const std::map<std::string, std::string>& binding) {
    CEffect c;
    switch (e.kind) {
      case Effect::Kind::Add:
      case Effect::Kind::Del:
        if (env_.spec().find_derived(e.name) != nullptr) {
          throw GroundingError("effect writes derived predicate '" + e.name +
                               "'");
        }
        c.kind = CEffect::Kind::SetBool;
        c.index = env_.bool_id(e.name, resolve(e.args, binding));
        c.truth = e.kind == Effect::Kind::Add;
        return c;
      case Effect::Kind::Assign:
      case Effect::Kind::Increase:
      case Effect::Kind::Decrease:
        c.kind = e.kind == Effect::Kind::Assign     ? CEffect::Kind::Assign
                 : e.kind == Effect::Kind::Increase ? CEffect::Kind::Increase
                                                    : CEffect::Kind::Decrease;
        c.index = env_.int_id(e.name, resolve(e.args, binding));
        c.value = expr(e.value, binding);
        return c;
      case Effect::Kind::AssignCell:
        c.kind = CEffect::Kind::SetMatCell;
        c.index = env_.mat_id(e.name);
        c.row = expr(e.cell[0], binding);
        c.col = expr(e.cell[1], binding);
        c.truth = e.value.truth;
        return c;
      case Effect::Kind::When:
        c.kind = CEffect::Kind::When;
        c.condition = expr(e.condition, binding);
        for (const auto& sub : e.body) c.body.push_back(effect(sub, binding));
        return c;
    }
    throw InternalError("unhandled effect kind");
  }

  // Ground derived instance: substitute the argument tuple into the body and
  // compile once; recursion is safe because validation rejects cycles.
  int derived_instance(const DerivedDef& dd,
                       const std::vector<std::string>& args) {
    std::string key = FluentIndex::key(dd.predicate, args);
    auto it = env_.derived_instance_ids_.find(key);
    if (it != env_.derived_instance_ids_.end()) return it->second;
    if (args.size() != dd.params.size()) {
      throw GroundingError("derived predicate '" + dd.predicate +
                           "' arity mismatch");
    }
    std::map<std::string, std::string> binding;
    for (std::size_t i = 0; i < args.size(); ++i) {
      binding[dd.params[i].name] = args[i];
    }
    // Reserve the slot before compiling so the id order is deterministic.
    int id = static_cast<int>(env_.derived_bodies_.size());
    env_.derived_instance_ids_.emplace(key, id);
    env_.derived_bodies_.emplace_back();
    CExpr body = expr(dd.body, binding);
    env_.derived_bodies_[id] = std::move(body);
    return id;
  }

private:
  std::vector<std::string> resolve(
      const std::vector<std::string>& args,
      const std::map<std::string, std::string>& binding) {
    std::vector<std::string> out;
    out.reserve(args.size());
    for (const auto& a : args) {
      if (!a.empty() && a[0] == '?') {
        auto it = binding.find(a);
        if (it == binding.end()) {
          throw GroundingError("unbound variable '" + a + "'");
        }
        out.push_back(it->second);
      } else {
        out.push_back(a);
      }
    }
    return out;
  }

  GroundedEnvironment& env_;
};

}  // namespace detail

namespace {

void enumerate_tuples(const std::vector<const std::vector<std::string>*>& lists,
                      const std::function<void(std::vector<std::string>&)>& fn) {
  std::vector<std::string> tuple(lists.size());
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == lists.size()) {
      fn(tuple);
      return;
    }
    for (const auto& obj : *lists[i]) {
      tuple[i] = obj;
      rec(i + 1);
    }
  };
  rec(0);
}

}  // namespace

const std::vector<std::string>& GroundedEnvironment::objects_of_type(
    const std::string& type) const {
  auto it = by_type_.find(type);
  if (it == by_type_.end()) return empty_;
  return it->second;
}

const std::string* GroundedEnvironment::object_type(
    const std::string& name) const {
  auto it = object_types_.find(name);
  if (it == object_types_.end()) return nullptr;
  return &it->second;
}

int GroundedEnvironment::int_id(const std::string& fn,
                                const std::vector<std::string>& args) const {
  auto it = fluents_.int_ids.find(FluentIndex::key(fn, args));
  if (it == fluents_.int_ids.end()) {
    throw GroundingError("unknown integer fluent " + display_name(fn, args));
  }
  return it->second;
}

int GroundedEnvironment::bool_id(const std::string& pred,
                                 const std::vector<std::string>& args) const {
  auto it = fluents_.bool_ids.find(FluentIndex::key(pred, args));
  if (it == fluents_.bool_ids.end()) {
    throw GroundingError("unknown predicate fluent " +
                         display_name(pred, args));
  }
  return it->second;
}

std::optional<int> GroundedEnvironment::try_bool_id(
    const std::string& pred, const std::vector<std::string>& args) const {
  auto it = fluents_.bool_ids.find(FluentIndex::key(pred, args));
  if (it == fluents_.bool_ids.end()) return std::nullopt;
  return it->second;
}

int GroundedEnvironment::mat_id(const std::string& fn) const {
  auto it = fluents_.mat_ids.find(fn);
  if (it == fluents_.mat_ids.end()) {
    throw GroundingError("unknown bit-matrix '" + fn + "'");
  }
  return it->second;
}

WorldState GroundedEnvironment::initial_state() const {
  WorldState s;
  s.ints.assign(fluents_.int_names.size(), 0);
  s.bools.assign(fluents_.bool_names.size(), 0);
  s.mats.assign(fluents_.mat_names.size(), BitMatrix(grid_.rows, grid_.cols));
  for (std::size_t i = 0; i < fluents_.int_names.size(); ++i) {
    const std::string& n = fluents_.int_names[i];
    if (n.rfind("xloc|", 0) == 0 || n.rfind("yloc|", 0) == 0) {
      s.ints[i] = -1;
    }
  }
  if (auto it = fluents_.int_ids.find("gridheight|");
      it != fluents_.int_ids.end()) {
    s.ints[it->second] = grid_.rows;
  }
  if (auto it = fluents_.int_ids.find("gridwidth|");
      it != fluents_.int_ids.end()) {
    s.ints[it->second] = grid_.cols;
  }
  return s;
}

long long GroundedEnvironment::get_int(const WorldState& s,
                                       const std::string& fn,
                                       const std::vector<std::string>& args) const {
  return s.ints[int_id(fn, args)];
}

void GroundedEnvironment::set_int(WorldState& s, const std::string& fn,
                                  const std::vector<std::string>& args,
                                  long long v) const {
  s.ints[int_id(fn, args)] = v;
}

bool GroundedEnvironment::get_bool(const WorldState& s,
                                   const std::string& pred,
                                   const std::vector<std::string>& args) const {
  return s.bools[bool_id(pred, args)] != 0;
}

void GroundedEnvironment::set_bool(WorldState& s, const std::string& pred,
                                   const std::vector<std::string>& args,
                                   bool v) const {
  s.bools[bool_id(pred, args)] = v ? 1 : 0;
}

void GroundedEnvironment::set_mat(WorldState& s, const std::string& fn, int y,
                                  int x, bool v) const {
  s.mats[mat_id(fn)].set(y, x, v);
}

bool GroundedEnvironment::get_mat(const WorldState& s, const std::string& fn,
                                  int y, int x) const {
  return s.mats[mat_id(fn)].get(y, x);
}

namespace {

bool cexpr_is_bool(const CExpr& e) {
  return e.kind == CExpr::Kind::BoolConst || e.kind == CExpr::Kind::MatCell;
}

}  // namespace

long long GroundedEnvironment::eval_int(const CExpr& e,
                                        const WorldState& s) const {
  switch (e.kind) {
    case CExpr::Kind::IntConst:
      return e.value;
    case CExpr::Kind::IntFluent:
      return s.ints[e.index];
    case CExpr::Kind::Add:
      return eval_int(e.kids[0], s) + eval_int(e.kids[1], s);
    case CExpr::Kind::Sub:
      return eval_int(e.kids[0], s) - eval_int(e.kids[1], s);
    default:
      throw InternalError("boolean expression evaluated as integer");
  }
}

bool GroundedEnvironment::eval_bool(const CExpr& e, const WorldState& s) const {
  switch (e.kind) {
    case CExpr::Kind::BoolConst:
      return e.truth;
    case CExpr::Kind::BoolFluent:
      return s.bools[e.index] != 0;
    case CExpr::Kind::MatCell: {
      long long y = eval_int(e.kids[0], s);
      long long x = eval_int(e.kids[1], s);
      return s.mats[e.index].get(y, x);
    }
    case CExpr::Kind::Derived:
      return eval_bool(derived_bodies_[e.index], s);
    case CExpr::Kind::And:
      for (const auto& k : e.kids) {
        if (!eval_bool(k, s)) return false;
      }
      return true;
    case CExpr::Kind::Or:
      for (const auto& k : e.kids) {
        if (eval_bool(k, s)) return true;
      }
      return false;
    case CExpr::Kind::Not:
      return !eval_bool(e.kids[0], s);
    case CExpr::Kind::Cmp: {
      const CExpr& l = e.kids[0];
      const CExpr& r = e.kids[1];
      if (cexpr_is_bool(l) || cexpr_is_bool(r)) {
        return eval_bool(l, s) == eval_bool(r, s);
      }
      long long a = eval_int(l, s);
      long long b = eval_int(r, s);
      switch (e.cmp) {
        case CmpOp::Eq: return a == b;
        case CmpOp::Lt: return a < b;
        case CmpOp::Gt: return a > b;
        case CmpOp::Le: return a <= b;
        case CmpOp::Ge: return a >= b;
      }
      return false;
    }
    default:
      throw InternalError("integer expression evaluated as boolean");
  }
}

CExpr GroundedEnvironment::compile_ground_formula(const Expr& e) const {
  // const_cast is confined here: compiling a ground formula may intern new
  // derived instances, which is a cache fill, not a semantic mutation.
  detail::EnvCompiler compiler(const_cast<GroundedEnvironment&>(*this));
  return compiler.expr(e, {});
}

GroundedEnvironment ground(const DomainSpec& spec, const ObjectSet& objects,
                           GridDims grid, const GroundOptions& opts) {
  if (grid.rows <= 0 || grid.cols <= 0) {
    throw GroundingError("grid dimensions must be positive");
  }
  GroundedEnvironment env;
  env.spec_ = spec;
  env.objects_ = objects;
  env.grid_ = grid;

  // Object universe: domain constants plus the supplied object set.
  std::vector<std::pair<std::string, std::string>> universe;
  for (const auto& [name, type] : spec.constants) {
    universe.emplace_back(name, type);
  }
  for (const auto& e : objects.entries) {
    auto it = std::find_if(universe.begin(), universe.end(),
                           [&](const auto& u) { return u.first == e.name; });
    if (it != universe.end()) {
      if (it->second != e.type) {
        throw GroundingError("object '" + e.name + "' declared with type '" +
                             e.type + "' but constant has type '" +
                             it->second + "'");
      }
      continue;
    }
    universe.emplace_back(e.name, e.type);
  }
  for (const auto& [name, type] : universe) {
    if (!spec.type_declared(type)) {
      throw GroundingError("object '" + name + "' has unknown type '" + type +
                           "'");
    }
    env.object_types_[name] = type;
  }

  std::vector<std::string> all_types = {"object"};
  for (const auto& [child, parent] : spec.types) all_types.push_back(child);
  for (const auto& t : all_types) {
    std::vector<std::string> members;
    for (const auto& [name, type] : universe) {
      if (spec.is_subtype(type, t)) members.push_back(name);
    }
    std::sort(members.begin(), members.end());
    env.by_type_[t] = std::move(members);
  }
  env.agents_ = env.objects_of_type("agent");
  env.multi_agent_ =
      env.agents_.size() > 1 && spec.find_function("turn") != nullptr;

  // Fluent index: predicates (except derived ones) and integer functions get
  // one slot per type-compatible argument tuple; bit matrices one slot each.
  auto add_slots = [&](const std::string& name,
                       const std::vector<TypedParam>& params, bool boolean) {
    std::vector<const std::vector<std::string>*> lists;
    for (const auto& p : params) {
      if (!spec.type_declared(p.type)) return;  // reported by validation
      lists.push_back(&env.by_type_.at(p.type));
    }
    enumerate_tuples(lists, [&](std::vector<std::string>& tuple) {
      std::string key = FluentIndex::key(name, tuple);
      if (boolean) {
        env.fluents_.bool_ids.emplace(key,
                                      static_cast<int>(env.fluents_.bool_names.size()));
        env.fluents_.bool_names.push_back(key);
      } else {
        env.fluents_.int_ids.emplace(key,
                                     static_cast<int>(env.fluents_.int_names.size()));
        env.fluents_.int_names.push_back(key);
      }
    });
  };
  for (const auto& p : spec.predicates) {
    if (spec.find_derived(p.name) != nullptr) continue;
    add_slots(p.name, p.params, true);
  }
  for (const auto& f : spec.functions) {
    if (f.range == FluentRange::BitMatrix) {
      env.fluents_.mat_ids.emplace(f.name,
                                   static_cast<int>(env.fluents_.mat_names.size()));
      env.fluents_.mat_names.push_back(f.name);
    } else {
      add_slots(f.name, f.params, false);
    }
  }

  // Ground actions in canonical order: schemas sorted by name, argument
  // tuples in lexicographic order. This makes argmax tie-breaking and
  // reconstruction reproducible.
  std::vector<const ActionSchema*> schemas;
  for (const auto& a : spec.actions) schemas.push_back(&a);
  std::sort(schemas.begin(), schemas.end(),
            [](const ActionSchema* a, const ActionSchema* b) {
              return a->name < b->name;
            });

  std::size_t total = 0;
  for (const ActionSchema* schema : schemas) {
    std::size_t n = 1;
    for (const auto& p : schema->params) {
      n *= env.objects_of_type(p.type).size();
    }
    total += n;
    if (total > opts.max_ground_actions) {
      throw CapError("ground-action cap exceeded (" +
                     std::to_string(opts.max_ground_actions) + ")");
    }
  }

  detail::EnvCompiler compiler(env);
  for (const ActionSchema* schema : schemas) {
    int schema_index = static_cast<int>(
        std::find_if(spec.actions.begin(), spec.actions.end(),
                     [&](const ActionSchema& a) {
                       return a.name == schema->name;
                     }) -
        spec.actions.begin());
    std::vector<const std::vector<std::string>*> lists;
    for (const auto& p : schema->params) {
      lists.push_back(&env.by_type_.at(p.type));
    }
    enumerate_tuples(lists, [&](std::vector<std::string>& tuple) {
      GroundAction ga;
      ga.id = static_cast<int>(env.actions_.size());
      ga.schema_index = schema_index;
      ga.schema = schema->name;
      ga.args = tuple;
      ga.display = display_name(schema->name, tuple);
      std::map<std::string, std::string> binding;
      for (std::size_t i = 0; i < tuple.size(); ++i) {
        binding[schema->params[i].name] = tuple[i];
      }
      ga.precondition = compiler.expr(schema->precondition, binding);
      for (const auto& e : schema->effects) {
        ga.effects.push_back(compiler.effect(e, binding));
      }
      env.actions_.push_back(std::move(ga));
    });
  }

  env.noop_.id = -1;
  env.noop_.schema_index = -1;
  env.noop_.schema = "no-op";
  env.noop_.display = "no-op";
  env.noop_.precondition.kind = CExpr::Kind::BoolConst;
  env.noop_.precondition.truth = true;
  return env;
}

}  // namespace invplan
