#include "invplan/pddl.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "invplan/errors.hpp"
#include "invplan/sexpr.hpp"

namespace invplan {

namespace {

const std::set<std::string> kAllowedRequirements = {":fluents", ":adl",
                                                    ":typing"};

bool is_integer_literal(const std::string& s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-') ? 1 : 0;
  if (i >= s.size()) return false;
  return std::all_of(s.begin() + static_cast<long>(i), s.end(),
                     [](unsigned char c) { return std::isdigit(c); });
}

std::optional<CmpOp> cmp_from_symbol(const std::string& s) {
  if (s == "=") return CmpOp::Eq;
  if (s == "<") return CmpOp::Lt;
  if (s == ">") return CmpOp::Gt;
  if (s == "<=") return CmpOp::Le;
  if (s == ">=") return CmpOp::Ge;
  return std::nullopt;
}

[[noreturn]] void fail(const SExpr& where, const std::string& msg) {
  throw ParseError(msg, where.line, where.col);
}

std::string atom_text(const SExpr& node, const char* what) {
  if (!node.is_atom) fail(node, std::string("expected ") + what);
  return node.text;
}

// Parses "name name - type name - type ..." sequences. Names with no trailing
// type default to defaulted_type.
std::vector<TypedParam> parse_typed_list(const SExpr& list, std::size_t begin,
                                         const std::string& defaulted_type) {
  std::vector<TypedParam> out;
  std::vector<std::string> pending;
  for (std::size_t i = begin; i < list.size(); ++i) {
    const SExpr& item = list.items[i];
    std::string sym = atom_text(item, "name in typed list");
    if (sym == "-") {
      if (i + 1 >= list.size()) fail(item, "dangling '-' in typed list");
      std::string type = atom_text(list.items[i + 1], "type name");
      ++i;
      if (pending.empty()) fail(item, "'-' with no preceding names");
      for (auto& n : pending) out.push_back({n, type});
      pending.clear();
    } else {
      pending.push_back(sym);
    }
  }
  for (auto& n : pending) out.push_back({n, defaulted_type});
  return out;
}

Expr parse_value_expr(const SExpr& node);

Expr parse_bool_expr(const SExpr& node) {
  Expr e;
  if (node.is_atom) {
    if (node.text == "true" || node.text == "false") {
      e.kind = Expr::Kind::BoolConst;
      e.truth = node.text == "true";
      return e;
    }
    fail(node, "expected a formula, got atom '" + node.text + "'");
  }
  if (node.items.empty()) fail(node, "empty formula");
  std::string head = atom_text(node.at(0), "formula head");
  if (head == "and" || head == "or") {
    e.kind = head == "and" ? Expr::Kind::And : Expr::Kind::Or;
    for (std::size_t i = 1; i < node.size(); ++i) {
      e.kids.push_back(parse_bool_expr(node.items[i]));
    }
    return e;
  }
  if (head == "not") {
    if (node.size() != 2) fail(node, "not takes exactly one argument");
    e.kind = Expr::Kind::Not;
    e.kids.push_back(parse_bool_expr(node.items[1]));
    return e;
  }
  if (auto op = cmp_from_symbol(head)) {
    if (node.size() != 3) fail(node, "comparison takes exactly two arguments");
    e.kind = Expr::Kind::Cmp;
    e.cmp = *op;
    e.kids.push_back(parse_value_expr(node.items[1]));
    e.kids.push_back(parse_value_expr(node.items[2]));
    return e;
  }
  if (head == "forall" || head == "exists" || head == "imply" ||
      head == "when") {
    fail(node, "'" + head + "' is outside the supported dialect");
  }
  // Predicate (or derived-predicate) atom.
  e.kind = Expr::Kind::Atom;
  e.name = head;
  for (std::size_t i = 1; i < node.size(); ++i) {
    e.args.push_back(atom_text(node.items[i], "atom argument"));
  }
  return e;
}

// Value position: integer/boolean literals, function terms (parenthesised or
// bare 0-ary like `turn`), get-index lookups and +/- arithmetic.
Expr parse_value_expr(const SExpr& node) {
  Expr e;
  if (node.is_atom) {
    if (is_integer_literal(node.text)) {
      e.kind = Expr::Kind::IntConst;
      e.value = std::stoll(node.text);
      return e;
    }
    if (node.text == "true" || node.text == "false") {
      e.kind = Expr::Kind::BoolConst;
      e.truth = node.text == "true";
      return e;
    }
    if (!node.text.empty() && node.text[0] == '?') {
      fail(node, "variable '" + node.text +
                     "' cannot appear in a numeric position");
    }
    e.kind = Expr::Kind::Func;
    e.name = node.text;
    return e;
  }
  if (node.items.empty()) fail(node, "empty value expression");
  std::string head = atom_text(node.at(0), "value expression head");
  if (head == "+" || head == "-") {
    if (node.size() != 3) {
      fail(node, "'" + head + "' takes exactly two arguments");
    }
    e.kind = head == "+" ? Expr::Kind::Add : Expr::Kind::Sub;
    e.kids.push_back(parse_value_expr(node.items[1]));
    e.kids.push_back(parse_value_expr(node.items[2]));
    return e;
  }
  if (head == "get-index") {
    if (node.size() != 4) {
      fail(node, "get-index takes (matrix row col)");
    }
    e.kind = Expr::Kind::GetIndex;
    e.name = atom_text(node.items[1], "bit-matrix name");
    e.kids.push_back(parse_value_expr(node.items[2]));
    e.kids.push_back(parse_value_expr(node.items[3]));
    return e;
  }
  e.kind = Expr::Kind::Func;
  e.name = head;
  for (std::size_t i = 1; i < node.size(); ++i) {
    e.args.push_back(atom_text(node.items[i], "function argument"));
  }
  return e;
}

Effect parse_one_effect(const SExpr& node);

void parse_effect_list(const SExpr& node, std::vector<Effect>& out) {
  if (!node.is_atom && node.head_is("and")) {
    for (std::size_t i = 1; i < node.size(); ++i) {
      parse_effect_list(node.items[i], out);
    }
    return;
  }
  out.push_back(parse_one_effect(node));
}

Effect parse_one_effect(const SExpr& node) {
  Effect eff;
  if (node.is_atom || node.items.empty()) fail(node, "malformed effect");
  std::string head = atom_text(node.at(0), "effect head");
  if (head == "not") {
    if (node.size() != 2 || node.items[1].is_atom ||
        node.items[1].items.empty()) {
      fail(node, "delete effect must be (not (pred args...))");
    }
    const SExpr& atom = node.items[1];
    eff.kind = Effect::Kind::Del;
    eff.name = atom_text(atom.at(0), "predicate name");
    for (std::size_t i = 1; i < atom.size(); ++i) {
      eff.args.push_back(atom_text(atom.items[i], "atom argument"));
    }
    return eff;
  }
  if (head == "assign" || head == "increase" || head == "decrease") {
    if (node.size() != 3) fail(node, head + " takes (target value)");
    const SExpr& target = node.items[1];
    if (target.is_atom) {
      // Bare 0-ary function target, e.g. (assign turn ...).
      eff.name = target.text;
    } else {
      std::string tname = atom_text(target.at(0), "function name");
      if (tname == "get-index") {
        if (head != "assign") {
          fail(node, "bit-matrix cells only support assign");
        }
        if (target.size() != 4) fail(target, "get-index takes (matrix row col)");
        eff.kind = Effect::Kind::AssignCell;
        eff.name = atom_text(target.items[1], "bit-matrix name");
        eff.cell.push_back(parse_value_expr(target.items[2]));
        eff.cell.push_back(parse_value_expr(target.items[3]));
        eff.value = parse_value_expr(node.items[2]);
        if (eff.value.kind != Expr::Kind::BoolConst) {
          fail(node, "bit-matrix cell assignment needs a true/false value");
        }
        return eff;
      }
      eff.name = tname;
      for (std::size_t i = 1; i < target.size(); ++i) {
        eff.args.push_back(atom_text(target.items[i], "function argument"));
      }
    }
    eff.kind = head == "assign"     ? Effect::Kind::Assign
               : head == "increase" ? Effect::Kind::Increase
                                    : Effect::Kind::Decrease;
    eff.value = parse_value_expr(node.items[2]);
    return eff;
  }
  if (head == "when") {
    if (node.size() != 3) fail(node, "when takes (condition effect)");
    eff.kind = Effect::Kind::When;
    eff.condition = parse_bool_expr(node.items[1]);
    parse_effect_list(node.items[2], eff.body);
    return eff;
  }
  if (head == "forall") {
    fail(node, "'forall' effects are outside the supported dialect");
  }
  // Add effect.
  eff.kind = Effect::Kind::Add;
  eff.name = head;
  for (std::size_t i = 1; i < node.size(); ++i) {
    eff.args.push_back(atom_text(node.items[i], "atom argument"));
  }
  return eff;
}

ActionSchema parse_action(const SExpr& node) {
  ActionSchema action;
  action.name = atom_text(node.at(1), "action name");
  std::size_t i = 2;
  bool saw_params = false, saw_pre = false, saw_eff = false;
  while (i < node.size()) {
    std::string key = atom_text(node.items[i], "action section keyword");
    if (i + 1 >= node.size()) fail(node.items[i], key + " missing its body");
    const SExpr& body = node.items[i + 1];
    if (key == ":parameters") {
      if (body.is_atom) fail(body, ":parameters needs a list");
      action.params = parse_typed_list(body, 0, "object");
      saw_params = true;
    } else if (key == ":precondition") {
      action.precondition = parse_bool_expr(body);
      saw_pre = true;
    } else if (key == ":effect") {
      parse_effect_list(body, action.effects);
      saw_eff = true;
    } else {
      fail(node.items[i], "unknown action section '" + key + "'");
    }
    i += 2;
  }
  if (!saw_params) fail(node, "action '" + action.name + "' missing :parameters");
  if (!saw_pre) {
    action.precondition.kind = Expr::Kind::BoolConst;
    action.precondition.truth = true;
  }
  if (!saw_eff) fail(node, "action '" + action.name + "' missing :effect");
  return action;
}

template <typename Seq>
void check_duplicate(const Seq& names, const std::string& name,
                     const SExpr& where, const char* what) {
  if (std::find(names.begin(), names.end(), name) != names.end()) {
    fail(where, std::string("duplicate ") + what + " declaration '" + name +
                    "'");
  }
}

}  // namespace

bool DomainSpec::type_declared(std::string_view t) const {
  if (t == "object") return true;
  return std::any_of(types.begin(), types.end(),
                     [&](const auto& p) { return p.first == t; });
}

bool DomainSpec::is_subtype(std::string_view t, std::string_view ancestor) const {
  if (t == ancestor) return true;
  std::string cur(t);
  // Hierarchy depth is tiny; walk up until the root.
  for (int hops = 0; hops < 64; ++hops) {
    auto it = std::find_if(types.begin(), types.end(),
                           [&](const auto& p) { return p.first == cur; });
    if (it == types.end()) return ancestor == "object" && cur == "object";
    cur = it->second;
    if (cur == ancestor) return true;
  }
  return false;
}

const PredicateDecl* DomainSpec::find_predicate(std::string_view name) const {
  for (const auto& p : predicates)
    if (p.name == name) return &p;
  return nullptr;
}

const FunctionDecl* DomainSpec::find_function(std::string_view name) const {
  for (const auto& f : functions)
    if (f.name == name) return &f;
  return nullptr;
}

const DerivedDef* DomainSpec::find_derived(std::string_view name) const {
  for (const auto& d : deriveds)
    if (d.predicate == name) return &d;
  return nullptr;
}

const ActionSchema* DomainSpec::find_action(std::string_view name) const {
  for (const auto& a : actions)
    if (a.name == name) return &a;
  return nullptr;
}

bool DomainSpec::has_bit_matrix() const {
  return std::any_of(functions.begin(), functions.end(), [](const auto& f) {
    return f.range == FluentRange::BitMatrix;
  });
}

DomainSpec parse_domain(std::string_view text) {
  std::vector<SExpr> forms = parse_sexprs(text);
  if (forms.size() != 1) {
    throw ParseError("expected exactly one (define (domain ...)) form, got " +
                         std::to_string(forms.size()),
                     1, 1);
  }
  const SExpr& top = forms[0];
  if (!top.head_is("define")) fail(top, "expected (define ...)");
  const SExpr& header = top.at(1);
  if (!header.head_is("domain") || header.size() != 2) {
    fail(header, "expected (domain name)");
  }
  DomainSpec spec;
  spec.name = atom_text(header.at(1), "domain name");

  std::vector<std::string> seen_types, seen_preds, seen_consts, seen_funcs,
      seen_actions, seen_derived;

  for (std::size_t s = 2; s < top.size(); ++s) {
    const SExpr& section = top.items[s];
    if (section.is_atom || section.items.empty()) {
      fail(section, "expected a domain section");
    }
    std::string key = atom_text(section.at(0), "section keyword");
    if (key == ":requirements") {
      for (std::size_t i = 1; i < section.size(); ++i) {
        std::string flag = atom_text(section.items[i], "requirement flag");
        if (!kAllowedRequirements.count(flag)) {
          fail(section.items[i], "unknown requirement flag '" + flag + "'");
        }
        spec.requirements.push_back(flag);
      }
    } else if (key == ":types") {
      for (auto& tp : parse_typed_list(section, 1, "object")) {
        check_duplicate(seen_types, tp.name, section, "type");
        seen_types.push_back(tp.name);
        spec.types.emplace_back(tp.name, tp.type);
      }
    } else if (key == ":predicates") {
      for (std::size_t i = 1; i < section.size(); ++i) {
        const SExpr& decl = section.items[i];
        if (decl.is_atom || decl.items.empty()) {
          fail(decl, "predicate declaration must be a list");
        }
        PredicateDecl pd;
        pd.name = atom_text(decl.at(0), "predicate name");
        check_duplicate(seen_preds, pd.name, decl, "predicate");
        seen_preds.push_back(pd.name);
        pd.params = parse_typed_list(decl, 1, "object");
        spec.predicates.push_back(std::move(pd));
      }
    } else if (key == ":constants") {
      for (auto& tp : parse_typed_list(section, 1, "object")) {
        check_duplicate(seen_consts, tp.name, section, "constant");
        seen_consts.push_back(tp.name);
        spec.constants.emplace_back(tp.name, tp.type);
      }
    } else if (key == ":functions") {
      // Function declarations share a trailing "- range" per group, e.g.
      // (xloc ?o - object) (yloc ?o - object) - integer.
      std::vector<FunctionDecl> pending;
      for (std::size_t i = 1; i < section.size(); ++i) {
        const SExpr& item = section.items[i];
        if (item.is_atom && item.text == "-") {
          if (i + 1 >= section.size()) fail(item, "dangling '-' in :functions");
          std::string range = atom_text(section.items[i + 1], "function range");
          ++i;
          FluentRange r;
          if (range == "integer") {
            r = FluentRange::Integer;
          } else if (range == "bit-matrix") {
            r = FluentRange::BitMatrix;
          } else {
            fail(section.items[i],
                 "function range must be integer or bit-matrix, got '" +
                     range + "'");
          }
          for (auto& f : pending) {
            f.range = r;
            spec.functions.push_back(std::move(f));
          }
          pending.clear();
        } else {
          if (item.is_atom) fail(item, "function declaration must be a list");
          FunctionDecl fd;
          fd.name = atom_text(item.at(0), "function name");
          check_duplicate(seen_funcs, fd.name, item, "function");
          seen_funcs.push_back(fd.name);
          fd.params = parse_typed_list(item, 1, "object");
          pending.push_back(std::move(fd));
        }
      }
      for (auto& f : pending) {
        f.range = FluentRange::Integer;
        spec.functions.push_back(std::move(f));
      }
    } else if (key == ":derived") {
      if (section.size() != 3) fail(section, ":derived takes (head body)");
      const SExpr& head = section.items[1];
      if (head.is_atom || head.items.empty()) {
        fail(head, "derived head must be (pred params...)");
      }
      DerivedDef dd;
      dd.predicate = atom_text(head.at(0), "derived predicate name");
      check_duplicate(seen_derived, dd.predicate, head, "derived predicate");
      seen_derived.push_back(dd.predicate);
      // Head parameters may omit types; they are resolved from the predicate
      // declaration after all sections are read.
      dd.params = parse_typed_list(head, 1, "");
      dd.body = parse_bool_expr(section.items[2]);
      spec.deriveds.push_back(std::move(dd));
    } else if (key == ":action") {
      ActionSchema action = parse_action(section);
      check_duplicate(seen_actions, action.name, section, "action");
      seen_actions.push_back(action.name);
      spec.actions.push_back(std::move(action));
    } else {
      fail(section, "unknown domain section '" + key + "'");
    }
  }

  // Fill untyped derived-head parameters from the predicate declaration.
  for (auto& dd : spec.deriveds) {
    const PredicateDecl* pd = spec.find_predicate(dd.predicate);
    for (std::size_t i = 0; i < dd.params.size(); ++i) {
      if (dd.params[i].type.empty()) {
        dd.params[i].type = (pd && i < pd->params.size())
                                ? pd->params[i].type
                                : std::string("object");
      }
    }
  }
  return spec;
}

namespace {

void print_typed_list(std::ostringstream& os,
                      const std::vector<TypedParam>& params) {
  // Group consecutive params that share a type: "?a ?b - t ?c - u".
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i > 0) os << ' ';
    os << params[i].name;
    if (i + 1 >= params.size() || params[i + 1].type != params[i].type) {
      os << " - " << params[i].type;
    }
  }
}

void print_expr_into(std::ostringstream& os, const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::IntConst:
      os << e.value;
      return;
    case Expr::Kind::BoolConst:
      os << (e.truth ? "true" : "false");
      return;
    case Expr::Kind::Func:
      os << '(' << e.name;
      for (const auto& a : e.args) os << ' ' << a;
      os << ')';
      return;
    case Expr::Kind::GetIndex:
      os << "(get-index " << e.name << ' ';
      print_expr_into(os, e.kids[0]);
      os << ' ';
      print_expr_into(os, e.kids[1]);
      os << ')';
      return;
    case Expr::Kind::Add:
    case Expr::Kind::Sub:
      os << '(' << (e.kind == Expr::Kind::Add ? '+' : '-') << ' ';
      print_expr_into(os, e.kids[0]);
      os << ' ';
      print_expr_into(os, e.kids[1]);
      os << ')';
      return;
    case Expr::Kind::Atom:
      os << '(' << e.name;
      for (const auto& a : e.args) os << ' ' << a;
      os << ')';
      return;
    case Expr::Kind::And:
    case Expr::Kind::Or: {
      os << '(' << (e.kind == Expr::Kind::And ? "and" : "or");
      for (const auto& k : e.kids) {
        os << ' ';
        print_expr_into(os, k);
      }
      os << ')';
      return;
    }
    case Expr::Kind::Not:
      os << "(not ";
      print_expr_into(os, e.kids[0]);
      os << ')';
      return;
    case Expr::Kind::Cmp: {
      const char* op = e.cmp == CmpOp::Eq   ? "="
                       : e.cmp == CmpOp::Lt ? "<"
                       : e.cmp == CmpOp::Gt ? ">"
                       : e.cmp == CmpOp::Le ? "<="
                                            : ">=";
      os << '(' << op << ' ';
      print_expr_into(os, e.kids[0]);
      os << ' ';
      print_expr_into(os, e.kids[1]);
      os << ')';
      return;
    }
  }
}

void print_effect_into(std::ostringstream& os, const Effect& e) {
  switch (e.kind) {
    case Effect::Kind::Add:
      os << '(' << e.name;
      for (const auto& a : e.args) os << ' ' << a;
      os << ')';
      return;
    case Effect::Kind::Del:
      os << "(not (" << e.name;
      for (const auto& a : e.args) os << ' ' << a;
      os << "))";
      return;
    case Effect::Kind::Assign:
    case Effect::Kind::Increase:
    case Effect::Kind::Decrease: {
      const char* op = e.kind == Effect::Kind::Assign     ? "assign"
                       : e.kind == Effect::Kind::Increase ? "increase"
                                                          : "decrease";
      os << '(' << op << " (" << e.name;
      for (const auto& a : e.args) os << ' ' << a;
      os << ") ";
      print_expr_into(os, e.value);
      os << ')';
      return;
    }
    case Effect::Kind::AssignCell:
      os << "(assign (get-index " << e.name << ' ';
      print_expr_into(os, e.cell[0]);
      os << ' ';
      print_expr_into(os, e.cell[1]);
      os << ") ";
      print_expr_into(os, e.value);
      os << ')';
      return;
    case Effect::Kind::When: {
      os << "(when ";
      print_expr_into(os, e.condition);
      os << " (and";
      for (const auto& sub : e.body) {
        os << ' ';
        print_effect_into(os, sub);
      }
      os << "))";
      return;
    }
  }
}

}  // namespace

std::string print_expr(const Expr& e) {
  std::ostringstream os;
  print_expr_into(os, e);
  return os.str();
}

std::string print_effect(const Effect& e) {
  std::ostringstream os;
  print_effect_into(os, e);
  return os.str();
}

std::string print_domain(const DomainSpec& spec) {
  std::ostringstream os;
  os << "(define (domain " << spec.name << ")\n";
  if (!spec.requirements.empty()) {
    os << "    (:requirements";
    for (const auto& r : spec.requirements) os << ' ' << r;
    os << ")\n";
  }
  if (!spec.types.empty()) {
    os << "    (:types\n";
    for (std::size_t i = 0; i < spec.types.size();) {
      std::size_t j = i;
      while (j < spec.types.size() &&
             spec.types[j].second == spec.types[i].second) {
        ++j;
      }
      os << "       ";
      for (std::size_t k = i; k < j; ++k) os << ' ' << spec.types[k].first;
      os << " - " << spec.types[i].second << '\n';
      i = j;
    }
    os << "    )\n";
  }
  if (!spec.predicates.empty()) {
    os << "    (:predicates\n";
    for (const auto& p : spec.predicates) {
      os << "        (" << p.name;
      if (!p.params.empty()) {
        os << ' ';
        print_typed_list(os, p.params);
      }
      os << ")\n";
    }
    os << "    )\n";
  }
  if (!spec.constants.empty()) {
    os << "    (:constants\n";
    for (std::size_t i = 0; i < spec.constants.size();) {
      std::size_t j = i;
      while (j < spec.constants.size() &&
             spec.constants[j].second == spec.constants[i].second) {
        ++j;
      }
      os << "       ";
      for (std::size_t k = i; k < j; ++k) os << ' ' << spec.constants[k].first;
      os << " - " << spec.constants[i].second << '\n';
      i = j;
    }
    os << "    )\n";
  }
  if (!spec.functions.empty()) {
    os << "    (:functions\n";
    for (const auto& f : spec.functions) {
      os << "        (" << f.name;
      if (!f.params.empty()) {
        os << ' ';
        print_typed_list(os, f.params);
      }
      os << ") - "
         << (f.range == FluentRange::Integer ? "integer" : "bit-matrix")
         << '\n';
    }
    os << "    )\n";
  }
  for (const auto& d : spec.deriveds) {
    os << "    (:derived (" << d.predicate;
    if (!d.params.empty()) {
      os << ' ';
      print_typed_list(os, d.params);
    }
    os << ") " << print_expr(d.body) << ")\n";
  }
  for (const auto& a : spec.actions) {
    os << "    (:action " << a.name << "\n     :parameters (";
    print_typed_list(os, a.params);
    os << ")\n     :precondition " << print_expr(a.precondition)
       << "\n     :effect (and";
    for (const auto& e : a.effects) {
      os << ' ';
      print_effect_into(os, e);
    }
    os << ")\n    )\n";
  }
  os << ")\n";
  return os.str();
}

}  // namespace invplan
