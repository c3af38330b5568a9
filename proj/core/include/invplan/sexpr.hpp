#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace invplan {

// One node of an s-expression document. Atoms keep their raw text; lists keep
// children in source order. Line/column are 1-based and point at the opening
// token, for error reporting.
struct SExpr {
  bool is_atom = false;
  std::string text;
  std::vector<SExpr> items;
  int line = 1;
  int col = 1;

  const SExpr& at(std::size_t i) const;
  std::size_t size() const { return items.size(); }
  bool head_is(std::string_view sym) const;
};

// Parses a whole document (';' comments allowed) into top-level forms.
// Throws ParseError on unbalanced parentheses or stray tokens.
std::vector<SExpr> parse_sexprs(std::string_view src);

}  // namespace invplan
