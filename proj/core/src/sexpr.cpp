#include "invplan/sexpr.hpp"

#include "invplan/errors.hpp"

namespace invplan {

const SExpr& SExpr::at(std::size_t i) const {
  if (is_atom || i >= items.size()) {
    throw ParseError("form too short (expected at least " +
                         std::to_string(i + 1) + " elements)",
                     line, col);
  }
  return items[i];
}

bool SExpr::head_is(std::string_view sym) const {
  return !is_atom && !items.empty() && items[0].is_atom &&
         items[0].text == sym;
}

namespace {

struct Cursor {
  std::string_view src;
  std::size_t pos = 0;
  int line = 1;
  int col = 1;

  bool done() const { return pos >= src.size(); }
  char peek() const { return src[pos]; }
  void advance() {
    if (src[pos] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++pos;
  }
  void skip_ws_and_comments() {
    while (!done()) {
      char c = peek();
      if (c == ';') {
        while (!done() && peek() != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else {
        break;
      }
    }
  }
};

bool is_delim(char c) {
  return c == '(' || c == ')' || c == ';' || c == ' ' || c == '\t' ||
         c == '\r' || c == '\n';
}

SExpr parse_form(Cursor& cur) {
  cur.skip_ws_and_comments();
  if (cur.done()) {
    throw ParseError("unexpected end of input", cur.line, cur.col);
  }
  SExpr node;
  node.line = cur.line;
  node.col = cur.col;
  if (cur.peek() == '(') {
    cur.advance();
    node.is_atom = false;
    for (;;) {
      cur.skip_ws_and_comments();
      if (cur.done()) {
        throw ParseError("unbalanced parenthesis (missing ')')", node.line,
                         node.col);
      }
      if (cur.peek() == ')') {
        cur.advance();
        return node;
      }
      node.items.push_back(parse_form(cur));
    }
  }
  if (cur.peek() == ')') {
    throw ParseError("unexpected ')'", cur.line, cur.col);
  }
  node.is_atom = true;
  while (!cur.done() && !is_delim(cur.peek())) {
    node.text.push_back(cur.peek());
    cur.advance();
  }
  return node;
}

}  // namespace

std::vector<SExpr> parse_sexprs(std::string_view src) {
  Cursor cur{src};
  std::vector<SExpr> forms;
  for (;;) {
    cur.skip_ws_and_comments();
    if (cur.done()) break;
    forms.push_back(parse_form(cur));
  }
  return forms;
}

}  // namespace invplan
