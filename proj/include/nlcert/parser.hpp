#pragma once

#include <string>
#include <vector>

#include "nlcert/expr.hpp"

namespace nlcert {

struct ParseError : std::runtime_error {
  int line, column;
  ParseError(const std::string& msg, int l, int c)
      : std::runtime_error(msg + " at line " + std::to_string(l) + ", column " +
                           std::to_string(c)),
        line(l),
        column(c) {}
};

/// A parsed problem: objective over a box, optional polynomial constraints.
struct Problem {
  std::vector<std::string> var_names;
  Box box;
  Expr objective;
  std::vector<Expr> constraints;  // each meaning expr >= 0
};

/// Problem-file grammar:
///   var <name> in [<lo>, <hi>];
///   objective <expr>;
///   constraint <poly expr> >= 0;   (optional, repeatable)
/// Comments start with '#'. Operators + - * / ^; functions sqrt, abs, min,
/// max, arctan, sin, cos, exp, log; constant pi.
Problem parse_problem(const std::string& text);
Problem parse_problem_file(const std::string& path);

/// Parse a single expression against a fixed variable list (tests, tools).
Expr parse_expression(const std::string& text,
                      const std::vector<std::string>& var_names);

}  // namespace nlcert
