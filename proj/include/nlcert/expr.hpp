#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nlcert/interval.hpp"
#include "nlcert/poly.hpp"

namespace nlcert {

using Box = std::vector<Interval>;

enum class DictFn { Arctan, Sin, Cos, Exp, Log };

enum class Monotonicity { Increasing, Decreasing, Unknown };

/// A transcendental dictionary entry: closed-form value and first two
/// derivatives, their interval extensions, and a monotonicity oracle.
struct DictionaryEntry {
  DictFn id;
  const char* name;
  double (*value)(double);
  double (*d1)(double);
  double (*d2)(double);
  Interval (*ivalue)(const Interval&);
  Interval (*id1)(const Interval&);
  Interval (*id2)(const Interval&);
  Monotonicity (*monotonicity)(const Interval&);
  /// Interior critical points of the function on I (sin/cos only).
  std::vector<double> (*critical_points)(const Interval&);
};

const DictionaryEntry& dictionary(DictFn id);
std::optional<DictFn> dictionary_lookup(const std::string& name);

enum class ExprKind {
  Constant,
  Var,
  Add,
  Sub,
  Mul,
  Div,
  Pow,   // rational exponent
  Sqrt,
  Abs,
  Min,
  Max,
  Dict,  // unary transcendental
};

class ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

class ExprNode {
 public:
  ExprKind kind;
  Rational constant;      // Constant
  int var = -1;           // Var, 0-based
  Rational exponent;      // Pow
  DictFn fn = DictFn::Sin;  // Dict
  std::vector<Expr> children;
  bool semialgebraic = true;  // no dictionary node in the subtree

  static Expr make_constant(const Rational& c);
  static Expr make_constant(double c);
  static Expr make_var(int index);
  static Expr make_binary(ExprKind op, Expr a, Expr b);  // folds constants
  static Expr make_pow(Expr base, const Rational& r);
  static Expr make_sqrt(Expr a);
  static Expr make_abs(Expr a);
  static Expr make_minmax(ExprKind op, Expr a, Expr b);
  static Expr make_dict(DictFn fn, Expr a);

  /// Canonical structural key; equal subtrees produce equal keys.
  std::string key() const;
  std::string to_string() const;
};

Expr operator+(Expr a, Expr b);
Expr operator-(Expr a, Expr b);
Expr operator*(Expr a, Expr b);
Expr operator/(Expr a, Expr b);
Expr operator-(Expr a);
Expr operator*(double s, Expr a);
Expr operator+(Expr a, double c);
Expr operator-(Expr a, double c);

double eval(const Expr& e, const std::vector<double>& x);
Interval interval_eval(const Expr& e, const Box& box);

/// Like interval_eval, but intersects sqrt/even-root/log arguments with
/// their natural domains before applying the function. Wherever the
/// expression is defined pointwise, its value lies in the clipped enclosure,
/// so this is the right range query for functions known to be well defined
/// on the box even though plain interval arithmetic overshoots the domain.
/// Throws DomainError only when a subexpression is undefined on the whole
/// enclosure (or a denominator enclosure contains zero).
Interval interval_eval_clipped(const Expr& e, const Box& box);

/// Partial derivative as an AST (0-based variable index).
/// Throws if a non-differentiable node (abs/min/max) lies on the path.
Expr differentiate(const Expr& e, int i);

/// Number of variables referenced (max index + 1).
int max_var(const Expr& e);

/// True iff the subtree contains no dictionary node.
inline bool is_semialgebraic(const Expr& e) { return e->semialgebraic; }

/// Convert a polynomial expression (no sqrt/abs/div/min/max/dict and only
/// nonnegative integer powers) into a sparse Poly in `n` variables.
/// Returns nullopt if the expression is not polynomial.
std::optional<Poly> to_poly(const Expr& e, int n);

}  // namespace nlcert
