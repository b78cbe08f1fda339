#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace ltv {

enum class ExprKind { Number, Time, Neg, Add, Sub, Mul, Div, Pow, Call };
enum class ExprFunc { Sin, Cos, Exp, Ln, Abs };

struct ExprNode;

/// Immutable scalar expression in the single variable `t`.
///
/// Grammar (standard precedence, `^` right-associative and binding tighter
/// than unary minus):
///
///     expr    := term (('+' | '-') term)*
///     term    := unary (('*' | '/') unary)*
///     unary   := '-' unary | power
///     power   := primary ('^' unary)?
///     primary := number | 't' | func '(' expr ')' | '(' expr ')'
///     func    := sin | cos | exp | ln | abs
///
/// Nodes are shared, so copies are cheap and safe to evaluate from several
/// threads at once.
class ScalarExpr {
 public:
  ScalarExpr();  // literal 0

  static ScalarExpr number(double value);
  static ScalarExpr time();
  static ScalarExpr negate(const ScalarExpr& operand);
  static ScalarExpr binary(ExprKind op, const ScalarExpr& lhs, const ScalarExpr& rhs);
  static ScalarExpr call(ExprFunc func, const ScalarExpr& argument);

  // Same as negate() except that a negation of a negation is unwrapped.
  static ScalarExpr negate_simplified(const ScalarExpr& operand);

  ExprKind kind() const;
  double value() const;  // Number only
  ExprFunc func() const;  // Call only
  ScalarExpr lhs() const;  // Neg/Call operand, or binary left child
  ScalarExpr rhs() const;

  /// Throws EvalError for ln of a non-positive argument, division by zero,
  /// a power outside {base > 0} or {integer exponent}, or any non-finite
  /// intermediate.
  double eval(double t) const;

  /// Minimal-parenthesis rendering that parses back to an equal tree.
  std::string to_string() const;

  bool structurally_equal(const ScalarExpr& other) const;

  // True when the tree contains no reference to `t`.
  bool is_constant() const;

 private:
  friend ScalarExpr parse_expr(std::string_view src);
  explicit ScalarExpr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const ExprNode> node_;
};

/// Parses `src`; throws SyntaxError (with byte offset) or UnknownIdentifier.
ScalarExpr parse_expr(std::string_view src);

const char* func_name(ExprFunc f);

}  // namespace ltv
