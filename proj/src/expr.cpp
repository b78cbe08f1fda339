#include "ltvobs/expr.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "ltvobs/error.hpp"

namespace ltv {

struct ExprNode {
  ExprKind kind = ExprKind::Number;
  double value = 0.0;
  ExprFunc func = ExprFunc::Sin;
  std::shared_ptr<const ExprNode> lhs;
  std::shared_ptr<const ExprNode> rhs;
};

namespace {

std::shared_ptr<const ExprNode> make_node(ExprNode node) {
  return std::make_shared<const ExprNode>(std::move(node));
}

// Binding strength used by both the parser and the printer.
enum Prec : int { kAdditive = 1, kMultiplicative = 2, kUnary = 3, kPower = 4, kPrimary = 5 };

int precedence(const ExprNode& n) {
  switch (n.kind) {
    case ExprKind::Add:
    case ExprKind::Sub:
      return kAdditive;
    case ExprKind::Mul:
    case ExprKind::Div:
      return kMultiplicative;
    case ExprKind::Neg:
      return kUnary;
    case ExprKind::Pow:
      return kPower;
    default:
      return kPrimary;
  }
}

void render(const ExprNode& n, int min_prec, std::string& out);

void render_child(const ExprNode& child, int min_prec, std::string& out) {
  if (precedence(child) < min_prec) {
    out += '(';
    render(child, kAdditive, out);
    out += ')';
  } else {
    render(child, min_prec, out);
  }
}

void render(const ExprNode& n, int /*min_prec*/, std::string& out) {
  switch (n.kind) {
    case ExprKind::Number: {
      char buf[64];
      auto res = std::to_chars(buf, buf + sizeof(buf), n.value);
      out.append(buf, res.ptr);
      return;
    }
    case ExprKind::Time:
      out += 't';
      return;
    case ExprKind::Neg:
      out += '-';
      render_child(*n.lhs, kUnary, out);
      return;
    case ExprKind::Call:
      out += func_name(n.func);
      out += '(';
      render(*n.lhs, kAdditive, out);
      out += ')';
      return;
    case ExprKind::Pow:
      render_child(*n.lhs, kPrimary, out);
      out += '^';
      render_child(*n.rhs, kUnary, out);
      return;
    case ExprKind::Add:
    case ExprKind::Sub:
      render_child(*n.lhs, kAdditive, out);
      out += n.kind == ExprKind::Add ? " + " : " - ";
      render_child(*n.rhs, kMultiplicative, out);
      return;
    case ExprKind::Mul:
    case ExprKind::Div:
      render_child(*n.lhs, kMultiplicative, out);
      out += n.kind == ExprKind::Mul ? "*" : "/";
      render_child(*n.rhs, kUnary, out);
      return;
  }
}

double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw EvalError(std::string("non-finite result in ") + what);
  return v;
}

double eval_node(const ExprNode& n, double t) {
  switch (n.kind) {
    case ExprKind::Number:
      return n.value;
    case ExprKind::Time:
      return t;
    case ExprKind::Neg:
      return -eval_node(*n.lhs, t);
    case ExprKind::Add:
      return checked(eval_node(*n.lhs, t) + eval_node(*n.rhs, t), "+");
    case ExprKind::Sub:
      return checked(eval_node(*n.lhs, t) - eval_node(*n.rhs, t), "-");
    case ExprKind::Mul:
      return checked(eval_node(*n.lhs, t) * eval_node(*n.rhs, t), "*");
    case ExprKind::Div: {
      const double den = eval_node(*n.rhs, t);
      if (den == 0.0) throw EvalError("division by zero");
      return checked(eval_node(*n.lhs, t) / den, "/");
    }
    case ExprKind::Pow: {
      const double base = eval_node(*n.lhs, t);
      const double expo = eval_node(*n.rhs, t);
      const bool integer_expo = std::nearbyint(expo) == expo;
      if (!(base > 0.0) && !integer_expo) {
        throw EvalError("power with non-positive base requires an integer exponent");
      }
      if (base == 0.0 && expo < 0.0) throw EvalError("division by zero in power");
      return checked(std::pow(base, expo), "^");
    }
    case ExprKind::Call: {
      const double x = eval_node(*n.lhs, t);
      switch (n.func) {
        case ExprFunc::Sin:
          return std::sin(x);
        case ExprFunc::Cos:
          return std::cos(x);
        case ExprFunc::Exp:
          return checked(std::exp(x), "exp");
        case ExprFunc::Ln:
          if (!(x > 0.0)) throw EvalError("ln of non-positive argument");
          return std::log(x);
        case ExprFunc::Abs:
          return std::fabs(x);
      }
    }
  }
  throw EvalError("corrupt expression node");
}

bool equal_nodes(const ExprNode& a, const ExprNode& b) {
  if (&a == &b) return true;
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExprKind::Number:
      return a.value == b.value;
    case ExprKind::Time:
      return true;
    case ExprKind::Neg:
      return equal_nodes(*a.lhs, *b.lhs);
    case ExprKind::Call:
      return a.func == b.func && equal_nodes(*a.lhs, *b.lhs);
    default:
      return equal_nodes(*a.lhs, *b.lhs) && equal_nodes(*a.rhs, *b.rhs);
  }
}

bool constant_node(const ExprNode& n) {
  switch (n.kind) {
    case ExprKind::Number:
      return true;
    case ExprKind::Time:
      return false;
    case ExprKind::Neg:
    case ExprKind::Call:
      return constant_node(*n.lhs);
    default:
      return constant_node(*n.lhs) && constant_node(*n.rhs);
  }
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  std::shared_ptr<const ExprNode> parse() {
    skip_ws();
    if (pos_ >= src_.size()) throw SyntaxError(pos_, "empty expression");
    auto node = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) throw SyntaxError(pos_, "unexpected trailing input");
    return node;
  }

 private:
  std::shared_ptr<const ExprNode> parse_expr() {
    auto lhs = parse_term();
    for (;;) {
      skip_ws();
      if (accept('+')) {
        lhs = make_node({ExprKind::Add, 0.0, ExprFunc::Sin, lhs, parse_term()});
      } else if (accept('-')) {
        lhs = make_node({ExprKind::Sub, 0.0, ExprFunc::Sin, lhs, parse_term()});
      } else {
        return lhs;
      }
    }
  }

  std::shared_ptr<const ExprNode> parse_term() {
    auto lhs = parse_unary();
    for (;;) {
      skip_ws();
      if (accept('*')) {
        lhs = make_node({ExprKind::Mul, 0.0, ExprFunc::Sin, lhs, parse_unary()});
      } else if (accept('/')) {
        lhs = make_node({ExprKind::Div, 0.0, ExprFunc::Sin, lhs, parse_unary()});
      } else {
        return lhs;
      }
    }
  }

  std::shared_ptr<const ExprNode> parse_unary() {
    skip_ws();
    if (accept('-')) {
      return make_node({ExprKind::Neg, 0.0, ExprFunc::Sin, parse_unary(), nullptr});
    }
    return parse_power();
  }

  std::shared_ptr<const ExprNode> parse_power() {
    auto base = parse_primary();
    skip_ws();
    if (accept('^')) {
      return make_node({ExprKind::Pow, 0.0, ExprFunc::Sin, base, parse_unary()});
    }
    return base;
  }

  std::shared_ptr<const ExprNode> parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) throw SyntaxError(pos_, "unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      auto inner = parse_expr();
      skip_ws();
      if (!accept(')')) throw SyntaxError(pos_, "expected ')'");
      return inner;
    }
    if (is_digit(c) || c == '.') return parse_number();
    if (is_ident_start(c)) return parse_identifier();
    throw SyntaxError(pos_, std::string("unexpected character '") + c + "'");
  }

  std::shared_ptr<const ExprNode> parse_number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (look < src_.size() && is_digit(src_[look])) {
        pos_ = look;
        while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
      }
    }
    double value = 0.0;
    const auto res = std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (res.ec != std::errc() || res.ptr != src_.data() + pos_ || !std::isfinite(value)) {
      throw SyntaxError(start, "malformed number");
    }
    return make_node({ExprKind::Number, value, ExprFunc::Sin, nullptr, nullptr});
  }

  std::shared_ptr<const ExprNode> parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (is_ident_start(src_[pos_]) || is_digit(src_[pos_]))) ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);
    if (name == "t") return make_node({ExprKind::Time, 0.0, ExprFunc::Sin, nullptr, nullptr});

    ExprFunc func;
    if (name == "sin") {
      func = ExprFunc::Sin;
    } else if (name == "cos") {
      func = ExprFunc::Cos;
    } else if (name == "exp") {
      func = ExprFunc::Exp;
    } else if (name == "ln") {
      func = ExprFunc::Ln;
    } else if (name == "abs") {
      func = ExprFunc::Abs;
    } else {
      throw UnknownIdentifier(start, std::string(name));
    }
    skip_ws();
    if (!accept('(')) throw SyntaxError(pos_, "expected '(' after function name");
    auto arg = parse_expr();
    skip_ws();
    if (!accept(')')) throw SyntaxError(pos_, "expected ')'");
    return make_node({ExprKind::Call, 0.0, func, arg, nullptr});
  }

  bool accept(char c) {
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void skip_ws() {
    while (pos_ < src_.size() &&
           (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r')) {
      ++pos_;
    }
  }

  static bool is_digit(char c) { return c >= '0' && c <= '9'; }
  static bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace

const char* func_name(ExprFunc f) {
  switch (f) {
    case ExprFunc::Sin:
      return "sin";
    case ExprFunc::Cos:
      return "cos";
    case ExprFunc::Exp:
      return "exp";
    case ExprFunc::Ln:
      return "ln";
    case ExprFunc::Abs:
      return "abs";
  }
  return "?";
}

ScalarExpr::ScalarExpr() : node_(make_node({})) {}

ScalarExpr ScalarExpr::number(double value) {
  if (!std::isfinite(value)) throw EvalError("non-finite literal");
  // Negative literals are stored as negations so printing round-trips.
  if (std::signbit(value) && value != 0.0) return negate(number(-value));
  return ScalarExpr(make_node({ExprKind::Number, value, ExprFunc::Sin, nullptr, nullptr}));
}

ScalarExpr ScalarExpr::time() {
  return ScalarExpr(make_node({ExprKind::Time, 0.0, ExprFunc::Sin, nullptr, nullptr}));
}

ScalarExpr ScalarExpr::negate(const ScalarExpr& operand) {
  return ScalarExpr(make_node({ExprKind::Neg, 0.0, ExprFunc::Sin, operand.node_, nullptr}));
}

ScalarExpr ScalarExpr::negate_simplified(const ScalarExpr& operand) {
  if (operand.kind() == ExprKind::Neg) return operand.lhs();
  return negate(operand);
}

ScalarExpr ScalarExpr::binary(ExprKind op, const ScalarExpr& lhs, const ScalarExpr& rhs) {
  switch (op) {
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Mul:
    case ExprKind::Div:
    case ExprKind::Pow:
      break;
    default:
      throw EvalError("binary() requires a binary operator");
  }
  return ScalarExpr(make_node({op, 0.0, ExprFunc::Sin, lhs.node_, rhs.node_}));
}

ScalarExpr ScalarExpr::call(ExprFunc func, const ScalarExpr& argument) {
  return ScalarExpr(make_node({ExprKind::Call, 0.0, func, argument.node_, nullptr}));
}

ExprKind ScalarExpr::kind() const { return node_->kind; }
double ScalarExpr::value() const { return node_->value; }
ExprFunc ScalarExpr::func() const { return node_->func; }
ScalarExpr ScalarExpr::lhs() const { return ScalarExpr(node_->lhs); }
ScalarExpr ScalarExpr::rhs() const { return ScalarExpr(node_->rhs); }

double ScalarExpr::eval(double t) const {
  if (!std::isfinite(t)) throw EvalError("non-finite time argument");
  return eval_node(*node_, t);
}

std::string ScalarExpr::to_string() const {
  std::string out;
  render(*node_, kAdditive, out);
  return out;
}

bool ScalarExpr::structurally_equal(const ScalarExpr& other) const {
  return equal_nodes(*node_, *other.node_);
}

bool ScalarExpr::is_constant() const { return constant_node(*node_); }

ScalarExpr parse_expr(std::string_view src) {
  Parser parser(src);
  return ScalarExpr(parser.parse());
}

}  // namespace ltv
