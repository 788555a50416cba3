#include "varcalc/expr.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>

namespace varcalc {

namespace {

/// Polynomial factor P_k (coefficients by ascending degree in u = 1/x) of the
/// k-th flatstep derivative: d^k/dx^k exp(-1/x^2) = exp(-u^2) P_k(u) for x<0.
/// Recurrence: P_0 = 1, P_{k+1}(u) = 2u^3 P_k(u) - u^2 P_k'(u).
std::vector<double> flat_step_polynomial(int order) {
  std::vector<double> p{1.0};
  for (int k = 0; k < order; ++k) {
    std::vector<double> next(p.size() + 3, 0.0);
    for (std::size_t d = 0; d < p.size(); ++d) {
      if (p[d] == 0.0) continue;
      next[d + 3] += 2.0 * p[d];
      if (d >= 1) next[d + 1] -= static_cast<double>(d) * p[d];
    }
    p = std::move(next);
  }
  return p;
}

struct BuiltinName {
  const char* name;
  Builtin fn;
};

constexpr std::array<BuiltinName, 11> kBuiltinNames = {{
    {"sin", Builtin::kSin},
    {"cos", Builtin::kCos},
    {"tan", Builtin::kTan},
    {"exp", Builtin::kExp},
    {"log", Builtin::kLog},
    {"sqrt", Builtin::kSqrt},
    {"sinh", Builtin::kSinh},
    {"cosh", Builtin::kCosh},
    {"tanh", Builtin::kTanh},
    {"atan", Builtin::kAtan},
    {"flatstep", Builtin::kFlatStep},
}};

const char* builtin_name(Builtin fn) {
  for (const auto& entry : kBuiltinNames) {
    if (entry.fn == fn) return entry.name;
  }
  return "?";
}

}  // namespace

ExprPtr Expr::number(double value) {
  auto node = std::shared_ptr<Expr>(new Expr());
  node->kind_ = ExprKind::kNumber;
  node->number_ = value;
  return node;
}

ExprPtr Expr::symbol(std::string name) {
  auto node = std::shared_ptr<Expr>(new Expr());
  node->kind_ = ExprKind::kSymbol;
  node->symbol_ = std::move(name);
  return node;
}

ExprPtr Expr::negate(ExprPtr operand) {
  auto node = std::shared_ptr<Expr>(new Expr());
  node->kind_ = ExprKind::kNegate;
  node->a_ = std::move(operand);
  return node;
}

ExprPtr Expr::add(ExprPtr left, ExprPtr right) {
  auto node = std::shared_ptr<Expr>(new Expr());
  node->kind_ = ExprKind::kAdd;
  node->a_ = std::move(left);
  node->b_ = std::move(right);
  return node;
}

ExprPtr Expr::subtract(ExprPtr left, ExprPtr right) {
  auto node = std::shared_ptr<Expr>(new Expr());
  node->kind_ = ExprKind::kSubtract;
  node->a_ = std::move(left);
  node->b_ = std::move(right);
  return node;
}

ExprPtr Expr::multiply(ExprPtr left, ExprPtr right) {
  auto node = std::shared_ptr<Expr>(new Expr());
  node->kind_ = ExprKind::kMultiply;
  node->a_ = std::move(left);
  node->b_ = std::move(right);
  return node;
}

ExprPtr Expr::divide(ExprPtr left, ExprPtr right) {
  auto node = std::shared_ptr<Expr>(new Expr());
  node->kind_ = ExprKind::kDivide;
  node->a_ = std::move(left);
  node->b_ = std::move(right);
  return node;
}

ExprPtr Expr::power(ExprPtr base, ExprPtr exponent) {
  auto node = std::shared_ptr<Expr>(new Expr());
  node->kind_ = ExprKind::kPower;
  node->a_ = std::move(base);
  node->b_ = std::move(exponent);
  return node;
}

ExprPtr Expr::call(Builtin fn, ExprPtr arg) {
  if (fn == Builtin::kFlatStep) return flat_step(0, std::move(arg));
  auto node = std::shared_ptr<Expr>(new Expr());
  node->kind_ = ExprKind::kCall;
  node->fn_ = fn;
  node->a_ = std::move(arg);
  return node;
}

ExprPtr Expr::flat_step(int derivative_order, ExprPtr arg) {
  auto node = std::shared_ptr<Expr>(new Expr());
  node->kind_ = ExprKind::kCall;
  node->fn_ = Builtin::kFlatStep;
  node->flat_order_ = derivative_order;
  node->flat_poly_ = flat_step_polynomial(derivative_order);
  node->a_ = std::move(arg);
  return node;
}

double flat_step_value(int /*order*/, std::span<const double> poly, double x) {
  if (std::isnan(x)) return x;
  if (x >= 0.0) return 0.0;
  const double u = 1.0 / x;
  const double u2 = u * u;
  // exp(-u2) underflows past this point and dominates any polynomial growth.
  if (u2 > 708.0) return 0.0;
  double p = 0.0;
  for (std::size_t d = poly.size(); d-- > 0;) p = p * u + poly[d];
  return std::exp(-u2) * p;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}

bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }

bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ExprPtr run() {
    skip_ws();
    if (pos_ >= text_.size()) throw SyntaxError("empty expression", pos_);
    ExprPtr e = parse_sum();
    skip_ws();
    if (pos_ != text_.size()) throw SyntaxError("unexpected trailing input", pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() &&
           (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
            text_[pos_] == '\r')) {
      ++pos_;
    }
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  ExprPtr parse_sum() {
    ExprPtr left = parse_term();
    for (;;) {
      skip_ws();
      char c = peek();
      if (c == '+') {
        ++pos_;
        left = Expr::add(std::move(left), parse_term());
      } else if (c == '-') {
        ++pos_;
        left = Expr::subtract(std::move(left), parse_term());
      } else {
        return left;
      }
    }
  }

  ExprPtr parse_term() {
    ExprPtr left = parse_factor();
    for (;;) {
      skip_ws();
      char c = peek();
      if (c == '*') {
        ++pos_;
        left = Expr::multiply(std::move(left), parse_factor());
      } else if (c == '/') {
        ++pos_;
        left = Expr::divide(std::move(left), parse_factor());
      } else {
        return left;
      }
    }
  }

  ExprPtr parse_factor() {
    skip_ws();
    if (peek() == '-') {
      ++pos_;
      return Expr::negate(parse_factor());
    }
    return parse_power();
  }

  ExprPtr parse_power() {
    ExprPtr base = parse_atom();
    skip_ws();
    if (peek() == '^') {
      ++pos_;
      // The exponent re-enters at factor level, making '^' right associative
      // and letting it carry a unary minus without parentheses.
      return Expr::power(std::move(base), parse_factor());
    }
    return base;
  }

  ExprPtr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) throw SyntaxError("unexpected end of input", pos_);
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      ExprPtr inner = parse_sum();
      skip_ws();
      if (peek() != ')') throw SyntaxError("expected ')'", pos_);
      ++pos_;
      return inner;
    }
    if (is_digit(c) || (c == '.' && pos_ + 1 < text_.size() && is_digit(text_[pos_ + 1]))) {
      return parse_number();
    }
    if (is_ident_start(c)) return parse_identifier();
    throw SyntaxError(std::string("unexpected character '") + c + "'", pos_);
  }

  ExprPtr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
    }
    // Exponent part only when digits actually follow; otherwise the 'e' is
    // left for the caller (where it will be reported as trailing input).
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t probe = pos_ + 1;
      if (probe < text_.size() && (text_[probe] == '+' || text_[probe] == '-')) ++probe;
      if (probe < text_.size() && is_digit(text_[probe])) {
        pos_ = probe;
        while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
      }
    }
    double value = 0.0;
    const char* first = text_.data() + start;
    const char* last = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
      throw SyntaxError("malformed number literal", start);
    }
    return Expr::number(value);
  }

  ExprPtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    std::string name(text_.substr(start, pos_ - start));
    const std::size_t after_name = pos_;
    skip_ws();
    if (peek() == '(') {
      ++pos_;
      ExprPtr arg = parse_sum();
      skip_ws();
      if (peek() != ')') throw SyntaxError("expected ')'", pos_);
      ++pos_;
      return make_call(name, std::move(arg), start);
    }
    pos_ = after_name;
    return Expr::symbol(std::move(name));
  }

  ExprPtr make_call(const std::string& name, ExprPtr arg, std::size_t /*at*/) {
    for (const auto& entry : kBuiltinNames) {
      if (name == entry.name) return Expr::call(entry.fn, std::move(arg));
    }
    // flatstep_d<k>: the derivative family prints and reparses like any
    // other function name.
    constexpr std::string_view prefix = "flatstep_d";
    if (name.size() > prefix.size() &&
        std::string_view(name).substr(0, prefix.size()) == prefix) {
      int order = 0;
      const char* first = name.data() + prefix.size();
      const char* last = name.data() + name.size();
      auto [ptr, ec] = std::from_chars(first, last, order);
      if (ec == std::errc() && ptr == last && order >= 1) {
        return Expr::flat_step(order, std::move(arg));
      }
    }
    throw UnknownFunctionError(name);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

ExprPtr parse_expression(std::string_view text) { return Parser(text).run(); }

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

std::string format_double(double value) {
  std::array<char, 40> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) return "nan";
  return std::string(buf.data(), ptr);
}

namespace {

// Binding strength used by the printer: sums 1, products 2, unary minus 3,
// powers 4, atoms 5. Negative literals print with a leading '-', so they
// bind like a unary minus.
int print_precedence(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::kNumber:
      return (std::signbit(e.number_value()) ? 3 : 5);
    case ExprKind::kSymbol:
    case ExprKind::kCall:
      return 5;
    case ExprKind::kNegate:
      return 3;
    case ExprKind::kMultiply:
    case ExprKind::kDivide:
      return 2;
    case ExprKind::kAdd:
    case ExprKind::kSubtract:
      return 1;
    case ExprKind::kPower:
      return 4;
  }
  return 5;
}

bool leading_minus(const Expr& e) {
  return e.kind() == ExprKind::kNegate ||
         (e.kind() == ExprKind::kNumber && std::signbit(e.number_value()));
}

void print_node(const Expr& e, std::string& out);

void print_child(const Expr& child, std::string& out, bool parens) {
  if (parens) {
    out.push_back('(');
    print_node(child, out);
    out.push_back(')');
  } else {
    print_node(child, out);
  }
}

void print_node(const Expr& e, std::string& out) {
  switch (e.kind()) {
    case ExprKind::kNumber:
      out += format_double(e.number_value());
      return;
    case ExprKind::kSymbol:
      out += e.symbol_name();
      return;
    case ExprKind::kNegate: {
      out.push_back('-');
      const Expr& u = *e.operand();
      print_child(u, out, print_precedence(u) < 3 || leading_minus(u));
      return;
    }
    case ExprKind::kAdd:
    case ExprKind::kSubtract: {
      const Expr& l = *e.left();
      const Expr& r = *e.right();
      print_child(l, out, print_precedence(l) < 1);
      out.push_back(e.kind() == ExprKind::kAdd ? '+' : '-');
      print_child(r, out, print_precedence(r) <= 1 || leading_minus(r));
      return;
    }
    case ExprKind::kMultiply:
    case ExprKind::kDivide: {
      const Expr& l = *e.left();
      const Expr& r = *e.right();
      print_child(l, out, print_precedence(l) < 2);
      out.push_back(e.kind() == ExprKind::kMultiply ? '*' : '/');
      print_child(r, out, print_precedence(r) <= 2 || leading_minus(r));
      return;
    }
    case ExprKind::kPower: {
      const Expr& b = *e.left();
      const Expr& x = *e.right();
      print_child(b, out, print_precedence(b) < 5);
      out.push_back('^');
      print_child(x, out, print_precedence(x) < 3);
      return;
    }
    case ExprKind::kCall: {
      if (e.builtin() == Builtin::kFlatStep && e.flat_step_order() > 0) {
        out += "flatstep_d";
        out += std::to_string(e.flat_step_order());
      } else {
        out += builtin_name(e.builtin());
      }
      out.push_back('(');
      print_node(*e.operand(), out);
      out.push_back(')');
      return;
    }
  }
}

}  // namespace

std::string to_string(const ExprPtr& expr) {
  std::string out;
  print_node(*expr, out);
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace {

double eval_builtin(const Expr& e, double x) {
  switch (e.builtin()) {
    case Builtin::kSin:
      return std::sin(x);
    case Builtin::kCos:
      return std::cos(x);
    case Builtin::kTan:
      return std::tan(x);
    case Builtin::kExp:
      return std::exp(x);
    case Builtin::kLog:
      return std::log(x);
    case Builtin::kSqrt:
      return std::sqrt(x);
    case Builtin::kSinh:
      return std::sinh(x);
    case Builtin::kCosh:
      return std::cosh(x);
    case Builtin::kTanh:
      return std::tanh(x);
    case Builtin::kAtan:
      return std::atan(x);
    case Builtin::kFlatStep:
      return flat_step_value(e.flat_step_order(), e.flat_step_poly(), x);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

double evaluate(const ExprPtr& expr, const Environment& env) {
  const Expr& e = *expr;
  switch (e.kind()) {
    case ExprKind::kNumber:
      return e.number_value();
    case ExprKind::kSymbol: {
      auto it = env.find(e.symbol_name());
      if (it == env.end()) throw UnboundSymbolError(e.symbol_name());
      return it->second;
    }
    case ExprKind::kNegate:
      return -evaluate(e.operand(), env);
    case ExprKind::kAdd:
      return evaluate(e.left(), env) + evaluate(e.right(), env);
    case ExprKind::kSubtract:
      return evaluate(e.left(), env) - evaluate(e.right(), env);
    case ExprKind::kMultiply:
      return evaluate(e.left(), env) * evaluate(e.right(), env);
    case ExprKind::kDivide:
      return evaluate(e.left(), env) / evaluate(e.right(), env);
    case ExprKind::kPower:
      return std::pow(evaluate(e.left(), env), evaluate(e.right(), env));
    case ExprKind::kCall:
      return eval_builtin(e, evaluate(e.operand(), env));
  }
  return std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------------------
// Differentiation
// ---------------------------------------------------------------------------

namespace {

bool is_number(const ExprPtr& e, double v) {
  return e->kind() == ExprKind::kNumber && e->number_value() == v;
}

bool is_any_number(const ExprPtr& e) { return e->kind() == ExprKind::kNumber; }

ExprPtr fold_negate(ExprPtr a) {
  if (is_any_number(a)) return Expr::number(-a->number_value());
  return Expr::negate(std::move(a));
}

ExprPtr fold_add(ExprPtr a, ExprPtr b) {
  if (is_any_number(a) && is_any_number(b)) {
    return Expr::number(a->number_value() + b->number_value());
  }
  if (is_number(a, 0.0)) return b;
  if (is_number(b, 0.0)) return a;
  return Expr::add(std::move(a), std::move(b));
}

ExprPtr fold_subtract(ExprPtr a, ExprPtr b) {
  if (is_any_number(a) && is_any_number(b)) {
    return Expr::number(a->number_value() - b->number_value());
  }
  if (is_number(b, 0.0)) return a;
  if (is_number(a, 0.0)) return fold_negate(std::move(b));
  return Expr::subtract(std::move(a), std::move(b));
}

ExprPtr fold_multiply(ExprPtr a, ExprPtr b) {
  if (is_any_number(a) && is_any_number(b)) {
    return Expr::number(a->number_value() * b->number_value());
  }
  if (is_number(a, 0.0) || is_number(b, 0.0)) return Expr::number(0.0);
  if (is_number(a, 1.0)) return b;
  if (is_number(b, 1.0)) return a;
  return Expr::multiply(std::move(a), std::move(b));
}

ExprPtr fold_divide(ExprPtr a, ExprPtr b) {
  if (is_any_number(a) && is_any_number(b)) {
    return Expr::number(a->number_value() / b->number_value());
  }
  if (is_number(a, 0.0)) return Expr::number(0.0);
  if (is_number(b, 1.0)) return a;
  return Expr::divide(std::move(a), std::move(b));
}

ExprPtr fold_power(ExprPtr base, ExprPtr exponent) {
  if (is_any_number(base) && is_any_number(exponent)) {
    return Expr::number(std::pow(base->number_value(), exponent->number_value()));
  }
  if (is_number(exponent, 1.0)) return base;
  if (is_number(exponent, 0.0)) return Expr::number(1.0);
  return Expr::power(std::move(base), std::move(exponent));
}

ExprPtr diff_builtin(const Expr& e, const ExprPtr& u, ExprPtr du) {
  switch (e.builtin()) {
    case Builtin::kSin:
      return fold_multiply(Expr::call(Builtin::kCos, u), std::move(du));
    case Builtin::kCos:
      return fold_multiply(fold_negate(Expr::call(Builtin::kSin, u)), std::move(du));
    case Builtin::kTan: {
      ExprPtr sec2 = fold_divide(
          Expr::number(1.0),
          Expr::power(Expr::call(Builtin::kCos, u), Expr::number(2.0)));
      return fold_multiply(std::move(sec2), std::move(du));
    }
    case Builtin::kExp:
      return fold_multiply(Expr::call(Builtin::kExp, u), std::move(du));
    case Builtin::kLog:
      return fold_divide(std::move(du), u);
    case Builtin::kSqrt:
      return fold_divide(
          std::move(du),
          fold_multiply(Expr::number(2.0), Expr::call(Builtin::kSqrt, u)));
    case Builtin::kSinh:
      return fold_multiply(Expr::call(Builtin::kCosh, u), std::move(du));
    case Builtin::kCosh:
      return fold_multiply(Expr::call(Builtin::kSinh, u), std::move(du));
    case Builtin::kTanh: {
      ExprPtr one_minus = fold_subtract(
          Expr::number(1.0),
          Expr::power(Expr::call(Builtin::kTanh, u), Expr::number(2.0)));
      return fold_multiply(std::move(one_minus), std::move(du));
    }
    case Builtin::kAtan: {
      ExprPtr denom = fold_add(Expr::number(1.0),
                               Expr::power(u, Expr::number(2.0)));
      return fold_divide(std::move(du), std::move(denom));
    }
    case Builtin::kFlatStep:
      return fold_multiply(Expr::flat_step(e.flat_step_order() + 1, u),
                           std::move(du));
  }
  return Expr::number(0.0);
}

}  // namespace

ExprPtr differentiate(const ExprPtr& expr, const std::string& symbol) {
  const Expr& e = *expr;
  switch (e.kind()) {
    case ExprKind::kNumber:
      return Expr::number(0.0);
    case ExprKind::kSymbol:
      return Expr::number(e.symbol_name() == symbol ? 1.0 : 0.0);
    case ExprKind::kNegate:
      return fold_negate(differentiate(e.operand(), symbol));
    case ExprKind::kAdd:
      return fold_add(differentiate(e.left(), symbol),
                      differentiate(e.right(), symbol));
    case ExprKind::kSubtract:
      return fold_subtract(differentiate(e.left(), symbol),
                           differentiate(e.right(), symbol));
    case ExprKind::kMultiply:
      return fold_add(
          fold_multiply(differentiate(e.left(), symbol), e.right()),
          fold_multiply(e.left(), differentiate(e.right(), symbol)));
    case ExprKind::kDivide: {
      ExprPtr num = fold_subtract(
          fold_multiply(differentiate(e.left(), symbol), e.right()),
          fold_multiply(e.left(), differentiate(e.right(), symbol)));
      ExprPtr den = fold_multiply(e.right(), e.right());
      return fold_divide(std::move(num), std::move(den));
    }
    case ExprKind::kPower: {
      const ExprPtr& u = e.left();
      const ExprPtr& v = e.right();
      ExprPtr du = differentiate(u, symbol);
      if (is_any_number(v)) {
        // Constant exponent keeps the power rule, so bases may go negative
        // without routing through exp/log.
        ExprPtr c = v;
        ExprPtr cm1 = Expr::number(v->number_value() - 1.0);
        return fold_multiply(
            fold_multiply(std::move(c), fold_power(u, std::move(cm1))),
            std::move(du));
      }
      ExprPtr dv = differentiate(v, symbol);
      ExprPtr term1 = fold_multiply(std::move(dv), Expr::call(Builtin::kLog, u));
      ExprPtr term2 = fold_divide(fold_multiply(v, std::move(du)), u);
      return fold_multiply(Expr::power(u, v),
                           fold_add(std::move(term1), std::move(term2)));
    }
    case ExprKind::kCall:
      return diff_builtin(e, e.operand(), differentiate(e.operand(), symbol));
  }
  return Expr::number(0.0);
}

bool structurally_equal(const ExprPtr& lhs, const ExprPtr& rhs) {
  if (lhs == rhs) return true;
  if (!lhs || !rhs) return false;
  const Expr& a = *lhs;
  const Expr& b = *rhs;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case ExprKind::kNumber: {
      const double x = a.number_value();
      const double y = b.number_value();
      if (std::isnan(x) && std::isnan(y)) return true;
      return x == y && std::signbit(x) == std::signbit(y);
    }
    case ExprKind::kSymbol:
      return a.symbol_name() == b.symbol_name();
    case ExprKind::kNegate:
      return structurally_equal(a.operand(), b.operand());
    case ExprKind::kCall:
      return a.builtin() == b.builtin() &&
             a.flat_step_order() == b.flat_step_order() &&
             structurally_equal(a.operand(), b.operand());
    default:
      return structurally_equal(a.left(), b.left()) &&
             structurally_equal(a.right(), b.right());
  }
}

// ---------------------------------------------------------------------------
// Compilation
// ---------------------------------------------------------------------------

CompiledExpr::CompiledExpr(const ExprPtr& expr, std::span<const std::string> slots,
                           const Environment& constants) {
  int depth = 0;
  auto track_push = [&] {
    ++depth;
    if (depth > max_depth_) max_depth_ = depth;
  };

  auto compile = [&](auto&& self, const Expr& e) -> void {
    switch (e.kind()) {
      case ExprKind::kNumber:
        ops_.push_back({Op::kConst, 0, e.number_value()});
        track_push();
        return;
      case ExprKind::kSymbol: {
        for (std::size_t i = 0; i < slots.size(); ++i) {
          if (slots[i] == e.symbol_name()) {
            ops_.push_back({Op::kSlot, static_cast<int>(i), 0.0});
            track_push();
            return;
          }
        }
        auto it = constants.find(e.symbol_name());
        if (it == constants.end()) throw UnboundSymbolError(e.symbol_name());
        ops_.push_back({Op::kConst, 0, it->second});
        track_push();
        return;
      }
      case ExprKind::kNegate:
        self(self, *e.operand());
        ops_.push_back({Op::kNeg, 0, 0.0});
        return;
      case ExprKind::kAdd:
      case ExprKind::kSubtract:
      case ExprKind::kMultiply:
      case ExprKind::kDivide:
      case ExprKind::kPower: {
        self(self, *e.left());
        self(self, *e.right());
        Op op = Op::kAdd;
        switch (e.kind()) {
          case ExprKind::kSubtract:
            op = Op::kSub;
            break;
          case ExprKind::kMultiply:
            op = Op::kMul;
            break;
          case ExprKind::kDivide:
            op = Op::kDiv;
            break;
          case ExprKind::kPower:
            op = Op::kPow;
            break;
          default:
            break;
        }
        ops_.push_back({op, 0, 0.0});
        --depth;
        return;
      }
      case ExprKind::kCall: {
        self(self, *e.operand());
        Op op = Op::kSin;
        switch (e.builtin()) {
          case Builtin::kSin:
            op = Op::kSin;
            break;
          case Builtin::kCos:
            op = Op::kCos;
            break;
          case Builtin::kTan:
            op = Op::kTan;
            break;
          case Builtin::kExp:
            op = Op::kExp;
            break;
          case Builtin::kLog:
            op = Op::kLog;
            break;
          case Builtin::kSqrt:
            op = Op::kSqrt;
            break;
          case Builtin::kSinh:
            op = Op::kSinh;
            break;
          case Builtin::kCosh:
            op = Op::kCosh;
            break;
          case Builtin::kTanh:
            op = Op::kTanh;
            break;
          case Builtin::kAtan:
            op = Op::kAtan;
            break;
          case Builtin::kFlatStep: {
            ops_.push_back({Op::kFlatStep,
                            static_cast<int>(flat_polys_.size()), 0.0});
            flat_polys_.push_back(e.flat_step_poly());
            return;
          }
        }
        ops_.push_back({op, 0, 0.0});
        return;
      }
    }
  };
  compile(compile, *expr);
}

double CompiledExpr::eval(std::span<const double> slot_values) const {
  constexpr int kInlineDepth = 64;
  double inline_stack[kInlineDepth] = {};
  std::vector<double> heap_stack;
  double* st = inline_stack;
  if (max_depth_ > kInlineDepth) {
    heap_stack.resize(static_cast<std::size_t>(max_depth_));
    st = heap_stack.data();
  }
  int sp = 0;
  for (const Step& s : ops_) {
    switch (s.op) {
      case Op::kConst:
        st[sp++] = s.value;
        break;
      case Op::kSlot:
        st[sp++] = slot_values[static_cast<std::size_t>(s.index)];
        break;
      case Op::kNeg:
        st[sp - 1] = -st[sp - 1];
        break;
      case Op::kAdd:
        st[sp - 2] += st[sp - 1];
        --sp;
        break;
      case Op::kSub:
        st[sp - 2] -= st[sp - 1];
        --sp;
        break;
      case Op::kMul:
        st[sp - 2] *= st[sp - 1];
        --sp;
        break;
      case Op::kDiv:
        st[sp - 2] /= st[sp - 1];
        --sp;
        break;
      case Op::kPow:
        st[sp - 2] = std::pow(st[sp - 2], st[sp - 1]);
        --sp;
        break;
      case Op::kSin:
        st[sp - 1] = std::sin(st[sp - 1]);
        break;
      case Op::kCos:
        st[sp - 1] = std::cos(st[sp - 1]);
        break;
      case Op::kTan:
        st[sp - 1] = std::tan(st[sp - 1]);
        break;
      case Op::kExp:
        st[sp - 1] = std::exp(st[sp - 1]);
        break;
      case Op::kLog:
        st[sp - 1] = std::log(st[sp - 1]);
        break;
      case Op::kSqrt:
        st[sp - 1] = std::sqrt(st[sp - 1]);
        break;
      case Op::kSinh:
        st[sp - 1] = std::sinh(st[sp - 1]);
        break;
      case Op::kCosh:
        st[sp - 1] = std::cosh(st[sp - 1]);
        break;
      case Op::kTanh:
        st[sp - 1] = std::tanh(st[sp - 1]);
        break;
      case Op::kAtan:
        st[sp - 1] = std::atan(st[sp - 1]);
        break;
      case Op::kFlatStep:
        st[sp - 1] = flat_step_value(
            0, flat_polys_[static_cast<std::size_t>(s.index)], st[sp - 1]);
        break;
    }
  }
  return st[0];
}

}  // namespace varcalc
