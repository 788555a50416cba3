#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "varcalc/errors.hpp"

namespace varcalc {

/// Node discriminator for the expression tree.
enum class ExprKind {
  kNumber,
  kSymbol,
  kNegate,
  kAdd,
  kSubtract,
  kMultiply,
  kDivide,
  kPower,
  kCall,
};

/// Unary functions accepted by the parser. FlatStep is the smooth cut-off
///   flatstep(x) = exp(-1/x^2) for x < 0,  0 for x >= 0,
/// whose derivatives stay in the family (flatstep_d1, flatstep_d2, ...).
enum class Builtin {
  kSin,
  kCos,
  kTan,
  kExp,
  kLog,
  kSqrt,
  kSinh,
  kCosh,
  kTanh,
  kAtan,
  kFlatStep,
};

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Immutable expression node. Construct through the static factories; nodes
/// are freely shared between trees and safe for concurrent evaluation.
class Expr {
 public:
  static ExprPtr number(double value);
  static ExprPtr symbol(std::string name);
  static ExprPtr negate(ExprPtr operand);
  static ExprPtr add(ExprPtr left, ExprPtr right);
  static ExprPtr subtract(ExprPtr left, ExprPtr right);
  static ExprPtr multiply(ExprPtr left, ExprPtr right);
  static ExprPtr divide(ExprPtr left, ExprPtr right);
  static ExprPtr power(ExprPtr base, ExprPtr exponent);
  static ExprPtr call(Builtin fn, ExprPtr arg);
  /// flatstep differentiated `derivative_order` times.
  static ExprPtr flat_step(int derivative_order, ExprPtr arg);

  ExprKind kind() const noexcept { return kind_; }
  double number_value() const noexcept { return number_; }
  const std::string& symbol_name() const noexcept { return symbol_; }
  Builtin builtin() const noexcept { return fn_; }
  int flat_step_order() const noexcept { return flat_order_; }
  /// Coefficients (by ascending degree in 1/x) of the polynomial factor of
  /// the flatstep derivative this node represents.
  const std::vector<double>& flat_step_poly() const noexcept { return flat_poly_; }

  const ExprPtr& left() const noexcept { return a_; }
  const ExprPtr& right() const noexcept { return b_; }
  const ExprPtr& operand() const noexcept { return a_; }

 private:
  Expr() = default;

  ExprKind kind_ = ExprKind::kNumber;
  double number_ = 0.0;
  std::string symbol_;
  Builtin fn_ = Builtin::kSin;
  int flat_order_ = 0;
  std::vector<double> flat_poly_;
  ExprPtr a_;
  ExprPtr b_;
};

/// Name-to-value bindings for evaluation. Variables and parameters share one
/// namespace; the caller decides which names play which role.
using Environment = std::map<std::string, double>;

/// Parses the expression grammar:
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := '-' factor | power
///   power  := atom ('^' factor)?          (right associative)
///   atom   := number | identifier | identifier '(' expr ')' | '(' expr ')'
/// Identifiers are [A-Za-z_][A-Za-z0-9_]*. Throws SyntaxError with the byte
/// offset of the failure, or UnknownFunctionError for `name(` applications
/// outside the function table.
ExprPtr parse_expression(std::string_view text);

/// Renders with the minimal parenthesisation that reparses to the same tree.
std::string to_string(const ExprPtr& expr);

/// Tree-walking evaluation. Missing symbols throw UnboundSymbolError;
/// non-finite intermediate values propagate per IEEE rather than throwing.
double evaluate(const ExprPtr& expr, const Environment& env);

/// Partial derivative with respect to `symbol`. Applies constant folding and
/// the 0/1 identity eliminations, nothing stronger.
ExprPtr differentiate(const ExprPtr& expr, const std::string& symbol);

/// Structural equality (same shape, same literals bit for bit).
bool structurally_equal(const ExprPtr& lhs, const ExprPtr& rhs);

/// Shortest round-trip decimal rendering of a double (used by the printer).
std::string format_double(double value);

/// Expression pre-bound to a positional argument list for fast repeated
/// evaluation inside integrator loops. Symbols found in `constants` fold to
/// literals; remaining symbols must appear in `slots` or construction throws
/// UnboundSymbolError. eval() is pure and safe to call concurrently.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  CompiledExpr(const ExprPtr& expr, std::span<const std::string> slots,
               const Environment& constants);

  double eval(std::span<const double> slot_values) const;
  bool valid() const noexcept { return !ops_.empty(); }

 private:
  enum class Op : std::uint8_t {
    kConst,
    kSlot,
    kNeg,
    kAdd,
    kSub,
    kMul,
    kDiv,
    kPow,
    kSin,
    kCos,
    kTan,
    kExp,
    kLog,
    kSqrt,
    kSinh,
    kCosh,
    kTanh,
    kAtan,
    kFlatStep,
  };
  struct Step {
    Op op;
    int index = 0;      // slot index or flatstep poly index
    double value = 0.0; // literal for kConst
  };

  std::vector<Step> ops_;
  std::vector<std::vector<double>> flat_polys_;
  int max_depth_ = 0;
};

/// Value of the flatstep family: derivative order `order` at `x`.
double flat_step_value(int order, std::span<const double> poly, double x);

}  // namespace varcalc
