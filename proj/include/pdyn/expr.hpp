#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pdyn/sphere.hpp"

namespace pdyn {

/// Syntax error with the byte offset of the offending token and the set of
/// token descriptions that would have been accepted there.
class parse_error : public std::runtime_error {
 public:
  parse_error(std::string message, size_t offset,
              std::vector<std::string> expected);
  size_t offset() const { return offset_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  size_t offset_;
  std::vector<std::string> expected_;
};

enum class ExprKind { Var, Lit, Neg, Add, Sub, Mul, Div, Pow, Exp };

/// Expression tree over: the variable z, decimal literals with an optional
/// imaginary unit suffix, + - * /, integer powers ^k with |k| <= 64, unary
/// minus, and exp(.). A literal node holds a nonnegative finite value that
/// is purely real or purely imaginary; signs and mixed complex constants
/// are built from operators.
struct MapExpr {
  ExprKind kind;
  double lit_value = 0.0;   // Lit
  bool lit_imaginary = false;
  int pow_exponent = 0;     // Pow
  std::unique_ptr<MapExpr> a;  // operand / left
  std::unique_ptr<MapExpr> b;  // right

  cplx literal() const {
    return lit_imaginary ? cplx(0.0, lit_value) : cplx(lit_value, 0.0);
  }
};

using ExprPtr = std::unique_ptr<MapExpr>;

ExprPtr make_var();
ExprPtr make_lit(double value, bool imaginary = false);
ExprPtr make_neg(ExprPtr a);
ExprPtr make_add(ExprPtr a, ExprPtr b);
ExprPtr make_sub(ExprPtr a, ExprPtr b);
ExprPtr make_mul(ExprPtr a, ExprPtr b);
ExprPtr make_div(ExprPtr a, ExprPtr b);
ExprPtr make_pow(ExprPtr base, int k);
ExprPtr make_exp(ExprPtr a);

ExprPtr clone(const MapExpr& e);
bool structurally_equal(const MapExpr& a, const MapExpr& b);
bool contains_var(const MapExpr& e);
int tree_depth(const MapExpr& e);

/// Parses UTF-8 text under the precedence ladder
/// ^ (tightest) > unary - > * / (left) > + - (left); whitespace is
/// insignificant. Power exponents must be (optionally negated) integer
/// literals with magnitude at most 64.
ExprPtr parse(const std::string& text);

/// Canonical text: parse(format(e)) is structurally equal to e, and
/// format(parse(s)) is a fixed point of format.
std::string format(const MapExpr& e);

/// The canonical one-puncture family z^k * exp(g(z) + h(1/z)) with g and h
/// given as polynomial coefficient lists (ascending powers). g and h must
/// not both be constant. The polynomial parts use Horner structure.
struct RadstromSpec {
  int k = 0;
  std::vector<cplx> g_coeffs;
  std::vector<cplx> h_coeffs;
};

ExprPtr radstrom(const RadstromSpec& spec);

/// Shortest decimal text that reparses to exactly the same double.
std::string format_double(double v);

}  // namespace pdyn
