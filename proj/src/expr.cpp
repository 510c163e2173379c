#include "pdyn/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <sstream>

namespace pdyn {

parse_error::parse_error(std::string message, size_t offset,
                         std::vector<std::string> expected)
    : std::runtime_error([&] {
        std::ostringstream os;
        os << "parse error at byte " << offset << ": " << message;
        if (!expected.empty()) {
          os << " (expected ";
          for (size_t i = 0; i < expected.size(); ++i)
            os << (i ? ", " : "") << expected[i];
          os << ")";
        }
        return os.str();
      }()),
      offset_(offset),
      expected_(std::move(expected)) {}

ExprPtr make_var() {
  auto e = std::make_unique<MapExpr>();
  e->kind = ExprKind::Var;
  return e;
}

ExprPtr make_lit(double value, bool imaginary) {
  if (!(value >= 0.0) || !std::isfinite(value))
    throw precondition_error("literal values must be nonnegative and finite");
  auto e = std::make_unique<MapExpr>();
  e->kind = ExprKind::Lit;
  e->lit_value = value;
  e->lit_imaginary = imaginary;
  return e;
}

static ExprPtr make_binary(ExprKind k, ExprPtr a, ExprPtr b) {
  auto e = std::make_unique<MapExpr>();
  e->kind = k;
  e->a = std::move(a);
  e->b = std::move(b);
  return e;
}

ExprPtr make_neg(ExprPtr a) {
  auto e = std::make_unique<MapExpr>();
  e->kind = ExprKind::Neg;
  e->a = std::move(a);
  return e;
}
ExprPtr make_add(ExprPtr a, ExprPtr b) { return make_binary(ExprKind::Add, std::move(a), std::move(b)); }
ExprPtr make_sub(ExprPtr a, ExprPtr b) { return make_binary(ExprKind::Sub, std::move(a), std::move(b)); }
ExprPtr make_mul(ExprPtr a, ExprPtr b) { return make_binary(ExprKind::Mul, std::move(a), std::move(b)); }
ExprPtr make_div(ExprPtr a, ExprPtr b) { return make_binary(ExprKind::Div, std::move(a), std::move(b)); }

ExprPtr make_pow(ExprPtr base, int k) {
  if (k < -64 || k > 64)
    throw precondition_error("power exponent magnitude limited to 64");
  auto e = std::make_unique<MapExpr>();
  e->kind = ExprKind::Pow;
  e->pow_exponent = k;
  e->a = std::move(base);
  return e;
}

ExprPtr make_exp(ExprPtr a) {
  auto e = std::make_unique<MapExpr>();
  e->kind = ExprKind::Exp;
  e->a = std::move(a);
  return e;
}

ExprPtr clone(const MapExpr& e) {
  auto c = std::make_unique<MapExpr>();
  c->kind = e.kind;
  c->lit_value = e.lit_value;
  c->lit_imaginary = e.lit_imaginary;
  c->pow_exponent = e.pow_exponent;
  if (e.a) c->a = clone(*e.a);
  if (e.b) c->b = clone(*e.b);
  return c;
}

bool structurally_equal(const MapExpr& a, const MapExpr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExprKind::Var:
      return true;
    case ExprKind::Lit:
      return a.lit_value == b.lit_value && a.lit_imaginary == b.lit_imaginary;
    case ExprKind::Pow:
      return a.pow_exponent == b.pow_exponent && structurally_equal(*a.a, *b.a);
    case ExprKind::Neg:
    case ExprKind::Exp:
      return structurally_equal(*a.a, *b.a);
    default:
      return structurally_equal(*a.a, *b.a) && structurally_equal(*a.b, *b.b);
  }
}

bool contains_var(const MapExpr& e) {
  if (e.kind == ExprKind::Var) return true;
  if (e.a && contains_var(*e.a)) return true;
  if (e.b && contains_var(*e.b)) return true;
  return false;
}

int tree_depth(const MapExpr& e) {
  int d = 0;
  if (e.a) d = std::max(d, tree_depth(*e.a));
  if (e.b) d = std::max(d, tree_depth(*e.b));
  return d + 1;
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok { Number, ImagUnit, Z, ExpName, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Token {
  Tok kind;
  size_t offset;
  double number = 0.0;
  bool imag_suffix = false;  // number carried a trailing 'i'
  bool number_is_integer = false;
  long long int_value = 0;
};

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::Number: return "number";
    case Tok::ImagUnit: return "'i'";
    case Tok::Z: return "'z'";
    case Tok::ExpName: return "'exp'";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Caret: return "'^'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::End: return "end of input";
  }
  return "?";
}

class Lexer {
 public:
  explicit Lexer(const std::string& s) : s_(s) { advance(); }

  const Token& peek() const { return cur_; }
  Token take() {
    Token t = cur_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    cur_.offset = pos_;
    cur_.imag_suffix = false;
    cur_.number_is_integer = false;
    if (pos_ >= s_.size()) {
      cur_.kind = Tok::End;
      return;
    }
    char c = s_[pos_];
    switch (c) {
      case '+': cur_.kind = Tok::Plus; ++pos_; return;
      case '-': cur_.kind = Tok::Minus; ++pos_; return;
      case '*': cur_.kind = Tok::Star; ++pos_; return;
      case '/': cur_.kind = Tok::Slash; ++pos_; return;
      case '^': cur_.kind = Tok::Caret; ++pos_; return;
      case '(': cur_.kind = Tok::LParen; ++pos_; return;
      case ')': cur_.kind = Tok::RParen; ++pos_; return;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      lex_number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      std::string id = s_.substr(start, pos_ - start);
      if (id == "z") { cur_.kind = Tok::Z; return; }
      if (id == "i") { cur_.kind = Tok::ImagUnit; return; }
      if (id == "exp") { cur_.kind = Tok::ExpName; return; }
      throw parse_error("unknown identifier '" + id + "'", start,
                        {"'z'", "'i'", "'exp'"});
    }
    throw parse_error(std::string("unexpected character '") + c + "'", pos_, {});
  }

  void lex_number() {
    size_t start = pos_;
    bool is_integer = true;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (pos_ < s_.size() && s_[pos_] == '.') {
      is_integer = false;
      ++pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    // scientific exponent; 'e' must be followed by digits (else it would be
    // the start of an identifier such as 'exp')
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      size_t mark = pos_;
      size_t p = pos_ + 1;
      if (p < s_.size() && (s_[p] == '+' || s_[p] == '-')) ++p;
      if (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) {
        is_integer = false;
        pos_ = p;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      } else {
        pos_ = mark;
      }
    }
    std::string text = s_.substr(start, pos_ - start);
    if (text == ".")
      throw parse_error("malformed number", start, {"number"});
    cur_.kind = Tok::Number;
    cur_.number = std::strtod(text.c_str(), nullptr);
    cur_.number_is_integer = is_integer;
    if (is_integer) cur_.int_value = std::strtoll(text.c_str(), nullptr, 10);
    if (pos_ < s_.size() && s_[pos_] == 'i') {
      // imaginary suffix only when not starting a longer identifier
      size_t p = pos_ + 1;
      bool longer = p < s_.size() &&
                    (std::isalnum(static_cast<unsigned char>(s_[p])) || s_[p] == '_');
      if (!longer) {
        cur_.imag_suffix = true;
        ++pos_;
      }
    }
  }

  const std::string& s_;
  size_t pos_ = 0;
  Token cur_;
};

// Recursive-descent parser for:
//   expr    := term (('+'|'-') term)*
//   term    := unary (('*'|'/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' ['-'] integer)*
//   primary := number | 'i' | 'z' | 'exp' '(' expr ')' | '(' expr ')'
class Parser {
 public:
  explicit Parser(const std::string& s) : lex_(s) {}

  ExprPtr run() {
    ExprPtr e = expr();
    if (lex_.peek().kind != Tok::End)
      throw parse_error("trailing input", lex_.peek().offset,
                        {"'+'", "'-'", "'*'", "'/'", "'^'", "end of input"});
    return e;
  }

 private:
  ExprPtr expr() {
    ExprPtr e = term();
    while (true) {
      Tok k = lex_.peek().kind;
      if (k == Tok::Plus) {
        lex_.take();
        e = make_add(std::move(e), term());
      } else if (k == Tok::Minus) {
        lex_.take();
        e = make_sub(std::move(e), term());
      } else {
        return e;
      }
    }
  }

  ExprPtr term() {
    ExprPtr e = unary();
    while (true) {
      Tok k = lex_.peek().kind;
      if (k == Tok::Star) {
        lex_.take();
        e = make_mul(std::move(e), unary());
      } else if (k == Tok::Slash) {
        lex_.take();
        e = make_div(std::move(e), unary());
      } else {
        return e;
      }
    }
  }

  ExprPtr unary() {
    if (lex_.peek().kind == Tok::Minus) {
      lex_.take();
      return make_neg(unary());
    }
    return power();
  }

  ExprPtr power() {
    ExprPtr e = primary();
    while (lex_.peek().kind == Tok::Caret) {
      lex_.take();
      bool neg = false;
      if (lex_.peek().kind == Tok::Minus) {
        lex_.take();
        neg = true;
      }
      Token t = lex_.peek();
      if (t.kind != Tok::Number)
        throw parse_error("power exponent must be an integer literal", t.offset,
                          {"integer"});
      if (!t.number_is_integer || t.imag_suffix)
        throw parse_error("power exponent must be an integer literal", t.offset,
                          {"integer"});
      lex_.take();
      long long k = neg ? -t.int_value : t.int_value;
      if (k < -64 || k > 64)
        throw parse_error("power exponent magnitude limited to 64", t.offset,
                          {"integer in [-64, 64]"});
      e = make_pow(std::move(e), static_cast<int>(k));
    }
    return e;
  }

  ExprPtr primary() {
    Token t = lex_.peek();
    switch (t.kind) {
      case Tok::Number: {
        lex_.take();
        return make_lit(t.number, t.imag_suffix);
      }
      case Tok::ImagUnit:
        lex_.take();
        return make_lit(1.0, true);
      case Tok::Z:
        lex_.take();
        return make_var();
      case Tok::ExpName: {
        lex_.take();
        if (lex_.peek().kind != Tok::LParen)
          throw parse_error("exp requires parentheses", lex_.peek().offset, {"'('"});
        lex_.take();
        ExprPtr arg = expr();
        if (lex_.peek().kind != Tok::RParen)
          throw parse_error("unbalanced parentheses", lex_.peek().offset, {"')'"});
        lex_.take();
        return make_exp(std::move(arg));
      }
      case Tok::LParen: {
        lex_.take();
        ExprPtr e = expr();
        if (lex_.peek().kind != Tok::RParen)
          throw parse_error("unbalanced parentheses", lex_.peek().offset, {"')'"});
        lex_.take();
        return e;
      }
      default:
        throw parse_error(std::string("unexpected ") + tok_name(t.kind), t.offset,
                          {"number", "'i'", "'z'", "'exp'", "'('", "'-'"});
    }
  }

  Lexer lex_;
};

int prec_of(const MapExpr& e) {
  switch (e.kind) {
    case ExprKind::Add:
    case ExprKind::Sub: return 1;
    case ExprKind::Mul:
    case ExprKind::Div: return 2;
    case ExprKind::Neg: return 3;
    case ExprKind::Pow: return 4;
    default: return 5;  // Var, Lit, Exp-call are primaries
  }
}

void fmt(const MapExpr& e, std::string& out);

void fmt_child(const MapExpr& child, int min_prec, std::string& out) {
  if (prec_of(child) < min_prec) {
    out += '(';
    fmt(child, out);
    out += ')';
  } else {
    fmt(child, out);
  }
}

void fmt(const MapExpr& e, std::string& out) {
  switch (e.kind) {
    case ExprKind::Var:
      out += 'z';
      return;
    case ExprKind::Lit:
      if (e.lit_imaginary) {
        if (e.lit_value == 1.0) {
          out += 'i';
        } else {
          out += format_double(e.lit_value);
          out += 'i';
        }
      } else {
        out += format_double(e.lit_value);
      }
      return;
    case ExprKind::Add:
      fmt_child(*e.a, 1, out);
      out += '+';
      fmt_child(*e.b, 2, out);
      return;
    case ExprKind::Sub:
      fmt_child(*e.a, 1, out);
      out += '-';
      fmt_child(*e.b, 2, out);
      return;
    case ExprKind::Mul:
      fmt_child(*e.a, 2, out);
      out += '*';
      fmt_child(*e.b, 3, out);
      return;
    case ExprKind::Div:
      fmt_child(*e.a, 2, out);
      out += '/';
      fmt_child(*e.b, 3, out);
      return;
    case ExprKind::Neg:
      out += '-';
      fmt_child(*e.a, 3, out);
      return;
    case ExprKind::Pow:
      fmt_child(*e.a, 5, out);
      out += '^';
      out += std::to_string(e.pow_exponent);
      return;
    case ExprKind::Exp:
      out += "exp(";
      fmt(*e.a, out);
      out += ')';
      return;
  }
}

}  // namespace

ExprPtr parse(const std::string& text) { return Parser(text).run(); }

std::string format(const MapExpr& e) {
  std::string out;
  fmt(e, out);
  return out;
}

std::string format_double(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  std::string s(buf);
  // keep the canonical grammar: no '+' in exponents, lowercase 'e'
  std::string t;
  for (char c : s)
    if (c != '+') t += (c == 'E' ? 'e' : c);
  return t;
}

namespace {

// Horner form of sum_i c_i * w^i, skipping exactly-zero coefficients at the
// top and folding unit coefficients. Returns nullptr for the zero polynomial.
ExprPtr complex_coeff(const cplx& c) {
  if (c.imag() == 0.0) {
    if (c.real() < 0.0) return make_neg(make_lit(-c.real()));
    return make_lit(c.real());
  }
  if (c.real() == 0.0) {
    if (c.imag() < 0.0) return make_neg(make_lit(-c.imag(), true));
    return make_lit(c.imag(), true);
  }
  ExprPtr re = c.real() < 0.0 ? make_neg(make_lit(-c.real())) : make_lit(c.real());
  if (c.imag() < 0.0) return make_sub(std::move(re), make_lit(-c.imag(), true));
  return make_add(std::move(re), make_lit(c.imag(), true));
}

ExprPtr horner(const std::vector<cplx>& coeffs, const ExprPtr& w) {
  int top = static_cast<int>(coeffs.size()) - 1;
  while (top >= 0 && coeffs[static_cast<size_t>(top)] == cplx(0.0, 0.0)) --top;
  if (top < 0) return nullptr;
  ExprPtr acc;
  bool acc_is_unit = coeffs[static_cast<size_t>(top)] == cplx(1.0, 0.0);
  if (!acc_is_unit) acc = complex_coeff(coeffs[static_cast<size_t>(top)]);
  for (int i = top - 1; i >= 0; --i) {
    ExprPtr prod = acc_is_unit ? clone(*w) : make_mul(std::move(acc), clone(*w));
    acc_is_unit = false;
    const cplx& c = coeffs[static_cast<size_t>(i)];
    if (c == cplx(0.0, 0.0))
      acc = std::move(prod);
    else
      acc = make_add(std::move(prod), complex_coeff(c));
  }
  if (acc_is_unit) return make_lit(1.0);  // constant polynomial 1
  return acc;
}

}  // namespace

ExprPtr radstrom(const RadstromSpec& spec) {
  auto nonconstant = [](const std::vector<cplx>& c) {
    for (size_t i = 1; i < c.size(); ++i)
      if (c[i] != cplx(0.0, 0.0)) return true;
    return false;
  };
  if (!nonconstant(spec.g_coeffs) && !nonconstant(spec.h_coeffs))
    throw precondition_error("g and h must not both be constant");

  ExprPtr zvar = make_var();
  ExprPtr winv = make_div(make_lit(1.0), make_var());
  ExprPtr g_part = horner(spec.g_coeffs, zvar);
  ExprPtr h_part = horner(spec.h_coeffs, winv);

  ExprPtr arg;
  if (g_part && h_part)
    arg = make_add(std::move(g_part), std::move(h_part));
  else if (g_part)
    arg = std::move(g_part);
  else if (h_part)
    arg = std::move(h_part);
  else
    arg = make_lit(0.0);

  ExprPtr e = make_exp(std::move(arg));
  if (spec.k == 0) return e;
  ExprPtr zfac = spec.k == 1 ? make_var() : make_pow(make_var(), spec.k);
  return make_mul(std::move(zfac), std::move(e));
}

}  // namespace pdyn
