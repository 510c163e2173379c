#include "pdyn/map.hpp"

#include <cmath>
#include <limits>

namespace pdyn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Guarded complex value used inside the evaluator. `inf` marks the infinity
// tag; `uf` marks an exp underflow somewhere in the history of the value.
struct GV {
  double re = 0.0, im = 0.0;
  bool inf = false;
  bool uf = false;
};

inline bool magnitude_exceeds_cap(double re, double im) {
  double are = std::fabs(re), aim = std::fabs(im);
  double m = are > aim ? are : aim;
  if (m > kOmega) return true;
  if (m <= 7.0e299) return false;  // |z| <= m*sqrt(2) < 1e300
  return std::hypot(are, aim) > kOmega;
}

inline GV normalize(double re, double im, bool uf) {
  if (std::isnan(re) || std::isnan(im) || magnitude_exceeds_cap(re, im))
    return GV{0.0, 0.0, true, uf};
  return GV{re, im, false, uf};
}

inline GV gv_add(const GV& x, const GV& y) {
  bool uf = x.uf || y.uf;
  if (x.inf || y.inf) return GV{0, 0, true, uf};
  return normalize(x.re + y.re, x.im + y.im, uf);
}

inline GV gv_sub(const GV& x, const GV& y) {
  bool uf = x.uf || y.uf;
  if (x.inf || y.inf) return GV{0, 0, true, uf};
  return normalize(x.re - y.re, x.im - y.im, uf);
}

inline GV gv_mul(const GV& x, const GV& y) {
  bool uf = x.uf || y.uf;
  if (x.inf || y.inf) return GV{0, 0, true, uf};
  return normalize(x.re * y.re - x.im * y.im, x.re * y.im + x.im * y.re, uf);
}

inline GV gv_div(const GV& x, const GV& y) {
  bool uf = x.uf || y.uf;
  if (x.inf) return GV{0, 0, true, uf};
  if (y.inf) return GV{0.0, 0.0, false, uf};
  double d = y.re * y.re + y.im * y.im;
  if (d == 0.0) return GV{0, 0, true, uf};
  // scale to dodge overflow of the raw cross terms for huge operands
  if (d > 1e300 || d < 1e-300) {
    double s = std::max(std::fabs(y.re), std::fabs(y.im));
    double yr = y.re / s, yi = y.im / s;
    double dd = yr * yr + yi * yi;
    return normalize((x.re * yr + x.im * yi) / dd / s,
                     (x.im * yr - x.re * yi) / dd / s, uf);
  }
  return normalize((x.re * y.re + x.im * y.im) / d,
                   (x.im * y.re - x.re * y.im) / d, uf);
}

inline GV gv_neg(const GV& x) {
  if (x.inf) return x;
  return GV{-x.re, -x.im, false, x.uf};
}

inline GV gv_exp(const GV& x) {
  if (x.inf) return GV{0, 0, true, x.uf};
  if (x.re > kExpCap) return GV{0, 0, true, x.uf};
  if (x.re < -kExpCap) return GV{0.0, 0.0, false, true};
  double m = std::exp(x.re);
  return normalize(m * std::cos(x.im), m * std::sin(x.im), x.uf);
}

inline GV gv_powi(GV base, int k) {
  if (k == 0) return GV{1.0, 0.0, false, base.uf};
  bool invert = k < 0;
  unsigned n = invert ? static_cast<unsigned>(-static_cast<long long>(k))
                      : static_cast<unsigned>(k);
  GV acc{1.0, 0.0, false, base.uf};
  GV sq = base;
  while (n) {
    if (n & 1u) acc = gv_mul(acc, sq);
    n >>= 1u;
    if (n) sq = gv_mul(sq, sq);
  }
  if (invert) return gv_div(GV{1.0, 0.0, false, acc.uf}, acc);
  return acc;
}

size_t stack_need_of(const MapExpr& e) {
  switch (e.kind) {
    case ExprKind::Var:
    case ExprKind::Lit:
      return 1;
    case ExprKind::Neg:
    case ExprKind::Exp:
    case ExprKind::Pow:
      return stack_need_of(*e.a);
    default: {
      size_t l = stack_need_of(*e.a);
      size_t r = stack_need_of(*e.b);
      return std::max(l, r + 1);
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// log-abs derivation and evaluation

namespace {

LogAbsPtr la_node(LogAbsExpr::Kind k) {
  auto n = std::make_unique<LogAbsExpr>();
  n->kind = k;
  return n;
}

LogAbsPtr la_leaf(LogAbsExpr::Kind k, const MapExpr& e) {
  auto n = la_node(k);
  n->leaf = clone(e);
  return n;
}

}  // namespace

LogAbsPtr derive_log_abs(const MapExpr& e) {
  switch (e.kind) {
    case ExprKind::Exp:
      return la_leaf(LogAbsExpr::Kind::ReOf, *e.a);
    case ExprKind::Mul: {
      auto n = la_node(LogAbsExpr::Kind::Sum);
      n->a = derive_log_abs(*e.a);
      n->b = derive_log_abs(*e.b);
      if (!n->a || !n->b) return nullptr;
      return n;
    }
    case ExprKind::Div: {
      auto n = la_node(LogAbsExpr::Kind::Diff);
      n->a = derive_log_abs(*e.a);
      n->b = derive_log_abs(*e.b);
      if (!n->a || !n->b) return nullptr;
      return n;
    }
    case ExprKind::Pow: {
      auto n = la_node(LogAbsExpr::Kind::Scale);
      n->scale_k = e.pow_exponent;
      n->a = derive_log_abs(*e.a);
      if (!n->a) return nullptr;
      return n;
    }
    case ExprKind::Neg:
      return derive_log_abs(*e.a);
    default:
      // Var, Lit, Add, Sub: direct-evaluation leaf
      return la_leaf(LogAbsExpr::Kind::LogOf, e);
  }
}

namespace {

// Plain IEEE complex evaluation (no magnitude cap) for log-abs leaves; the
// cap is pointless here because the result feeds Re(.) or log|.| only.
cplx ieee_eval(const MapExpr& e, const cplx& z) {
  switch (e.kind) {
    case ExprKind::Var: return z;
    case ExprKind::Lit: return e.literal();
    case ExprKind::Neg: return -ieee_eval(*e.a, z);
    case ExprKind::Add: return ieee_eval(*e.a, z) + ieee_eval(*e.b, z);
    case ExprKind::Sub: return ieee_eval(*e.a, z) - ieee_eval(*e.b, z);
    case ExprKind::Mul: return ieee_eval(*e.a, z) * ieee_eval(*e.b, z);
    case ExprKind::Div: {
      cplx a = ieee_eval(*e.a, z), b = ieee_eval(*e.b, z);
      if (b == cplx(0.0, 0.0)) return cplx(kInf, 0.0);
      return a / b;
    }
    case ExprKind::Pow: {
      cplx b = ieee_eval(*e.a, z);
      int k = e.pow_exponent;
      if (k == 0) return cplx(1.0, 0.0);
      cplx acc(1.0, 0.0), sq = b;
      unsigned n = static_cast<unsigned>(k < 0 ? -static_cast<long long>(k) : k);
      while (n) {
        if (n & 1u) acc *= sq;
        n >>= 1u;
        if (n) sq *= sq;
      }
      if (k < 0) {
        if (acc == cplx(0.0, 0.0)) return cplx(kInf, 0.0);
        return cplx(1.0, 0.0) / acc;
      }
      return acc;
    }
    case ExprKind::Exp: {
      cplx a = ieee_eval(*e.a, z);
      if (!std::isfinite(a.real())) {
        // magnitude-driven saturation; direction unknown past range
        return a.real() > 0 ? cplx(kInf, 0.0) : cplx(0.0, 0.0);
      }
      if (a.real() > 709.0) return cplx(kInf, 0.0);
      double m = std::exp(a.real());
      return cplx(m * std::cos(a.imag()), m * std::sin(a.imag()));
    }
  }
  return cplx(0.0, 0.0);
}

}  // namespace

double eval_log_abs(const LogAbsExpr& t, const cplx& z) {
  switch (t.kind) {
    case LogAbsExpr::Kind::ReOf: {
      double r = ieee_eval(*t.leaf, z).real();
      return std::isnan(r) ? kInf : r;
    }
    case LogAbsExpr::Kind::LogOf: {
      cplx v = ieee_eval(*t.leaf, z);
      if (std::isnan(v.real()) || std::isnan(v.imag())) return kInf;
      double m = std::abs(v);
      if (m == 0.0) return -kInf;
      if (std::isinf(m)) return kInf;
      return std::log(m);
    }
    case LogAbsExpr::Kind::Sum:
      return eval_log_abs(*t.a, z) + eval_log_abs(*t.b, z);
    case LogAbsExpr::Kind::Diff:
      return eval_log_abs(*t.a, z) - eval_log_abs(*t.b, z);
    case LogAbsExpr::Kind::Scale:
      return t.scale_k * eval_log_abs(*t.a, z);
  }
  return 0.0;
}

std::string format_log_abs(const LogAbsExpr& t) {
  switch (t.kind) {
    case LogAbsExpr::Kind::ReOf:
      return "Re(" + format(*t.leaf) + ")";
    case LogAbsExpr::Kind::LogOf:
      return "log|" + format(*t.leaf) + "|";
    case LogAbsExpr::Kind::Sum:
      return format_log_abs(*t.a) + "+" + format_log_abs(*t.b);
    case LogAbsExpr::Kind::Diff:
      return format_log_abs(*t.a) + "-(" + format_log_abs(*t.b) + ")";
    case LogAbsExpr::Kind::Scale:
      return std::to_string(t.scale_k) + "*(" + format_log_abs(*t.a) + ")";
  }
  return "";
}

// ---------------------------------------------------------------------------
// CompiledMap

CompiledMap::CompiledMap(ExprPtr expr, PunctureSet punctures)
    : expr_(std::move(expr)), punctures_(std::move(punctures)) {
  text_ = format(*expr_);
  stack_need_ = stack_need_of(*expr_);
  if (stack_need_ > 64)
    throw precondition_error("expression nesting exceeds evaluator limit");

  // postorder flattening
  struct Walk {
    std::vector<Instr>& out;
    void visit(const MapExpr& e) {
      switch (e.kind) {
        case ExprKind::Var:
          out.push_back({Instr::Op::PushZ});
          return;
        case ExprKind::Lit:
          out.push_back({Instr::Op::PushLit, e.literal()});
          return;
        case ExprKind::Neg:
          visit(*e.a);
          out.push_back({Instr::Op::Neg});
          return;
        case ExprKind::Exp:
          visit(*e.a);
          out.push_back({Instr::Op::Exp});
          return;
        case ExprKind::Pow:
          visit(*e.a);
          out.push_back({Instr::Op::PowInt, {}, e.pow_exponent});
          return;
        case ExprKind::Add:
          visit(*e.a); visit(*e.b);
          out.push_back({Instr::Op::Add});
          return;
        case ExprKind::Sub:
          visit(*e.a); visit(*e.b);
          out.push_back({Instr::Op::Sub});
          return;
        case ExprKind::Mul:
          visit(*e.a); visit(*e.b);
          out.push_back({Instr::Op::Mul});
          return;
        case ExprKind::Div:
          visit(*e.a); visit(*e.b);
          out.push_back({Instr::Op::Div});
          return;
      }
    }
  };
  Walk{prog_}.visit(*expr_);
  logabs_ = derive_log_abs(*expr_);
}

CompiledMap::CompiledMap(const CompiledMap& other)
    : expr_(clone(*other.expr_)),
      text_(other.text_),
      punctures_(other.punctures_),
      power_(other.power_),
      prog_(other.prog_),
      stack_need_(other.stack_need_) {
  logabs_ = derive_log_abs(*expr_);
}

EvalResult CompiledMap::eval_once(const SpherePoint& x) const {
  GV stack[64];
  size_t sp = 0;
  GV zv;
  if (x.is_infinity()) {
    zv = GV{0, 0, true, false};
  } else {
    zv = GV{x.value().real(), x.value().imag(), false, false};
  }
  for (const Instr& in : prog_) {
    switch (in.op) {
      case Instr::Op::PushZ: stack[sp++] = zv; break;
      case Instr::Op::PushLit:
        stack[sp++] = GV{in.lit.real(), in.lit.imag(), false, false};
        break;
      case Instr::Op::Neg: stack[sp - 1] = gv_neg(stack[sp - 1]); break;
      case Instr::Op::Exp: stack[sp - 1] = gv_exp(stack[sp - 1]); break;
      case Instr::Op::PowInt: stack[sp - 1] = gv_powi(stack[sp - 1], in.k); break;
      case Instr::Op::Add: --sp; stack[sp - 1] = gv_add(stack[sp - 1], stack[sp]); break;
      case Instr::Op::Sub: --sp; stack[sp - 1] = gv_sub(stack[sp - 1], stack[sp]); break;
      case Instr::Op::Mul: --sp; stack[sp - 1] = gv_mul(stack[sp - 1], stack[sp]); break;
      case Instr::Op::Div: --sp; stack[sp - 1] = gv_div(stack[sp - 1], stack[sp]); break;
    }
  }
  const GV& r = stack[0];
  if (r.inf) return {SpherePoint::infinity(), r.uf};
  return {SpherePoint::finite(r.re, r.im), r.uf};
}

EvalResult CompiledMap::eval(const SpherePoint& x) const {
  EvalResult r = eval_once(x);
  for (int i = 1; i < power_; ++i) {
    if (r.value.is_infinity()) return r;
    bool uf = r.underflow;
    r = eval_once(r.value);
    r.underflow = r.underflow || uf;
  }
  return r;
}

double CompiledMap::log_abs(const cplx& z) const {
  if (!logabs_) throw precondition_error("map has no log-abs transform");
  if (power_ == 1) return eval_log_abs(*logabs_, z);
  SpherePoint cur = SpherePoint::finite(z);
  for (int i = 0; i < power_ - 1; ++i) {
    EvalResult r = eval_once(cur);
    if (r.value.is_infinity()) return kInf;
    cur = r.value;
  }
  return eval_log_abs(*logabs_, cur.value());
}

CompiledMap CompiledMap::compose_power(const CompiledMap& base, int p) {
  if (p < 1) throw precondition_error("iterate power must be at least 1");
  CompiledMap m(base);
  m.power_ = base.power_ * p;
  return m;
}

CompiledMap compile_map(const std::string& text, PunctureSet punctures) {
  return CompiledMap(parse(text), std::move(punctures));
}

}  // namespace pdyn
