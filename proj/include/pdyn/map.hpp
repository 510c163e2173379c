#pragma once

#include <memory>
#include <string>
#include <vector>

#include "pdyn/expr.hpp"
#include "pdyn/sphere.hpp"

namespace pdyn {

/// Magnitude cap for intermediates; anything beyond becomes the infinity tag.
inline constexpr double kOmega = 1e300;
/// exp() argument cap: real part above yields infinity, below -690 yields
/// exact zero with the underflow flag set.
inline constexpr double kExpCap = 690.0;
/// log(kOmega); orbit moduli past this are beyond linear range.
inline constexpr double kLogOmega = 690.77552789821368;

/// Result of one guarded evaluation. `underflow` marks that some exp()
/// underflowed to exact zero along the way, so an exact-puncture value is a
/// numeric artifact rather than a true image.
struct EvalResult {
  SpherePoint value;
  bool underflow = false;
};

/// Real-valued transform of log|f(z)| built by structural rules:
///   log|exp(u)|  = Re(u)
///   log|u*v|     = log|u| + log|v|
///   log|u/v|     = log|u| - log|v|
///   log|u^k|     = k * log|u|
///   log|-u|      = log|u|
/// Sums and other uncovered subtrees become direct-evaluation leaves
/// (log|u+v| is not simplified), evaluated in plain IEEE doubles.
struct LogAbsExpr;
using LogAbsPtr = std::unique_ptr<LogAbsExpr>;

struct LogAbsExpr {
  enum class Kind { ReOf, LogOf, Sum, Diff, Scale };
  Kind kind;
  int scale_k = 0;
  ExprPtr leaf;   // ReOf / LogOf: the complex subexpression
  LogAbsPtr a, b;
};

/// Structural derivation; never fails for the shipped grammar (uncovered
/// nodes fall back to direct-evaluation leaves) but stays nullable for
/// grammars where a leaf would not be evaluable in doubles.
LogAbsPtr derive_log_abs(const MapExpr& e);

/// Extended-real evaluation of a derived transform at a finite point.
/// Out-of-range leaf evaluations surface as +/-infinity.
double eval_log_abs(const LogAbsExpr& t, const cplx& z);

/// Display form, e.g. "2*log|z|+Re(z)".
std::string format_log_abs(const LogAbsExpr& t);

/// A parsed, compiled self-map of the punctured plane. Evaluation is total:
/// intermediates past kOmega collapse to the infinity tag, division by exact
/// zero gives infinity, exp() saturates per kExpCap. Immutable and safe to
/// share across threads.
class CompiledMap {
 public:
  CompiledMap(ExprPtr expr, PunctureSet punctures);
  CompiledMap(const CompiledMap& other);
  CompiledMap& operator=(const CompiledMap&) = delete;
  CompiledMap(CompiledMap&&) = default;

  const MapExpr& expr() const { return *expr_; }
  const std::string& text() const { return text_; }
  const PunctureSet& punctures() const { return punctures_; }

  /// Applications of the base expression per eval: 1 for a plain map, p for
  /// a composed iterate.
  int iterate_power() const { return power_; }

  EvalResult eval(const SpherePoint& x) const;

  bool has_log_abs() const { return logabs_ != nullptr; }
  const LogAbsExpr* log_abs_expr() const { return logabs_.get(); }

  /// log|f(z)| for finite z as an extended real (composed maps apply the
  /// base transform after iterating the guarded evaluation).
  double log_abs(const cplx& z) const;

  /// The p-th iterate: evaluation applies the base map p times; log_abs uses
  /// the base transform on the final application when the penultimate value
  /// is representable.
  static CompiledMap compose_power(const CompiledMap& base, int p);

 private:
  struct Instr {
    enum class Op : uint8_t { PushZ, PushLit, Add, Sub, Mul, Div, Neg, Exp, PowInt };
    Op op;
    cplx lit{};
    int k = 0;
  };

  EvalResult eval_once(const SpherePoint& x) const;

  ExprPtr expr_;
  std::string text_;
  PunctureSet punctures_;
  int power_ = 1;
  std::vector<Instr> prog_;
  LogAbsPtr logabs_;
  size_t stack_need_ = 0;
};

/// Parse and compile in one step.
CompiledMap compile_map(const std::string& text, PunctureSet punctures);

}  // namespace pdyn
