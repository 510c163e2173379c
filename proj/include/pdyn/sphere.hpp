#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

namespace pdyn {

using cplx = std::complex<double>;

/// Thrown when an operation's stated precondition is violated.
class precondition_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A point of the one-point compactification of the plane: either a finite
/// complex value or the point at infinity. Infinity is an explicit tag,
/// never a large float. Construction normalizes overflow (and NaN) to the
/// infinity tag, so finite points always carry finite components.
class SpherePoint {
 public:
  static SpherePoint infinity() { return SpherePoint(true, {0.0, 0.0}); }
  static SpherePoint finite(cplx v) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return infinity();
    return SpherePoint(false, v);
  }
  static SpherePoint finite(double re, double im = 0.0) {
    return finite(cplx(re, im));
  }

  bool is_infinity() const { return inf_; }
  bool is_finite() const { return !inf_; }

  /// Finite value; calling this on the infinity tag is a bug.
  cplx value() const { return v_; }

  friend bool operator==(const SpherePoint& a, const SpherePoint& b) {
    if (a.inf_ != b.inf_) return false;
    if (a.inf_) return true;
    return a.v_.real() == b.v_.real() && a.v_.imag() == b.v_.imag();
  }
  friend bool operator!=(const SpherePoint& a, const SpherePoint& b) {
    return !(a == b);
  }

 private:
  SpherePoint(bool inf, cplx v) : inf_(inf), v_(v) {}
  bool inf_;
  cplx v_;
};

/// The singularity set S = {y_0 = infinity, y_1, ..., y_nu} with nu >= 1
/// finite members, all pairwise distinct. Chart indices j run over
/// P = {0, 1, ..., nu}; j = 0 is the chart at infinity.
class PunctureSet {
 public:
  explicit PunctureSet(std::vector<cplx> finite_punctures);

  int nu() const { return static_cast<int>(finite_); }
  int chart_count() const { return static_cast<int>(finite_) + 1; }

  /// Finite puncture y_j, 1 <= j <= nu.
  cplx finite_puncture(int j) const;

  /// y_j as a sphere point (j = 0 gives infinity).
  SpherePoint puncture(int j) const;

  /// Cached separation radius: for every chart j, the region
  /// {x : |x|_j >= rho} contains no puncture other than y_j.
  double rho_S() const { return rho_; }

  /// True when x coincides exactly with some puncture; the index is
  /// returned through j when given.
  bool is_puncture(const SpherePoint& x, int* j = nullptr) const;

  void require_chart(int j) const;

 private:
  size_t finite_ = 0;
  std::vector<cplx> punctures_;
  double rho_ = 0.0;
};

/// Generalised modulus |x|_j: Euclidean norm for j = 0, reciprocal distance
/// to y_j for j > 0. Total on the sphere: |inf|_0 = +inf, |inf|_j = 0,
/// |y_j|_j = +inf.
double generalized_modulus(const SpherePoint& x, int j, const PunctureSet& S);

/// Same quantity in log domain (natural log), avoiding overflow for points
/// extremely close to a finite puncture.
double log_generalized_modulus(const SpherePoint& x, int j,
                               const PunctureSet& S);

/// Moebius chart phi_j sending puncture y_j to infinity so that
/// |x|_j = |phi_j(x)|. phi_0 is the identity; for j > 0 the map is the
/// reflected inversion tau((x - y_j)/|x - y_j|^2) with tau negating the
/// first coordinate.
SpherePoint chart_map(const SpherePoint& x, int j, const PunctureSet& S);

/// Inverse of chart_map: chart_map(chart_inverse(w, j), j) == w up to
/// relative 1e-12 (exact for j = 0 and for infinity/puncture exchanges).
SpherePoint chart_inverse(const SpherePoint& w, int j, const PunctureSet& S);

/// Separation radius 2 * max(1, max_i |y_i|, max_{i != j} 1/|y_i - y_j|).
/// The factor 2 keeps symbol extraction away from the boundary of the
/// separation regions.
double compute_rho_S(const std::vector<cplx>& finite_punctures);

/// Index j maximizing |x|_j if that maximum reaches the threshold, absent
/// otherwise. Ties break toward the smallest j (possible only below rho_S).
/// Thresholds below rho_S are rejected.
std::optional<int> dominant_symbol(const SpherePoint& x, const PunctureSet& S,
                                   double threshold);

/// Variant taking the log-domain modulus row (one entry per chart) that
/// orbit records already carry.
std::optional<int> dominant_symbol_log(const std::vector<double>& log_moduli,
                                       double log_threshold);

}  // namespace pdyn
