#include "pdyn/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pdyn {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

PunctureSet::PunctureSet(std::vector<cplx> finite_punctures)
    : finite_(finite_punctures.size()), punctures_(std::move(finite_punctures)) {
  if (punctures_.empty())
    throw precondition_error("puncture set needs at least one finite puncture");
  for (const cplx& y : punctures_) {
    if (!std::isfinite(y.real()) || !std::isfinite(y.imag()))
      throw precondition_error("finite punctures must be finite");
  }
  rho_ = compute_rho_S(punctures_);
}

cplx PunctureSet::finite_puncture(int j) const {
  require_chart(j);
  if (j == 0) throw precondition_error("chart 0 has no finite puncture");
  return punctures_[static_cast<size_t>(j - 1)];
}

SpherePoint PunctureSet::puncture(int j) const {
  require_chart(j);
  if (j == 0) return SpherePoint::infinity();
  return SpherePoint::finite(punctures_[static_cast<size_t>(j - 1)]);
}

bool PunctureSet::is_puncture(const SpherePoint& x, int* j) const {
  if (x.is_infinity()) {
    if (j) *j = 0;
    return true;
  }
  for (size_t i = 0; i < punctures_.size(); ++i) {
    if (x.value() == punctures_[i]) {
      if (j) *j = static_cast<int>(i) + 1;
      return true;
    }
  }
  return false;
}

void PunctureSet::require_chart(int j) const {
  if (j < 0 || j > nu())
    throw precondition_error("chart index out of range");
}

double compute_rho_S(const std::vector<cplx>& finite_punctures) {
  if (finite_punctures.empty())
    throw precondition_error("empty puncture list");
  double m = 1.0;
  for (const cplx& y : finite_punctures) m = std::max(m, std::abs(y));
  for (size_t a = 0; a < finite_punctures.size(); ++a) {
    for (size_t b = a + 1; b < finite_punctures.size(); ++b) {
      double gap = std::abs(finite_punctures[a] - finite_punctures[b]);
      if (gap == 0.0)
        throw precondition_error("finite punctures must be pairwise distinct");
      m = std::max(m, 1.0 / gap);
    }
  }
  return 2.0 * m;
}

double generalized_modulus(const SpherePoint& x, int j, const PunctureSet& S) {
  S.require_chart(j);
  if (j == 0) return x.is_infinity() ? kInf : std::abs(x.value());
  if (x.is_infinity()) return 0.0;
  double d = std::abs(x.value() - S.finite_puncture(j));
  return d == 0.0 ? kInf : 1.0 / d;
}

double log_generalized_modulus(const SpherePoint& x, int j,
                               const PunctureSet& S) {
  S.require_chart(j);
  if (j == 0) return x.is_infinity() ? kInf : std::log(std::abs(x.value()));
  if (x.is_infinity()) return -kInf;
  double d = std::abs(x.value() - S.finite_puncture(j));
  return d == 0.0 ? kInf : -std::log(d);
}

SpherePoint chart_map(const SpherePoint& x, int j, const PunctureSet& S) {
  S.require_chart(j);
  if (j == 0) return x;
  if (x.is_infinity()) return SpherePoint::finite(0.0, 0.0);
  cplx w = x.value() - S.finite_puncture(j);
  double n2 = std::norm(w);
  if (n2 == 0.0) return SpherePoint::infinity();
  cplx v = w / n2;
  return SpherePoint::finite(-v.real(), v.imag());
}

SpherePoint chart_inverse(const SpherePoint& w, int j, const PunctureSet& S) {
  S.require_chart(j);
  if (j == 0) return w;
  if (w.is_infinity()) return S.puncture(j);
  cplx u(-w.value().real(), w.value().imag());
  double n2 = std::norm(u);
  if (n2 == 0.0) return SpherePoint::infinity();
  return SpherePoint::finite(S.finite_puncture(j) + u / n2);
}

std::optional<int> dominant_symbol(const SpherePoint& x, const PunctureSet& S,
                                   double threshold) {
  if (!(threshold >= S.rho_S()))
    throw precondition_error("dominant_symbol threshold below rho_S");
  int best = -1;
  double best_mod = -kInf;
  for (int j = 0; j <= S.nu(); ++j) {
    double m = generalized_modulus(x, j, S);
    if (m > best_mod) {
      best_mod = m;
      best = j;
    }
  }
  if (best_mod >= threshold) return best;
  return std::nullopt;
}

std::optional<int> dominant_symbol_log(const std::vector<double>& log_moduli,
                                       double log_threshold) {
  int best = -1;
  double best_mod = -kInf;
  for (size_t j = 0; j < log_moduli.size(); ++j) {
    if (log_moduli[j] > best_mod) {
      best_mod = log_moduli[j];
      best = static_cast<int>(j);
    }
  }
  if (best >= 0 && best_mod >= log_threshold) return best;
  return std::nullopt;
}

}  // namespace pdyn
