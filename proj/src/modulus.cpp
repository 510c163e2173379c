#include "pdyn/modulus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pdyn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 6.283185307179586476925286766559;

// van der Corput radical inverse in base 2: nested prefixes, and the first
// 2^k points are exactly the equispaced grid of spacing 2^-k.
double vdc2(uint32_t i) {
  i = (i << 16u) | (i >> 16u);
  i = ((i & 0x00ff00ffu) << 8u) | ((i & 0xff00ff00u) >> 8u);
  i = ((i & 0x0f0f0f0fu) << 4u) | ((i & 0xf0f0f0f0u) >> 4u);
  i = ((i & 0x33333333u) << 2u) | ((i & 0xccccccccu) >> 2u);
  i = ((i & 0x55555555u) << 1u) | ((i & 0xaaaaaaaau) >> 1u);
  return static_cast<double>(i) * 0x1p-32;
}

SpherePoint circle_point(const PunctureSet& S, int j, double r, double theta) {
  SpherePoint w = SpherePoint::finite(r * std::cos(theta), r * std::sin(theta));
  return chart_inverse(w, j, S);
}

}  // namespace

std::optional<double> log_image_modulus(const CompiledMap& map,
                                        const SpherePoint& x, int k) {
  const PunctureSet& S = map.punctures();
  S.require_chart(k);
  EvalResult r = map.eval(x);
  int m = -1;
  bool at_puncture = S.is_puncture(r.value, &m);

  if (!at_puncture) return log_generalized_modulus(r.value, k, S);

  bool la = map.has_log_abs() && x.is_finite();
  if (m == 0) {
    // image beyond the magnitude cap
    if (k == 0) return la ? map.log_abs(x.value()) : kInf;
    // |f|_k = 1/|f - y_k| with |f| huge, so -log|f| up to O(|y_k|/|f|)
    return la ? -map.log_abs(x.value()) : -kLogOmega;
  }

  // image collapsed onto finite puncture y_m
  cplx ym = S.finite_puncture(m);
  if (ym == cplx(0.0, 0.0) && la) {
    double lf = map.log_abs(x.value());  // log|f|, typically very negative
    if (k == 0) return lf;
    cplx yk = S.finite_puncture(k);
    if (yk == cplx(0.0, 0.0)) return -lf;
    return -std::log(std::abs(yk));  // |f - y_k| ~= |y_k|
  }
  if (k != m) {
    if (k == 0) return std::log(std::abs(ym));
    return -std::log(std::abs(ym - S.finite_puncture(k)));
  }
  return std::nullopt;  // artifact exactly at the chart puncture, no log route
}

ModulusEstimate estimate_M(const CompiledMap& map, int j, int k, double r,
                           int n_samples, int refine_iters) {
  const PunctureSet& S = map.punctures();
  S.require_chart(j);
  S.require_chart(k);
  if (!(r > S.rho_S()))
    throw precondition_error("circle radius must exceed rho_S");
  if (n_samples < 64) throw precondition_error("need at least 64 samples");
  if (refine_iters < 0) throw precondition_error("negative refinement count");

  double best = -kInf;
  double best_theta = 0.0;
  SpherePoint best_x = SpherePoint::infinity();
  size_t artifacts = 0;

  auto probe = [&](double theta) {
    SpherePoint x = circle_point(S, j, r, theta);
    std::optional<double> v = log_image_modulus(map, x, k);
    if (!v) {
      ++artifacts;
      return -kInf;
    }
    if (*v > best) {
      best = *v;
      best_theta = theta;
      best_x = x;
    }
    return *v;
  };

  for (int i = 0; i < n_samples; ++i)
    probe(kTwoPi * vdc2(static_cast<uint32_t>(i)));

  if (best == -kInf && artifacts == static_cast<size_t>(n_samples))
    throw estimation_error("every circle sample hit the puncture artifact");

  // local golden-section refinement around the running argmax
  double delta = kTwoPi / n_samples;
  double a = best_theta - delta, b = best_theta + delta;
  constexpr double invphi = 0.61803398874989484820;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = probe(c);
  double fd = probe(d);
  for (int i = 0; i + 2 < refine_iters; ++i) {
    if (fc > fd) {
      b = d; d = c; fd = fc;
      c = b - invphi * (b - a);
      fc = probe(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + invphi * (b - a);
      fd = probe(d);
    }
  }

  return ModulusEstimate{best, best_x, n_samples, refine_iters};
}

const char* truncation_reason_name(TruncationReason r) {
  switch (r) {
    case TruncationReason::range_exhausted: return "range_exhausted";
    case TruncationReason::not_increasing: return "not_increasing";
    case TruncationReason::estimation_failure: return "estimation_failure";
  }
  return "?";
}

MaxModSequence mm_sequence(const CompiledMap& map,
                           const std::vector<int>& e_prefix, double R,
                           size_t depth, int n_samples, int refine_iters) {
  if (e_prefix.size() < depth + 1)
    throw precondition_error("itinerary prefix shorter than depth + 1");
  for (int s : e_prefix) map.punctures().require_chart(s);
  if (!(R > map.punctures().rho_S()))
    throw precondition_error("start value must exceed rho_S");

  MaxModSequence seq;
  seq.itinerary_prefix.assign(e_prefix.begin(),
                              e_prefix.begin() + static_cast<long>(depth + 1));
  seq.start_log = std::log(R);
  seq.values_log.push_back(seq.start_log);

  for (size_t n = 1; n <= depth; ++n) {
    double prev = seq.values_log.back();
    if (prev > kLogOmega) {
      seq.truncated_at = {n, TruncationReason::range_exhausted};
      break;
    }
    double radius = std::exp(prev);
    if (!(radius > map.punctures().rho_S()) || !std::isfinite(radius)) {
      seq.truncated_at = {n, TruncationReason::range_exhausted};
      break;
    }
    double ln;
    try {
      ln = estimate_M(map, e_prefix[n - 1], e_prefix[n], radius, n_samples,
                      refine_iters)
               .value_log;
    } catch (const estimation_error&) {
      seq.truncated_at = {n, TruncationReason::estimation_failure};
      break;
    }
    seq.values_log.push_back(ln);
    if (!(ln > prev)) {
      seq.truncated_at = {n, TruncationReason::not_increasing};
      break;
    }
  }
  return seq;
}

std::optional<double> estimate_R_f(const CompiledMap& map,
                                   const std::vector<double>& r_grid,
                                   int n_samples, int refine_iters) {
  if (r_grid.empty()) throw precondition_error("empty radius grid");
  const double rho = map.punctures().rho_S();
  for (size_t i = 0; i < r_grid.size(); ++i) {
    if (!(r_grid[i] > rho))
      throw precondition_error("grid radii must exceed rho_S");
    if (i && !(r_grid[i] > r_grid[i - 1]))
      throw precondition_error("grid must be strictly increasing");
  }

  const int nc = map.punctures().chart_count();
  std::vector<bool> ok(r_grid.size(), true);
  for (size_t i = 0; i < r_grid.size(); ++i) {
    double r = r_grid[i];
    double lr = std::log(r);
    for (int j = 0; j < nc && ok[i]; ++j) {
      for (int k = 0; k < nc && ok[i]; ++k) {
        double lm;
        try {
          lm = estimate_M(map, j, k, r, n_samples, refine_iters).value_log;
        } catch (const estimation_error&) {
          ok[i] = false;
          break;
        }
        if (!(lm > 2.0 * lr) || !(lm / lr >= std::exp(1.0))) ok[i] = false;
      }
    }
  }
  // smallest rho with every grid radius from it onward qualifying
  for (size_t i = 0; i < ok.size(); ++i) {
    bool all = true;
    for (size_t t = i; t < ok.size(); ++t)
      if (!ok[t]) { all = false; break; }
    if (all) return r_grid[i];
  }
  return std::nullopt;
}

GrowthEstimate estimate_growth_B(const CompiledMap& map, int j, int k,
                                 const std::vector<double>& radii,
                                 int n_samples, int refine_iters) {
  if (radii.size() < 4)
    throw precondition_error("growth fit needs at least 4 radii");
  for (size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1]))
      throw precondition_error("radii must be strictly increasing");

  std::vector<double> lm(radii.size());
  for (size_t i = 0; i < radii.size(); ++i) {
    lm[i] = estimate_M(map, j, k, radii[i], n_samples, refine_iters).value_log;
    if (!(lm[i] > 0.0))
      throw estimation_error("log M not positive; radii too small for fit");
  }

  double b_min = kInf, sum_qd = 0.0, sum_dd = 0.0, alpha = kInf;
  std::vector<double> qs, ds;
  for (size_t i = 0; i + 1 < radii.size(); ++i) {
    double q = std::log(lm[i + 1] / lm[i]);
    double d = std::log(radii[i + 1] / radii[i]);
    qs.push_back(q);
    ds.push_back(d);
    b_min = std::min(b_min, q / d);
    alpha = std::min(alpha, radii[i + 1] / radii[i]);
    sum_qd += q * d;
    sum_dd += d * d;
  }
  double b_ls = sum_qd / sum_dd;
  double rss = 0.0;
  for (size_t i = 0; i < qs.size(); ++i) {
    double e = qs[i] - b_ls * ds[i];
    rss += e * e;
  }
  return GrowthEstimate{b_min, alpha, radii.front(),
                        std::sqrt(rss / static_cast<double>(qs.size()))};
}

double iterated_exp(int n) {
  if (n < 1 || n > 4)
    throw precondition_error("iterated exponential defined for 1 <= n <= 4");
  double e = 1.0;
  for (int i = 2; i <= n; ++i) e = std::exp(e);
  return e;
}

}  // namespace pdyn
