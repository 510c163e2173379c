#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "pdyn/map.hpp"

namespace pdyn {

/// Raised when a circle estimate finds no usable sample (every evaluation
/// landed on the puncture-underflow artifact).
class estimation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModulusEstimate {
  double value_log;     // log of the largest modulus found
  SpherePoint argmax;   // sample point attaining it
  int samples;
  int refinement_depth;
};

/// log|f(x)|_k as an extended real, routed through the log-magnitude
/// transform when the direct image leaves double range. Absent only when
/// the image collapsed onto a finite puncture y_k with no log route.
std::optional<double> log_image_modulus(const CompiledMap& map,
                                        const SpherePoint& x, int k);

/// Estimate of M_{j,k}(r, f) = max over the circle |x|_j = r of |f(x)|_k.
/// The circle is sampled through chart j at n_samples angles in bit-reversed
/// (nested) order -- at power-of-two counts this covers exactly the
/// equispaced grid -- followed by refine_iters golden-section steps around
/// the running argmax. The estimate is the max over every evaluated point,
/// hence nondecreasing in both n_samples and refine_iters.
ModulusEstimate estimate_M(const CompiledMap& map, int j, int k, double r,
                           int n_samples = 4096, int refine_iters = 30);

enum class TruncationReason { range_exhausted, not_increasing, estimation_failure };

const char* truncation_reason_name(TruncationReason r);

/// Log-domain maximum modulus sequence L_n = log R_n along an itinerary
/// prefix: L_0 = log R, L_n = log M_{e_{n-1}, e_n}(exp(L_{n-1}), f).
struct MaxModSequence {
  std::vector<int> itinerary_prefix;
  double start_log = 0.0;
  std::vector<double> values_log;  // L_0 .. L_m, m <= depth
  std::optional<std::pair<size_t, TruncationReason>> truncated_at;

  bool complete() const { return !truncated_at.has_value(); }
};

/// Builds the sequence to the requested depth, truncating when the next
/// circle radius exceeds the evaluation range, when a step fails to
/// increase strictly, or when estimation fails. Callers are responsible for
/// starting above the escape-threshold surrogate.
MaxModSequence mm_sequence(const CompiledMap& map,
                           const std::vector<int>& e_prefix, double R,
                           size_t depth, int n_samples = 4096,
                           int refine_iters = 30);

/// Numerical surrogate for the escape threshold R(f): the smallest grid
/// value rho such that for every grid r >= rho and every chart pair (j, k),
/// M_{j,k}(r, f) > r^2 and log M / log r >= e. Absent when no grid value
/// qualifies.
std::optional<double> estimate_R_f(const CompiledMap& map,
                                   const std::vector<double>& r_grid,
                                   int n_samples = 1024, int refine_iters = 20);

struct GrowthEstimate {
  double B_hat;         // minimum pairwise slope (conservative lower bound)
  double alpha_hat;     // smallest radius ratio used
  double rho0_hat;      // smallest radius used
  double fit_residual;  // rms residual of the through-origin least squares
};

/// Fits log(log M(r)/log M(s)) against log(r/s) over consecutive radius
/// pairs. Radii must be strictly increasing, at least four, and above the
/// escape-threshold surrogate.
GrowthEstimate estimate_growth_B(const CompiledMap& map, int j, int k,
                                 const std::vector<double>& radii,
                                 int n_samples = 4096, int refine_iters = 30);

/// Iterated exponentials E_1 = 1, E_n = exp(E_{n-1}); defined for
/// 1 <= n <= 4 (E_5 overflows doubles).
double iterated_exp(int n);

}  // namespace pdyn
