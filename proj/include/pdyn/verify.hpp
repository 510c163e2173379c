#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pdyn/raster.hpp"

namespace pdyn {

enum class CheckStatus { pass, fail, skipped };

const char* check_status_name(CheckStatus s);

struct Measure {
  std::string name;
  double value;
};

/// One executable check: the claim under test, its verdict, and every raw
/// measured quantity. Skipped covers violated preconditions and truncation,
/// which are not claim failures.
struct VerificationReport {
  std::string check_name;
  std::string statement;  // the claim, in the library's own notation
  CheckStatus status = CheckStatus::skipped;
  std::string skip_reason;
  std::vector<Measure> measured;
  std::string tolerance;
  std::vector<std::string> exceptions;  // logged exclusions / disagreements

  void add(const std::string& name, double v) { measured.push_back({name, v}); }
};

/// Single-line structured record: check=... status=... measured k=v ...
std::string format_report(const VerificationReport& r);

/// Growth-sequence suite: (a) M_{j,k}(r, f) > r^2 on the grid above the
/// escape-threshold surrogate; (b) strict increase of a depth-4 sequence;
/// (c) termwise dominance when the start value grows by 5%.
VerificationReport verify_mmseq_lemma(const CompiledMap& map,
                                      const std::vector<double>& r_grid);

/// Iterated-exponential separation of the sequences for e and its shift:
/// log(log R_n / log S_{n-1}) >= E_n for n <= n_max, under the precondition
/// R > max{rho0, alpha, exp(2/B)} and log M(R)/log R >= e. Precondition
/// violations and range truncation report as skipped.
VerificationReport verify_En_inequality(const CompiledMap& map,
                                        const ItineraryPattern& e, double R,
                                        int n_max,
                                        const std::vector<double>& growth_radii,
                                        const std::vector<double>& r_grid);

/// Self-contained check on exp(exp(1/z) + z): the second iterate's modulus
/// at real witnesses satisfies loglog|f^2(-r)| >= exp(r/2), with the first
/// image pinned against a frozen 50-digit value.
VerificationReport verify_remark_counterexample();

/// Raster-level boundary identities: the escape-class boundaries for two
/// inequivalent itineraries, and for the p-th iterate with the downsampled
/// itinerary, should coincide within tol_px pixels (Hausdorff).
VerificationReport verify_boundary_identities(
    const CompiledMap& map, const ViewWindow& window, const ItineraryPattern& e1,
    const ItineraryPattern& e2, int p, const ClassifyParams& params,
    double tol_px, int threads);

/// Sampled orbit-level properties: classification commutes with one map
/// application up to a shift of the itinerary, the emitted itinerary is
/// independent of the admissible start value (ratio 1.5), and each point
/// emits exactly one itinerary. Pass at >= 99% agreement, exceptions logged.
VerificationReport verify_invariance_and_disjointness(
    const CompiledMap& map, const ViewWindow& window,
    const ClassifyParams& params, int n_points, uint64_t seed);

}  // namespace pdyn
