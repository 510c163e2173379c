#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pdyn/itinerary.hpp"
#include "pdyn/orbit.hpp"
#include "pdyn/raster.hpp"

namespace pdyn {

/// Raised for malformed configuration input (usage-level failures).
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Run configuration parsed from `[section]` / `key = value` text with `#`
/// comments. Overrides use the dotted `section.key` form.
struct RunConfig {
  // [map]
  std::string map_text = "exp(z+1/z)";
  std::vector<cplx> punctures{cplx(0.0, 0.0)};

  // [window]
  ViewWindow window;

  // [classify]
  ClassifyParams classify;

  // [itineraries]  (name -> pattern, insertion-ordered)
  std::vector<std::pair<std::string, ItineraryPattern>> itineraries;

  // [modulus]
  std::vector<double> r_grid;        // default 3..50 step 1 above rho_S
  std::vector<double> growth_radii{4.0, 8.0, 16.0, 32.0};

  // [mmseq]
  ItineraryPattern mmseq_e{{}, {0}};
  double mmseq_R = 3.0;
  size_t mmseq_depth = 2;

  // [verify]
  std::vector<std::string> checks{"mmseq_growth", "en_separation",
                                  "second_iterate_blowup",
                                  "boundary_identities",
                                  "invariance_and_uniqueness"};
  double en_R = 10.0;
  int en_nmax = 2;
  double boundary_tol_px = 4.0;
  int boundary_power = 2;
  int invariance_points = 1000;

  // [output]
  std::string out_directory = ".";
  std::string out_stem = "render";
  std::vector<std::string> out_formats{"ppm", "grid", "meta"};
  int supersample = 1;

  // [run]
  int threads = 0;  // 0 = auto
  uint64_t seed = 7;

  /// Effective worker count.
  int resolved_threads() const;

  /// Cross-field validation of everything the wrapped modules require.
  void validate() const;

  /// Normalized `[section] key = value` dump (excludes [run]; thread count
  /// and seed never influence raster artifacts).
  std::string normalized(bool include_run = false) const;

  const ItineraryPattern* find_itinerary(const std::string& name) const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config_file(const std::string& path);

/// Applies one dotted override, e.g. ("window.cols", "256").
void apply_override(RunConfig& cfg, const std::string& dotted_key,
                    const std::string& value);

/// Complex literal via the expression grammar (must not reference z).
cplx parse_complex_literal(const std::string& text);

std::string format_complex(const cplx& v);

}  // namespace pdyn
