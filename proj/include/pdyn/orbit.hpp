#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "pdyn/modulus.hpp"

namespace pdyn {

enum class OrbitTermination { completed, overflow, underflow_artifact };

/// Forward orbit x, f(x), ..., with every point's chart moduli recorded in
/// log domain. When iteration dies at the magnitude cap (or collapses onto
/// a puncture through exp underflow) the artifact point is recorded and the
/// terminal row is refined through the log-magnitude transform where
/// available, so comparisons can keep using honest numbers past the cap.
struct OrbitRecord {
  std::vector<SpherePoint> points;
  std::vector<std::vector<double>> log_moduli;  // [step][chart]
  OrbitTermination termination = OrbitTermination::completed;
  size_t terminal_step = 0;  // application index that produced the artifact
  int terminal_symbol = -1;  // chart the orbit left range toward

  bool terminated_early() const {
    return termination != OrbitTermination::completed;
  }
};

OrbitRecord iterate_orbit(const CompiledMap& map, const SpherePoint& x,
                          size_t max_steps);

/// Per-step dominant symbol at the given threshold (>= rho_S). The infinity
/// tag resolves to symbol 0 and a puncture collapse to that puncture's
/// symbol, both through their recorded modulus rows.
std::vector<std::optional<int>> extract_itinerary(const OrbitRecord& orbit,
                                                  const PunctureSet& S,
                                                  double threshold);

enum class LevelSetStatus { yes, no, undecided };

struct LevelSetVerdict {
  LevelSetStatus status;
  size_t detail = 0;  // yes: certified depth; no: first failing n
  std::string note;   // undecided reason
};

/// Checks |f^(l+n)(x)|_{e_n} >= R_n for n = 0..depth against the maximum
/// modulus sequence for e starting at R. Once both the orbit modulus and
/// R_n leave the representable range at the same chart symbol the remaining
/// comparisons are deemed satisfied (dominant-escape convention); a
/// representable value on exactly one side still decides honestly.
LevelSetVerdict level_set_member(const CompiledMap& map, const SpherePoint& x,
                                 const std::vector<int>& e_prefix, size_t l,
                                 double R, size_t depth);

/// Orbit-reusing form; the orbit must start at the tested point.
LevelSetVerdict level_set_member_on(const OrbitRecord& orbit,
                                    const MaxModSequence& seq,
                                    const std::vector<int>& e_prefix, size_t l,
                                    size_t depth);

struct ClassifyParams {
  double R_start = 3.0;          // > escape-threshold surrogate
  size_t max_depth = 48;
  double bounded_threshold = 2.5;  // >= rho_S, < R_start
  size_t max_offset = 8;
};

enum class Fate : uint8_t { fast_escaping = 1, bounded = 2, undecided = 3 };

enum class UndecidedReason : uint8_t {
  none = 0,
  no_symbol = 1,        // no chart modulus reached R_start within max_offset
  rejected = 2,         // every offset's level-set comparison failed
  orbit_exhausted = 3,  // verdict needs more orbit than representable
};

const char* fate_name(Fate f);
const char* undecided_reason_name(UndecidedReason r);

struct Classification {
  Fate fate = Fate::undecided;
  std::vector<int> itinerary;  // fast: symbols from the offset onward
  size_t offset = 0;
  size_t certified_depth = 0;
  double bound = 0.0;  // bounded: observed orbit bound (linear)
  UndecidedReason reason = UndecidedReason::none;
};

/// Deterministic point classifier with a shared modulus-sequence cache.
/// Distinct points may be classified concurrently.
class Classifier {
 public:
  Classifier(const CompiledMap& map, ClassifyParams params);

  const ClassifyParams& params() const { return params_; }
  const CompiledMap& map() const { return map_; }

  Classification classify(const SpherePoint& x) const;

  /// Sequence for an itinerary prefix starting at R_start, memoized.
  std::shared_ptr<const MaxModSequence> sequence_for(
      const std::vector<int>& e_prefix, size_t depth) const;

 private:
  const CompiledMap& map_;
  ClassifyParams params_;
  mutable std::mutex mu_;
  mutable std::map<std::vector<int>, std::shared_ptr<const MaxModSequence>> cache_;
};

/// One-shot wrapper over Classifier.
Classification classify(const CompiledMap& map, const SpherePoint& x,
                        const ClassifyParams& params);

}  // namespace pdyn
