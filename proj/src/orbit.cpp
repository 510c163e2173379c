#include "pdyn/orbit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pdyn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> modulus_row(const SpherePoint& p, const PunctureSet& S) {
  std::vector<double> row(static_cast<size_t>(S.chart_count()));
  for (int j = 0; j < S.chart_count(); ++j)
    row[static_cast<size_t>(j)] = log_generalized_modulus(p, j, S);
  return row;
}

// Row for a point that left range toward infinity, refined through the
// log-magnitude transform of the pre-artifact point when possible.
std::vector<double> overflow_row(const CompiledMap& map, const SpherePoint& prev,
                                 const PunctureSet& S) {
  std::vector<double> row(static_cast<size_t>(S.chart_count()), -kInf);
  double la = kInf;
  if (map.has_log_abs() && prev.is_finite()) la = map.log_abs(prev.value());
  row[0] = la;
  for (int j = 1; j < S.chart_count(); ++j)
    row[static_cast<size_t>(j)] = std::isinf(la) ? -kInf : -la;
  return row;
}

// Row for a point that collapsed exactly onto finite puncture y_m.
std::vector<double> collapse_row(const CompiledMap& map, const SpherePoint& prev,
                                 int m, const PunctureSet& S) {
  std::vector<double> row(static_cast<size_t>(S.chart_count()));
  cplx ym = S.finite_puncture(m);
  bool la_ok = map.has_log_abs() && prev.is_finite() && ym == cplx(0.0, 0.0);
  double lf = la_ok ? map.log_abs(prev.value()) : -kInf;  // log|f|, very negative
  for (int k = 0; k < S.chart_count(); ++k) {
    size_t ki = static_cast<size_t>(k);
    if (k == m) {
      row[ki] = la_ok ? -lf : kInf;
    } else if (k == 0) {
      row[ki] = la_ok ? lf : std::log(std::abs(ym));
    } else {
      row[ki] = -std::log(std::abs(ym - S.finite_puncture(k)));
    }
  }
  return row;
}

}  // namespace

OrbitRecord iterate_orbit(const CompiledMap& map, const SpherePoint& x,
                          size_t max_steps) {
  const PunctureSet& S = map.punctures();
  if (S.is_puncture(x))
    throw precondition_error("orbit start lies in the puncture set");

  OrbitRecord orbit;
  orbit.points.push_back(x);
  orbit.log_moduli.push_back(modulus_row(x, S));

  for (size_t step = 0; step < max_steps; ++step) {
    const SpherePoint& cur = orbit.points.back();
    EvalResult r = map.eval(cur);
    if (r.value.is_infinity()) {
      orbit.points.push_back(r.value);
      orbit.log_moduli.push_back(overflow_row(map, cur, S));
      orbit.termination = OrbitTermination::overflow;
      orbit.terminal_step = step;
      orbit.terminal_symbol = 0;
      return orbit;
    }
    int m = -1;
    if (S.is_puncture(r.value, &m)) {
      orbit.points.push_back(r.value);
      orbit.log_moduli.push_back(collapse_row(map, cur, m, S));
      orbit.termination = OrbitTermination::underflow_artifact;
      orbit.terminal_step = step;
      orbit.terminal_symbol = m;
      return orbit;
    }
    orbit.points.push_back(r.value);
    orbit.log_moduli.push_back(modulus_row(r.value, S));
  }
  orbit.termination = OrbitTermination::completed;
  return orbit;
}

std::vector<std::optional<int>> extract_itinerary(const OrbitRecord& orbit,
                                                  const PunctureSet& S,
                                                  double threshold) {
  if (!(threshold >= S.rho_S()))
    throw precondition_error("itinerary threshold below rho_S");
  double lt = std::log(threshold);
  std::vector<std::optional<int>> result;
  result.reserve(orbit.log_moduli.size());
  for (const auto& row : orbit.log_moduli)
    result.push_back(dominant_symbol_log(row, lt));
  return result;
}

LevelSetVerdict level_set_member_on(const OrbitRecord& orbit,
                                    const MaxModSequence& seq,
                                    const std::vector<int>& e_prefix, size_t l,
                                    size_t depth) {
  if (e_prefix.size() < depth + 1)
    throw precondition_error("itinerary prefix shorter than depth + 1");

  bool orbit_beyond = orbit.terminated_early();
  size_t steps_have = orbit.points.size();

  for (size_t n = 0; n <= depth; ++n) {
    int sym = e_prefix[n];
    size_t step = l + n;
    bool orb_has = step < steps_have;
    bool seq_has = n < seq.values_log.size();

    if (seq_has && orb_has) {
      double a = orbit.log_moduli[step][static_cast<size_t>(sym)];
      double b = seq.values_log[n];
      if (a >= b) continue;
      return {LevelSetStatus::no, n, {}};
    }

    if (!seq_has) {
      TruncationReason why = seq.truncated_at->second;
      if (why != TruncationReason::range_exhausted)
        return {LevelSetStatus::undecided, n,
                std::string("sequence truncated: ") + truncation_reason_name(why)};
      // R_n certainly beyond the magnitude cap here
      if (orb_has) {
        double a = orbit.log_moduli[step][static_cast<size_t>(sym)];
        if (a > kLogOmega) continue;  // both beyond range at this symbol
        return {LevelSetStatus::no, n, {}};
      }
      if (orbit_beyond && orbit.terminal_symbol == sym) continue;
      return {LevelSetStatus::undecided, n, "orbit exhausted before verdict"};
    }

    // sequence value available but orbit ran out
    if (orbit_beyond && orbit.terminal_symbol == sym &&
        seq.values_log[n] > kLogOmega)
      continue;
    return {LevelSetStatus::undecided, n, "orbit exhausted before verdict"};
  }
  return {LevelSetStatus::yes, depth, {}};
}

LevelSetVerdict level_set_member(const CompiledMap& map, const SpherePoint& x,
                                 const std::vector<int>& e_prefix, size_t l,
                                 double R, size_t depth) {
  OrbitRecord orbit = iterate_orbit(map, x, l + depth + 1);
  MaxModSequence seq = mm_sequence(map, e_prefix, R, depth);
  return level_set_member_on(orbit, seq, e_prefix, l, depth);
}

const char* fate_name(Fate f) {
  switch (f) {
    case Fate::fast_escaping: return "FastEscapingCandidate";
    case Fate::bounded: return "BoundedCandidate";
    case Fate::undecided: return "Undecided";
  }
  return "?";
}

const char* undecided_reason_name(UndecidedReason r) {
  switch (r) {
    case UndecidedReason::none: return "none";
    case UndecidedReason::no_symbol: return "no_symbol_within_offset";
    case UndecidedReason::rejected: return "level_set_rejected";
    case UndecidedReason::orbit_exhausted: return "orbit_exhausted";
  }
  return "?";
}

Classifier::Classifier(const CompiledMap& map, ClassifyParams params)
    : map_(map), params_(params) {
  const double rho = map.punctures().rho_S();
  if (!(params_.bounded_threshold >= rho))
    throw precondition_error("bounded_threshold below rho_S");
  if (!(params_.R_start > params_.bounded_threshold))
    throw precondition_error("R_start must exceed bounded_threshold");
  if (params_.max_depth == 0)
    throw precondition_error("max_depth must be positive");
}

std::shared_ptr<const MaxModSequence> Classifier::sequence_for(
    const std::vector<int>& e_prefix, size_t depth) const {
  // Sequences starting above the escape surrogate leave double range within
  // a dozen steps, so a capped computation serves any comparison depth; a
  // complete (uncapped-by-range) sequence falls back to the full depth.
  constexpr size_t kCap = 16;
  size_t want = std::min(depth, kCap);
  std::vector<int> key(e_prefix.begin(),
                       e_prefix.begin() + static_cast<long>(want + 1));
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  auto seq = std::make_shared<MaxModSequence>(
      mm_sequence(map_, key, params_.R_start, want));
  if (seq->complete() && want < depth) {
    seq = std::make_shared<MaxModSequence>(
        mm_sequence(map_, e_prefix, params_.R_start, depth));
  }
  std::lock_guard<std::mutex> lock(mu_);
  auto [it, inserted] = cache_.emplace(std::move(key), std::move(seq));
  return it->second;
}

Classification Classifier::classify(const SpherePoint& x) const {
  const PunctureSet& S = map_.punctures();
  if (S.is_puncture(x))
    throw precondition_error("classification point lies in the puncture set");

  OrbitRecord orbit = iterate_orbit(map_, x, params_.max_depth);

  // bounded: every chart modulus at every step stays under the threshold
  if (!orbit.terminated_early()) {
    double lt = std::log(params_.bounded_threshold);
    double worst = -kInf;
    for (const auto& row : orbit.log_moduli)
      for (double v : row) worst = std::max(worst, v);
    if (worst < lt) {
      Classification c;
      c.fate = Fate::bounded;
      c.bound = std::exp(worst);
      return c;
    }
  }

  double lR = std::log(params_.R_start);
  size_t offset_limit = std::min(params_.max_offset, orbit.points.size() - 1);
  bool any_symbol = false;
  bool any_undecided = false;

  for (size_t m = 0; m <= offset_limit; ++m) {
    auto sym0 = dominant_symbol_log(orbit.log_moduli[m], lR);
    if (!sym0) continue;
    any_symbol = true;
    if (params_.max_depth < m) break;
    size_t depth = params_.max_depth - m;

    // symbols from the offset onward; past the recorded orbit the terminal
    // symbol continues (the orbit left range toward that puncture)
    std::vector<int> e;
    e.reserve(depth + 1);
    for (size_t s = m; s < orbit.points.size() && e.size() < depth + 1; ++s) {
      int best = 0;
      const auto& row = orbit.log_moduli[s];
      for (size_t j = 1; j < row.size(); ++j)
        if (row[j] > row[static_cast<size_t>(best)]) best = static_cast<int>(j);
      e.push_back(best);
    }
    while (e.size() < depth + 1)
      e.push_back(orbit.terminal_symbol >= 0 ? orbit.terminal_symbol : e.back());

    auto seq = sequence_for(e, depth);
    LevelSetVerdict v = level_set_member_on(orbit, *seq, e, m, depth);
    if (v.status == LevelSetStatus::yes) {
      Classification c;
      c.fate = Fate::fast_escaping;
      c.itinerary = std::move(e);
      c.offset = m;
      c.certified_depth = depth;
      return c;
    }
    if (v.status == LevelSetStatus::undecided) any_undecided = true;
  }

  Classification c;
  c.fate = Fate::undecided;
  c.reason = !any_symbol ? UndecidedReason::no_symbol
             : any_undecided ? UndecidedReason::orbit_exhausted
                             : UndecidedReason::rejected;
  return c;
}

Classification classify(const CompiledMap& map, const SpherePoint& x,
                        const ClassifyParams& params) {
  return Classifier(map, params).classify(x);
}

}  // namespace pdyn
