#pragma once

#include <string>
#include <vector>

#include "pdyn/sphere.hpp"

namespace pdyn {

/// Eventually periodic symbol sequence written as prefix(cycle)*, e.g.
/// "(0)*", "01(0)*", "(01)*". Symbols are single decimal digits.
struct ItineraryPattern {
  std::vector<int> prefix;
  std::vector<int> cycle;  // non-empty

  int symbol(size_t n) const {
    if (n < prefix.size()) return prefix[n];
    return cycle[(n - prefix.size()) % cycle.size()];
  }

  /// First `count` symbols.
  std::vector<int> expand(size_t count) const {
    std::vector<int> out;
    out.reserve(count);
    for (size_t i = 0; i < count; ++i) out.push_back(symbol(i));
    return out;
  }
};

ItineraryPattern parse_itinerary(const std::string& text);
std::string format_itinerary(const ItineraryPattern& e);

/// Pattern of every p-th symbol: n -> symbol(n * p).
ItineraryPattern downsample_itinerary(const ItineraryPattern& e, int p);

/// Shift of the sequence by k.
ItineraryPattern shift_itinerary(const ItineraryPattern& e, size_t k);

}  // namespace pdyn
