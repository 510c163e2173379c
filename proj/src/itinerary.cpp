#include "pdyn/itinerary.hpp"

#include <cctype>
#include <numeric>

namespace pdyn {

ItineraryPattern parse_itinerary(const std::string& text) {
  ItineraryPattern e;
  size_t i = 0;
  auto digits_into = [&](std::vector<int>& out, char stop) {
    while (i < text.size() && text[i] != stop) {
      char c = text[i];
      if (!std::isdigit(static_cast<unsigned char>(c)))
        throw precondition_error("itinerary symbols must be decimal digits: " + text);
      out.push_back(c - '0');
      ++i;
    }
  };
  digits_into(e.prefix, '(');
  if (i >= text.size())
    throw precondition_error("itinerary needs a (cycle)* part: " + text);
  ++i;  // '('
  digits_into(e.cycle, ')');
  if (i >= text.size() || text[i] != ')')
    throw precondition_error("unterminated itinerary cycle: " + text);
  ++i;
  if (i >= text.size() || text[i] != '*')
    throw precondition_error("itinerary cycle must end with '*': " + text);
  ++i;
  if (i != text.size())
    throw precondition_error("trailing characters in itinerary: " + text);
  if (e.cycle.empty())
    throw precondition_error("itinerary cycle must be non-empty: " + text);
  return e;
}

std::string format_itinerary(const ItineraryPattern& e) {
  std::string s;
  for (int v : e.prefix) s += static_cast<char>('0' + v);
  s += '(';
  for (int v : e.cycle) s += static_cast<char>('0' + v);
  s += ")*";
  return s;
}

ItineraryPattern downsample_itinerary(const ItineraryPattern& e, int p) {
  if (p < 1) throw precondition_error("downsample step must be positive");
  size_t P = e.prefix.size();
  size_t q = e.cycle.size();
  size_t n0 = (P + static_cast<size_t>(p) - 1) / static_cast<size_t>(p);
  size_t qq = q / std::gcd(q, static_cast<size_t>(p));
  ItineraryPattern out;
  for (size_t n = 0; n < n0; ++n) out.prefix.push_back(e.symbol(n * p));
  for (size_t i = 0; i < qq; ++i) out.cycle.push_back(e.symbol((n0 + i) * p));
  return out;
}

ItineraryPattern shift_itinerary(const ItineraryPattern& e, size_t k) {
  ItineraryPattern out;
  if (k < e.prefix.size()) {
    out.prefix.assign(e.prefix.begin() + static_cast<long>(k), e.prefix.end());
    out.cycle = e.cycle;
  } else {
    size_t r = (k - e.prefix.size()) % e.cycle.size();
    out.cycle.assign(e.cycle.begin() + static_cast<long>(r), e.cycle.end());
    out.cycle.insert(out.cycle.end(), e.cycle.begin(),
                     e.cycle.begin() + static_cast<long>(r));
  }
  return out;
}

}  // namespace pdyn
