#pragma once

#include <gmpxx.h>

#include <string>

namespace ptk {

/// Exact rational scalar (big-integer numerator/denominator).
using Rat = mpq_class;

inline Rat rat_of(long num, long den = 1) {
  Rat r(num, den);
  r.canonicalize();
  return r;
}

inline double rat_to_double(const Rat& r) { return r.get_d(); }

inline std::string rat_str(const Rat& r) { return r.get_str(); }

/// Exact rational from a double. Doubles are exact binary rationals; when
/// that exact value has a denominator within `max_den` it is returned as-is
/// (covers integers and small dyadics). Otherwise the continued-fraction
/// best approximation with denominator <= max_den is used and *exact is set
/// to false.
Rat rat_from_double(double x, long max_den = 1000000, bool* exact = nullptr);

/// Parses "p/q", integers, and plain decimals ("-1.25").
Rat rat_parse(const std::string& text);

}  // namespace ptk
