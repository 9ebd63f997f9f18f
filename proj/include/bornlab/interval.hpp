#ifndef BORNLAB_INTERVAL_HPP
#define BORNLAB_INTERVAL_HPP

#include <cmath>
#include <string>

#include "bornlab/errors.hpp"

namespace bornlab {

/// Closed interval on the detector axis (mm) or on a centered moment axis.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double width() const { return hi - lo; }
  double midpoint() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return x >= lo && x <= hi; }
  bool contains(const Interval& other) const { return other.lo >= lo && other.hi <= hi; }

  void validate() const {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
      throw InvalidInterval("interval [" + std::to_string(lo) + ", " + std::to_string(hi) +
                            "] must be finite with lo < hi");
    }
  }

  friend bool operator==(const Interval&, const Interval&) = default;
};

inline Interval make_interval(double lo, double hi) {
  Interval iv{lo, hi};
  iv.validate();
  return iv;
}

}  // namespace bornlab

#endif  // BORNLAB_INTERVAL_HPP
