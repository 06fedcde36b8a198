#pragma once

#include <cmath>
#include <stdexcept>

namespace qmatch {

/// Absolute tolerance for invariant checks and knot deduplication.
inline constexpr double kTol = 1e-12;

inline bool approx_eq(double a, double b, double tol = kTol) {
  return std::fabs(a - b) <= tol;
}

/// Compact state interval [lo, hi].
struct Domain {
  double lo;
  double hi;

  Domain(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(std::isfinite(lo) && std::isfinite(hi)) || !(lo < hi)) {
      throw std::invalid_argument("Domain requires finite lo < hi");
    }
  }

  double width() const { return hi - lo; }
  bool contains(double x, double tol = kTol) const {
    return x >= lo - tol && x <= hi + tol;
  }
  double clamp(double x) const { return x < lo ? lo : (x > hi ? hi : x); }
  bool operator==(const Domain& o) const {
    return approx_eq(lo, o.lo) && approx_eq(hi, o.hi);
  }
};

enum class Side { left, right };

/// Closed interval of q-quantiles of a posterior.
struct QuantileInterval {
  double lo;
  double hi;
  double width() const { return hi - lo; }
  bool singleton(double tol = kTol) const { return width() <= tol; }
  bool contains(double x, double tol = kTol) const {
    return x >= lo - tol && x <= hi + tol;
  }
};

}  // namespace qmatch
