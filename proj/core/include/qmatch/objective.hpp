#pragma once

#include <utility>
#include <vector>

#include "qmatch/cdf.hpp"
#include "qmatch/domain.hpp"

namespace qmatch {

/// Piecewise-linear sampling resolution for analytic objective families.
/// Chord error for a quadratic is h^2/4, so 2^16 segments keep sampled
/// integrals within ~6e-11 of the exact value.
inline constexpr int kObjectiveRefinement = 1 << 16;

/// A continuous objective on the state interval: explicit piecewise-linear
/// points, the quadratic family (x-c)^2, or the tent family -|x-c|.
/// Piecewise-linear objectives extend as constants beyond their point range.
class Objective {
 public:
  enum class Kind { piecewise_linear, quadratic, tent };

  static Objective piecewise_linear(std::vector<std::pair<double, double>> points);
  static Objective quadratic(double center);
  static Objective tent(double peak);

  Kind kind() const { return kind_; }
  double eval(double x) const;
  double operator()(double x) const { return eval(x); }

  /// Family parameter (center/peak); throws for piecewise_linear.
  double parameter() const;
  /// Defined for piecewise_linear only.
  const std::vector<std::pair<double, double>>& points() const;

  /// Kink locations strictly inside (lo, hi).
  std::vector<double> breakpoints(double lo, double hi) const;

  /// Piecewise-linear representation over the domain; exact for
  /// piecewise_linear and tent, chord-sampled for quadratic.
  std::vector<std::pair<double, double>> as_points(const Domain& domain,
                                                   int segments = kObjectiveRefinement) const;

 private:
  Kind kind_;
  double param_ = 0.0;
  std::vector<std::pair<double, double>> points_;
};

struct ArgmaxResult {
  double min_arg;
  double max_arg;
  double max_value;
};

/// Exact maximization of V over [lo, hi]: for piecewise-linear V the
/// candidates are the endpoints and interior kinks; analytic families use
/// their monotonicity structure.
ArgmaxResult argmax_interval(const Objective& v, double lo, double hi);

/// Exact integral of V dD on the piecewise-linear-with-atoms class.
double stieltjes_integral(const Objective& v, const Cdf& d);

}  // namespace qmatch
