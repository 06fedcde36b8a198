#pragma once

#include <utility>
#include <vector>

#include "qmatch/domain.hpp"

namespace qmatch {

/// One support point of a piecewise-linear CDF. `left` is the left limit
/// D(x^-), `right` the value D(x); right > left encodes an atom of that mass.
struct Knot {
  double x;
  double left;
  double right;
  double jump() const { return right - left; }
};

/// A cumulative distribution function on a compact interval, represented as
/// sorted knots with linear interpolation between them: constant at
/// knots[0].left before the first knot, D(x) = right_i at knot i, linear from
/// right_i to left_{i+1} in between, and constant at knots.back().right after
/// the last knot. The representation is normalized at construction: knots
/// closer than kTol merge, a knot at domain.lo has its left value forced to 0
/// (the convention D(lo^-) = 0), and redundant collinear or flat leading and
/// trailing knots are dropped, so equal functions have equal knot lists.
class Cdf {
 public:
  Cdf(Domain domain, std::vector<Knot> knots);

  static Cdf uniform(Domain domain);
  static Cdf dirac(Domain domain, double at);
  /// Atoms as (value, mass) pairs; masses must be positive and sum to 1.
  static Cdf from_atoms(Domain domain, std::vector<std::pair<double, double>> atoms);
  /// Continuous piecewise-linear CDF through (x, value) points.
  static Cdf from_points(Domain domain, std::vector<std::pair<double, double>> points);

  const Domain& domain() const { return domain_; }
  const std::vector<Knot>& knots() const { return knots_; }

  /// D(x); x must lie in the domain (within kTol).
  double value(double x) const;
  /// D(x^-), with the convention D(domain.lo^-) = 0.
  double left_limit(double x) const;
  double operator()(double x) const { return value(x); }

  bool is_atomic(double tol = kTol) const;
  bool is_continuous(double tol = kTol) const;
  /// Continuous with strictly positive density on the whole domain.
  bool has_positive_density(double tol = kTol) const;
  /// Jump list as (position, mass) pairs.
  std::vector<std::pair<double, double>> atoms(double tol = kTol) const;

 private:
  Domain domain_;
  std::vector<Knot> knots_;
};

double cdf_eval(const Cdf& d, double x, Side side);

/// Smallest p-quantile: inf{x : D(x) >= p}; p = 0 returns domain.lo.
double gen_inverse(const Cdf& d, double p);

/// Largest x with D(x^-) <= p; the top end of the p-level set.
double upper_inverse(const Cdf& d, double p);

/// X(D) = {x : D(x^-) <= q <= D(x)} for q in (0,1); a nonempty closed interval.
QuantileInterval quantile_interval(const Cdf& d, double q);

/// Pointwise convex combination; weights must be nonnegative and sum to 1
/// (within kTol) and all parts must share one domain.
Cdf mix(const std::vector<std::pair<double, Cdf>>& parts);

/// sup_x |a(x) - b(x)|, evaluating both right values and left limits.
double ks_distance(const Cdf& a, const Cdf& b);

/// Equality of the normalized knot representations within tol, the working
/// notion of "exactly on knots" (positions can carry rounding-level jitter
/// that a sup-norm at a jump would amplify to the jump height).
bool knot_equal(const Cdf& a, const Cdf& b, double tol = kTol);

/// Finite-support distribution: sorted (value, mass) atoms summing to 1.
struct AtomicDist {
  Domain domain;
  std::vector<std::pair<double, double>> atoms;

  AtomicDist(Domain d, std::vector<std::pair<double, double>> a);
  Cdf to_cdf() const;
  QuantileInterval quantile_interval(double q) const;
  /// Value at x; steps at atoms.
  double value(double x) const;
};

}  // namespace qmatch
