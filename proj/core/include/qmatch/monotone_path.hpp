#pragma once

#include <vector>

#include "qmatch/cdf.hpp"
#include "qmatch/domain.hpp"

namespace qmatch {

/// One linear piece of a path u -> x on a u-subinterval [u0, u1].
struct PathPiece {
  double u0;
  double u1;
  double x0;
  double x1;
  double x_at(double u) const {
    if (u <= u0 || u1 <= u0) return x0;
    if (u >= u1) return x1;
    return x0 + (x1 - x0) * (u - u0) / (u1 - u0);
  }
};

/// Piecewise-linear map from [0,1] into a domain; pieces are contiguous in u
/// but the x value may jump between pieces. Not necessarily monotone.
struct PlPath {
  Domain domain;
  std::vector<PathPiece> pieces;

  /// Left-continuous evaluation; u = 0 evaluates the first piece start.
  double eval(double u) const;
  /// Index of the piece whose open interval contains u.
  size_t piece_index(double u) const;
  std::vector<double> breakpoints() const;
};

/// Nondecreasing path: the generalized-inverse of a Cdf, a selection rule, or
/// an optimizer argmax path. Invertible back into a Cdf.
class MonotonePath {
 public:
  /// Validates coverage of [0,1] (gaps below kTol are snapped shut) and
  /// monotonicity of x along the pieces.
  MonotonePath(Domain domain, std::vector<PathPiece> pieces);

  /// Left-continuous evaluation; by convention eval(0) = domain.lo, matching
  /// gen_inverse at p = 0.
  double eval(double u) const;
  double operator()(double u) const { return eval(u); }

  /// Distribution of eval(U) for U uniform on [0,1]; exact inversion.
  Cdf to_cdf() const;

  const Domain& domain() const { return domain_; }
  const std::vector<PathPiece>& pieces() const { return pieces_; }
  PlPath as_pl_path() const { return PlPath{domain_, pieces_}; }

  /// The map p -> gen_inverse(d, p) as an explicit path; to_cdf() inverts it
  /// back to d exactly.
  static MonotonePath quantile_path(const Cdf& d);

  static MonotonePath constant(Domain domain, double x);

 private:
  Domain domain_;
  std::vector<PathPiece> pieces_;
};

/// The path u -> base(a + b*u) restricted to u in [0,1]; a + b*u must stay in
/// [0,1]. For b < 0 the pieces come out reversed (a decreasing path).
PlPath restrict_affine(const MonotonePath& base, double a, double b);

}  // namespace qmatch
