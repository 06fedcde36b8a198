#pragma once

#include <optional>

#include "qmatch/cdf.hpp"
#include "qmatch/experiment.hpp"
#include "qmatch/monotone_path.hpp"
#include "qmatch/objective.hpp"

namespace qmatch {

/// [upper_bound^{-1}(p), lower_bound^{-1}(p)]: the states an implementable
/// distribution's generalized inverse can take at level p.
QuantileInterval feasible_interval(const Cdf& prior, double q, double p);

enum class UniquenessFlag { unique, non_unique };

struct Optimum {
  Cdf h_star;
  double value;
  /// p -> min argmax of V over the feasible interval; h_star's inverse.
  MonotonePath j_star;
  UniquenessFlag uniqueness;
  /// The max-argmax solution when the argmax has positive-measure ties.
  std::optional<Cdf> alternative;
};

/// Maximizes the linear functional H -> integral of V dH over the
/// implementable distributions by an exact event-driven sweep over the level
/// p: between events the window endpoints and the best interior kink are
/// linear/constant in p, so segment integrals are exact. Analytic objective
/// families are sampled to piecewise-linear at kObjectiveRefinement segments.
Optimum optimize_quantile_dist(const Objective& v, const Cdf& prior, double q);

/// Closed form for quasi-concave objectives peaking at x_star: the lower
/// bound below x_star spliced to the upper bound from x_star on.
Cdf solution_quasiconcave(double x_star, const Cdf& prior, double q);

/// Closed form for strictly quasi-convex objectives: the flat-level solution
/// at the root of the endpoint indifference equation, cross-validated against
/// the general optimizer. Boundary roots return the matching extreme bound.
Cdf solution_quasiconvex(const Objective& v, const Cdf& prior, double q);

/// Flat-level family: upper bound below F^{-1}(qp), level p between
/// F^{-1}(qp) and F^{-1}(q + (1-q)p), lower bound after.
Cdf hp_distribution(double p, const Cdf& prior, double q);

/// Integral over labels of the per-label maximum of V on the window between
/// two piecewise-linear position paths; the exact sweep shared by the
/// optimizer and the regret computation. Window endpoints need not be
/// monotone (negative-assortative experiments shrink from both sides).
struct WindowSweepResult {
  double value;
  std::vector<PathPiece> min_arg;
  std::vector<PathPiece> max_arg;
  bool positive_measure_ties;
};
WindowSweepResult sweep_window_max(const std::vector<std::pair<double, double>>& v_points,
                                   const PlPath& window_lo, const PlPath& window_hi);

}  // namespace qmatch
