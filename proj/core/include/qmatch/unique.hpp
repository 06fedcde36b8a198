#pragma once

#include "qmatch/cdf.hpp"
#include "qmatch/experiment.hpp"

namespace qmatch {

/// Interpolates an implementable target along the prior over the dyadic
/// partition of level n. Requires a prior with positive density; the
/// implementability of the interpolant is asserted at runtime.
DyadicRefinement dyadic_refine(const Cdf& target, const Cdf& prior, double q, int level);

/// The perturbed matching experiment over labels x with weight density
/// (1-e) h_n(x) + e against F; every posterior has the singleton quantile set
/// {x} and the identity selection pushes forward to (1-e) H_n + e F.
ParametricExperiment unique_experiment(const Cdf& target, const Cdf& prior, double q, double e,
                                       int level);

struct UniquenessVerdict {
  bool unique;
  double max_width;
  double worst_label;
  explicit operator bool() const { return unique; }
};

/// Checks that the quantile set is a singleton (width below kTol) at every
/// enumerated entry / sampled label; for parametric experiments the sample
/// grid is refined at the dyadic partition points and cell midpoints.
UniquenessVerdict verify_unique(const Experiment& exp, double q, int grid);

}  // namespace qmatch
