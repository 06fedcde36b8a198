#pragma once

#include <vector>

#include "qmatch/cdf.hpp"
#include "qmatch/experiment.hpp"
#include "qmatch/objective.hpp"
#include "qmatch/optimize.hpp"

namespace qmatch {

enum class DistrictingMode { partisan, bipartisan, nonpartisan };

/// Voter type distribution and the aggregate-shock distribution; districts
/// are decided by their median voter (q = 1/2 throughout).
struct ElectoralModel {
  Cdf voters;
  Cdf shock;
};

/// Designer utility for a district with median x: the win probability R(x)
/// (partisan), the stronger party's max{R, 1-R} (bipartisan), or the weaker
/// party's min{R, 1-R} (non-partisan), as an exact piecewise-linear
/// objective on the voter domain.
Objective objective_from_mode(const Cdf& shock, DistrictingMode mode, const Domain& voter_domain);

struct DistrictPlan {
  DistrictingMode mode;
  Objective objective;
  Cdf h_star;
  double expected_seat_share;
  ParametricExperiment experiment;
  Selection selection;
};

/// Optimal districting: maximizes the mode's objective over implementable
/// distributions of district medians and attaches the positively-assortative
/// matching plan implementing it.
DistrictPlan district_plan(const ElectoralModel& model, DistrictingMode mode);

/// Expected seat share at each shock value: share(rho) = 1 - H(rho^-).
std::vector<std::pair<double, double>> seat_share_curve(const Cdf& h, int grid);

}  // namespace qmatch
