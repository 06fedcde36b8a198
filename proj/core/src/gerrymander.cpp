#include "qmatch/gerrymander.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qmatch {

namespace {

double shock_value(const Cdf& shock, double x) {
  if (x <= shock.domain().lo) return 0.0;
  if (x >= shock.domain().hi) return 1.0;
  return shock.value(x);
}

}  // namespace

Objective objective_from_mode(const Cdf& shock, DistrictingMode mode, const Domain& voter_domain) {
  for (const Knot& k : shock.knots()) {
    if (k.jump() > kTol && k.x >= voter_domain.lo - kTol && k.x <= voter_domain.hi + kTol) {
      throw std::invalid_argument("objective_from_mode: shock must be continuous on the voter domain");
    }
  }
  std::vector<double> xs{voter_domain.lo, voter_domain.hi};
  for (const Knot& k : shock.knots()) {
    if (k.x > voter_domain.lo && k.x < voter_domain.hi) xs.push_back(k.x);
  }
  if (mode != DistrictingMode::partisan) {
    // max/min{R, 1-R} kink where R crosses 1/2.
    double cross = gen_inverse(shock, 0.5);
    if (cross > voter_domain.lo && cross < voter_domain.hi) xs.push_back(cross);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end(), [](double a, double b) { return b - a <= kTol; }),
           xs.end());
  std::vector<std::pair<double, double>> pts;
  pts.reserve(xs.size());
  for (double x : xs) {
    double r = shock_value(shock, x);
    double v = r;
    if (mode == DistrictingMode::bipartisan) v = std::max(r, 1.0 - r);
    if (mode == DistrictingMode::nonpartisan) v = std::min(r, 1.0 - r);
    pts.emplace_back(x, v);
  }
  return Objective::piecewise_linear(std::move(pts));
}

DistrictPlan district_plan(const ElectoralModel& model, DistrictingMode mode) {
  const double q = 0.5;
  const Domain& dom = model.voters.domain();
  Objective v = objective_from_mode(model.shock, mode, dom);
  Optimum opt = optimize_quantile_dist(v, model.voters, q);
  Objective win_prob = objective_from_mode(model.shock, DistrictingMode::partisan, dom);
  double seat_share = stieltjes_integral(win_prob, opt.h_star);

  if (mode == DistrictingMode::partisan) {
    // A strictly increasing win probability forces the highest implementable
    // distribution of medians.
    bool strictly_increasing = true;
    const auto& pts = win_prob.points();
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
      if (pts[i + 1].second - pts[i].second <= kTol) strictly_increasing = false;
    }
    if (strictly_increasing) {
      Cdf lower = quantile_bounds(model.voters, q).first;
      if (ks_distance(opt.h_star, lower) > 1e-9) {
        throw std::logic_error("district_plan: partisan optimum is not the lower bound");
      }
    }
  }

  ParametricExperiment exp = matching_experiment(model.voters, q);
  Selection sel = matching_selection(opt.h_star, model.voters, q);
  return DistrictPlan{mode,          std::move(v), std::move(opt.h_star), seat_share,
                      std::move(exp), std::move(sel)};
}

std::vector<std::pair<double, double>> seat_share_curve(const Cdf& h, int grid) {
  if (grid < 2) throw std::invalid_argument("seat_share_curve: grid must be >= 2");
  std::vector<std::pair<double, double>> out;
  out.reserve(grid);
  const Domain& dom = h.domain();
  for (int i = 0; i < grid; ++i) {
    double rho = dom.lo + dom.width() * static_cast<double>(i) / (grid - 1);
    out.emplace_back(rho, 1.0 - h.left_limit(rho));
  }
  return out;
}

}  // namespace qmatch
