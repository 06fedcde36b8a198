#include "qmatch/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qmatch {

Objective Objective::piecewise_linear(std::vector<std::pair<double, double>> points) {
  if (points.empty()) throw std::invalid_argument("Objective: no points");
  std::sort(points.begin(), points.end());
  std::vector<std::pair<double, double>> merged;
  for (const auto& p : points) {
    if (!merged.empty() && p.first - merged.back().first <= kTol) continue;
    merged.push_back(p);
  }
  Objective v;
  v.kind_ = Kind::piecewise_linear;
  v.points_ = std::move(merged);
  return v;
}

Objective Objective::quadratic(double center) {
  Objective v;
  v.kind_ = Kind::quadratic;
  v.param_ = center;
  return v;
}

Objective Objective::tent(double peak) {
  Objective v;
  v.kind_ = Kind::tent;
  v.param_ = peak;
  return v;
}

double Objective::eval(double x) const {
  switch (kind_) {
    case Kind::quadratic:
      return (x - param_) * (x - param_);
    case Kind::tent:
      return -std::fabs(x - param_);
    case Kind::piecewise_linear: {
      if (x <= points_.front().first) return points_.front().second;
      if (x >= points_.back().first) return points_.back().second;
      auto it = std::upper_bound(points_.begin(), points_.end(), x,
                                 [](double v, const auto& p) { return v < p.first; });
      const auto& [x1, v1] = *it;
      const auto& [x0, v0] = *(it - 1);
      return v0 + (v1 - v0) * (x - x0) / (x1 - x0);
    }
  }
  return 0.0;
}

double Objective::parameter() const {
  if (kind_ == Kind::piecewise_linear) {
    throw std::logic_error("Objective::parameter: piecewise-linear objective");
  }
  return param_;
}

const std::vector<std::pair<double, double>>& Objective::points() const {
  if (kind_ != Kind::piecewise_linear) {
    throw std::logic_error("Objective::points: not piecewise-linear");
  }
  return points_;
}

std::vector<double> Objective::breakpoints(double lo, double hi) const {
  std::vector<double> out;
  switch (kind_) {
    case Kind::quadratic:
      break;
    case Kind::tent:
      if (param_ > lo && param_ < hi) out.push_back(param_);
      break;
    case Kind::piecewise_linear:
      for (const auto& [x, v] : points_) {
        if (x > lo && x < hi) out.push_back(x);
      }
      break;
  }
  return out;
}

std::vector<std::pair<double, double>> Objective::as_points(const Domain& domain,
                                                            int segments) const {
  switch (kind_) {
    case Kind::quadratic: {
      if (segments < 1) throw std::invalid_argument("as_points: segments must be >= 1");
      std::vector<std::pair<double, double>> pts;
      pts.reserve(segments + 1);
      for (int i = 0; i <= segments; ++i) {
        double x = domain.lo + domain.width() * static_cast<double>(i) / segments;
        pts.emplace_back(x, eval(x));
      }
      return pts;
    }
    case Kind::tent: {
      std::vector<std::pair<double, double>> pts;
      pts.emplace_back(domain.lo, eval(domain.lo));
      if (param_ > domain.lo && param_ < domain.hi) pts.emplace_back(param_, 0.0);
      pts.emplace_back(domain.hi, eval(domain.hi));
      return pts;
    }
    case Kind::piecewise_linear: {
      std::vector<std::pair<double, double>> pts;
      pts.emplace_back(domain.lo, eval(domain.lo));
      for (const auto& p : points_) {
        if (p.first > domain.lo + kTol && p.first < domain.hi - kTol) pts.push_back(p);
      }
      pts.emplace_back(domain.hi, eval(domain.hi));
      return pts;
    }
  }
  return {};
}

ArgmaxResult argmax_interval(const Objective& v, double lo, double hi) {
  if (lo > hi + kTol) throw std::invalid_argument("argmax_interval: lo > hi");
  hi = std::max(hi, lo);
  switch (v.kind()) {
    case Objective::Kind::quadratic: {
      // Convex: the maximum sits at the endpoint farther from the center.
      double vlo = v.eval(lo), vhi = v.eval(hi);
      if (approx_eq(vlo, vhi)) return ArgmaxResult{lo, hi, std::max(vlo, vhi)};
      return vlo > vhi ? ArgmaxResult{lo, lo, vlo} : ArgmaxResult{hi, hi, vhi};
    }
    case Objective::Kind::tent: {
      double c = v.parameter();
      if (c >= lo && c <= hi) return ArgmaxResult{c, c, 0.0};
      double x = c < lo ? lo : hi;
      return ArgmaxResult{x, x, v.eval(x)};
    }
    case Objective::Kind::piecewise_linear: {
      std::vector<double> cands{lo, hi};
      for (double b : v.breakpoints(lo, hi)) cands.push_back(b);
      std::sort(cands.begin(), cands.end());
      double best = -std::numeric_limits<double>::infinity();
      for (double x : cands) best = std::max(best, v.eval(x));
      double min_arg = hi, max_arg = lo;
      for (double x : cands) {
        if (v.eval(x) >= best - kTol) {
          min_arg = std::min(min_arg, x);
          max_arg = std::max(max_arg, x);
        }
      }
      return ArgmaxResult{min_arg, max_arg, best};
    }
  }
  return ArgmaxResult{lo, lo, v.eval(lo)};
}

double stieltjes_integral(const Objective& v, const Cdf& d) {
  long double total = 0.0L;
  const auto& knots = d.knots();
  for (size_t i = 0; i < knots.size(); ++i) {
    const Knot& k = knots[i];
    if (k.jump() > 0.0) total += static_cast<long double>(k.jump()) * v.eval(k.x);
    if (i + 1 == knots.size()) break;
    const Knot& next = knots[i + 1];
    double rise = next.left - k.right;
    if (rise <= 0.0) continue;
    double a = k.x, b = next.x;
    double density = rise / (b - a);
    if (v.kind() == Objective::Kind::quadratic) {
      double c = v.parameter();
      double bc = b - c, ac = a - c;
      total += static_cast<long double>(density) * (bc * bc * bc - ac * ac * ac) / 3.0L;
      continue;
    }
    std::vector<double> cuts{a};
    for (double x : v.breakpoints(a, b)) cuts.push_back(x);
    cuts.push_back(b);
    for (size_t j = 0; j + 1 < cuts.size(); ++j) {
      double s = cuts[j], t = cuts[j + 1];
      total += static_cast<long double>(density) * (v.eval(s) + v.eval(t)) / 2.0L * (t - s);
    }
  }
  return static_cast<double>(total);
}

}  // namespace qmatch
