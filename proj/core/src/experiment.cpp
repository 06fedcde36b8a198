#include "qmatch/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qmatch {

namespace {

// Applies a monotone piecewise-linear value map to a Cdf, inserting knots
// where segments cross the map's kink level.
Cdf transform_values(const Cdf& d, double kink_level, const std::function<double(double)>& phi) {
  std::vector<Knot> knots;
  const auto& src = d.knots();
  for (size_t i = 0; i < src.size(); ++i) {
    const Knot& k = src[i];
    knots.push_back(Knot{k.x, phi(k.left), phi(k.right)});
    if (i + 1 == src.size()) break;
    const Knot& next = src[i + 1];
    if (k.right < kink_level && next.left > kink_level) {
      double t = (kink_level - k.right) / (next.left - k.right);
      double x = k.x + t * (next.x - k.x);
      knots.push_back(Knot{x, phi(kink_level), phi(kink_level)});
    }
  }
  return Cdf(d.domain(), std::move(knots));
}

double right_limit_on(const PlPath& path, double u, double next_u) {
  size_t i = path.piece_index(0.5 * (u + next_u));
  return path.pieces[i].x_at(u);
}

// Checks sel(u) in [lo(u), hi(u)] on all of [0,1]; the three paths are
// piecewise linear, so endpoint limits on merged breakpoints decide.
void validate_selection_path(const PlPath& sel, const PlPath& lo, const PlPath& hi,
                             double tol = 1e-9) {
  std::vector<double> bps;
  for (const PlPath* p : {&sel, &lo, &hi}) {
    auto b = p->breakpoints();
    bps.insert(bps.end(), b.begin(), b.end());
  }
  std::sort(bps.begin(), bps.end());
  bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
  auto fail = [&](double u, double x, double a, double b) {
    std::ostringstream msg;
    msg << "selection leaves the quantile set at label fraction u=" << u << ": " << x
        << " not in [" << a << ", " << b << "]";
    throw std::invalid_argument(msg.str());
  };
  for (size_t i = 0; i < bps.size(); ++i) {
    double u = bps[i];
    double x = sel.eval(u), a = lo.eval(u), b = hi.eval(u);
    if (u > 0.0 && (x < a - tol || x > b + tol)) fail(u, x, a, b);
    if (i + 1 < bps.size()) {
      double nu = bps[i + 1];
      double xr = right_limit_on(sel, u, nu);
      double ar = right_limit_on(lo, u, nu);
      double br = right_limit_on(hi, u, nu);
      if (xr < ar - tol || xr > br + tol) fail(u, xr, ar, br);
    }
  }
}

// Measure of {omega in [0, q] : position(omega) <= theta} for a position map
// that is monotone in the label; the boundary is located by bisection.
double monotone_label_measure(double q, double theta, bool nondecreasing,
                              const std::function<double(double)>& position) {
  auto pred = [&](double w) { return position(w) <= theta; };
  if (nondecreasing) {
    if (!pred(0.0)) return 0.0;
    if (pred(q)) return q;
    double lo = 0.0, hi = q;
    for (int it = 0; it < 80; ++it) {
      double mid = 0.5 * (lo + hi);
      (pred(mid) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
  // Nonincreasing position: the predicate holds on the upper label range.
  if (!pred(q)) return 0.0;
  if (pred(0.0)) return q;
  double lo = 0.0, hi = q;
  for (int it = 0; it < 80; ++it) {
    double mid = 0.5 * (lo + hi);
    (pred(mid) ? hi : lo) = mid;
  }
  return q - 0.5 * (lo + hi);
}

std::vector<double> state_grid(const Cdf& f, int grid_size) {
  std::vector<double> grid;
  const Domain& dom = f.domain();
  for (int i = 0; i < grid_size; ++i) {
    grid.push_back(dom.lo + dom.width() * static_cast<double>(i) / (grid_size - 1));
  }
  for (const Knot& k : f.knots()) grid.push_back(k.x);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

}  // namespace

double DyadicRefinement::density_at(double x) const {
  // Cells are (theta_{i-1}, theta_i]; a boundary point belongs to the cell
  // ending there, and x <= theta_0 to the first cell.
  auto it = std::lower_bound(partition.begin(), partition.end(), x);
  size_t cell = it == partition.begin() ? 0 : static_cast<size_t>(it - partition.begin()) - 1;
  return cell_density[std::min(cell, cell_density.size() - 1)];
}

ParametricExperiment::ParametricExperiment(ExperimentKind kind, Cdf prior, double q)
    : kind_(kind), prior_(std::move(prior)), q_(q) {
  if (q <= 0.0 || q >= 1.0) throw std::invalid_argument("experiment: q must be in (0,1)");
  if (kind == ExperimentKind::unique_impl) {
    throw std::invalid_argument("experiment: unique_impl needs its refinement data");
  }
}

ParametricExperiment::ParametricExperiment(Cdf prior, double q, UniqueImplData data)
    : kind_(ExperimentKind::unique_impl), prior_(std::move(prior)), q_(q), unique_(std::move(data)) {
  if (q <= 0.0 || q >= 1.0) throw std::invalid_argument("experiment: q must be in (0,1)");
  if (unique_->mix_weight <= 0.0 || unique_->mix_weight > 1.0) {
    throw std::invalid_argument("experiment: mix weight e must be in (0,1]");
  }
}

std::pair<double, double> ParametricExperiment::label_range() const {
  if (kind_ == ExperimentKind::unique_impl) {
    return {prior_.domain().lo, prior_.domain().hi};
  }
  return {0.0, q_};
}

AtomicDist ParametricExperiment::posterior_at(double label) const {
  const Domain& dom = prior_.domain();
  if (kind_ == ExperimentKind::unique_impl) {
    const UniqueImplData& u = *unique_;
    double e = u.mix_weight;
    double hn = u.refinement.h_n.value(label);
    double h = u.refinement.density_at(label);
    double denom = (1.0 - e) * h + e;
    double lo_pos = gen_inverse(prior_, q_ * hn);
    double hi_pos = gen_inverse(prior_, q_ + (1.0 - q_) * hn);
    std::vector<std::pair<double, double>> atoms;
    if ((1.0 - e) * h > 0.0) {
      atoms.emplace_back(lo_pos, (1.0 - e) * h * q_ / denom);
      atoms.emplace_back(hi_pos, (1.0 - e) * h * (1.0 - q_) / denom);
    }
    atoms.emplace_back(label, e / denom);
    return AtomicDist(dom, std::move(atoms));
  }
  if (label < -kTol || label > q_ + kTol) {
    throw std::invalid_argument("posterior_at: label outside [0,q]");
  }
  double w = std::clamp(label, 0.0, q_);
  double u = w / q_;
  double lo_pos = gen_inverse(prior_, w);
  double upper_level = kind_ == ExperimentKind::matching ? q_ + (1.0 - q_) * u
                                                         : 1.0 - (1.0 - q_) * u;
  double hi_pos = gen_inverse(prior_, std::clamp(upper_level, 0.0, 1.0));
  return AtomicDist(dom, {{lo_pos, q_}, {hi_pos, 1.0 - q_}});
}

QuantileInterval ParametricExperiment::interval_at(double label) const {
  return posterior_at(label).quantile_interval(q_);
}

PlPath ParametricExperiment::lower_position_path() const {
  if (kind_ == ExperimentKind::unique_impl) {
    throw std::logic_error("position paths are defined for matching/nam only");
  }
  return restrict_affine(MonotonePath::quantile_path(prior_), 0.0, q_);
}

PlPath ParametricExperiment::upper_position_path() const {
  MonotonePath fp = MonotonePath::quantile_path(prior_);
  switch (kind_) {
    case ExperimentKind::matching:
      return restrict_affine(fp, q_, 1.0 - q_);
    case ExperimentKind::nam:
      return restrict_affine(fp, 1.0, -(1.0 - q_));
    case ExperimentKind::unique_impl:
      break;
  }
  throw std::logic_error("position paths are defined for matching/nam only");
}

FiniteExperiment::FiniteExperiment(Cdf prior, double q, std::vector<FiniteEntry> entries,
                                   double source_residual)
    : prior_(std::move(prior)),
      q_(q),
      entries_(std::move(entries)),
      source_residual_(source_residual) {
  if (q <= 0.0 || q >= 1.0) throw std::invalid_argument("FiniteExperiment: q must be in (0,1)");
  if (entries_.empty()) throw std::invalid_argument("FiniteExperiment: no entries");
  double total = 0.0;
  for (const FiniteEntry& e : entries_) {
    if (e.weight <= 0.0) throw std::invalid_argument("FiniteExperiment: weights must be positive");
    total += e.weight;
  }
  if (!approx_eq(total, 1.0, 1e-9)) {
    throw std::invalid_argument("FiniteExperiment: weights must sum to 1");
  }
  // Bayes plausibility (mixture == prior) is a measured property, not a
  // construction gate: bayes_residual reports the mismatch.
}

FiniteExperiment FiniteExperiment::from_entries(Domain domain, double q,
                                                std::vector<FiniteEntry> entries,
                                                double source_residual) {
  std::vector<std::pair<double, double>> mixture;
  for (const FiniteEntry& e : entries) {
    for (const auto& [x, m] : e.posterior.atoms) mixture.emplace_back(x, e.weight * m);
  }
  Cdf prior = Cdf::from_atoms(domain, std::move(mixture));
  return FiniteExperiment(std::move(prior), q, std::move(entries), source_residual);
}

Selection Selection::from_path(MonotonePath path) {
  Selection s;
  s.kind_ = Kind::path;
  s.path_ = std::move(path);
  return s;
}

Selection Selection::constant(double x) {
  Selection s;
  s.kind_ = Kind::constant;
  s.constant_ = x;
  return s;
}

Selection Selection::identity() {
  Selection s;
  s.kind_ = Kind::identity;
  return s;
}

Selection Selection::per_entry(std::vector<double> states) {
  Selection s;
  s.kind_ = Kind::per_entry;
  s.states_ = std::move(states);
  return s;
}

Selection Selection::custom(CustomFn fn) {
  Selection s;
  s.kind_ = Kind::custom;
  s.fn_ = std::move(fn);
  return s;
}

const MonotonePath& Selection::path() const {
  if (!path_) throw std::logic_error("Selection: no path");
  return *path_;
}

std::pair<Cdf, Cdf> quantile_bounds(const Cdf& prior, double q) {
  if (q <= 0.0 || q >= 1.0) throw std::invalid_argument("quantile_bounds: q must be in (0,1)");
  Cdf upper = transform_values(prior, q, [q](double y) { return std::min(y / q, 1.0); });
  Cdf lower = transform_values(prior, q,
                               [q](double y) { return std::max(0.0, (y - q) / (1.0 - q)); });
  return {std::move(lower), std::move(upper)};
}

ImplementabilityVerdict is_implementable(const Cdf& h, const Cdf& prior, double q) {
  if (!(h.domain() == prior.domain())) {
    throw std::invalid_argument("is_implementable: domains differ");
  }
  auto [lower, upper] = quantile_bounds(prior, q);
  std::vector<double> xs;
  for (const Cdf* d : {&h, static_cast<const Cdf*>(&lower), static_cast<const Cdf*>(&upper)}) {
    for (const Knot& k : d->knots()) xs.push_back(k.x);
  }
  xs.push_back(h.domain().lo);
  xs.push_back(h.domain().hi);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  using BoundSide = ImplementabilityVerdict::BoundSide;
  for (double x : xs) {
    for (bool left : {false, true}) {
      double hv = left ? h.left_limit(x) : h.value(x);
      double lv = left ? lower.left_limit(x) : lower.value(x);
      double uv = left ? upper.left_limit(x) : upper.value(x);
      if (hv < lv - kTol) {
        return ImplementabilityVerdict{
            false, ImplementabilityVerdict::Violation{x, BoundSide::below_lower, hv, lv, left}};
      }
      if (hv > uv + kTol) {
        return ImplementabilityVerdict{
            false, ImplementabilityVerdict::Violation{x, BoundSide::above_upper, hv, uv, left}};
      }
    }
  }
  return ImplementabilityVerdict{true, std::nullopt};
}

ParametricExperiment matching_experiment(const Cdf& prior, double q) {
  return ParametricExperiment(ExperimentKind::matching, prior, q);
}

ParametricExperiment nam_experiment(const Cdf& prior, double q) {
  return ParametricExperiment(ExperimentKind::nam, prior, q);
}

Selection matching_selection(const Cdf& h, const Cdf& prior, double q) {
  ImplementabilityVerdict v = is_implementable(h, prior, q);
  if (!v) {
    std::ostringstream msg;
    msg << "matching_selection: target not implementable; at x=" << v.violation->x
        << (v.violation->side == ImplementabilityVerdict::BoundSide::below_lower
                ? " H falls below the lower bound ("
                : " H exceeds the upper bound (")
        << v.violation->value << " vs " << v.violation->bound << ")";
    throw std::invalid_argument(msg.str());
  }
  MonotonePath path = MonotonePath::quantile_path(h);
  ParametricExperiment exp = matching_experiment(prior, q);
  validate_selection_path(path.as_pl_path(), exp.lower_position_path(),
                          exp.upper_position_path());
  return Selection::from_path(std::move(path));
}

namespace {

PushforwardResult pushforward_parametric(const ParametricExperiment& exp, const Selection& sel,
                                         int fallback_grid) {
  switch (sel.kind()) {
    case Selection::Kind::path: {
      if (exp.kind() == ExperimentKind::unique_impl) {
        throw std::invalid_argument("pushforward: unique_impl takes the identity selection");
      }
      validate_selection_path(sel.path().as_pl_path(), exp.lower_position_path(),
                              exp.upper_position_path());
      return PushforwardResult{sel.path().to_cdf(), true, 0};
    }
    case Selection::Kind::constant: {
      if (exp.kind() == ExperimentKind::unique_impl) {
        throw std::invalid_argument("pushforward: unique_impl takes the identity selection");
      }
      MonotonePath c = MonotonePath::constant(exp.prior().domain(), sel.constant_value());
      validate_selection_path(c.as_pl_path(), exp.lower_position_path(),
                              exp.upper_position_path());
      return PushforwardResult{Cdf::dirac(exp.prior().domain(), sel.constant_value()), true, 0};
    }
    case Selection::Kind::identity: {
      if (exp.kind() != ExperimentKind::unique_impl) {
        throw std::invalid_argument("pushforward: identity selection is for unique_impl");
      }
      const UniqueImplData& u = *exp.unique_data();
      double e = u.mix_weight;
      Cdf dist = e >= 1.0 ? exp.prior()
                          : mix({{1.0 - e, u.refinement.h_n}, {e, exp.prior()}});
      return PushforwardResult{std::move(dist), true, 0};
    }
    case Selection::Kind::custom: {
      auto [lab_lo, lab_hi] = exp.label_range();
      std::optional<Cdf> label_measure;
      if (exp.kind() == ExperimentKind::unique_impl) {
        const UniqueImplData& u = *exp.unique_data();
        double e = u.mix_weight;
        label_measure = e >= 1.0 ? exp.prior()
                                 : mix({{1.0 - e, u.refinement.h_n}, {e, exp.prior()}});
      }
      std::vector<std::pair<double, double>> atoms;
      atoms.reserve(fallback_grid);
      double w = 1.0 / fallback_grid;
      for (int i = 0; i < fallback_grid; ++i) {
        double label = label_measure ? gen_inverse(*label_measure, (i + 0.5) * w)
                                     : lab_lo + (lab_hi - lab_lo) * (i + 0.5) * w;
        AtomicDist g = exp.posterior_at(label);
        double x = sel.fn()(label, g);
        if (!g.quantile_interval(exp.q()).contains(x, 1e-9)) {
          throw std::invalid_argument("pushforward: custom selection leaves the quantile set");
        }
        atoms.emplace_back(x, w);
      }
      return PushforwardResult{Cdf::from_atoms(exp.prior().domain(), std::move(atoms)), false,
                               fallback_grid};
    }
    case Selection::Kind::per_entry:
      throw std::invalid_argument("pushforward: per-entry selection needs a finite experiment");
  }
  throw std::logic_error("pushforward: unhandled selection kind");
}

PushforwardResult pushforward_finite(const FiniteExperiment& exp, const Selection& sel) {
  const auto& entries = exp.entries();
  double q = exp.q();
  std::vector<std::pair<double, double>> atoms;
  atoms.reserve(entries.size());
  auto add = [&](const FiniteEntry& e, double x) {
    if (!e.posterior.quantile_interval(q).contains(x, 1e-9)) {
      throw std::invalid_argument("pushforward: selection leaves the quantile set at label " +
                                  std::to_string(e.label));
    }
    atoms.emplace_back(x, e.weight);
  };
  switch (sel.kind()) {
    case Selection::Kind::per_entry: {
      if (sel.states().size() != entries.size()) {
        throw std::invalid_argument("pushforward: selection size differs from entry count");
      }
      for (size_t i = 0; i < entries.size(); ++i) add(entries[i], sel.states()[i]);
      break;
    }
    case Selection::Kind::constant:
      for (const FiniteEntry& e : entries) add(e, sel.constant_value());
      break;
    case Selection::Kind::custom:
      for (const FiniteEntry& e : entries) add(e, sel.fn()(e.label, e.posterior));
      break;
    case Selection::Kind::identity:
      // Valid when every quantile set is a singleton: pick it.
      for (const FiniteEntry& e : entries) {
        QuantileInterval iv = e.posterior.quantile_interval(q);
        if (!iv.singleton(1e-9)) {
          throw std::invalid_argument(
              "pushforward: identity selection needs singleton quantile sets");
        }
        atoms.emplace_back(iv.lo, e.weight);
      }
      break;
    default:
      throw std::invalid_argument("pushforward: unsupported selection kind for finite experiment");
  }
  return PushforwardResult{Cdf::from_atoms(exp.prior().domain(), std::move(atoms)), true, 0};
}

}  // namespace

PushforwardResult pushforward(const Experiment& exp, const Selection& sel, int fallback_grid) {
  if (std::holds_alternative<ParametricExperiment>(exp)) {
    return pushforward_parametric(std::get<ParametricExperiment>(exp), sel, fallback_grid);
  }
  return pushforward_finite(std::get<FiniteExperiment>(exp), sel);
}

double bayes_residual(const Experiment& exp, int grid_size) {
  if (grid_size < 2) throw std::invalid_argument("bayes_residual: grid_size must be >= 2");
  if (std::holds_alternative<FiniteExperiment>(exp)) {
    const FiniteExperiment& fin = std::get<FiniteExperiment>(exp);
    std::vector<double> grid = state_grid(fin.prior(), grid_size);
    for (const FiniteEntry& e : fin.entries()) {
      for (const auto& [x, m] : e.posterior.atoms) grid.push_back(x);
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    double worst = 0.0;
    for (double theta : grid) {
      double integral = 0.0;
      for (const FiniteEntry& e : fin.entries()) integral += e.weight * e.posterior.value(theta);
      worst = std::max(worst, std::fabs(integral - fin.prior().value(theta)));
    }
    return worst;
  }

  const ParametricExperiment& par = std::get<ParametricExperiment>(exp);
  const Cdf& f = par.prior();
  double q = par.q();
  std::vector<double> grid = state_grid(f, grid_size);

  if (par.kind() != ExperimentKind::unique_impl) {
    bool upper_nondecreasing = par.kind() == ExperimentKind::matching;
    double worst = 0.0;
    for (double theta : grid) {
      double m_lo = monotone_label_measure(q, theta, true, [&](double w) {
        return par.posterior_at(w).atoms.front().first;
      });
      double m_hi = monotone_label_measure(q, theta, upper_nondecreasing, [&](double w) {
        return par.posterior_at(w).atoms.back().first;
      });
      double integral = (q * m_lo + (1.0 - q) * m_hi) / q;
      worst = std::max(worst, std::fabs(integral - f.value(theta)));
    }
    return worst;
  }

  const UniqueImplData& u = *par.unique_data();
  double e = u.mix_weight;
  const Cdf& hn = u.refinement.h_n;
  // Cell boundaries where h_n is affine in F: the H_n knots already refine
  // the dyadic partition by F's knots.
  std::vector<double> cuts;
  for (const Knot& k : hn.knots()) cuts.push_back(k.x);
  for (double t : u.refinement.partition) cuts.push_back(t);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double a, double b) { return b - a <= kTol; }),
             cuts.end());
  for (const Knot& k : hn.knots()) grid.push_back(k.x);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  auto cross_measure = [&](double a, double b, double theta,
                           const std::function<double(double)>& pos) {
    // F-measure of {x in [a,b] : pos(x) <= theta} for nondecreasing pos.
    if (pos(a) > theta) return 0.0;
    if (pos(b) <= theta) return f.value(b) - f.value(a);
    double lo = a, hi = b;
    for (int it = 0; it < 80; ++it) {
      double mid = 0.5 * (lo + hi);
      (pos(mid) <= theta ? lo : hi) = mid;
    }
    return f.value(0.5 * (lo + hi)) - f.value(a);
  };

  double worst = 0.0;
  for (double theta : grid) {
    double integral = 0.0;
    for (size_t c = 0; c + 1 < cuts.size(); ++c) {
      double a = cuts[c], b = cuts[c + 1];
      double h = u.refinement.density_at(0.5 * (a + b));
      if ((1.0 - e) * h > 0.0) {
        double m1 = cross_measure(a, b, theta, [&](double x) {
          return gen_inverse(f, q * hn.value(x));
        });
        double m2 = cross_measure(a, b, theta, [&](double x) {
          return gen_inverse(f, q + (1.0 - q) * hn.value(x));
        });
        integral += (1.0 - e) * h * (q * m1 + (1.0 - q) * m2);
      }
      double upto = std::clamp(theta, a, b);
      integral += e * (f.value(upto) - f.value(a));
    }
    worst = std::max(worst, std::fabs(integral - f.value(theta)));
  }
  return worst;
}

FiniteExperiment discretize_experiment(const ParametricExperiment& exp, int cells) {
  if (cells < 1) throw std::invalid_argument("discretize_experiment: cells must be >= 1");
  const Cdf& f = exp.prior();
  double q = exp.q();

  std::vector<double> cuts{0.0};
  if (exp.kind() == ExperimentKind::unique_impl) {
    // Label space is the state interval; cut at the refinement knots plus a
    // uniform grid, weighting each cell by its exact label measure.
    const UniqueImplData& u = *exp.unique_data();
    const Domain& dom = f.domain();
    std::vector<double> xs;
    for (const Knot& k : u.refinement.h_n.knots()) xs.push_back(k.x);
    for (int i = 0; i <= cells; ++i) {
      xs.push_back(dom.lo + dom.width() * static_cast<double>(i) / cells);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end(),
                         [](double a, double b) { return b - a <= kTol; }),
             xs.end());
    double e = u.mix_weight;
    std::vector<FiniteEntry> entries;
    for (size_t i = 0; i + 1 < xs.size(); ++i) {
      double a = xs[i], b = xs[i + 1];
      double w = (1.0 - e) * (u.refinement.h_n.value(b) - u.refinement.h_n.value(a)) +
                 e * (f.value(b) - f.value(a));
      if (w <= kTol) continue;
      double mid = 0.5 * (a + b);
      entries.push_back(FiniteEntry{mid, w, exp.posterior_at(mid)});
    }
    double total = 0.0;
    for (auto& en : entries) total += en.weight;
    for (auto& en : entries) en.weight /= total;
    FiniteExperiment out = FiniteExperiment::from_entries(dom, q, std::move(entries));
    double residual = ks_distance(out.prior(), f);
    return FiniteExperiment(out.prior(), q, out.entries(), residual);
  }

  if (f.is_atomic()) {
    // Exact cells: the posterior map is constant between the label values
    // where either pooled position jumps across a cumulative level of F.
    std::vector<double> levels;
    for (const Knot& k : f.knots()) levels.push_back(k.right);
    for (double c : levels) {
      if (c > kTol && c < q - kTol) cuts.push_back(c);
      if (c > q + kTol && c < 1.0 - kTol) {
        double w = exp.kind() == ExperimentKind::matching ? q * (c - q) / (1.0 - q)
                                                          : q * (1.0 - c) / (1.0 - q);
        if (w > kTol && w < q - kTol) cuts.push_back(w);
      }
    }
  } else {
    for (int i = 1; i < cells; ++i) cuts.push_back(q * static_cast<double>(i) / cells);
  }
  cuts.push_back(q);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double a, double b) { return b - a <= kTol; }),
             cuts.end());

  std::vector<FiniteEntry> entries;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    entries.push_back(FiniteEntry{mid, (cuts[i + 1] - cuts[i]) / q, exp.posterior_at(mid)});
  }
  FiniteExperiment out = FiniteExperiment::from_entries(f.domain(), q, std::move(entries));
  double residual = ks_distance(out.prior(), f);
  return FiniteExperiment(out.prior(), q, out.entries(), residual);
}

}  // namespace qmatch
