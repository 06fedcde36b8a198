#include "qmatch/unique.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qmatch {

DyadicRefinement dyadic_refine(const Cdf& target, const Cdf& prior, double q, int level) {
  if (level < 0 || level > 30) throw std::invalid_argument("dyadic_refine: level out of range");
  if (!prior.has_positive_density()) {
    throw std::invalid_argument("dyadic_refine: prior must have a positive density");
  }
  if (!(target.domain() == prior.domain())) {
    throw std::invalid_argument("dyadic_refine: domains differ");
  }
  ImplementabilityVerdict impl = is_implementable(target, prior, q);
  if (!impl) throw std::invalid_argument("dyadic_refine: target not implementable");

  const Domain& dom = prior.domain();
  size_t cells = size_t{1} << level;
  std::vector<double> partition(cells + 1);
  for (size_t i = 0; i <= cells; ++i) {
    partition[i] = dom.lo + dom.width() * static_cast<double>(i) / static_cast<double>(cells);
  }
  partition.front() = dom.lo;
  partition.back() = dom.hi;

  // H_n is affine in F within each cell, so its knots are the partition
  // points plus the prior's interior knots.
  std::vector<double> xs = partition;
  for (const Knot& k : prior.knots()) xs.push_back(k.x);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end(), [](double a, double b) { return b - a <= kTol; }),
           xs.end());

  std::vector<double> density(cells);
  for (size_t c = 0; c < cells; ++c) {
    double fa = prior.value(partition[c]), fb = prior.value(partition[c + 1]);
    double ha = target.value(partition[c]), hb = target.value(partition[c + 1]);
    density[c] = (hb - ha) / (fb - fa);
    if (density[c] < -1e-9) throw std::logic_error("dyadic_refine: negative cell density");
    density[c] = std::max(density[c], 0.0);
  }
  std::vector<Knot> knots;
  knots.reserve(xs.size());
  size_t cell = 0;
  for (double x : xs) {
    while (cell + 1 < cells && x > partition[cell + 1] + kTol) ++cell;
    double fa = prior.value(partition[cell]);
    double ha = target.value(partition[cell]);
    double v = ha + density[cell] * (prior.value(x) - fa);
    knots.push_back(Knot{x, v, v});
  }

  DyadicRefinement out{level, std::move(partition), Cdf(dom, std::move(knots)),
                       std::move(density)};
  ImplementabilityVerdict check = is_implementable(out.h_n, prior, q);
  if (!check) throw std::logic_error("dyadic_refine: interpolant left the implementable set");
  return out;
}

ParametricExperiment unique_experiment(const Cdf& target, const Cdf& prior, double q, double e,
                                       int level) {
  if (e <= 0.0 || e > 1.0) {
    throw std::invalid_argument(
        "unique_experiment: e must be in (0,1] (e = 0 loses the singleton property)");
  }
  DyadicRefinement refinement = dyadic_refine(target, prior, q, level);
  return ParametricExperiment(prior, q, UniqueImplData{target, std::move(refinement), e});
}

UniquenessVerdict verify_unique(const Experiment& exp, double q, int grid) {
  if (grid < 2) throw std::invalid_argument("verify_unique: grid must be >= 2");
  UniquenessVerdict out{true, 0.0, 0.0};
  auto record = [&](double label, const QuantileInterval& iv) {
    if (iv.width() > out.max_width) {
      out.max_width = iv.width();
      out.worst_label = label;
    }
  };
  if (std::holds_alternative<FiniteExperiment>(exp)) {
    const FiniteExperiment& fin = std::get<FiniteExperiment>(exp);
    for (const FiniteEntry& e : fin.entries()) record(e.label, e.posterior.quantile_interval(q));
  } else {
    const ParametricExperiment& par = std::get<ParametricExperiment>(exp);
    auto [lo, hi] = par.label_range();
    std::vector<double> labels;
    for (int i = 0; i < grid; ++i) {
      labels.push_back(lo + (hi - lo) * static_cast<double>(i) / (grid - 1));
    }
    if (par.kind() == ExperimentKind::unique_impl) {
      const auto& partition = par.unique_data()->refinement.partition;
      for (size_t i = 0; i < partition.size(); ++i) {
        labels.push_back(partition[i]);
        if (i + 1 < partition.size()) labels.push_back(0.5 * (partition[i] + partition[i + 1]));
      }
    }
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    for (double label : labels) record(label, par.interval_at(label));
  }
  out.unique = out.max_width < kTol;
  return out;
}

}  // namespace qmatch
