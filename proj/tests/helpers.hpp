#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "qmatch/cdf.hpp"
#include "qmatch/experiment.hpp"
#include "qmatch/optimize.hpp"

namespace qmatch::testing {

// ---------------------------------------------------------------------------
// Independent oracles. These never touch the library's evaluation paths.

/// Smallest x in [lo, hi] with f(x) >= target, for nondecreasing f.
inline double oracle_bisect(const std::function<double(double)>& f, double lo, double hi,
                            double target) {
  if (f(lo) >= target) return lo;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (f(mid) >= target ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Composite Simpson quadrature.
inline double oracle_simpson(const std::function<double(double)>& f, double a, double b,
                             int n = 4096) {
  if (n % 2) ++n;
  double h = (b - a) / n;
  double total = f(a) + f(b);
  for (int i = 1; i < n; ++i) total += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return total * h / 3.0;
}

/// sup_x |f(x) - g(x)| over a dense grid.
inline double oracle_grid_sup(const std::function<double(double)>& f,
                              const std::function<double(double)>& g, double a, double b,
                              int n = 100000) {
  double sup = 0.0;
  for (int i = 0; i <= n; ++i) {
    double x = a + (b - a) * static_cast<double>(i) / n;
    sup = std::max(sup, std::fabs(f(x) - g(x)));
  }
  return sup;
}

// ---------------------------------------------------------------------------
// Prior corpus.

inline Cdf uniform01() { return Cdf::uniform(Domain(0.0, 1.0)); }

/// Continuous strictly increasing piecewise-linear prior.
inline Cdf pl_prior() {
  return Cdf::from_points(Domain(0.0, 1.0), {{0.0, 0.0}, {0.25, 0.4}, {0.55, 0.7}, {1.0, 1.0}});
}

/// Continuous strictly increasing prior with more structure.
inline Cdf steep_prior() {
  return Cdf::from_points(Domain(0.0, 1.0),
                          {{0.0, 0.0}, {0.1, 0.05}, {0.3, 0.45}, {0.6, 0.6}, {0.8, 0.9}, {1.0, 1.0}});
}

inline Cdf atomic4() {
  return Cdf::from_atoms(Domain(0.0, 1.0), {{0.2, 0.1}, {0.4, 0.2}, {0.6, 0.3}, {0.8, 0.4}});
}

/// Eight equal atoms at (2k-1)/16.
inline Cdf atomic8() {
  std::vector<std::pair<double, double>> atoms;
  for (int k = 1; k <= 8; ++k) atoms.emplace_back((2.0 * k - 1.0) / 16.0, 0.125);
  return Cdf::from_atoms(Domain(0.0, 1.0), std::move(atoms));
}

/// Atoms mixed with a continuous stretch.
inline Cdf mixed_prior() {
  return mix({{0.5, uniform01()},
              {0.25, Cdf::dirac(Domain(0.0, 1.0), 0.3)},
              {0.25, Cdf::dirac(Domain(0.0, 1.0), 0.7)}});
}

inline std::vector<Cdf> prior_corpus() {
  return {uniform01(), pl_prior(), atomic4(), atomic8(), mixed_prior()};
}

inline std::vector<Cdf> positive_density_corpus() {
  return {uniform01(), pl_prior(), steep_prior()};
}

/// Random point of the implementable set: a convex mixture of the bounds,
/// the prior, and two flat-level distributions.
inline Cdf random_implementable(const Cdf& prior, double q, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto [lower, upper] = quantile_bounds(prior, q);
  std::vector<Cdf> parts{lower, upper, prior, hp_distribution(unit(rng), prior, q),
                         hp_distribution(unit(rng), prior, q)};
  std::vector<double> w(parts.size());
  double total = 0.0;
  for (double& wi : w) {
    wi = -std::log(1.0 - unit(rng));
    total += wi;
  }
  std::vector<std::pair<double, Cdf>> weighted;
  for (size_t i = 0; i < parts.size(); ++i) weighted.emplace_back(w[i] / total, parts[i]);
  return mix(weighted);
}

}  // namespace qmatch::testing
