#pragma once

#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "qmatch/cdf.hpp"
#include "qmatch/domain.hpp"
#include "qmatch/monotone_path.hpp"

namespace qmatch {

enum class ExperimentKind { matching, nam, unique_impl };

/// Dyadic interpolation of a target distribution along the prior: H_n matches
/// H at the partition points theta_i = lo + (hi-lo) i/2^n and is linear in
/// F(x) inside each cell, with cell densities dH_n/dF.
struct DyadicRefinement {
  int level = 0;
  std::vector<double> partition;
  Cdf h_n;
  std::vector<double> cell_density;

  /// Density of H_n with respect to F at x (cells are (theta_{i-1}, theta_i]).
  double density_at(double x) const;
};

/// Extra state for the perturbed matching experiment that uniquely implements
/// (1-e) H_n + e F.
struct UniqueImplData {
  Cdf target;
  DyadicRefinement refinement;
  double mix_weight;  // e in (0, 1]
};

/// A posterior distribution together with the label that induced it.
struct LabeledPosterior {
  double label;
  AtomicDist posterior;
};

/// An experiment given by a posterior-valued map over a labeled index:
/// matching and negative-assortative experiments are indexed by omega in
/// [0, q] with uniform weight; the unique-implementation experiment is
/// indexed by the state x with density (1-e) h_n(x) + e against F.
class ParametricExperiment {
 public:
  ParametricExperiment(ExperimentKind kind, Cdf prior, double q);
  ParametricExperiment(Cdf prior, double q, UniqueImplData data);

  ExperimentKind kind() const { return kind_; }
  const Cdf& prior() const { return prior_; }
  double q() const { return q_; }
  const UniqueImplData* unique_data() const { return unique_ ? &*unique_ : nullptr; }

  std::pair<double, double> label_range() const;
  AtomicDist posterior_at(double label) const;
  LabeledPosterior labeled_posterior(double label) const {
    return LabeledPosterior{label, posterior_at(label)};
  }

  /// Selection-feasible states at a label, i.e. X(G_label).
  QuantileInterval interval_at(double label) const;

  /// Per-label positions of the pooled pair as paths over the normalized
  /// label u = omega/q; for matching/nam only.
  PlPath lower_position_path() const;
  PlPath upper_position_path() const;

 private:
  ExperimentKind kind_;
  Cdf prior_;
  double q_;
  std::optional<UniqueImplData> unique_;
};

struct FiniteEntry {
  double label;
  double weight;
  AtomicDist posterior;
};

/// A finite weighted list of labeled posteriors whose mixture reproduces the
/// (atomic) prior exactly on knots.
class FiniteExperiment {
 public:
  FiniteExperiment(Cdf prior, double q, std::vector<FiniteEntry> entries,
                   double source_residual = 0.0);
  /// Builds the prior as the exact mixture of the entries.
  static FiniteExperiment from_entries(Domain domain, double q, std::vector<FiniteEntry> entries,
                                       double source_residual = 0.0);

  const Cdf& prior() const { return prior_; }
  double q() const { return q_; }
  const std::vector<FiniteEntry>& entries() const { return entries_; }
  /// Distance from the prior of the parametric experiment this one was cut
  /// from; 0 when the discretization is exact.
  double source_residual() const { return source_residual_; }

 private:
  Cdf prior_;
  double q_;
  std::vector<FiniteEntry> entries_;
  double source_residual_;
};

using Experiment = std::variant<ParametricExperiment, FiniteExperiment>;

/// A rule picking one state from each induced posterior's quantile set.
class Selection {
 public:
  using CustomFn = std::function<double(double label, const AtomicDist& posterior)>;
  enum class Kind { path, constant, identity, per_entry, custom };

  /// chi(omega) = path(omega / q) for parametric experiments.
  static Selection from_path(MonotonePath path);
  static Selection constant(double x);
  /// chi(x) = x; the only valid selection for unique-implementation
  /// experiments, whose quantile sets are singletons.
  static Selection identity();
  static Selection per_entry(std::vector<double> states);
  static Selection custom(CustomFn fn);

  Kind kind() const { return kind_; }
  const MonotonePath& path() const;
  double constant_value() const { return constant_; }
  const std::vector<double>& states() const { return states_; }
  const CustomFn& fn() const { return fn_; }

 private:
  Selection() = default;
  Kind kind_ = Kind::identity;
  std::optional<MonotonePath> path_;
  double constant_ = 0.0;
  std::vector<double> states_;
  CustomFn fn_;
};

/// (H_lower, H_upper): the lowest and highest implementable distributions of
/// posterior q-quantiles for the given prior.
std::pair<Cdf, Cdf> quantile_bounds(const Cdf& prior, double q);

struct ImplementabilityVerdict {
  enum class BoundSide { below_lower, above_upper };
  struct Violation {
    double x;
    BoundSide side;
    double value;
    double bound;
    bool at_left_limit;
  };
  bool implementable;
  std::optional<Violation> violation;
  explicit operator bool() const { return implementable; }
};

/// H is implementable iff H_lower <= H <= H_upper everywhere; exact on the
/// piecewise-linear class via merged-knot comparison.
ImplementabilityVerdict is_implementable(const Cdf& h, const Cdf& prior, double q);

ParametricExperiment matching_experiment(const Cdf& prior, double q);
ParametricExperiment nam_experiment(const Cdf& prior, double q);

/// The selection omega -> H^{-1}(omega/q) implementing H through the matching
/// experiment; requires is_implementable(h, prior, q).
Selection matching_selection(const Cdf& h, const Cdf& prior, double q);

struct PushforwardResult {
  Cdf dist;
  bool exact;
  int grid = 0;  // label-grid resolution when not exact
};

/// Distribution of selected quantiles. Exact for monotone-path selections on
/// parametric experiments and for finite experiments; non-monotone custom
/// selections on parametric experiments fall back to a label grid of
/// `fallback_grid` cells with the resolution reported.
PushforwardResult pushforward(const Experiment& exp, const Selection& sel,
                              int fallback_grid = 4096);

/// max over a state grid of |integral of G(theta) over labels - F(theta)|.
double bayes_residual(const Experiment& exp, int grid_size);

/// Finite labeled restriction. Exact (zero residual) when the prior is
/// atomic: label cells split at the jumps of the inverse prior. Otherwise a
/// `cells`-cell uniform cut with the residual reported.
FiniteExperiment discretize_experiment(const ParametricExperiment& exp, int cells);

}  // namespace qmatch
