#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qmatch/cdf.hpp"
#include "qmatch/experiment.hpp"
#include "qmatch/objective.hpp"

namespace qmatch {

/// Empirical distribution of selected quantiles over n independent label
/// draws. Deterministic and order-independent: draws are seeded per chunk of
/// 2^16 samples from (seed, chunk index), two uniforms per sample.
Cdf simulate(const Experiment& exp, const Selection& sel, size_t n, std::uint64_t seed);

enum class FeasibilityMode { fractional, deterministic };

struct FeasibilityProblem {
  FiniteExperiment experiment;
  AtomicDist target;
  FeasibilityMode mode = FeasibilityMode::fractional;
  /// Mass the assignment may leave unplaced before the verdict flips to
  /// infeasible; nonzero for targets carried by inexact discretizations.
  double slack = 0.0;
};

struct FlowEdge {
  size_t entry;
  size_t atom;
  double amount;
};

/// Witness of a Hall-condition violation: entries whose quantile intervals
/// sit inside [interval_lo, interval_hi] carry more weight than the target
/// holds there.
struct HallCertificate {
  double interval_lo;
  double interval_hi;
  double entry_weight;
  double target_mass;
  std::vector<size_t> entries;
};

struct FeasibilityVerdict {
  bool feasible;
  std::vector<FlowEdge> assignment;
  std::optional<HallCertificate> certificate;
  explicit operator bool() const { return feasible; }
};

/// Can the experiment's entries spread their weight over their quantile
/// intervals to reproduce the target? Fractional mode solves the
/// interval-structured transportation problem by an earliest-deadline greedy
/// and certifies infeasibility by a Hall-interval scan; deterministic mode
/// searches whole-entry assignments by depth-first search with memoization
/// (entry count capped at 24).
FeasibilityVerdict feasibility_check(const FeasibilityProblem& prob, double q);

/// Independent small-instance oracle: matching-experiment feasibility against
/// the target, for atomic priors with at most 8 atoms and targets supported
/// on the prior's atoms.
bool brute_force_implementable(const AtomicDist& prior, double q, const AtomicDist& target);

struct RegretReport {
  double opt_value;
  double implemented_sup;
  double regret;
};

/// Gap between the unconstrained optimum over implementable distributions and
/// the best value the experiment can implement (per-label argmax attains the
/// supremum over selections).
RegretReport regret(const Experiment& exp, const Objective& v, const Cdf& prior, double q);

struct ProbeHit {
  double p;
  HallCertificate certificate;
};

/// Feasibility of the flat-level family against the experiment: returns the
/// levels p whose distribution the experiment cannot implement. Parametric
/// experiments are discretized first (exactly so for atomic priors).
std::vector<ProbeHit> uniqueness_probe(const Experiment& exp, const Cdf& prior, double q,
                                       std::span<const double> p_grid);

}  // namespace qmatch
