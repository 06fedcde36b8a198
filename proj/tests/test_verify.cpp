#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "qmatch/unique.hpp"
#include "qmatch/verify.hpp"

using namespace qmatch;
using namespace qmatch::testing;

namespace {
const Domain kUnit(0.0, 1.0);

FiniteExperiment full_revelation(const Cdf& atomic_prior, double q) {
  std::vector<FiniteEntry> entries;
  for (const auto& [x, m] : atomic_prior.atoms()) {
    entries.push_back(FiniteEntry{x, m, AtomicDist(atomic_prior.domain(), {{x, 1.0}})});
  }
  return FiniteExperiment::from_entries(atomic_prior.domain(), q, entries);
}
}  // namespace

TEST_CASE("simulate is deterministic and converges") {
  Cdf f = uniform01();
  Experiment exp = matching_experiment(f, 0.5);

  SUBCASE("constant selections are degenerate") {
    Cdf emp = simulate(exp, Selection::constant(0.5), 1000, 7);
    CHECK(ks_distance(emp, Cdf::dirac(kUnit, 0.5)) == 0.0);
  }
  SUBCASE("matching the prior passes the ks bound") {
    for (size_t n : {size_t{10000}, size_t{100000}}) {
      Cdf emp = simulate(exp, matching_selection(f, f, 0.5), n, 2024);
      CHECK(ks_distance(emp, f) < 1.63 / std::sqrt(static_cast<double>(n)));
    }
  }
  SUBCASE("reruns are bit-identical across chunk boundaries") {
    size_t n = 70000;  // crosses the 2^16 chunk
    Cdf a = simulate(exp, matching_selection(f, f, 0.5), n, 99);
    Cdf b = simulate(exp, matching_selection(f, f, 0.5), n, 99);
    REQUIRE(a.knots().size() == b.knots().size());
    for (size_t i = 0; i < a.knots().size(); ++i) {
      CHECK(a.knots()[i].x == b.knots()[i].x);
      CHECK(a.knots()[i].right == b.knots()[i].right);
    }
    Cdf c = simulate(exp, matching_selection(f, f, 0.5), n, 100);
    CHECK(ks_distance(a, c) > 0.0);
  }
  SUBCASE("perturbed experiments simulate their mixture") {
    ParametricExperiment uexp = unique_experiment(f, f, 0.5, 0.25, 2);
    size_t n = 100000;
    Cdf emp = simulate(Experiment{uexp}, Selection::identity(), n, 5);
    Cdf exact = pushforward(Experiment{uexp}, Selection::identity()).dist;
    CHECK(ks_distance(emp, exact) < 1.63 / std::sqrt(static_cast<double>(n)));
  }
}

TEST_CASE("feasibility check on the separating example") {
  Cdf prior = atomic8();
  double q = 0.5;
  Cdf hp = hp_distribution(0.5, prior, q);
  REQUIRE(hp.is_atomic());
  AtomicDist target(kUnit, hp.atoms());

  SUBCASE("negative assortative pooling cannot reach the flat-level target") {
    FiniteExperiment nam = discretize_experiment(nam_experiment(prior, q), 1);
    FeasibilityVerdict v = feasibility_check({nam, target, FeasibilityMode::fractional}, q);
    REQUIRE_FALSE(v.feasible);
    REQUIRE(v.certificate.has_value());
    // The witness: entries pooled strictly inside the flat stretch carry
    // weight, but the target has no mass there.
    CHECK(v.certificate->entry_weight > v.certificate->target_mass + 1e-9);
  }
  SUBCASE("matching reaches it") {
    FiniteExperiment match = discretize_experiment(matching_experiment(prior, q), 1);
    FeasibilityVerdict v = feasibility_check({match, target, FeasibilityMode::fractional}, q);
    CHECK(v.feasible);
    double placed = 0.0;
    for (const FlowEdge& e : v.assignment) placed += e.amount;
    CHECK(placed == doctest::Approx(1.0));
  }
  SUBCASE("targets outside the bounds are infeasible") {
    AtomicDist outside(kUnit, {{15.0 / 16.0, 1.0}});
    FiniteExperiment match = discretize_experiment(matching_experiment(prior, q), 1);
    CHECK_FALSE(feasibility_check({match, outside, FeasibilityMode::fractional}, q).feasible);
  }
}

TEST_CASE("deterministic mode") {
  double q = 0.5;
  Cdf prior = Cdf::from_atoms(kUnit, {{0.2, 0.25}, {0.4, 0.25}, {0.6, 0.25}, {0.8, 0.25}});
  FiniteExperiment match = discretize_experiment(matching_experiment(prior, q), 1);
  // Whole entries fit: both half-weight entries land on a half-mass atom.
  AtomicDist target(kUnit, {{0.4, 0.5}, {0.6, 0.5}});
  REQUIRE(is_implementable(target.to_cdf(), prior, q).implementable);

  FeasibilityVerdict frac = feasibility_check({match, target, FeasibilityMode::fractional}, q);
  FeasibilityVerdict det = feasibility_check({match, target, FeasibilityMode::deterministic}, q);
  CHECK(frac.feasible);
  CHECK(det.feasible);

  // On the uneven prior the same construction is fractionally feasible but
  // has no whole-entry assignment.
  Cdf uneven = atomic4();
  FiniteExperiment match_uneven = discretize_experiment(matching_experiment(uneven, q), 1);
  AtomicDist uneven_target(kUnit, uneven.atoms());
  CHECK(feasibility_check({match_uneven, uneven_target, FeasibilityMode::fractional}, q).feasible);
  CHECK_FALSE(
      feasibility_check({match_uneven, uneven_target, FeasibilityMode::deterministic}, q).feasible);

  // Fractional infeasibility implies deterministic infeasibility.
  FiniteExperiment nam = discretize_experiment(nam_experiment(atomic8(), q), 1);
  Cdf hp = hp_distribution(0.5, atomic8(), q);
  AtomicDist flat_target(kUnit, hp.atoms());
  CHECK_FALSE(feasibility_check({nam, flat_target, FeasibilityMode::fractional}, q).feasible);
  CHECK_FALSE(feasibility_check({nam, flat_target, FeasibilityMode::deterministic}, q).feasible);

  // A fractionally feasible instance that no whole-entry assignment solves:
  // one entry of weight 1/2 must split across two atoms of mass 1/4 and 1/4
  // once its companion takes the rest.
  std::vector<FiniteEntry> entries{
      {0.0, 0.5, AtomicDist(kUnit, {{0.2, 0.5}, {0.8, 0.5}})},
      {1.0, 0.5, AtomicDist(kUnit, {{0.2, 0.5}, {0.8, 0.5}})},
  };
  FiniteExperiment exp = FiniteExperiment::from_entries(kUnit, 0.5, entries);
  AtomicDist split(kUnit, {{0.2, 0.25}, {0.5, 0.5}, {0.8, 0.25}});
  FeasibilityVerdict f2 = feasibility_check({exp, split, FeasibilityMode::fractional}, 0.5);
  FeasibilityVerdict d2 = feasibility_check({exp, split, FeasibilityMode::deterministic}, 0.5);
  CHECK(f2.feasible);
  CHECK_FALSE(d2.feasible);

  // Entry cap.
  std::vector<FiniteEntry> many;
  for (int i = 0; i < 25; ++i) {
    many.push_back(FiniteEntry{static_cast<double>(i), 1.0 / 25.0,
                               AtomicDist(kUnit, {{0.5, 1.0}})});
  }
  FiniteExperiment big = FiniteExperiment::from_entries(kUnit, 0.5, many);
  AtomicDist point(kUnit, {{0.5, 1.0}});
  CHECK_THROWS_AS(feasibility_check({big, point, FeasibilityMode::deterministic}, 0.5),
                  std::runtime_error);
}

TEST_CASE("fractional feasibility is monotone under covered mass moves") {
  std::mt19937_64 rng(67);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Cdf prior = atomic8();
  double q = 0.5;
  FiniteExperiment match = discretize_experiment(matching_experiment(prior, q), 1);
  AtomicDist base(kUnit, prior.atoms());
  FeasibilityVerdict v = feasibility_check({match, base, FeasibilityMode::fractional}, q);
  REQUIRE(v.feasible);
  for (int rep = 0; rep < 20; ++rep) {
    // Reroute every entry's assigned flow to random atoms inside its own
    // interval; the perturbed target must stay feasible.
    std::vector<std::pair<double, double>> moved;
    for (const FlowEdge& e : v.assignment) {
      QuantileInterval iv = match.entries()[e.entry].posterior.quantile_interval(q);
      std::vector<double> options;
      for (const auto& [x, m] : base.atoms) {
        if (iv.contains(x)) options.push_back(x);
      }
      REQUIRE_FALSE(options.empty());
      double dest = options[static_cast<size_t>(unit(rng) * options.size()) % options.size()];
      moved.emplace_back(dest, e.amount);
    }
    AtomicDist perturbed(kUnit, moved);
    CHECK(feasibility_check({match, perturbed, FeasibilityMode::fractional}, q).feasible);
  }
}

TEST_CASE("brute force oracle equals the bounds predicate on a small sweep") {
  Cdf prior = atomic4();
  AtomicDist aprior(kUnit, prior.atoms());
  double q = 0.5;
  std::mt19937_64 rng(71);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int checked = 0;
  for (int rep = 0; rep < 200; ++rep) {
    // Random masses on the prior atoms in twelfths.
    std::vector<int> grid(4, 0);
    int left = 12;
    for (int i = 0; i < 3; ++i) {
      grid[i] = static_cast<int>(unit(rng) * (left + 1));
      left -= grid[i];
    }
    grid[3] = left;
    std::vector<std::pair<double, double>> atoms;
    for (int i = 0; i < 4; ++i) {
      if (grid[i] > 0) atoms.emplace_back(aprior.atoms[i].first, grid[i] / 12.0);
    }
    if (atoms.empty()) continue;
    AtomicDist target(kUnit, atoms);
    bool via_flow = brute_force_implementable(aprior, q, target);
    bool via_bounds = is_implementable(target.to_cdf(), prior, q).implementable;
    CHECK(via_flow == via_bounds);
    ++checked;
  }
  CHECK(checked > 150);
}

TEST_CASE("regret of the built-in experiments") {
  Cdf f = uniform01();
  double q = 0.5;
  Objective quad = Objective::quadratic(0.5);

  SUBCASE("matching has no regret") {
    RegretReport r = regret(Experiment{matching_experiment(f, q)}, quad, f, q);
    CHECK(std::fabs(r.regret) < 1e-9);
  }
  SUBCASE("negative assortative matching loses a sixteenth") {
    // Oracle: value 7/48 against the pooled maximum integral 1/12.
    double implemented = oracle_simpson(
        [](double w) { return 2.0 * (0.5 - w) * (0.5 - w); }, 0.0, 0.5);
    CHECK(implemented == doctest::Approx(1.0 / 12.0).epsilon(1e-10));
    RegretReport r = regret(Experiment{nam_experiment(f, q)}, quad, f, q);
    CHECK(r.implemented_sup == doctest::Approx(implemented).epsilon(1e-8));
    CHECK(r.regret == doctest::Approx(7.0 / 48.0 - 1.0 / 12.0).epsilon(1e-6));
  }
  SUBCASE("full revelation foregoes the pooling gain") {
    ParametricExperiment full = unique_experiment(f, f, q, 1.0, 0);
    RegretReport r = regret(Experiment{full}, Objective::piecewise_linear({{0.0, 0.0}, {1.0, 1.0}}),
                            f, q);
    CHECK(r.opt_value == doctest::Approx(0.75).epsilon(1e-9));
    CHECK(r.implemented_sup == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(r.regret == doctest::Approx(0.25).epsilon(1e-8));
  }
  SUBCASE("regret is nonnegative across experiments and objectives") {
    std::mt19937_64 rng(73);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 10; ++i) {
      Objective v = Objective::quadratic(unit(rng));
      RegretReport r = regret(Experiment{nam_experiment(pl_prior(), 0.5)}, v, pl_prior(), 0.5);
      CHECK(r.regret >= -1e-9);
    }
  }
}

TEST_CASE("uniqueness probe separates matching from its rivals") {
  Cdf prior = atomic8();
  double q = 0.5;
  std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};

  auto hits_for = [&](const Experiment& exp) {
    return uniqueness_probe(exp, prior, q, grid);
  };

  CHECK(hits_for(Experiment{matching_experiment(prior, q)}).empty());

  auto nam_hits = hits_for(Experiment{nam_experiment(prior, q)});
  bool has_half = false;
  for (const ProbeHit& h : nam_hits) has_half |= h.p == 0.5;
  CHECK(has_half);

  auto full_hits = hits_for(Experiment{full_revelation(prior, q)});
  bool has_zero = false;
  for (const ProbeHit& h : full_hits) has_zero |= h.p == 0.0;
  CHECK(has_zero);
}

TEST_CASE("uniqueness probe tolerates discretization error on continuous priors") {
  Cdf f = uniform01();
  double q = 0.5;
  std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
  // Matching implements every level; boundary-cell effects must not register.
  CHECK(uniqueness_probe(Experiment{matching_experiment(f, q)}, f, q, grid).empty());
  // The genuine violation still separates by a wide margin.
  auto nam_hits = uniqueness_probe(Experiment{nam_experiment(f, q)}, f, q, grid);
  bool has_half = false;
  for (const ProbeHit& h : nam_hits) {
    if (h.p == 0.5) {
      has_half = true;
      CHECK(h.certificate.entry_weight - h.certificate.target_mass > 0.4);
    }
  }
  CHECK(has_half);
}
