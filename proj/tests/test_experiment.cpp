#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "qmatch/experiment.hpp"

using namespace qmatch;
using namespace qmatch::testing;

namespace {
const Domain kUnit(0.0, 1.0);

AtomicDist posterior(const ParametricExperiment& exp, double label) {
  return exp.posterior_at(label);
}
}  // namespace

TEST_CASE("quantile_bounds closed forms") {
  SUBCASE("uniform median") {
    auto [lower, upper] = quantile_bounds(uniform01(), 0.5);
    for (int i = 0; i <= 20; ++i) {
      double x = i / 20.0;
      CHECK(upper.value(x) == doctest::Approx(std::min(2.0 * x, 1.0)).epsilon(1e-15));
      CHECK(lower.value(x) == doctest::Approx(std::max(0.0, 2.0 * x - 1.0)).epsilon(1e-15));
    }
  }
  SUBCASE("uniform q = 1/3") {
    double q = 1.0 / 3.0;
    auto [lower, upper] = quantile_bounds(uniform01(), q);
    for (int i = 0; i <= 20; ++i) {
      double x = i / 20.0;
      CHECK(upper.value(x) == doctest::Approx(std::min(3.0 * x, 1.0)).epsilon(1e-12));
      CHECK(lower.value(x) == doctest::Approx(std::max(0.0, (3.0 * x - 1.0) / 2.0)).epsilon(1e-12));
    }
  }
  SUBCASE("degenerate prior") {
    Cdf point = Cdf::dirac(kUnit, 0.4);
    auto [lower, upper] = quantile_bounds(point, 0.25);
    CHECK(ks_distance(lower, point) == 0.0);
    CHECK(ks_distance(upper, point) == 0.0);
  }
}

TEST_CASE("is_implementable verdicts") {
  Cdf f = uniform01();
  CHECK(is_implementable(f, f, 0.5).implementable);
  CHECK(is_implementable(Cdf::dirac(kUnit, gen_inverse(f, 0.5)), f, 0.5).implementable);

  ImplementabilityVerdict no = is_implementable(Cdf::dirac(kUnit, 1.0), f, 0.5);
  REQUIRE_FALSE(no.implementable);
  REQUIRE(no.violation.has_value());
  CHECK(no.violation->side == ImplementabilityVerdict::BoundSide::below_lower);
  // At x = 0.9 the target sits below the bound.
  Cdf lower = quantile_bounds(f, 0.5).first;
  CHECK(lower.value(0.9) == doctest::Approx(0.8));
  CHECK(Cdf::dirac(kUnit, 1.0).value(0.9) == 0.0);

  for (const Cdf& prior : prior_corpus()) {
    CHECK(is_implementable(prior, prior, 0.3).implementable);
  }
}

TEST_CASE("matching experiment posteriors") {
  ParametricExperiment exp = matching_experiment(uniform01(), 0.5);
  AtomicDist g = posterior(exp, 0.25);
  REQUIRE(g.atoms.size() == 2);
  CHECK(g.atoms[0].first == doctest::Approx(0.25));
  CHECK(g.atoms[0].second == doctest::Approx(0.5));
  CHECK(g.atoms[1].first == doctest::Approx(0.75));

  ParametricExperiment third = matching_experiment(uniform01(), 1.0 / 3.0);
  AtomicDist g3 = posterior(third, 1.0 / 6.0);
  REQUIRE(g3.atoms.size() == 2);
  CHECK(g3.atoms[0].first == doctest::Approx(1.0 / 6.0));
  CHECK(g3.atoms[0].second == doctest::Approx(1.0 / 3.0));
  CHECK(g3.atoms[1].first == doctest::Approx(2.0 / 3.0));
  CHECK(g3.atoms[1].second == doctest::Approx(2.0 / 3.0));

  AtomicDist g0 = posterior(exp, 0.0);
  CHECK(g0.atoms[0].first == doctest::Approx(0.0));
  CHECK(g0.atoms[1].first == doctest::Approx(0.5));
}

TEST_CASE("negative assortative posteriors") {
  ParametricExperiment exp = nam_experiment(uniform01(), 0.5);
  AtomicDist mid = posterior(exp, 0.25);
  REQUIRE(mid.atoms.size() == 2);
  CHECK(mid.atoms[0].first == doctest::Approx(0.25));
  CHECK(mid.atoms[1].first == doctest::Approx(0.75));

  // The top label pools with itself: both positions land on the median.
  AtomicDist center = posterior(exp, 0.5);
  REQUIRE(center.atoms.size() == 1);
  CHECK(center.atoms[0].first == doctest::Approx(0.5));

  AtomicDist g = posterior(exp, 0.1);
  REQUIRE(g.atoms.size() == 2);
  CHECK(g.atoms[0].first == doctest::Approx(0.1));
  CHECK(g.atoms[1].first == doctest::Approx(0.9));

  AtomicDist ends = posterior(exp, 0.0);
  CHECK(ends.atoms.front().first == doctest::Approx(0.0));
  CHECK(ends.atoms.back().first == doctest::Approx(1.0));
}

TEST_CASE("matching quantile sets match the closed form") {
  for (const Cdf& prior : prior_corpus()) {
    for (double q : {0.25, 0.5, 0.75}) {
      ParametricExperiment exp = matching_experiment(prior, q);
      for (int i = 1; i < 20; ++i) {
        double w = q * i / 20.0;
        QuantileInterval iv = exp.interval_at(w);
        CHECK(iv.lo == doctest::Approx(gen_inverse(prior, w)).epsilon(1e-12));
        CHECK(iv.hi ==
              doctest::Approx(gen_inverse(prior, q + (1.0 - q) * w / q)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("matching selections") {
  Cdf f = uniform01();
  SUBCASE("target F selects the pair average") {
    Selection sel = matching_selection(f, f, 0.5);
    for (int i = 0; i <= 10; ++i) {
      double u = i / 10.0;
      CHECK(sel.path().eval(u) == doctest::Approx(u).epsilon(1e-12));
    }
  }
  SUBCASE("point target selects the constant") {
    Selection sel = matching_selection(Cdf::dirac(kUnit, 0.5), f, 0.5);
    CHECK(sel.path().eval(0.3) == doctest::Approx(0.5));
    CHECK(sel.path().eval(0.9) == doctest::Approx(0.5));
  }
  SUBCASE("upper bound target selects the interval bottom") {
    Cdf upper = quantile_bounds(f, 0.5).second;
    Selection sel = matching_selection(upper, f, 0.5);
    for (int i = 1; i <= 10; ++i) {
      double u = i / 10.0;
      CHECK(sel.path().eval(u) == doctest::Approx(u / 2.0).epsilon(1e-12));
    }
  }
  SUBCASE("non-implementable targets are rejected with the witness") {
    CHECK_THROWS_WITH_AS(matching_selection(Cdf::dirac(kUnit, 1.0), f, 0.5),
                         doctest::Contains("not implementable"), std::invalid_argument);
  }
}

TEST_CASE("pushforward of the matching selection recovers the target") {
  std::mt19937_64 rng(29);
  for (const Cdf& prior : prior_corpus()) {
    for (double q : {1.0 / 3.0, 0.5}) {
      Experiment exp = matching_experiment(prior, q);
      for (int i = 0; i < 5; ++i) {
        Cdf h = random_implementable(prior, q, rng);
        PushforwardResult push = pushforward(exp, matching_selection(h, prior, q));
        REQUIRE(push.exact);
        CHECK(ks_distance(push.dist, h) < 1e-12);
      }
    }
  }
}

TEST_CASE("every selection pushes forward inside the bounds") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double q = 0.5;
  SUBCASE("exactly for atomic priors") {
    for (const Cdf& prior : {atomic4(), atomic8()}) {
      FiniteExperiment discrete = discretize_experiment(matching_experiment(prior, q), 1);
      REQUIRE(discrete.source_residual() < 1e-12);
      for (int rep = 0; rep < 25; ++rep) {
        std::vector<double> states;
        for (const FiniteEntry& e : discrete.entries()) {
          QuantileInterval iv = e.posterior.quantile_interval(q);
          states.push_back(iv.lo + (iv.hi - iv.lo) * unit(rng));
        }
        PushforwardResult push = pushforward(Experiment{discrete}, Selection::per_entry(states));
        CHECK(is_implementable(push.dist, prior, q).implementable);
      }
    }
  }
  SUBCASE("within grid slack for continuous priors") {
    FiniteExperiment discrete = discretize_experiment(matching_experiment(uniform01(), q), 64);
    auto [lower, upper] = quantile_bounds(uniform01(), q);
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<double> states;
      for (const FiniteEntry& e : discrete.entries()) {
        QuantileInterval iv = e.posterior.quantile_interval(q);
        states.push_back(iv.lo + (iv.hi - iv.lo) * unit(rng));
      }
      PushforwardResult push = pushforward(Experiment{discrete}, Selection::per_entry(states));
      double slack = 1.0 / 64 + 1e-9;
      for (const Knot& k : push.dist.knots()) {
        CHECK(push.dist.value(k.x) >= lower.value(k.x) - slack);
        CHECK(push.dist.value(k.x) <= upper.value(k.x) + slack);
      }
    }
  }
}

TEST_CASE("constant selections need a common quantile") {
  Experiment exp = matching_experiment(uniform01(), 0.5);
  PushforwardResult push = pushforward(exp, Selection::constant(0.5));
  CHECK(ks_distance(push.dist, Cdf::dirac(kUnit, 0.5)) == 0.0);
  CHECK_THROWS_AS(pushforward(exp, Selection::constant(0.2)), std::invalid_argument);
}

TEST_CASE("finite experiment pushforwards") {
  std::vector<FiniteEntry> entries{
      {0.0, 0.5, AtomicDist(kUnit, {{0.0, 1.0}})},
      {1.0, 0.5, AtomicDist(kUnit, {{1.0, 1.0}})},
  };
  FiniteExperiment exp = FiniteExperiment::from_entries(kUnit, 0.5, entries);
  PushforwardResult push = pushforward(Experiment{exp}, Selection::identity());
  CHECK(push.dist.value(0.0) == doctest::Approx(0.5));
  CHECK(push.dist.value(1.0) == 1.0);
}

TEST_CASE("bayes residual of the built-in experiments") {
  for (const Cdf& prior : prior_corpus()) {
    for (double q : {0.1, 1.0 / 3.0, 0.5, 0.9}) {
      CHECK(bayes_residual(Experiment{matching_experiment(prior, q)}, 65) < 1e-9);
      CHECK(bayes_residual(Experiment{nam_experiment(prior, q)}, 65) < 1e-9);
    }
  }
}

TEST_CASE("bayes residual flags implausible experiments") {
  // All mass on the point posterior against a claimed uniform prior.
  FiniteExperiment bogus(uniform01(), 0.5,
                         {FiniteEntry{0.5, 1.0, AtomicDist(kUnit, {{0.5, 1.0}})}});
  CHECK(bayes_residual(Experiment{bogus}, 101) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("discretization of atomic priors is exact") {
  SUBCASE("two atoms collapse to one labeled entry") {
    Cdf prior = Cdf::from_atoms(kUnit, {{0.25, 0.5}, {0.75, 0.5}});
    FiniteExperiment fin = discretize_experiment(matching_experiment(prior, 0.5), 1);
    REQUIRE(fin.entries().size() == 1);
    CHECK(fin.entries()[0].weight == doctest::Approx(1.0));
    REQUIRE(fin.entries()[0].posterior.atoms.size() == 2);
    CHECK(fin.entries()[0].posterior.atoms[0].first == doctest::Approx(0.25));
    CHECK(fin.entries()[0].posterior.atoms[1].first == doctest::Approx(0.75));
    CHECK(fin.source_residual() < 1e-12);
  }
  SUBCASE("four equal atoms split into two entries") {
    Cdf prior = Cdf::from_atoms(kUnit, {{0.2, 0.25}, {0.4, 0.25}, {0.6, 0.25}, {0.8, 0.25}});
    FiniteExperiment fin = discretize_experiment(matching_experiment(prior, 0.5), 1);
    REQUIRE(fin.entries().size() == 2);
    CHECK(fin.entries()[0].weight == doctest::Approx(0.5));
    CHECK(fin.entries()[1].weight == doctest::Approx(0.5));
    CHECK(fin.source_residual() < 1e-12);
  }
  SUBCASE("continuous priors report their residual") {
    FiniteExperiment fin = discretize_experiment(matching_experiment(uniform01(), 0.5), 1);
    REQUIRE(fin.entries().size() == 1);
    CHECK(fin.source_residual() > 0.0);
  }
}
