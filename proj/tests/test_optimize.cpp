#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "qmatch/optimize.hpp"

using namespace qmatch;
using namespace qmatch::testing;

namespace {
const Domain kUnit(0.0, 1.0);

double eq2_oracle(const std::function<double(double)>& v, const Cdf& prior, double q) {
  // Quadrature of max{V(x) : x in the feasible window} over the level, with
  // the window endpoints located by bisection on the bound formulas.
  auto window_max = [&](double p) {
    auto [lower, upper] = quantile_bounds(prior, q);
    double lo = oracle_bisect([&](double x) { return upper.value(x); }, prior.domain().lo,
                              prior.domain().hi, p);
    double hi = oracle_bisect([&](double x) { return lower.value(x); }, prior.domain().lo,
                              prior.domain().hi, p);
    double best = -1e300;
    for (int i = 0; i <= 400; ++i) {
      double x = lo + (hi - lo) * i / 400.0;
      best = std::max(best, v(x));
    }
    return best;
  };
  return oracle_simpson(window_max, 0.0, 1.0, 2048);
}
}  // namespace

TEST_CASE("feasible_interval for the uniform median") {
  Cdf f = uniform01();
  QuantileInterval mid = feasible_interval(f, 0.5, 0.5);
  CHECK(mid.lo == doctest::Approx(0.25));
  CHECK(mid.hi == doctest::Approx(0.75));
  QuantileInterval top = feasible_interval(f, 0.5, 1.0);
  CHECK(top.lo == doctest::Approx(0.5));
  CHECK(top.hi == doctest::Approx(1.0));
  // Generalized inverses at level 0 both sit at the lower end of the domain.
  QuantileInterval bottom = feasible_interval(f, 0.5, 0.0);
  CHECK(bottom.lo == 0.0);
  CHECK(bottom.hi == 0.0);
}

TEST_CASE("optimizer value and solution for the uniform median") {
  Cdf f = uniform01();
  auto [lower, upper] = quantile_bounds(f, 0.5);

  SUBCASE("increasing objective") {
    Optimum opt = optimize_quantile_dist(Objective::piecewise_linear({{0.0, 0.0}, {1.0, 1.0}}),
                                         f, 0.5);
    double expected = oracle_simpson([](double p) { return (1.0 + p) / 2.0; }, 0.0, 1.0);
    CHECK(expected == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(opt.value == doctest::Approx(expected).epsilon(1e-10));
    CHECK(ks_distance(opt.h_star, lower) < 1e-12);
    CHECK(opt.uniqueness == UniquenessFlag::unique);
  }
  SUBCASE("decreasing objective") {
    Optimum opt = optimize_quantile_dist(Objective::piecewise_linear({{0.0, 0.0}, {1.0, -1.0}}),
                                         f, 0.5);
    double expected = oracle_simpson([](double p) { return -p / 2.0; }, 0.0, 1.0);
    CHECK(expected == doctest::Approx(-0.25).epsilon(1e-12));
    CHECK(opt.value == doctest::Approx(expected).epsilon(1e-10));
    CHECK(ks_distance(opt.h_star, upper) < 1e-12);
  }
  SUBCASE("centered quadratic") {
    Optimum opt = optimize_quantile_dist(Objective::quadratic(0.5), f, 0.5);
    double expected = oracle_simpson(
        [](double p) {
          double lo = p / 2.0, hi = (1.0 + p) / 2.0;
          return std::max((lo - 0.5) * (lo - 0.5), (hi - 0.5) * (hi - 0.5));
        },
        0.0, 1.0, 1 << 14);
    CHECK(expected == doctest::Approx(7.0 / 48.0).epsilon(1e-9));
    CHECK(opt.value == doctest::Approx(expected).epsilon(1e-9));
    CHECK(ks_distance(opt.h_star, hp_distribution(0.5, f, 0.5)) < 1e-12);
    // The argmax is unique at almost every level, so the solution is unique.
    CHECK(opt.uniqueness == UniquenessFlag::unique);
  }
}

TEST_CASE("constant objectives tie everywhere") {
  Cdf f = uniform01();
  Optimum opt = optimize_quantile_dist(Objective::piecewise_linear({{0.0, 2.0}, {1.0, 2.0}}),
                                       f, 0.5);
  CHECK(opt.value == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(opt.uniqueness == UniquenessFlag::non_unique);
  REQUIRE(opt.alternative.has_value());
  auto [lower, upper] = quantile_bounds(f, 0.5);
  CHECK(ks_distance(opt.h_star, upper) < 1e-12);       // min argmax hugs the window bottom
  CHECK(ks_distance(*opt.alternative, lower) < 1e-12); // max argmax hugs the top
  CHECK(ks_distance(opt.h_star, *opt.alternative) > 0.4);
}

TEST_CASE("optimizer value dominates every implementable distribution") {
  std::mt19937_64 rng(41);
  std::vector<Objective> objectives{
      Objective::quadratic(0.3),
      Objective::tent(0.6),
      Objective::piecewise_linear({{0.0, 0.2}, {0.35, 0.9}, {0.7, -0.4}, {1.0, 0.5}}),
  };
  for (const Cdf& prior : prior_corpus()) {
    for (const Objective& v : objectives) {
      Optimum opt = optimize_quantile_dist(v, prior, 0.5);
      CHECK(std::fabs(opt.value - stieltjes_integral(v, opt.h_star)) < 1e-9);
      CHECK(is_implementable(opt.h_star, prior, 0.5).implementable);
      for (int i = 0; i < 8; ++i) {
        Cdf h = random_implementable(prior, 0.5, rng);
        CHECK(stieltjes_integral(v, h) <= opt.value + 1e-9);
      }
    }
  }
}

TEST_CASE("the argmax path attains the window maximum at every level") {
  Cdf f = pl_prior();
  Objective v = Objective::piecewise_linear({{0.0, 0.5}, {0.3, 1.2}, {0.8, -0.1}, {1.0, 0.9}});
  Optimum opt = optimize_quantile_dist(v, f, 0.5);
  auto [lower, upper] = quantile_bounds(f, 0.5);
  for (int i = 1; i <= 100; ++i) {
    double p = i / 100.0;
    double lo = gen_inverse(upper, p), hi = gen_inverse(lower, p);
    ArgmaxResult best = argmax_interval(v, lo, hi);
    CHECK(v.eval(opt.j_star.eval(p)) == doctest::Approx(best.max_value).epsilon(1e-9));
  }
}

TEST_CASE("hp_distribution spans the implementable set") {
  Cdf f = uniform01();
  auto [lower, upper] = quantile_bounds(f, 0.5);
  Cdf mid = hp_distribution(0.5, f, 0.5);
  CHECK(mid.value(0.2) == doctest::Approx(0.4));  // upper branch
  CHECK(mid.value(0.25) == doctest::Approx(0.5));
  CHECK(mid.value(0.6) == doctest::Approx(0.5));  // flat at the level
  CHECK(mid.left_limit(0.75) == doctest::Approx(0.5));
  CHECK(mid.value(0.9) == doctest::Approx(0.8));  // lower branch
  CHECK(ks_distance(hp_distribution(0.0, f, 0.5), lower) == 0.0);
  CHECK(ks_distance(hp_distribution(1.0, f, 0.5), upper) == 0.0);

  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const Cdf& prior : prior_corpus()) {
    for (int i = 0; i < 10; ++i) {
      CHECK(is_implementable(hp_distribution(unit(rng), prior, 0.5), prior, 0.5).implementable);
    }
  }
}

TEST_CASE("quasi-concave closed form") {
  Cdf f = uniform01();
  CHECK(ks_distance(solution_quasiconcave(0.5, f, 0.5), Cdf::dirac(kUnit, 0.5)) == 0.0);

  Cdf quarter = solution_quasiconcave(0.25, f, 0.5);
  CHECK(quarter.left_limit(0.25) == doctest::Approx(0.0));
  CHECK(quarter.value(0.25) == doctest::Approx(0.5));  // atom of 1/2 at the peak
  CHECK(quarter.value(0.4) == doctest::Approx(0.8));   // then the upper branch 2x
  CHECK(quarter.value(0.5) == doctest::Approx(1.0));

  Cdf at_floor = solution_quasiconcave(0.0, f, 0.5);
  CHECK(ks_distance(at_floor, quantile_bounds(f, 0.5).second) == 0.0);
}

TEST_CASE("closed forms agree with the optimizer knot-exactly") {
  for (const Cdf& prior : positive_density_corpus()) {
    for (double q : {1.0 / 3.0, 0.5}) {
      // Quasi-concave: tents peaking inside the domain.
      for (double peak : {0.2, 0.5, 0.85}) {
        Optimum opt = optimize_quantile_dist(Objective::tent(peak), prior, q);
        CHECK(knot_equal(opt.h_star, solution_quasiconcave(peak, prior, q)));
      }
      // Strictly quasi-convex: off-center quadratics. The optimizer sees the
      // chord-sampled quadratic, which can shift the indifference level by
      // O(h^2), so knot positions match near-exactly rather than bitwise.
      for (double center : {0.2, 0.5, 0.7}) {
        Objective v = Objective::quadratic(center);
        Optimum opt = optimize_quantile_dist(v, prior, q);
        Cdf closed = solution_quasiconvex(v, prior, q);
        CHECK(knot_equal(opt.h_star, closed, 2e-9));
      }
    }
  }
}

TEST_CASE("quasi-convex closed form on reference instances") {
  Cdf f = uniform01();
  SUBCASE("symmetric quadratic lands on the half-level solution") {
    Cdf h = solution_quasiconvex(Objective::quadratic(0.5), f, 0.5);
    CHECK(ks_distance(h, hp_distribution(0.5, f, 0.5)) < 1e-12);
  }
  SUBCASE("monotone quadratic hits the boundary solution") {
    Cdf h = solution_quasiconvex(Objective::quadratic(0.0), f, 0.5);
    CHECK(ks_distance(h, quantile_bounds(f, 0.5).first) < 1e-12);
  }
  SUBCASE("symmetric vee objective") {
    Objective vee = Objective::piecewise_linear({{0.0, 0.5}, {0.5, 0.0}, {1.0, 0.5}});
    Cdf h = solution_quasiconvex(vee, f, 0.5);
    CHECK(ks_distance(h, hp_distribution(0.5, f, 0.5)) < 1e-12);
  }
  SUBCASE("quasi-concave objectives are rejected") {
    CHECK_THROWS_AS(solution_quasiconvex(Objective::tent(0.5), f, 0.5), std::invalid_argument);
    Objective plateau = Objective::piecewise_linear({{0.0, 1.0}, {0.4, 0.0}, {0.6, 0.0}, {1.0, 1.0}});
    CHECK_THROWS_AS(solution_quasiconvex(plateau, f, 0.5), std::invalid_argument);
  }
}

TEST_CASE("eq2 oracle cross-check on an asymmetric instance") {
  Cdf f = pl_prior();
  Objective v = Objective::quadratic(0.4);
  Optimum opt = optimize_quantile_dist(v, f, 0.5);
  double expected = eq2_oracle([](double x) { return (x - 0.4) * (x - 0.4); }, f, 0.5);
  CHECK(opt.value == doctest::Approx(expected).epsilon(5e-4));
}
