#include <doctest.h>

#include "oracles.hpp"
#include "wprox/gaussian_prox.hpp"

using namespace wprox;

namespace {

// The prox objective KL(m', s') + ((m' - m)^2 + (s' - s)^2) / (2 xi) separates
// into a mean part and a spread part, each minimized by golden section.
GaussianState<double> prox_by_search(const GaussianState<double>& rho, double xi) {
  const double mean = oracle::golden_min(
      [&](double a) { return 0.5 * a * a + (a - rho.mean) * (a - rho.mean) / (2 * xi); },
      -1e3, 1e3, 1e-15);
  const double sd = oracle::golden_min(
      [&](double s) { return 0.5 * (s * s - 2 * std::log(s)) + (s - rho.stddev) * (s - rho.stddev) / (2 * xi); },
      1e-6, 1e3, 1e-15);
  return {mean, sd};
}

}  // namespace

TEST_SUITE("gaussian_prox") {
  TEST_CASE("prox matches direct minimization") {
    for (const auto& rho : {GaussianState<double>::from_variance(10, 100),
                            GaussianState<double>::from_variance(-3, 0.01),
                            GaussianState<double>{0.5, 1.0}}) {
      for (double xi : {0.01, 0.1, 1.0, 10.0}) {
        const auto got = prox_kl_gaussian(rho, xi);
        const auto want = prox_by_search(rho, xi);
        CHECK(got.mean == doctest::Approx(want.mean).epsilon(1e-7));
        CHECK(got.stddev == doctest::Approx(want.stddev).epsilon(1e-7));
      }
    }
  }

  TEST_CASE("N(0,1) is a fixed point") {
    const auto p = prox_kl_gaussian(GaussianState<double>{0, 1}, 0.3);
    CHECK(std::abs(p.mean) < 1e-14);
    CHECK(std::abs(p.stddev - 1) < 1e-14);
  }

  TEST_CASE("Hopf-Lax value is the minimum of the prox objective") {
    const auto rho = GaussianState<double>::from_variance(3, 2);
    const double xi = 0.5;
    const auto p = prox_kl_gaussian(rho, xi);
    const double u = hopf_lax_value(rho, xi);
    CHECK(u == doctest::Approx(kl_gaussian(p) + std::pow(w2_gaussian_1d(p, rho), 2) / (2 * xi)));
    for (double dm : {-0.01, 0.01})
      for (double ds : {-0.01, 0.01}) {
        const GaussianState<double> q{p.mean + dm, p.stddev + ds};
        CHECK(kl_gaussian(q) + std::pow(w2_gaussian_1d(q, rho), 2) / (2 * xi) > u);
      }
  }

  TEST_CASE("Hopf-Lax time derivative") {
    for (const auto& rho : {GaussianState<double>::from_variance(0, 100),
                            GaussianState<double>::from_variance(3, 2),
                            GaussianState<double>::from_variance(-1, 0.5)}) {
      for (double xi : {0.05, 0.1, 0.5, 1.0}) {
        const auto c = hopf_lax_derivative_check(rho, xi, 1e-5);
        CHECK(std::abs(c.lhs - c.rhs) / std::abs(c.rhs) < 1e-4);
      }
    }
    CHECK(hopf_lax_derivative_check(GaussianState<double>{0, 1}, 0.1, 1e-5).rhs == 0.0);
    CHECK_THROWS_AS(hopf_lax_derivative_check(GaussianState<double>{0, 1}, 0.1, 0.2),
                    std::invalid_argument);
  }

  TEST_CASE("experiment trace: defaults, contraction, envelope") {
    const GaussianProxConfig<double> cfg;
    CHECK(cfg.step_xi == 0.1);
    CHECK(cfg.iterations == 60);
    CHECK(cfg.init.mean == 0);
    CHECK(cfg.init.variance() == doctest::Approx(100));
    CHECK(cfg.mu == 1);
    std::vector<GaussianState<double>> states;
    const Trace t = run_gaussian_experiment(cfg, &states);
    REQUIRE(t.size() == 61);
    REQUIRE(states.size() == 61);
    CHECK(*t[0].kl == doctest::Approx(kl_gaussian(cfg.init)).epsilon(1e-15));
    CHECK_FALSE(t[0].contraction_ratio.has_value());
    for (int n = 1; n <= 60; ++n) {
      CHECK(*t[n].contraction_ratio <= 1 / 1.21 + 1e-10);
      CHECK(*t[n].kl <= *t[0].kl * std::pow(1.1, -2 * n) * (1 + 1e-12));
      CHECK(*t[n].w2_to_reference < *t[n - 1].w2_to_reference);
    }
  }

  TEST_CASE("invalid inputs") {
    CHECK_THROWS_AS(prox_kl_gaussian(GaussianState<double>{0, 1}, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(prox_kl_gaussian(GaussianState<double>{0, 0}, 0.1), std::invalid_argument);
    GaussianProxConfig<double> cfg;
    cfg.step_xi = 0;
    CHECK_THROWS_AS(run_gaussian_experiment(cfg), std::invalid_argument);
  }
}
