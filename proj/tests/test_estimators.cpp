#include <doctest.h>

#include <cmath>
#include <limits>

#include "oas/errors.hpp"
#include "oas/estimators.hpp"

using namespace oas;

namespace {

// direct evaluation of the closed forms, kept independent of the log-domain
// implementation path
PosteriorMoments naive_moments(double y, double sigma2, double rho) {
  const double i0 = (1.0 - rho) * std::sqrt(1.0 + sigma2) * std::exp(-y * y / (2.0 * sigma2));
  const double i1 = rho * std::sqrt(sigma2) * std::exp(-y * y / (2.0 * (1.0 + sigma2)));
  const double j = (1.0 + sigma2) * (i0 + i1);
  const double mean = i1 * y / j;
  const double variance = i1 / j * (sigma2 + i0 / j * y * y);
  return {mean, variance};
}

}  // namespace

TEST_CASE("sparse_gaussian_moments closed-form anchors") {
  SUBCASE("y = 0 pins the mean and leaves the variance term") {
    const auto m = sparse_gaussian_moments(0.0, 0.01, 0.1);
    CHECK(m.mean == 0.0);
    CHECK(m.variance == doctest::Approx(1.0827e-4).epsilon(1e-3));
    const auto direct = naive_moments(0.0, 0.01, 0.1);
    CHECK(m.variance == doctest::Approx(direct.variance).epsilon(1e-12));
  }
  SUBCASE("rho = 1 collapses to the Wiener estimate") {
    const auto m = sparse_gaussian_moments(2.0, 0.04, 1.0);
    CHECK(m.mean == doctest::Approx(2.0 / 1.04).epsilon(1e-12));
    CHECK(m.variance == doctest::Approx(0.04 / 1.04).epsilon(1e-12));
  }
  SUBCASE("rho = 0 gives the all-zero prior") {
    const auto m = sparse_gaussian_moments(5.0, 0.5, 0.0);
    CHECK(m.mean == 0.0);
    CHECK(m.variance == 0.0);
  }
}

TEST_CASE("sparse_gaussian_moments matches the naive formulas where they are stable") {
  for (double y : {-3.0, -0.7, 0.0, 0.4, 1.0, 2.5})
    for (double s2 : {0.05, 0.3, 1.0})
      for (double rho : {0.05, 0.3, 0.9}) {
        const auto fast = sparse_gaussian_moments(y, s2, rho);
        const auto direct = naive_moments(y, s2, rho);
        CHECK(fast.mean == doctest::Approx(direct.mean).epsilon(1e-10));
        CHECK(fast.variance == doctest::Approx(direct.variance).epsilon(1e-10));
      }
}

TEST_CASE("sparse_gaussian_moments symmetry, shrinkage and bounds") {
  for (double y : {0.1, 0.5, 1.0, 3.0, 10.0})
    for (double s2 : {1e-3, 0.1, 1.0, 10.0})
      for (double rho : {0.0, 0.1, 0.5, 1.0}) {
        const auto pos = sparse_gaussian_moments(y, s2, rho);
        const auto neg = sparse_gaussian_moments(-y, s2, rho);
        CHECK(neg.mean == doctest::Approx(-pos.mean).epsilon(1e-12));
        CHECK(neg.variance == doctest::Approx(pos.variance).epsilon(1e-12));
        CHECK(std::abs(pos.mean) <= std::abs(y));
        CHECK(pos.variance >= 0.0);
        CHECK(pos.variance <= 1.0 + s2);
      }
}

TEST_CASE("sparse_gaussian_moments small-noise limit recovers the observation") {
  for (double y : {0.5, 1.0, 2.0}) {
    const auto m = sparse_gaussian_moments(y, 1e-6, 0.1);
    CHECK(std::abs(m.mean - y) <= 1e-3 * std::abs(y));
  }
}

TEST_CASE("sparse_gaussian_moments stays finite deep in the tails") {
  for (double y : {20.0, 50.0, 100.0}) {
    const auto m = sparse_gaussian_moments(y, 1e-4, 0.1);
    CHECK(std::isfinite(m.mean));
    CHECK(std::isfinite(m.variance));
    CHECK(m.mean == doctest::Approx(y / 1.0001).epsilon(1e-9));
  }
}

TEST_CASE("sparse_gaussian_moments rejects non-positive sigma2") {
  CHECK_THROWS_AS(sparse_gaussian_moments(0.1, 0.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(sparse_gaussian_moments(0.1, -1.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(sparse_gaussian_moments(0.1, 0.1, 1.5), std::invalid_argument);
}

TEST_CASE("generic_posterior_moments degenerate and conjugate cases") {
  SUBCASE("unit point mass at zero") {
    const auto m = generic_posterior_moments(123.0, 1.0, point_mass_scalar_prior());
    CHECK(m.mean == 0.0);
    CHECK(m.variance == 0.0);
  }
  SUBCASE("standard normal prior has the conjugate closed form") {
    const auto m = generic_posterior_moments(0.5, 0.01, gaussian_scalar_prior());
    CHECK(m.mean == doctest::Approx(0.5 / 1.01).epsilon(1e-8));
    CHECK(m.variance == doctest::Approx(0.01 / 1.01).epsilon(1e-8));
  }
  SUBCASE("sigma2 must be positive") {
    CHECK_THROWS_AS(generic_posterior_moments(0.1, 0.0, gaussian_scalar_prior()),
                    std::invalid_argument);
  }
}

TEST_CASE("quadrature agrees with the closed form across a grid") {
  const double tol = 1e-6;
  for (double y : {-2.0, -0.3, 0.0, 0.3, 1.0, 5.0})
    for (double s2 : {1e-3, 0.05, 0.5, 2.0})
      for (double rho : {0.05, 0.1, 0.6}) {
        const auto closed = sparse_gaussian_moments(y, s2, rho);
        const auto quad = generic_posterior_moments(y, s2, sparse_gaussian_scalar_prior(rho));
        CHECK(std::abs(closed.mean - quad.mean) <= tol);
        CHECK(std::abs(closed.variance - quad.variance) <= tol);
      }
}

TEST_CASE("quadrature stays stable for large y and tiny sigma2") {
  const auto closed = sparse_gaussian_moments(100.0, 1e-4, 0.1);
  const auto quad = generic_posterior_moments(100.0, 1e-4, sparse_gaussian_scalar_prior(0.1));
  CHECK(std::isfinite(quad.mean));
  CHECK(std::abs(closed.mean - quad.mean) <= 1e-6);
  CHECK(std::abs(closed.variance - quad.variance) <= 1e-6);
}

TEST_CASE("generic_posterior_moments reports a vanishing posterior") {
  ScalarPrior hollow;
  hollow.atom_weight = 0.5;
  hollow.log_density = [](double) { return -std::numeric_limits<double>::infinity(); };
  hollow.support_radius = 1.0;
  CHECK_THROWS_AS(generic_posterior_moments(0.1, 0.5, hollow), NumericalError);
}

TEST_CASE("cross-oracle agreement at (0.3, 0.05, 0.1)") {
  const auto closed = sparse_gaussian_moments(0.3, 0.05, 0.1);
  const auto quad = generic_posterior_moments(0.3, 0.05, sparse_gaussian_scalar_prior(0.1));
  CHECK(std::abs(closed.mean - quad.mean) <= 1e-6);
  CHECK(std::abs(closed.variance - quad.variance) <= 1e-6);
}
