#include "oas/estimators.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "oas/errors.hpp"

namespace oas {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

void check_sigma2(double sigma2) {
  if (!(sigma2 > 0.0))
    throw std::invalid_argument("posterior moments: sigma2 must be > 0");
}

void check_rho(double rho) {
  if (!(rho >= 0.0 && rho <= 1.0))
    throw std::invalid_argument("posterior moments: rho must be in [0, 1]");
}

}  // namespace

PosteriorMoments sparse_gaussian_moments(double y, double sigma2, double rho) {
  check_sigma2(sigma2);
  check_rho(rho);

  const double one = 1.0 + sigma2;
  const double log_i0 =
      rho < 1.0 ? std::log1p(-rho) + 0.5 * std::log1p(sigma2) - y * y / (2.0 * sigma2) : -kInf;
  const double log_i1 =
      rho > 0.0 ? std::log(rho) + 0.5 * std::log(sigma2) - y * y / (2.0 * one) : -kInf;

  // p1 = I1 / (I0 + I1); exp overflow/underflow collapses to 0 or 1 as wanted
  double p1;
  if (log_i1 == -kInf)
    p1 = 0.0;
  else if (log_i0 == -kInf)
    p1 = 1.0;
  else
    p1 = 1.0 / (1.0 + std::exp(log_i0 - log_i1));
  const double p0 = 1.0 - p1;

  const double wiener = y / one;        // conditional mean given a nonzero sample
  const double v1 = sigma2 / one;       // conditional variance given a nonzero sample
  const double mean = p1 * wiener;
  const double variance = p1 * (v1 + p0 * wiener * wiener);
  return {mean, std::max(variance, 0.0)};
}

ScalarPrior sparse_gaussian_scalar_prior(double rho) {
  check_rho(rho);
  ScalarPrior p;
  p.atom_weight = 1.0 - rho;
  p.log_density = [](double u) { return -0.5 * u * u - kLogSqrt2Pi; };
  p.support_radius = 40.0;
  return p;
}

ScalarPrior gaussian_scalar_prior() { return sparse_gaussian_scalar_prior(1.0); }

ScalarPrior point_mass_scalar_prior() {
  ScalarPrior p;
  p.atom_weight = 1.0;
  p.support_radius = 0.0;
  return p;
}

PosteriorMoments generic_posterior_moments(double y, double sigma2, const ScalarPrior& prior) {
  check_sigma2(sigma2);
  if (!(prior.atom_weight >= 0.0 && prior.atom_weight <= 1.0))
    throw std::invalid_argument("generic_posterior_moments: atom_weight must be in [0, 1]");
  if (prior.atom_weight >= 1.0) return {0.0, 0.0};
  if (!prior.log_density)
    throw std::invalid_argument("generic_posterior_moments: continuous component missing");
  if (!(prior.support_radius > 0.0))
    throw std::invalid_argument("generic_posterior_moments: support_radius must be > 0");

  const double sigma = std::sqrt(sigma2);
  // log of the unnormalized continuous posterior
  const auto logpost = [&](double u) {
    const double d = y - u;
    return -d * d / (2.0 * sigma2) + prior.log_density(u);
  };

  // locate the mode: coarse probe over the union of the prior support and the
  // likelihood window, then ternary refinement in the best cell
  const double lo = std::min(-prior.support_radius, y - 12.0 * sigma);
  const double hi = std::max(prior.support_radius, y + 12.0 * sigma);
  constexpr int kProbes = 4001;
  const double step = (hi - lo) / (kProbes - 1);
  double ustar = lo, lstar = -kInf;
  std::vector<double> probe_u(kProbes), probe_l(kProbes);
  for (int i = 0; i < kProbes; ++i) {
    const double u = lo + i * step;
    const double l = logpost(u);
    probe_u[i] = u;
    probe_l[i] = l;
    if (l > lstar) {
      lstar = l;
      ustar = u;
    }
  }
  if (!std::isfinite(lstar))
    throw NumericalError("generic_posterior_moments: posterior vanished on the probe grid");

  double a = std::max(lo, ustar - step), b = std::min(hi, ustar + step);
  for (int it = 0; it < 200 && b - a > 1e-14 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    const double m1 = a + (b - a) / 3.0;
    const double m2 = b - (b - a) / 3.0;
    if (logpost(m1) < logpost(m2))
      a = m1;
    else
      b = m2;
  }
  ustar = 0.5 * (a + b);
  lstar = logpost(ustar);

  // local scale from the curvature at the mode
  const double h = std::max(sigma / 8.0, 1e-9 * (1.0 + std::abs(ustar)));
  const double d2 = (logpost(ustar + h) - 2.0 * lstar + logpost(ustar - h)) / (h * h);
  double scale = (std::isfinite(d2) && d2 < 0.0) ? 1.0 / std::sqrt(-d2) : sigma;
  scale = std::min(scale, hi - lo);

  // integration window: mode +- 10 posterior standard deviations, widened to
  // cover any probe point within 45 nats of the peak
  double wlo = ustar - 10.0 * scale;
  double whi = ustar + 10.0 * scale;
  for (int i = 0; i < kProbes; ++i) {
    if (probe_l[i] >= lstar - 45.0) {
      wlo = std::min(wlo, probe_u[i] - 10.0 * scale);
      whi = std::max(whi, probe_u[i] + 10.0 * scale);
    }
  }
  wlo = std::max(wlo, lo - 10.0 * scale);
  whi = std::min(whi, hi + 10.0 * scale);

  using quad = boost::math::quadrature::gauss_kronrod<double, 31>;
  const auto shifted = [&](double u) { return std::exp(logpost(u) - lstar); };
  double e0 = 0.0, e1 = 0.0, e2 = 0.0;
  const double z = quad::integrate(shifted, wlo, whi, 15, 1e-11, &e0);
  const double m1 = quad::integrate([&](double u) { return u * shifted(u); }, wlo, whi, 15, 1e-11, &e1);
  const double m2 = quad::integrate([&](double u) { return u * u * shifted(u); }, wlo, whi, 15, 1e-11, &e2);

  const double span = 1.0 + std::abs(ustar) + 10.0 * scale;
  if (!(z > 0.0) || !std::isfinite(z) || !std::isfinite(m1) || !std::isfinite(m2) ||
      e0 > 1e-7 * z || e1 > 1e-7 * z * span || e2 > 1e-7 * z * span * span)
    throw NumericalError("generic_posterior_moments: quadrature did not converge");

  const double mean_cont = m1 / z;
  const double second_cont = m2 / z;

  double p_cont = 1.0;
  if (prior.atom_weight > 0.0) {
    const double log_atom = std::log(prior.atom_weight) - y * y / (2.0 * sigma2);
    const double log_cont = std::log1p(-prior.atom_weight) + lstar + std::log(z);
    p_cont = 1.0 / (1.0 + std::exp(log_atom - log_cont));
  }

  const double mean = p_cont * mean_cont;
  const double variance = p_cont * second_cont - mean * mean;
  return {mean, std::max(variance, 0.0)};
}

}  // namespace oas
