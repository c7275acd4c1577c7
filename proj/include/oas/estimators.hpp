#pragma once

#include <functional>

namespace oas {

// Bernoulli-Gaussian prior: a sample is 0 with probability 1-rho and standard
// normal with probability rho.
struct SparseGaussianPrior {
  double rho = 0.1;
};

struct PosteriorMoments {
  double mean = 0.0;      // posterior mean
  double variance = 0.0;  // posterior variance (the per-sample distortion)
};

// Closed-form posterior moments for the sparse-Gaussian prior under the
// Gaussian observation model y = u + noise with variance sigma2. Evaluated in
// the log domain so large |y| / small sigma2 stay finite.
PosteriorMoments sparse_gaussian_moments(double y, double sigma2, double rho);

// Scalar prior with an optional point mass at zero plus a continuous
// component given as a normalized log-density. support_radius bounds where
// the continuous density is non-negligible.
struct ScalarPrior {
  double atom_weight = 0.0;
  std::function<double(double)> log_density;
  double support_radius = 0.0;
};

ScalarPrior sparse_gaussian_scalar_prior(double rho);
ScalarPrior gaussian_scalar_prior();
ScalarPrior point_mass_scalar_prior();

// Posterior moments under an arbitrary scalar prior by adaptive quadrature.
// The point mass contributes in closed form; only the continuous component is
// integrated, over a window centered on the posterior mode.
PosteriorMoments generic_posterior_moments(double y, double sigma2, const ScalarPrior& prior);

}  // namespace oas
