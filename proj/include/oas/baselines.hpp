#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "oas/codebook.hpp"

namespace oas {

// One-shot sensing over the full frame: K randomly selected codewords, noise
// at the full-frame variance (single subframe).
struct OneShotInstance {
  SensingMatrix sensing;
  Eigen::VectorXd y;
  Eigen::VectorXd x;
};

OneShotInstance make_one_shot(const Codebook& cb, int K, const Eigen::VectorXd& x,
                              double sigma2, std::uint64_t seed);

struct LassoResult {
  Eigen::VectorXd x_hat;
  int sweeps = 0;
  bool converged = false;
};

// Minimizer of (1/2)||y - A x||^2 + lambda ||x||_1 by cyclic coordinate
// descent; converged when the largest coordinate change in a sweep drops
// below tol. A non-null warm start seeds the iterate.
LassoResult lasso_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, double lambda,
                        double tol = 1e-10, int max_sweeps = 10000,
                        const Eigen::VectorXd* warm_start = nullptr);

// Worst violation of the lasso optimality conditions: |g_n| <= lambda off the
// support and g_n = lambda sign(x_n) on it, with g = A^T (y - A x).
double lasso_kkt_residual(const Eigen::MatrixXd& A, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& x_hat, double lambda);

// count log-spaced multipliers of ||A^T y||_inf, descending from hi_frac to
// lo_frac (descending order suits warm-started solves).
std::vector<double> default_lambda_grid(const Eigen::MatrixXd& A, const Eigen::VectorXd& y,
                                        int count = 30, double lo_frac = 1e-3,
                                        double hi_frac = 1.0);

struct LassoOracleResult {
  double best_lambda = 0.0;
  double mse_linear = 0.0;
  double mse_db = 0.0;
  double worst_kkt = 0.0;  // max KKT residual over the grid solves
};

// Per-trial oracle tuning: solves the instance on the grid and keeps the
// lambda with the lowest true MSE.
LassoOracleResult lasso_oracle_mse(const OneShotInstance& instance,
                                   const std::vector<double>& lambda_grid);

struct ExactMmseResult {
  Eigen::VectorXd x_hat;
  double weight_sum = 0.0;        // sum of normalized support probabilities
  long long support_count = 0;    // supports with nonzero prior mass
};

// Exact posterior mean under the sparse-Gaussian prior by enumerating all 2^N
// supports in the log domain. Refuses N > 20.
ExactMmseResult mmse_exact_small(const Eigen::MatrixXd& A, const Eigen::VectorXd& y,
                                 double rho, double sigma2);

}  // namespace oas
