#include "oas/baselines.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "oas/errors.hpp"
#include "oas/rng.hpp"
#include "oas/selection.hpp"

namespace oas {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

}  // namespace

OneShotInstance make_one_shot(const Codebook& cb, int K, const Eigen::VectorXd& x,
                              double sigma2, std::uint64_t seed) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("make_one_shot: sigma2 must be > 0");
  if (x.size() != cb.dim())
    throw std::invalid_argument("make_one_shot: signal length differs from codebook dimension");
  OneShotInstance inst;
  inst.sensing = gather_rows(cb, select_random(cb, K, seed_mix({seed, 0xA})));
  inst.x = x;
  Rng noise(seed_mix({seed, 0xB}));
  const double sd = std::sqrt(sigma2);
  Eigen::VectorXd z(K);
  for (int k = 0; k < K; ++k) z(k) = sd * noise.normal();
  inst.y = inst.sensing.rows * x + z;
  return inst;
}

LassoResult lasso_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, double lambda,
                        double tol, int max_sweeps, const Eigen::VectorXd* warm_start) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lasso_solve: lambda must be > 0");
  if (y.size() != A.rows()) throw std::invalid_argument("lasso_solve: length mismatch");
  const auto N = A.cols();

  Eigen::VectorXd x;
  if (warm_start) {
    if (warm_start->size() != N)
      throw std::invalid_argument("lasso_solve: warm start length mismatch");
    x = *warm_start;
  } else {
    x = Eigen::VectorXd::Zero(N);
  }

  Eigen::VectorXd r = y - A * x;
  const Eigen::VectorXd colsq = A.colwise().squaredNorm();

  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    double max_delta = 0.0;
    for (Eigen::Index j = 0; j < N; ++j) {
      if (colsq(j) == 0.0) {
        if (x(j) != 0.0) {
          r += A.col(j) * x(j);
          x(j) = 0.0;
        }
        continue;
      }
      const double rho_j = A.col(j).dot(r) + colsq(j) * x(j);
      const double xj = soft_threshold(rho_j, lambda) / colsq(j);
      const double delta = xj - x(j);
      if (delta != 0.0) {
        r -= A.col(j) * delta;
        x(j) = xj;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    if (max_delta < tol) return {std::move(x), sweep, true};
  }
  return {std::move(x), max_sweeps, false};
}

double lasso_kkt_residual(const Eigen::MatrixXd& A, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& x_hat, double lambda) {
  const Eigen::VectorXd g = A.transpose() * (y - A * x_hat);
  double worst = 0.0;
  for (Eigen::Index n = 0; n < x_hat.size(); ++n) {
    if (x_hat(n) != 0.0)
      worst = std::max(worst, std::abs(g(n) - lambda * (x_hat(n) > 0.0 ? 1.0 : -1.0)));
    else
      worst = std::max(worst, std::abs(g(n)) - lambda);
  }
  return std::max(worst, 0.0);
}

std::vector<double> default_lambda_grid(const Eigen::MatrixXd& A, const Eigen::VectorXd& y,
                                        int count, double lo_frac, double hi_frac) {
  if (count < 1) throw std::invalid_argument("default_lambda_grid: count must be >= 1");
  if (!(lo_frac > 0.0 && hi_frac >= lo_frac))
    throw std::invalid_argument("default_lambda_grid: need 0 < lo_frac <= hi_frac");
  const double lmax = std::max((A.transpose() * y).cwiseAbs().maxCoeff(), 1e-12);
  std::vector<double> grid(count);
  if (count == 1) {
    grid[0] = hi_frac * lmax;
    return grid;
  }
  const double log_hi = std::log(hi_frac * lmax);
  const double log_lo = std::log(lo_frac * lmax);
  for (int i = 0; i < count; ++i)
    grid[i] = std::exp(log_hi + (log_lo - log_hi) * i / (count - 1));
  return grid;
}

LassoOracleResult lasso_oracle_mse(const OneShotInstance& instance,
                                   const std::vector<double>& lambda_grid) {
  if (lambda_grid.empty())
    throw std::invalid_argument("lasso_oracle_mse: empty lambda grid");
  const Eigen::MatrixXd& A = instance.sensing.rows;
  const auto N = static_cast<double>(A.cols());

  LassoOracleResult out;
  out.mse_linear = kInf;
  Eigen::VectorXd warm = Eigen::VectorXd::Zero(A.cols());
  for (double lambda : lambda_grid) {
    const LassoResult sol = lasso_solve(A, instance.y, lambda, 1e-10, 10000, &warm);
    warm = sol.x_hat;
    out.worst_kkt = std::max(out.worst_kkt,
                             lasso_kkt_residual(A, instance.y, sol.x_hat, lambda));
    const double mse = (instance.x - sol.x_hat).squaredNorm() / N;
    if (mse < out.mse_linear) {
      out.mse_linear = mse;
      out.best_lambda = lambda;
    }
  }
  out.mse_db = out.mse_linear > 0.0 ? 10.0 * std::log10(out.mse_linear) : -kInf;
  return out;
}

ExactMmseResult mmse_exact_small(const Eigen::MatrixXd& A, const Eigen::VectorXd& y,
                                 double rho, double sigma2) {
  const int N = static_cast<int>(A.cols());
  const int K = static_cast<int>(A.rows());
  if (N > 20)
    throw std::invalid_argument("mmse_exact_small: support enumeration limited to N <= 20");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("mmse_exact_small: sigma2 must be > 0");
  if (!(rho >= 0.0 && rho <= 1.0))
    throw std::invalid_argument("mmse_exact_small: rho must be in [0, 1]");
  if (y.size() != K) throw std::invalid_argument("mmse_exact_small: length mismatch");

  ExactMmseResult out;
  out.x_hat = Eigen::VectorXd::Zero(N);
  if (rho == 0.0) {
    out.weight_sum = 1.0;
    out.support_count = 1;
    return out;
  }

  const double log_rho = std::log(rho);
  const double log_1mrho = rho < 1.0 ? std::log1p(-rho) : -kInf;
  const std::uint32_t masks = 1u << N;

  std::vector<double> log_weights;
  log_weights.reserve(masks);
  std::vector<int> support;
  support.reserve(N);

  // streaming logsumexp: rescale the accumulators whenever a new peak appears
  double peak = -kInf, acc_w = 0.0;
  Eigen::VectorXd acc_x = Eigen::VectorXd::Zero(N);
  Eigen::MatrixXd AT(K, N);
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(N);

  for (std::uint32_t mask = 0; mask < masks; ++mask) {
    const int pop = std::popcount(mask);
    if (rho == 1.0 && pop < N) continue;
    const double log_prior = pop * log_rho + (pop < N ? (N - pop) * log_1mrho : 0.0);

    support.clear();
    for (int n = 0; n < N; ++n)
      if (mask & (1u << n)) support.push_back(n);

    double log_like;
    mu.setZero();
    if (pop == 0) {
      log_like = -0.5 * (y.squaredNorm() / sigma2 + K * std::log(sigma2));
    } else {
      for (int j = 0; j < pop; ++j) AT.col(j) = A.col(support[j]);
      const auto At = AT.leftCols(pop);
      Eigen::MatrixXd cov = At * At.transpose();
      cov.diagonal().array() += sigma2;
      const Eigen::LLT<Eigen::MatrixXd> llt(cov);
      if (llt.info() != Eigen::Success)
        throw NumericalError("mmse_exact_small: covariance factorization failed");
      const Eigen::VectorXd half = llt.matrixL().solve(y);
      const double log_det =
          2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
      log_like = -0.5 * (half.squaredNorm() + log_det);
      const Eigen::VectorXd mu_t = At.transpose() * llt.solve(y);
      for (int j = 0; j < pop; ++j) mu(support[j]) = mu_t(j);
    }

    const double log_w = log_prior + log_like;
    log_weights.push_back(log_w);
    if (log_w > peak) {
      const double scale = std::exp(peak - log_w);
      acc_w *= scale;
      acc_x *= scale;
      peak = log_w;
    }
    const double w = std::exp(log_w - peak);
    acc_w += w;
    acc_x += w * mu;
  }

  out.x_hat = acc_x / acc_w;
  out.support_count = static_cast<long long>(log_weights.size());
  const double log_norm = peak + std::log(acc_w);
  double total = 0.0;
  for (double lw : log_weights) total += std::exp(lw - log_norm);
  out.weight_sum = total;
  return out;
}

}  // namespace oas
