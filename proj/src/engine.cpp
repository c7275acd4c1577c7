#include "oas/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "oas/errors.hpp"
#include "oas/rng.hpp"

namespace oas {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void OASConfig::validate(int codebook_size, int codebook_dim) const {
  std::ostringstream bad;
  if (N < 1) bad << "N must be >= 1; ";
  if (!(L >= 1 && L <= K)) bad << "need 1 <= L <= K; ";
  if (K > codebook_size) bad << "need K <= S; ";
  if (L > N) bad << "need L <= N; ";
  if (M < 1) bad << "M must be >= 1; ";
  if (!(sigma2_frame > 0.0)) bad << "sigma2_frame must be > 0; ";
  if (!(prior.rho >= 0.0 && prior.rho <= 1.0)) bad << "rho must be in [0, 1]; ";
  if (codebook_dim != N) bad << "codebook dimension differs from N; ";
  const std::string msg = bad.str();
  if (!msg.empty()) throw std::invalid_argument("OASConfig: " + msg);
}

BeliefState::BeliefState(int N)
    : statistic(Eigen::VectorXd::Zero(N)),
      sigma_hat2(Eigen::VectorXd::Zero(N)),
      x_hat(Eigen::VectorXd::Zero(N)),
      distortion(Eigen::VectorXd::Constant(N, kInf)),
      count(N, 0) {}

std::vector<int> worst_case_select(const BeliefState& beliefs, int L) {
  const int N = static_cast<int>(beliefs.distortion.size());
  if (L < 1 || L > N) throw std::invalid_argument("worst_case_select: need 1 <= L <= N");
  std::vector<int> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + L, order.end(), [&](int a, int b) {
    const double da = beliefs.distortion(a), db = beliefs.distortion(b);
    return da != db ? da > db : a < b;
  });
  order.resize(L);
  return order;
}

Decoupled decouple_subframe(const SensingMatrix& A, const std::vector<int>& targets,
                            const Eigen::VectorXd& x_hat, const Eigen::VectorXd& y) {
  const int K = A.sensors();
  const int N = A.dim();
  const int L = static_cast<int>(targets.size());
  if (x_hat.size() != N)
    throw std::invalid_argument("decouple_subframe: estimate length mismatch");
  if (y.size() != K) throw std::invalid_argument("decouple_subframe: observation length mismatch");
  if (L > K) throw std::invalid_argument("decouple_subframe: need |targets| <= K");
  sel(targets, N);  // validates the target set

  // y - W x~ computed as y - A (E^T x~): zero the targeted entries of x_hat
  Eigen::VectorXd padded = x_hat;
  for (int i : targets) padded(i) = 0.0;
  const Eigen::VectorXd r = y - A.rows * padded;

  Eigen::MatrixXd Q(K, L);
  for (int l = 0; l < L; ++l) Q.col(l) = A.rows.col(targets[l]);

  const Eigen::MatrixXd F = pseudo_inverse(Q);
  return {F * r, F.rowwise().squaredNorm()};
}

void update_beliefs(BeliefState& beliefs, const std::vector<int>& targets,
                    const Eigen::VectorXd& decoupled, const Eigen::VectorXd& filter_row_sq,
                    const OASConfig& config) {
  const int L = static_cast<int>(targets.size());
  if (decoupled.size() != L || filter_row_sq.size() != L)
    throw std::invalid_argument("update_beliefs: length mismatch");

  for (int l = 0; l < L; ++l) {
    const int n = targets[l];
    beliefs.statistic(n) += decoupled(l);
    beliefs.sigma_hat2(n) += config.M * filter_row_sq(l) * config.sigma2_frame;
    beliefs.count[n] += 1;
  }
  for (int n : targets) {
    const double c = static_cast<double>(beliefs.count[n]);
    const PosteriorMoments mom = sparse_gaussian_moments(
        beliefs.statistic(n) / c, beliefs.sigma_hat2(n) / (c * c), config.prior.rho);
    beliefs.x_hat(n) = mom.mean;
    beliefs.distortion(n) = mom.variance;
  }
}

double mse_db(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat) {
  if (x.size() != x_hat.size()) throw std::invalid_argument("mse_db: length mismatch");
  const double mse = (x - x_hat).squaredNorm() / static_cast<double>(x.size());
  return mse > 0.0 ? 10.0 * std::log10(mse) : -kInf;
}

OASResult run_oas(const OASConfig& config, const Eigen::VectorXd& true_signal,
                  const Codebook& codebook, std::uint64_t noise_seed) {
  config.validate(codebook.size(), codebook.dim());
  if (true_signal.size() != config.N)
    throw std::invalid_argument("run_oas: signal length differs from N");

  BeliefState beliefs(config.N);
  Rng noise(noise_seed);
  const double subframe_sd = std::sqrt(config.M * config.sigma2_frame);

  OASResult result;
  result.noise_seed = noise_seed;
  result.mse_trajectory.reserve(config.M);
  result.subframes.reserve(config.M);

  for (int m = 1; m <= config.M; ++m) {
    const std::vector<int> targets = worst_case_select(beliefs, config.L);

    std::vector<int> sources;
    const std::uint64_t sel_seed = seed_mix({config.rng_seed, static_cast<std::uint64_t>(m)});
    switch (config.strategy) {
      case SelectionKind::Random:
        sources = select_random(codebook, config.K, sel_seed);
        break;
      case SelectionKind::Stepwise:
        sources = select_stepwise(codebook, config.K, targets, beliefs.x_hat, sel_seed);
        break;
      case SelectionKind::Exhaustive:
        sources = select_exhaustive(codebook, config.K, targets, beliefs.x_hat,
                                    config.exhaustive_budget);
        break;
    }
    const SensingMatrix A = gather_rows(codebook, sources);

    Eigen::VectorXd z(config.K);
    for (int k = 0; k < config.K; ++k) z(k) = subframe_sd * noise.normal();
    const Eigen::VectorXd y = A.rows * true_signal + z;

    // interference diagnostics against the pre-update estimate
    Eigen::VectorXd padded = beliefs.x_hat;
    for (int i : targets) padded(i) = 0.0;
    const Eigen::VectorXd leak = A.rows * padded;
    Eigen::VectorXd proj(config.L);
    for (int l = 0; l < config.L; ++l) proj(l) = A.rows.col(targets[l]).dot(leak);

    Decoupled dec;
    try {
      dec = decouple_subframe(A, targets, beliefs.x_hat, y);
    } catch (const SingularMatrixError& e) {
      std::ostringstream msg;
      msg << "subframe " << m << " of " << config.M << " (sources";
      for (int s : sources) msg << ' ' << s;
      msg << "): " << e.what();
      throw SingularMatrixError(msg.str(), e.condition());
    }

    update_beliefs(beliefs, targets, dec.observations, dec.filter_row_sq, config);

    SubframeRecord rec;
    rec.m = m;
    rec.targets = targets;
    rec.source_indices = sources;
    rec.decoupled = dec.observations;
    rec.noise_variance = config.M * config.sigma2_frame * dec.filter_row_sq;
    rec.interference_obs = leak.squaredNorm();
    rec.interference_proj = proj.squaredNorm();
    result.subframes.push_back(std::move(rec));

    result.mse_trajectory.push_back((true_signal - beliefs.x_hat).squaredNorm() /
                                    static_cast<double>(config.N));
  }

  result.x_hat = beliefs.x_hat;
  return result;
}

}  // namespace oas
