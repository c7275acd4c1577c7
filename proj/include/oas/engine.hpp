#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "oas/codebook.hpp"
#include "oas/estimators.hpp"
#include "oas/selection.hpp"

namespace oas {

struct OASConfig {
  int N = 0;  // signal length
  int K = 0;  // sensors per subframe
  int L = 0;  // samples targeted per subframe, L <= K
  int M = 0;  // subframe count
  double sigma2_frame = 0.01;  // noise variance over the full frame
  SparseGaussianPrior prior{};
  SelectionKind strategy = SelectionKind::Random;
  std::uint64_t rng_seed = 0;  // selection randomness
  double exhaustive_budget = 1e6;

  void validate(int codebook_size, int codebook_dim) const;
};

// Per-sample running state: statistic, accumulated decoupled noise variance,
// soft estimate, posterior distortion (+inf until first sensed), sense count.
struct BeliefState {
  Eigen::VectorXd statistic;
  Eigen::VectorXd sigma_hat2;
  Eigen::VectorXd x_hat;
  Eigen::VectorXd distortion;
  std::vector<int> count;

  explicit BeliefState(int N);
};

struct SubframeRecord {
  int m = 0;                        // subframe index, 1-based
  std::vector<int> targets;         // the L targeted sample indices, in distortion order
  std::vector<int> source_indices;  // codebook rows used this subframe
  Eigen::VectorXd decoupled;        // decoupled observations per target
  Eigen::VectorXd noise_variance;   // M ||f_l||^2 sigma2 per target
  double interference_obs = 0.0;    // ||A E^T x~||^2 before this subframe's update
  double interference_proj = 0.0;   // ||P A^T A E^T x~||^2 (columns convention)
};

struct OASResult {
  Eigen::VectorXd x_hat;
  std::vector<double> mse_trajectory;  // linear MSE after each subframe
  std::vector<SubframeRecord> subframes;
  std::uint64_t noise_seed = 0;
};

// The L indices with the largest posterior distortions; never-sensed samples
// (distortion +inf) outrank all finite ones, ties break by ascending index.
std::vector<int> worst_case_select(const BeliefState& beliefs, int L);

struct Decoupled {
  Eigen::VectorXd observations;   // F_m (y_m - W_m x~)
  Eigen::VectorXd filter_row_sq;  // ||f_l||^2 per row of the decoupling filter
};

// Cancels the estimated non-targeted samples and applies the pseudo-inverse
// of Q_m = A_m P_m^T. Throws SingularMatrixError when Q_m is ill-conditioned.
Decoupled decouple_subframe(const SensingMatrix& A, const std::vector<int>& targets,
                            const Eigen::VectorXd& x_hat, const Eigen::VectorXd& y);

// Accumulates statistic / noise variance / count for the targeted samples and
// refreshes their posterior moments with the normalized statistic
// y_n / count and effective variance sigma_hat2_n / count^2.
void update_beliefs(BeliefState& beliefs, const std::vector<int>& targets,
                    const Eigen::VectorXd& decoupled, const Eigen::VectorXd& filter_row_sq,
                    const OASConfig& config);

// 10 log10 of the mean squared error; -inf when the vectors coincide.
double mse_db(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat);

// One full adaptive run over M subframes. Pure function of its inputs: all
// randomness derives from config.rng_seed (selection) and noise_seed.
OASResult run_oas(const OASConfig& config, const Eigen::VectorXd& true_signal,
                  const Codebook& codebook, std::uint64_t noise_seed);

}  // namespace oas
