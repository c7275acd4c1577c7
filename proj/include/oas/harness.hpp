#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "oas/engine.hpp"

namespace oas {

enum class SweepParam { L, S, M, R };

SweepParam sweep_param_from_string(const std::string& name);
std::string to_string(SweepParam p);

struct BaselineToggles {
  bool lasso = false;             // empirical oracle-lambda lasso per trial
  bool mmse = false;              // exact small-N posterior mean per trial
  bool reference_levels = false;  // published asymptotic benchmark rows
};

struct LambdaGridSpec {
  int count = 30;
  double lo_frac = 1e-3;
  double hi_frac = 1.0;
};

struct ExperimentSpec {
  OASConfig base;                // N, K, L, M, sigma2, prior; strategy field unused here
  int S = 1000;                  // codebook size (unless swept)
  double entry_variance = 0.0;   // <= 0: default 1/K for the cell
  double rho_true = -1.0;        // < 0: matched to the postulated prior
  SweepParam sweep_param = SweepParam::L;
  std::vector<double> sweep_values;
  int trials = 200;
  std::vector<SelectionKind> strategies{SelectionKind::Random};
  BaselineToggles baselines;
  LambdaGridSpec lambda_grid;
  std::string out_path = "results.csv";
  std::string format = "csv";
  std::uint64_t master_seed = 1;
  int workers = 0;  // 0: OAS_WORKERS env, then hardware concurrency
  bool fixed_codebook = false;

  void validate() const;
};

struct SweepRow {
  std::string param;
  double value = 0.0;
  std::string method;
  double mse_db = 0.0;
  double stderr_db = 0.0;
  int trials = 0;  // successful trials behind the mean
  double seconds = 0.0;
  bool valid = true;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  bool all_valid() const;
};

// A cell stays valid while failed trials are at most 10% of those requested.
bool cell_valid(int requested_trials, int successful_trials);

// i.i.d. Bernoulli(rho) x N(0,1) samples.
Eigen::VectorXd generate_signal(int N, double rho, std::uint64_t seed);

// Seed-derivation scheme: every trial stream is a pure function of
// (master seed, cell index, trial index) plus a purpose tag.
namespace seed_tags {
inline constexpr std::uint64_t kSignal = 1;
inline constexpr std::uint64_t kCodebook = 2;
inline constexpr std::uint64_t kNoise = 3;
inline constexpr std::uint64_t kStrategy = 4;
inline constexpr std::uint64_t kFixedCodebook = 5;
inline constexpr std::uint64_t kRetry = 6;
}  // namespace seed_tags

std::uint64_t trial_seed(std::uint64_t master, int cell, int trial);

// Runs every (swept value x method) cell for the configured trial count and
// aggregates to MSE in dB of the mean linear MSE. Deterministic given the
// master seed, independent of the worker count.
SweepResult run_sweep(const ExperimentSpec& spec);

void emit_csv(const SweepResult& result, std::ostream& os);
void emit_json(const SweepResult& result, std::ostream& os);
void emit_results(const SweepResult& result, const std::string& format,
                  const std::string& path);

// Asymptotic benchmark levels (LASSO / MMSE) for rho = 0.1, sigma2 = 0.01,
// keyed by compression rate R = N/K.
struct ReferenceLevels {
  double lasso_db = 0.0;
  double mmse_db = 0.0;
};
std::optional<ReferenceLevels> reference_levels_for(double R, double rho, double sigma2);

// Parses the JSON experiment config; fields not being swept are required.
ExperimentSpec parse_spec_json(const std::string& text);
ExperimentSpec load_spec(const std::string& path);

// Worker-count resolution: explicit > OAS_WORKERS env > hardware concurrency.
int resolve_workers(int requested);

// Index-parallel loop used for trials; rethrows the first worker exception.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

}  // namespace oas
