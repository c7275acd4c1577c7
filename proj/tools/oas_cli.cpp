#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "oas/baselines.hpp"
#include "oas/engine.hpp"
#include "oas/harness.hpp"
#include "oas/rng.hpp"

namespace {

struct SingleArgs {
  int N = 200, K = 50, L = 25, M = 60, S = 1000;
  double sigma2 = 0.01, rho = 0.1, entry_variance = 0.0;
  std::string strategy = "random";
  std::uint64_t seed = 1;
  std::string out;
};

struct BaselineArgs {
  int N = 200, K = 200, S = 1000, trials = 200, grid_count = 30;
  double sigma2 = 0.01, rho = 0.1, entry_variance = 0.0;
  double grid_lo = 1e-3, grid_hi = 1.0;
  std::string method = "lasso";
  std::uint64_t seed = 1;
};

int run_single(const SingleArgs& a) {
  oas::OASConfig cfg;
  cfg.N = a.N;
  cfg.K = a.K;
  cfg.L = a.L;
  cfg.M = a.M;
  cfg.sigma2_frame = a.sigma2;
  cfg.prior.rho = a.rho;
  cfg.strategy = oas::selection_kind_from_string(a.strategy);
  cfg.rng_seed = oas::seed_mix({a.seed, oas::seed_tags::kStrategy});

  const double entry_var = a.entry_variance > 0.0 ? a.entry_variance : 1.0 / a.K;
  const auto cb = oas::generate_codebook(a.S, a.N, entry_var,
                                         oas::seed_mix({a.seed, oas::seed_tags::kCodebook}));
  const auto x =
      oas::generate_signal(a.N, a.rho, oas::seed_mix({a.seed, oas::seed_tags::kSignal}));
  const auto res = oas::run_oas(cfg, x, cb, oas::seed_mix({a.seed, oas::seed_tags::kNoise}));

  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out);
    if (!file) {
      std::cerr << "cannot write " << a.out << "\n";
      return 2;
    }
    os = &file;
  }
  *os << "subframe,mse_db\n";
  for (std::size_t m = 0; m < res.mse_trajectory.size(); ++m) {
    const double db = res.mse_trajectory[m] > 0.0
                          ? 10.0 * std::log10(res.mse_trajectory[m])
                          : -400.0;
    char line[64];
    std::snprintf(line, sizeof(line), "%zu,%.6f\n", m + 1, db);
    *os << line;
  }
  std::fprintf(stderr, "final mse: %.6f dB\n", oas::mse_db(x, res.x_hat));
  return 0;
}

int run_baseline(const BaselineArgs& a) {
  const double entry_var = a.entry_variance > 0.0 ? a.entry_variance : 1.0 / a.K;
  double sum = 0.0, sumsq = 0.0;
  double worst_kkt = 0.0;
  for (int t = 0; t < a.trials; ++t) {
    const std::uint64_t tseed = oas::trial_seed(a.seed, 0, t);
    const auto x =
        oas::generate_signal(a.N, a.rho, oas::seed_mix({tseed, oas::seed_tags::kSignal}));
    const auto cb = oas::generate_codebook(a.S, a.N, entry_var,
                                           oas::seed_mix({tseed, oas::seed_tags::kCodebook}));
    const auto inst = oas::make_one_shot(cb, a.K, x, a.sigma2,
                                         oas::seed_mix({tseed, oas::seed_tags::kNoise}));
    double mse = 0.0;
    if (a.method == "lasso") {
      const auto grid = oas::default_lambda_grid(inst.sensing.rows, inst.y, a.grid_count,
                                                 a.grid_lo, a.grid_hi);
      const auto r = oas::lasso_oracle_mse(inst, grid);
      mse = r.mse_linear;
      worst_kkt = std::max(worst_kkt, r.worst_kkt);
    } else if (a.method == "mmse") {
      const auto r = oas::mmse_exact_small(inst.sensing.rows, inst.y, a.rho, a.sigma2);
      mse = (x - r.x_hat).squaredNorm() / a.N;
    } else {
      std::cerr << "unknown baseline method: " << a.method << "\n";
      return 2;
    }
    sum += mse;
    sumsq += mse * mse;
  }
  const double mean = sum / a.trials;
  const double var = a.trials > 1 ? (sumsq - a.trials * mean * mean) / (a.trials - 1) : 0.0;
  const double se_db =
      mean > 0.0 ? 10.0 / std::log(10.0) * std::sqrt(std::max(var, 0.0) / a.trials) / mean : 0.0;
  const double db = mean > 0.0 ? 10.0 * std::log10(mean) : -400.0;
  std::printf("%s: %.4f dB (stderr %.4f dB, %d trials)\n", a.method.c_str(), db, se_db,
              a.trials);
  if (a.method == "lasso") std::printf("worst kkt residual: %.3e\n", worst_kkt);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"oversampled adaptive sensing benchmark"};
  app.require_subcommand(1);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "run a Monte Carlo sweep from a JSON config");
  std::string config_path;
  sweep->add_option("--config", config_path, "JSON experiment config")->required();
  std::uint64_t seed_override = 0;
  int trials_override = 0, workers_override = -1;
  std::string out_override, format_override;
  bool fixed_codebook = false;
  auto* seed_opt = sweep->add_option("--seed", seed_override, "master seed override");
  auto* trials_opt = sweep->add_option("--trials", trials_override, "trials per cell override");
  auto* workers_opt = sweep->add_option("--workers", workers_override, "worker thread count");
  auto* out_opt = sweep->add_option("--out", out_override, "output path override");
  auto* format_opt =
      sweep->add_option("--format", format_override, "output format override (csv|json)");
  sweep->add_flag("--fixed-codebook", fixed_codebook,
                  "share one codebook across the trials of each cell");

  // single
  auto* single = app.add_subcommand("single", "run one adaptive trial, print the trajectory");
  SingleArgs sa;
  single->add_option("--N", sa.N, "signal length");
  single->add_option("--K", sa.K, "sensors per subframe");
  single->add_option("--L", sa.L, "targets per subframe");
  single->add_option("--M", sa.M, "subframes");
  single->add_option("--S", sa.S, "codebook size");
  single->add_option("--sigma2", sa.sigma2, "full-frame noise variance");
  single->add_option("--rho", sa.rho, "sparsity factor");
  single->add_option("--entry-variance", sa.entry_variance,
                     "codebook entry variance (default 1/K)");
  single->add_option("--strategy", sa.strategy, "random|stepwise|exhaustive");
  single->add_option("--seed", sa.seed, "trial seed");
  single->add_option("--out", sa.out, "trajectory CSV path (default stdout)");

  // baseline
  auto* baseline = app.add_subcommand("baseline", "run a non-adaptive one-shot baseline");
  BaselineArgs ba;
  baseline->add_option("--method", ba.method, "lasso|mmse")->required();
  baseline->add_option("--N", ba.N, "signal length");
  baseline->add_option("--K", ba.K, "sensors");
  baseline->add_option("--S", ba.S, "codebook size");
  baseline->add_option("--sigma2", ba.sigma2, "full-frame noise variance");
  baseline->add_option("--rho", ba.rho, "sparsity factor");
  baseline->add_option("--entry-variance", ba.entry_variance,
                       "codebook entry variance (default 1/K)");
  baseline->add_option("--trials", ba.trials, "trial count");
  baseline->add_option("--seed", ba.seed, "master seed");
  baseline->add_option("--grid-count", ba.grid_count, "lasso lambda grid size");
  baseline->add_option("--grid-lo", ba.grid_lo, "lasso grid lower fraction");
  baseline->add_option("--grid-hi", ba.grid_hi, "lasso grid upper fraction");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sweep->parsed()) {
      oas::ExperimentSpec spec = oas::load_spec(config_path);
      if (*seed_opt) spec.master_seed = seed_override;
      if (*trials_opt) spec.trials = trials_override;
      if (*workers_opt) spec.workers = workers_override;
      if (*out_opt) spec.out_path = out_override;
      if (*format_opt) spec.format = format_override;
      if (fixed_codebook) spec.fixed_codebook = true;

      const oas::SweepResult result = oas::run_sweep(spec);
      oas::emit_results(result, spec.format, spec.out_path);
      oas::emit_csv(result, std::cout);
      if (!result.all_valid()) {
        std::cerr << "warning: at least one sweep cell exceeded the 10% trial-failure limit\n";
        return 1;
      }
      return 0;
    }
    if (single->parsed()) return run_single(sa);
    if (baseline->parsed()) return run_baseline(ba);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
