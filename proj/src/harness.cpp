#include "oas/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "oas/baselines.hpp"
#include "oas/errors.hpp"
#include "oas/rng.hpp"

namespace oas {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNegInfSentinelDb = -400.0;  // serialized stand-in for -inf
constexpr int kSingularRetries = 3;

double linear_to_db(double mse) { return mse > 0.0 ? 10.0 * std::log10(mse) : -kInf; }

std::string format_db(double v) {
  char buf[64];
  if (std::isnan(v)) return "nan";
  if (!std::isfinite(v)) v = v < 0.0 ? kNegInfSentinelDb : -kNegInfSentinelDb;
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

double json_db(double v) {
  if (std::isnan(v)) return v;
  if (!std::isfinite(v)) return v < 0.0 ? kNegInfSentinelDb : -kNegInfSentinelDb;
  return v;
}

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

// One (swept value, method) cell of the sweep grid.
struct CellPlan {
  double value = 0.0;
  std::string method;
  enum class Kind { Strategy, Lasso, Mmse } kind = Kind::Strategy;
  SelectionKind strategy = SelectionKind::Random;
  OASConfig config;
  int S = 0;
  double entry_variance = 0.0;
};

OASConfig config_for_value(const ExperimentSpec& spec, double value, int& S_out) {
  OASConfig cfg = spec.base;
  S_out = spec.S;
  switch (spec.sweep_param) {
    case SweepParam::L:
      cfg.L = static_cast<int>(std::lround(value));
      break;
    case SweepParam::S:
      S_out = static_cast<int>(std::lround(value));
      break;
    case SweepParam::M:
      cfg.M = static_cast<int>(std::lround(value));
      break;
    case SweepParam::R:
      if (!(value > 0.0)) throw std::invalid_argument("sweep: R values must be > 0");
      cfg.K = static_cast<int>(std::lround(cfg.N / value));
      break;
  }
  return cfg;
}

std::vector<CellPlan> plan_cells(const ExperimentSpec& spec) {
  std::vector<CellPlan> cells;
  for (double value : spec.sweep_values) {
    int S = 0;
    const OASConfig cfg = config_for_value(spec, value, S);
    const double entry_var = spec.entry_variance > 0.0 ? spec.entry_variance : 1.0 / cfg.K;
    for (SelectionKind strat : spec.strategies) {
      CellPlan cell;
      cell.value = value;
      cell.method = to_string(strat);
      cell.kind = CellPlan::Kind::Strategy;
      cell.strategy = strat;
      cell.config = cfg;
      cell.config.strategy = strat;
      cell.S = S;
      cell.entry_variance = entry_var;
      cells.push_back(std::move(cell));
    }
    if (spec.baselines.lasso) {
      CellPlan cell;
      cell.value = value;
      cell.method = "lasso";
      cell.kind = CellPlan::Kind::Lasso;
      cell.config = cfg;
      cell.S = S;
      cell.entry_variance = entry_var;
      cells.push_back(std::move(cell));
    }
    if (spec.baselines.mmse) {
      CellPlan cell;
      cell.value = value;
      cell.method = "mmse";
      cell.kind = CellPlan::Kind::Mmse;
      cell.config = cfg;
      cell.S = S;
      cell.entry_variance = entry_var;
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

double true_rho(const ExperimentSpec& spec) {
  return spec.rho_true >= 0.0 ? spec.rho_true : spec.base.prior.rho;
}

// Linear MSE of one trial; throws SingularMatrixError when every retry fails.
double run_trial(const ExperimentSpec& spec, const CellPlan& cell, int cell_index, int trial,
                 const Codebook* fixed_cb) {
  const std::uint64_t tseed = trial_seed(spec.master_seed, cell_index, trial);
  const Eigen::VectorXd x =
      generate_signal(cell.config.N, true_rho(spec), seed_mix({tseed, seed_tags::kSignal}));

  Codebook local;
  const Codebook* cb = fixed_cb;
  if (!cb) {
    local = generate_codebook(cell.S, cell.config.N, cell.entry_variance,
                              seed_mix({tseed, seed_tags::kCodebook}));
    cb = &local;
  }
  const std::uint64_t noise_seed = seed_mix({tseed, seed_tags::kNoise});

  switch (cell.kind) {
    case CellPlan::Kind::Lasso: {
      const OneShotInstance inst =
          make_one_shot(*cb, cell.config.K, x, cell.config.sigma2_frame, noise_seed);
      const auto grid =
          default_lambda_grid(inst.sensing.rows, inst.y, spec.lambda_grid.count,
                              spec.lambda_grid.lo_frac, spec.lambda_grid.hi_frac);
      return lasso_oracle_mse(inst, grid).mse_linear;
    }
    case CellPlan::Kind::Mmse: {
      const OneShotInstance inst =
          make_one_shot(*cb, cell.config.K, x, cell.config.sigma2_frame, noise_seed);
      const auto est = mmse_exact_small(inst.sensing.rows, inst.y, cell.config.prior.rho,
                                        cell.config.sigma2_frame);
      return (x - est.x_hat).squaredNorm() / cell.config.N;
    }
    case CellPlan::Kind::Strategy:
      break;
  }

  OASConfig cfg = cell.config;
  for (int attempt = 0;; ++attempt) {
    cfg.rng_seed = attempt == 0
                       ? seed_mix({tseed, seed_tags::kStrategy})
                       : seed_mix({tseed, seed_tags::kStrategy, seed_tags::kRetry,
                                   static_cast<std::uint64_t>(attempt)});
    try {
      const OASResult res = run_oas(cfg, x, *cb, noise_seed);
      return res.mse_trajectory.back();
    } catch (const SingularMatrixError&) {
      if (attempt >= kSingularRetries) throw;
    }
  }
}

SweepRow aggregate(const std::string& param, const CellPlan& cell,
                   const std::vector<double>& trial_mse, int requested, double seconds) {
  SweepRow row;
  row.param = param;
  row.value = cell.value;
  row.method = cell.method;
  row.seconds = seconds;

  double sum = 0.0;
  int ok = 0;
  for (double v : trial_mse)
    if (!std::isnan(v)) {
      sum += v;
      ++ok;
    }
  row.trials = ok;
  row.valid = cell_valid(requested, ok);
  if (ok == 0) {
    row.mse_db = std::numeric_limits<double>::quiet_NaN();
    row.stderr_db = std::numeric_limits<double>::quiet_NaN();
    return row;
  }
  const double mean = sum / ok;
  double ss = 0.0;
  for (double v : trial_mse)
    if (!std::isnan(v)) ss += (v - mean) * (v - mean);
  const double se_linear = ok > 1 ? std::sqrt(ss / (ok - 1)) / std::sqrt(double(ok)) : 0.0;
  row.mse_db = linear_to_db(mean);
  // delta method: d(10 log10 m)/dm = 10 / (m ln 10)
  row.stderr_db = mean > 0.0 ? 10.0 / std::log(10.0) * se_linear / mean : 0.0;
  return row;
}

}  // namespace

SweepParam sweep_param_from_string(const std::string& name) {
  if (name == "L") return SweepParam::L;
  if (name == "S") return SweepParam::S;
  if (name == "M") return SweepParam::M;
  if (name == "R") return SweepParam::R;
  throw std::invalid_argument("unknown sweep parameter: " + name);
}

std::string to_string(SweepParam p) {
  switch (p) {
    case SweepParam::L: return "L";
    case SweepParam::S: return "S";
    case SweepParam::M: return "M";
    case SweepParam::R: return "R";
  }
  return "?";
}

void ExperimentSpec::validate() const {
  if (sweep_values.empty()) throw std::invalid_argument("ExperimentSpec: no sweep values");
  if (trials < 1) throw std::invalid_argument("ExperimentSpec: trials must be >= 1");
  if (strategies.empty() && !baselines.lasso && !baselines.mmse)
    throw std::invalid_argument("ExperimentSpec: no strategies or empirical baselines to run");
  if (format != "csv" && format != "json")
    throw std::invalid_argument("ExperimentSpec: format must be csv or json");
  if (rho_true >= 0.0 && rho_true > 1.0)
    throw std::invalid_argument("ExperimentSpec: rho_true must be in [0, 1]");
  for (double v : sweep_values) {
    int S = 0;
    const OASConfig cfg = config_for_value(*this, v, S);
    std::ostringstream where;
    where << to_string(sweep_param) << " = " << v;
    try {
      cfg.validate(S, cfg.N);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("ExperimentSpec at " + where.str() + ": " + e.what());
    }
    if (baselines.mmse && cfg.N > 20)
      throw std::invalid_argument("ExperimentSpec at " + where.str() +
                                  ": exact mmse baseline requires N <= 20");
  }
}

Eigen::VectorXd generate_signal(int N, double rho, std::uint64_t seed) {
  if (N < 1) throw std::invalid_argument("generate_signal: N must be >= 1");
  if (!(rho >= 0.0 && rho <= 1.0))
    throw std::invalid_argument("generate_signal: rho must be in [0, 1]");
  Rng rng(seed);
  Eigen::VectorXd x(N);
  for (int n = 0; n < N; ++n) {
    const bool active = rng.uniform() < rho;
    const double value = rng.normal();
    x(n) = active ? value : 0.0;
  }
  return x;
}

std::uint64_t trial_seed(std::uint64_t master, int cell, int trial) {
  return seed_mix({master, static_cast<std::uint64_t>(cell), static_cast<std::uint64_t>(trial)});
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("OAS_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  workers = std::min(std::max(workers, 1), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

SweepResult run_sweep(const ExperimentSpec& spec) {
  spec.validate();
  const std::vector<CellPlan> cells = plan_cells(spec);
  const std::string param = to_string(spec.sweep_param);
  const int workers = resolve_workers(spec.workers);

  SweepResult result;
  double last_value = std::numeric_limits<double>::quiet_NaN();
  int cell_index = 0;

  auto emit_reference_rows = [&](double value, const OASConfig& cfg) {
    if (!spec.baselines.reference_levels) return;
    const double R = static_cast<double>(cfg.N) / cfg.K;
    const auto levels = reference_levels_for(R, cfg.prior.rho, cfg.sigma2_frame);
    if (!levels) return;
    SweepRow lasso{param, value, "lasso_ref", levels->lasso_db, 0.0, 0, 0.0, true};
    SweepRow mmse{param, value, "mmse_ref", levels->mmse_db, 0.0, 0, 0.0, true};
    result.rows.push_back(std::move(lasso));
    result.rows.push_back(std::move(mmse));
  };

  for (const CellPlan& cell : cells) {
    if (!std::isnan(last_value) && cell.value != last_value) {
      int S = 0;
      emit_reference_rows(last_value, config_for_value(spec, last_value, S));
    }
    last_value = cell.value;

    Codebook fixed;
    const Codebook* fixed_ptr = nullptr;
    if (spec.fixed_codebook) {
      fixed = generate_codebook(
          cell.S, cell.config.N, cell.entry_variance,
          seed_mix({spec.master_seed, static_cast<std::uint64_t>(cell_index),
                    seed_tags::kFixedCodebook}));
      fixed_ptr = &fixed;
    }

    const auto t0 = std::chrono::steady_clock::now();
    std::vector<double> trial_mse(spec.trials, std::numeric_limits<double>::quiet_NaN());
    parallel_for(spec.trials, workers, [&](int t) {
      try {
        trial_mse[t] = run_trial(spec, cell, cell_index, t, fixed_ptr);
      } catch (const SingularMatrixError&) {
        // trial failed after retries; stays NaN and counts against the cell
      }
    });
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    result.rows.push_back(aggregate(param, cell, trial_mse, spec.trials, seconds));
    ++cell_index;
  }
  if (!cells.empty()) {
    int S = 0;
    emit_reference_rows(last_value, config_for_value(spec, last_value, S));
  }
  return result;
}

bool SweepResult::all_valid() const {
  for (const SweepRow& row : rows)
    if (!row.valid) return false;
  return true;
}

bool cell_valid(int requested_trials, int successful_trials) {
  return (requested_trials - successful_trials) * 10 <= requested_trials;
}

void emit_csv(const SweepResult& result, std::ostream& os) {
  os << "swept_param,value,method,mse_db,stderr_db,trials,seconds\n";
  for (const SweepRow& row : result.rows) {
    char seconds[32];
    std::snprintf(seconds, sizeof(seconds), "%.3f", row.seconds);
    os << row.param << ',' << format_value(row.value) << ',' << row.method << ','
       << format_db(row.mse_db) << ',' << format_db(row.stderr_db) << ',' << row.trials << ','
       << seconds << '\n';
  }
}

void emit_json(const SweepResult& result, std::ostream& os) {
  nlohmann::json rows = nlohmann::json::array();
  for (const SweepRow& row : result.rows) {
    rows.push_back({{"swept_param", row.param},
                    {"value", row.value},
                    {"method", row.method},
                    {"mse_db", json_db(row.mse_db)},
                    {"stderr_db", json_db(row.stderr_db)},
                    {"trials", row.trials},
                    {"seconds", row.seconds},
                    {"valid", row.valid}});
  }
  os << nlohmann::json{{"rows", rows}}.dump(2) << '\n';
}

void emit_results(const SweepResult& result, const std::string& format,
                  const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_results: cannot write " + path);
  if (format == "csv")
    emit_csv(result, out);
  else if (format == "json")
    emit_json(result, out);
  else
    throw std::invalid_argument("emit_results: format must be csv or json");
  if (!out) throw std::runtime_error("emit_results: write failed for " + path);
}

ExperimentSpec parse_spec_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("config: not valid JSON: ") + e.what());
  }

  ExperimentSpec spec;
  const auto require_int = [&](const char* key) {
    if (!j.contains(key)) throw std::invalid_argument(std::string("config: missing key ") + key);
    return j.at(key).get<int>();
  };

  if (!j.contains("sweep") || !j["sweep"].contains("param") || !j["sweep"].contains("values"))
    throw std::invalid_argument("config: missing sweep.param / sweep.values");
  spec.sweep_param = sweep_param_from_string(j["sweep"]["param"].get<std::string>());
  spec.sweep_values = j["sweep"]["values"].get<std::vector<double>>();

  spec.base.N = require_int("N");
  if (spec.sweep_param != SweepParam::R) spec.base.K = require_int("K");
  if (spec.sweep_param != SweepParam::L) spec.base.L = require_int("L");
  if (spec.sweep_param != SweepParam::M) spec.base.M = require_int("M");
  if (spec.sweep_param != SweepParam::S) spec.S = require_int("S");
  spec.base.sigma2_frame = j.value("sigma2", 0.01);
  spec.base.prior.rho = j.value("rho", 0.1);
  spec.rho_true = j.value("rho_true", -1.0);
  spec.entry_variance = j.value("entry_variance", 0.0);

  if (j.contains("strategies")) {
    spec.strategies.clear();
    for (const auto& name : j["strategies"])
      spec.strategies.push_back(selection_kind_from_string(name.get<std::string>()));
  }
  if (j.contains("baselines")) {
    const auto& b = j["baselines"];
    spec.baselines.lasso = b.value("lasso", false);
    spec.baselines.mmse = b.value("mmse", false);
    spec.baselines.reference_levels = b.value("reference_levels", false);
  }
  if (j.contains("lambda_grid")) {
    const auto& g = j["lambda_grid"];
    spec.lambda_grid.count = g.value("count", 30);
    spec.lambda_grid.lo_frac = g.value("lo_frac", 1e-3);
    spec.lambda_grid.hi_frac = g.value("hi_frac", 1.0);
  }
  spec.trials = j.value("trials", 200);
  spec.master_seed = j.value("seed", std::uint64_t{1});
  spec.out_path = j.value("out", std::string("results.csv"));
  spec.format = j.value("format", std::string("csv"));
  spec.fixed_codebook = j.value("fixed_codebook", false);
  spec.workers = j.value("workers", 0);
  return spec;
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec_json(buf.str());
}

std::optional<ReferenceLevels> reference_levels_for(double R, double rho, double sigma2) {
  if (std::abs(rho - 0.1) > 1e-12 || std::abs(sigma2 - 0.01) > 1e-12) return std::nullopt;
  struct Entry {
    double R;
    ReferenceLevels levels;
  };
  static constexpr Entry table[] = {
      {1.0, {-23.7988424961844, -26.7090331369231}},
      {2.0, {-21.7087863143831, -25.4574314892307}},
      {4.0, {-15.2756881199302, -19.4385388842104}},
      {5.0, {-13.2684000962942, -14.1837317839488}},
  };
  for (const Entry& e : table)
    if (std::abs(R - e.R) < 1e-9) return e.levels;
  return std::nullopt;
}

}  // namespace oas
