#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "parted/dataset.hpp"
#include "parted/mdp.hpp"
#include "parted/solution.hpp"
#include "parted/solvers.hpp"

namespace parted {

struct EvalReport {
  double subopt = 0.0;  ///< V*_1(s_1) - V^pi_hat_1(s_1)
  double vstar = 0.0;
  double vpi = 0.0;

  StepTables delta;  ///< B_h V_hat_{h+1} - Q_hat_h
  double min_delta = 0.0;
  double max_delta = 0.0;

  // SubOpt = term_pihat + term_pistar + term_greedy, expectations under exact occupancies.
  double term_pihat = 0.0;   ///< -sum_h E_pi_hat[delta_h]
  double term_pistar = 0.0;  ///< sum_h E_pi*[delta_h]
  double term_greedy = 0.0;  ///< sum_h E_pi*[<Q_hat_h, pi*_h - pi_hat_h>]
  double residual = 0.0;     ///< |SubOpt - sum of the three terms|

  /// delta_h >= -1e-10 everywhere.
  bool pessimistic = false;
  /// delta_h <= 2 (beta1 b_r + beta2 b_v) + 1e-10 everywhere.
  bool within_penalty = false;
  double max_penalty_sum = 0.0;  ///< max_{s,a} sum_h Gamma_h(s,a)

  std::optional<CoverageReport> coverage;

  std::string solver;
  std::size_t N = 0;
  std::uint64_t seed = 0;
  double beta1 = 0.0;
  double beta2 = 0.0;
};

inline constexpr double kPessimismTolerance = 1e-10;

EvalReport evaluate(const LinearMdp& mdp, const PessimisticSolution& solution);

/// Same plus coverage diagnostics and dataset metadata.
EvalReport evaluate(const LinearMdp& mdp, const PessimisticSolution& solution, const OfflineDataset& data);

struct SweepSpec {
  LinearMdp mdp;
  std::vector<SolverKind> solvers;
  std::vector<std::size_t> n_grid;
  int trials = 1;
  std::uint64_t master_seed = 0;
  std::string behavior = "uniform";
  SolverSettings settings;
  int jobs = 0;  ///< 0 selects the hardware concurrency
  bool record_wall_time = false;
};

struct SweepRow {
  std::string solver;
  std::size_t N = 0;
  std::uint64_t seed = 0;
  int trial = 0;
  double subopt = 0.0;
  double vstar = 0.0;
  double vpi = 0.0;
  double min_delta = 0.0;
  double max_delta = 0.0;
  double decomp_residual = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double lambda_min_r = 0.0;
  double lambda_min_v = 0.0;
  double wall_ms = 0.0;
  std::string error;  ///< non-empty when the cell failed
};

struct SweepAggregate {
  std::string solver;
  std::size_t N = 0;
  int count = 0;
  int failures = 0;
  double median = 0.0;
  double mean = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr() const { return q3 - q1; }
};

struct SweepTable {
  std::vector<SweepRow> rows;              ///< sorted by (solver order, N order, trial)
  std::vector<SweepAggregate> aggregates;  ///< per (solver, N), same order

  /// Least-squares slope of log(median SubOpt) on log N for one solver;
  /// NaN with fewer than two points or a non-positive median.
  double loglog_slope(const std::string& solver) const;
};

/// Per-cell seed: hash64({master, solver_index, n_index, trial_index}).
std::uint64_t cell_seed(std::uint64_t master, std::size_t solver_index, std::size_t n_index, std::size_t trial);

/// collect -> solve -> evaluate for one cell.
SweepRow run_cell(const LinearMdp& mdp, SolverKind solver, std::size_t n, std::uint64_t seed,
                  const std::string& behavior, const SolverSettings& settings);

/// Runs every (solver, N, trial) cell on a bounded worker pool; failures are
/// recorded per row and the sweep continues.
SweepTable sweep(const SweepSpec& spec);

/// Header plus one line per row, floats printed with 17 significant digits.
std::string sweep_csv(const SweepTable& table);

/// Median, quartiles by linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);

/// Ordinary least squares slope of y on x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y);

struct PessimismTrial {
  std::uint64_t seed = 0;
  bool pessimistic = false;
  bool within_penalty = false;
  double min_delta = 0.0;
  double subopt = 0.0;
};

/// Pessimism statistics of the linear solver over seeds hash64({master, trial}).
std::vector<PessimismTrial> pessimism_trials(const LinearMdp& mdp, std::size_t n, int trials, std::uint64_t master,
                                             const std::string& behavior, const LinearPartedConfig& config,
                                             int jobs = 0);

struct CalibrationSpec {
  LinearMdp mdp;
  std::size_t N = 200;
  int trials = 50;
  std::uint64_t master_seed = 0;
  std::string behavior = "uniform";
  LinearPartedConfig base;  ///< beta mode forced to theorem2; c_beta1 = c_beta2 = scale
  double target_rate = 0.9;
  double scale_low = 1e-4;
  double scale_high = 10.0;
  int bisection_steps = 24;
  int jobs = 0;
};

struct CalibrationProbe {
  double scale = 0.0;
  double pass_rate = 0.0;
  bool upper_bound_ok = false;
};

struct CalibrationResult {
  bool found = false;
  double scale = 0.0;  ///< smallest passing common constant C_beta1 = C_beta2
  double pass_rate = 0.0;
  std::vector<CalibrationProbe> probes;
};

/// Bisection in log-scale for the smallest common theorem2 constant whose
/// pessimism rate reaches target_rate with the penalty upper bound holding
/// in every pessimistic trial.
CalibrationResult calibrate_beta(const CalibrationSpec& spec);

}  // namespace parted
