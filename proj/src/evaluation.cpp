#include "parted/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include "parted/parallel.hpp"
#include "parted/rng.hpp"

namespace parted {

namespace {

// sum_h sum_s d_h(s) sum_a pi_h(a|s) table_h(s,a)
double occupancy_expectation(const Matrix& occupancy, const Policy& policy, const StepTables& tables) {
  double total = 0.0;
  for (std::size_t h = 0; h < tables.size(); ++h) {
    for (std::size_t s = 0; s < tables[h].rows(); ++s) {
      if (occupancy(h, s) == 0.0) continue;
      double inner = 0.0;
      for (std::size_t a = 0; a < tables[h].cols(); ++a) {
        inner += policy.prob(static_cast<int>(h), static_cast<int>(s), static_cast<int>(a)) * tables[h](s, a);
      }
      total += occupancy(h, s) * inner;
    }
  }
  return total;
}

}  // namespace

EvalReport evaluate(const LinearMdp& mdp, const PessimisticSolution& solution) {
  const int H = mdp.horizon, S = mdp.num_states, A = mdp.num_actions;
  const int s1 = mdp.initial_state;
  EvalReport rep;
  rep.solver = solution.solver;
  rep.beta1 = solution.beta1;
  rep.beta2 = solution.beta2;

  const OptimalValues opt = exact_optimal_values(mdp);
  const PolicyValues pv = exact_policy_values(mdp, solution.policy);
  rep.vstar = opt.v(0, s1);
  rep.vpi = pv.v(0, s1);
  rep.subopt = rep.vstar - rep.vpi;

  rep.delta = evaluation_errors(mdp, solution);
  rep.min_delta = std::numeric_limits<double>::infinity();
  rep.max_delta = -std::numeric_limits<double>::infinity();
  rep.pessimistic = true;
  rep.within_penalty = true;
  for (int h = 0; h < H; ++h) {
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        const double d = rep.delta[h](s, a);
        rep.min_delta = std::min(rep.min_delta, d);
        rep.max_delta = std::max(rep.max_delta, d);
        if (d < -kPessimismTolerance) rep.pessimistic = false;
        const double bound = 2.0 * (solution.beta1 * solution.reward_bonus[h](s, a) +
                                    solution.beta2 * solution.value_bonus[h](s, a));
        if (d > bound + kPessimismTolerance) rep.within_penalty = false;
      }
    }
  }
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      double sum = 0.0;
      for (int h = 0; h < H; ++h) sum += solution.penalty[h](s, a);
      rep.max_penalty_sum = std::max(rep.max_penalty_sum, sum);
    }
  }

  const Matrix occ_hat = state_occupancy(mdp, solution.policy, s1);
  const Matrix occ_star = state_occupancy(mdp, opt.policy, s1);
  rep.term_pihat = -occupancy_expectation(occ_hat, solution.policy, rep.delta);
  rep.term_pistar = occupancy_expectation(occ_star, opt.policy, rep.delta);
  // <Q_hat_h(s,.), pi*_h(.|s) - pi_hat_h(.|s)> weighted by d*_h(s)
  double greedy = 0.0;
  for (int h = 0; h < H; ++h) {
    for (int s = 0; s < S; ++s) {
      if (occ_star(h, s) == 0.0) continue;
      double inner = 0.0;
      for (int a = 0; a < A; ++a) {
        inner += (opt.policy.prob(h, s, a) - solution.policy.prob(h, s, a)) * solution.q[h](s, a);
      }
      greedy += occ_star(h, s) * inner;
    }
  }
  rep.term_greedy = greedy;
  rep.residual = std::abs(rep.subopt - (rep.term_pihat + rep.term_pistar + rep.term_greedy));
  return rep;
}

EvalReport evaluate(const LinearMdp& mdp, const PessimisticSolution& solution, const OfflineDataset& data) {
  EvalReport rep = evaluate(mdp, solution);
  rep.coverage = coverage_diagnostics(mdp.features, data);
  rep.N = data.size();
  rep.seed = data.header.seed;
  return rep;
}

std::uint64_t cell_seed(std::uint64_t master, std::size_t solver_index, std::size_t n_index, std::size_t trial) {
  return hash64({master, solver_index, n_index, trial});
}

SweepRow run_cell(const LinearMdp& mdp, SolverKind solver, std::size_t n, std::uint64_t seed,
                  const std::string& behavior, const SolverSettings& settings) {
  SweepRow row;
  row.solver = std::string(solver_name(solver));
  row.N = n;
  row.seed = seed;
  const Policy pol = make_behavior_policy(mdp, behavior);
  const OfflineDataset data = collect(mdp, pol, n, seed, solver == SolverKind::pevi_oracle, behavior);
  SolverSettings local = settings;
  local.neural.net_seed = mix64(seed);
  const PessimisticSolution sol = run_solver(solver, data, mdp.features, local);
  const EvalReport rep = evaluate(mdp, sol, data);
  row.subopt = rep.subopt;
  row.vstar = rep.vstar;
  row.vpi = rep.vpi;
  row.min_delta = rep.min_delta;
  row.max_delta = rep.max_delta;
  row.decomp_residual = rep.residual;
  row.beta1 = rep.beta1;
  row.beta2 = rep.beta2;
  row.lambda_min_r = rep.coverage->lambda_min_trajectory;
  row.lambda_min_v = rep.coverage->lambda_min_step_overall();
  return row;
}

SweepTable sweep(const SweepSpec& spec) {
  if (spec.solvers.empty() || spec.n_grid.empty() || spec.trials < 1) {
    throw std::invalid_argument("sweep: solver list, N grid and trial count must be non-empty");
  }
  const std::size_t ns = spec.solvers.size(), nn = spec.n_grid.size(), nt = static_cast<std::size_t>(spec.trials);
  SweepTable table;
  table.rows.resize(ns * nn * nt);
  parallel_for(table.rows.size(), spec.jobs, [&](std::size_t cell) {
    const std::size_t si = cell / (nn * nt), ni = (cell / nt) % nn, ti = cell % nt;
    const std::uint64_t seed = cell_seed(spec.master_seed, si, ni, ti);
    const auto start = std::chrono::steady_clock::now();
    SweepRow row;
    try {
      row = run_cell(spec.mdp, spec.solvers[si], spec.n_grid[ni], seed, spec.behavior, spec.settings);
    } catch (const std::exception& e) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row = SweepRow{std::string(solver_name(spec.solvers[si])), spec.n_grid[ni], seed, 0, nan, nan, nan, nan,
                     nan, nan, nan, nan, nan, nan, 0.0, e.what()};
    }
    row.trial = static_cast<int>(ti);
    if (spec.record_wall_time) {
      row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
    table.rows[cell] = std::move(row);
  });

  for (std::size_t si = 0; si < ns; ++si) {
    for (std::size_t ni = 0; ni < nn; ++ni) {
      SweepAggregate agg;
      agg.solver = std::string(solver_name(spec.solvers[si]));
      agg.N = spec.n_grid[ni];
      std::vector<double> vals;
      for (std::size_t ti = 0; ti < nt; ++ti) {
        const auto& row = table.rows[(si * nn + ni) * nt + ti];
        if (row.error.empty()) {
          vals.push_back(row.subopt);
        } else {
          ++agg.failures;
        }
      }
      agg.count = static_cast<int>(vals.size());
      if (!vals.empty()) {
        agg.median = quantile(vals, 0.5);
        agg.q1 = quantile(vals, 0.25);
        agg.q3 = quantile(vals, 0.75);
        agg.mean = std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
      } else {
        agg.median = agg.q1 = agg.q3 = agg.mean = std::numeric_limits<double>::quiet_NaN();
      }
      table.aggregates.push_back(agg);
    }
  }
  return table;
}

double SweepTable::loglog_slope(const std::string& solver) const {
  std::vector<double> x, y;
  for (const auto& a : aggregates) {
    if (a.solver != solver) continue;
    if (!(a.median > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    x.push_back(std::log(static_cast<double>(a.N)));
    y.push_back(std::log(a.median));
  }
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  return ols_slope(x, y);
}

std::string sweep_csv(const SweepTable& table) {
  std::string out = "solver,N,seed,subopt,vstar,vpi,min_delta,max_delta,decomp_residual,beta1,beta2,"
                    "lambda_min_r,lambda_min_v,wall_ms\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.17g", v);
    out += buf;
  };
  for (const auto& r : table.rows) {
    out += r.solver;
    std::snprintf(buf, sizeof buf, ",%zu,%llu", r.N, static_cast<unsigned long long>(r.seed));
    out += buf;
    for (double v : {r.subopt, r.vstar, r.vpi, r.min_delta, r.max_delta, r.decomp_residual, r.beta1, r.beta2,
                     r.lambda_min_r, r.lambda_min_v, r.wall_ms}) {
      num(v);
    }
    out += '\n';
  }
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("ols_slope: need two or more paired points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

std::vector<PessimismTrial> pessimism_trials(const LinearMdp& mdp, std::size_t n, int trials, std::uint64_t master,
                                             const std::string& behavior, const LinearPartedConfig& config,
                                             int jobs) {
  const Policy pol = make_behavior_policy(mdp, behavior);
  std::vector<PessimismTrial> out(static_cast<std::size_t>(trials));
  parallel_for(out.size(), jobs, [&](std::size_t t) {
    const std::uint64_t seed = hash64({master, t});
    const OfflineDataset data = collect(mdp, pol, n, seed, false, behavior);
    const EvalReport rep = evaluate(mdp, solve_linear_parted(data, mdp.features, config).result);
    out[t] = PessimismTrial{seed, rep.pessimistic, rep.within_penalty, rep.min_delta, rep.subopt};
  });
  return out;
}

namespace {

CalibrationProbe probe(const CalibrationSpec& spec, double scale) {
  LinearPartedConfig cfg = spec.base;
  cfg.beta.mode = BetaSpec::Mode::theorem2;
  cfg.beta.c_beta1 = cfg.beta.c_beta2 = scale;
  const auto trials = pessimism_trials(spec.mdp, spec.N, spec.trials, spec.master_seed, spec.behavior, cfg, spec.jobs);
  CalibrationProbe p{scale, 0.0, true};
  int pass = 0;
  for (const auto& t : trials) {
    if (!t.pessimistic) continue;
    ++pass;
    if (!t.within_penalty) p.upper_bound_ok = false;
  }
  p.pass_rate = static_cast<double>(pass) / static_cast<double>(trials.size());
  return p;
}

bool accepted(const CalibrationProbe& p, double target) { return p.pass_rate >= target && p.upper_bound_ok; }

}  // namespace

CalibrationResult calibrate_beta(const CalibrationSpec& spec) {
  if (!(spec.scale_low > 0.0 && spec.scale_high > spec.scale_low)) {
    throw std::invalid_argument("calibrate_beta: need 0 < scale_low < scale_high");
  }
  CalibrationResult res;
  CalibrationProbe hi = probe(spec, spec.scale_high);
  res.probes.push_back(hi);
  if (!accepted(hi, spec.target_rate)) return res;
  CalibrationProbe lo = probe(spec, spec.scale_low);
  res.probes.push_back(lo);
  if (accepted(lo, spec.target_rate)) {
    res.found = true;
    res.scale = lo.scale;
    res.pass_rate = lo.pass_rate;
    return res;
  }
  double a = std::log(spec.scale_low), b = std::log(spec.scale_high);
  for (int i = 0; i < spec.bisection_steps; ++i) {
    const double mid = 0.5 * (a + b);
    CalibrationProbe p = probe(spec, std::exp(mid));
    res.probes.push_back(p);
    if (accepted(p, spec.target_rate)) {
      b = mid;
      hi = p;
    } else {
      a = mid;
    }
  }
  res.found = true;
  res.scale = hi.scale;
  res.pass_rate = hi.pass_rate;
  return res;
}

}  // namespace parted
