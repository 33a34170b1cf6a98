#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "parted/evaluation.hpp"
#include "support.hpp"

using namespace parted;

namespace {

// Solution built directly from given Q tables (greedy policy, V from Q).
PessimisticSolution solution_from_q(const LinearMdp& m, const StepTables& q) {
  PessimisticSolution sol;
  sol.solver = "manual";
  sol.horizon = m.horizon;
  sol.num_states = m.num_states;
  sol.num_actions = m.num_actions;
  sol.q = q;
  sol.v = Matrix(m.horizon + 1, m.num_states);
  std::vector<int> acts;
  for (int h = 0; h < m.horizon; ++h)
    for (int s = 0; s < m.num_states; ++s) {
      const int a = argmax_first(q[h].row(s));
      acts.push_back(a);
      sol.v(h, s) = q[h](s, a);
    }
  sol.policy = Policy::deterministic(m.horizon, m.num_states, m.num_actions, acts);
  const Matrix zero(m.num_states, m.num_actions);
  sol.reward_hat = sol.transition_value_hat = sol.reward_bonus = sol.value_bonus = sol.penalty =
      StepTables(m.horizon, zero);
  return sol;
}

SolverSettings zero_beta_settings() {
  SolverSettings s;
  s.linear.beta.mode = BetaSpec::Mode::explicit_values;
  return s;
}

}  // namespace

TEST_CASE("evaluate") {
  const LinearMdp m = generate_random_mdp(1, 6, 3, 4, 4, 1.0);
  const OptimalValues opt = exact_optimal_values(m);

  SUBCASE("optimal Q gives zero suboptimality and zero evaluation error") {
    const EvalReport r = evaluate(m, solution_from_q(m, opt.q));
    CHECK(std::abs(r.subopt) <= 1e-12);
    CHECK(std::abs(r.min_delta) <= 1e-12);
    CHECK(std::abs(r.max_delta) <= 1e-12);
    CHECK(r.pessimistic);
    CHECK(r.vstar == doctest::Approx(opt.v(0, m.initial_state)));
  }
  SUBCASE("zero Q follows the all-zeros policy") {
    const EvalReport r = evaluate(m, solution_from_q(m, StepTables(4, Matrix(6, 3))));
    const std::vector<int> zeros(24, 0);
    const double v0 = exact_policy_values(m, Policy::deterministic(4, 6, 3, zeros)).v(0, m.initial_state);
    CHECK(r.subopt == doctest::Approx(opt.v(0, m.initial_state) - v0).epsilon(1e-13));
    CHECK(r.pessimistic);
    CHECK(r.residual <= 1e-12);
  }
  SUBCASE("random solutions satisfy the decomposition") {
    Rng rng(2);
    for (int rep = 0; rep < 50; ++rep) {
      StepTables q(4, Matrix(6, 3));
      for (Matrix& t : q)
        for (double& x : t.flat()) x = 4.0 * rng.uniform();
      const PessimisticSolution sol = solution_from_q(m, q);
      const EvalReport r = evaluate(m, sol);
      const double direct = opt.v(0, m.initial_state) - exact_policy_values(m, sol.policy).v(0, m.initial_state);
      CHECK(r.subopt == doctest::Approx(direct).epsilon(1e-13));
      CHECK(std::abs(r.term_pihat + r.term_pistar + r.term_greedy - direct) <= 1e-8);
      CHECK(r.residual <= 1e-8);
      CHECK(r.term_greedy <= 1e-12);  // pi_hat is greedy in Q_hat
    }
  }
  SUBCASE("dataset metadata and coverage") {
    const OfflineDataset d = collect(m, Policy::uniform(4, 6, 3), 30, 5);
    LinearPartedConfig c;
    const PessimisticSolution sol = solve_linear_parted(d, m.features, c).result;
    const EvalReport r = evaluate(m, sol, d);
    CHECK(r.coverage.has_value());
    CHECK(r.N == 30);
    CHECK(r.seed == 5);
    CHECK(r.solver == "parted-linear");
    CHECK(r.beta1 == sol.beta1);
  }
}

TEST_CASE("statistics helpers") {
  CHECK(quantile({3.0, 1.0, 2.0}, 0.5) == 2.0);
  CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.5) == 2.5);
  CHECK(quantile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.25) == 2.0);
  CHECK_THROWS_AS(quantile({}, 0.5), std::invalid_argument);
  CHECK(ols_slope({1.0, 2.0, 3.0}, {2.0, 4.0, 6.0}) == doctest::Approx(2.0));
  CHECK(ols_slope({0.0, 1.0, 2.0, 3.0}, {1.0, 0.0, -1.0, -2.0}) == doctest::Approx(-1.0));
  CHECK(cell_seed(7, 1, 2, 3) == hash64({7, 1, 2, 3}));
  CHECK(cell_seed(7, 1, 2, 3) != cell_seed(7, 1, 3, 2));
}

TEST_CASE("sweep") {
  const LinearMdp m = generate_random_mdp(3, 5, 3, 3, 3, 1.0);
  SweepSpec spec;
  spec.mdp = m;
  spec.solvers = {SolverKind::parted_linear};
  spec.n_grid = {60};
  spec.trials = 1;
  spec.master_seed = 11;
  spec.jobs = 1;

  SUBCASE("degenerate sweep equals a direct cell") {
    const SweepTable t = sweep(spec);
    REQUIRE(t.rows.size() == 1);
    const SweepRow direct = run_cell(m, SolverKind::parted_linear, 60, cell_seed(11, 0, 0, 0), "uniform", spec.settings);
    CHECK(t.rows[0].subopt == direct.subopt);
    CHECK(t.rows[0].seed == direct.seed);
    CHECK(t.rows[0].beta2 == direct.beta2);
    CHECK(t.aggregates.size() == 1);
    CHECK(t.aggregates[0].median == direct.subopt);
  }
  SUBCASE("CSV layout, ordering and determinism across worker counts") {
    spec.solvers = {SolverKind::parted_linear, SolverKind::uniform_split, SolverKind::pevi_oracle};
    spec.n_grid = {40, 80};
    spec.trials = 3;
    const SweepTable a = sweep(spec);
    spec.jobs = 3;
    const SweepTable b = sweep(spec);
    CHECK(sweep_csv(a) == sweep_csv(b));
    const std::string csv = sweep_csv(a);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "solver,N,seed,subopt,vstar,vpi,min_delta,max_delta,decomp_residual,beta1,beta2,lambda_min_r,"
                  "lambda_min_v,wall_ms");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 3 * 2 * 3);
    CHECK(a.rows[0].solver == "parted-linear");
    CHECK(a.rows[6].solver == "uniform-split");
    CHECK(a.rows[3].N == 80);
    CHECK(a.rows[17].solver == "pevi-oracle");
    for (const auto& r : a.rows) {
      CHECK(r.error.empty());
      CHECK(r.wall_ms == 0.0);
      CHECK(r.decomp_residual <= 1e-8);
    }
    CHECK(a.aggregates.size() == 6);
  }
  SUBCASE("failed cells are recorded and the sweep continues") {
    spec.solvers = {SolverKind::parted_linear};
    spec.settings.linear.lambda1 = -1.0;
    const SweepTable t = sweep(spec);
    REQUIRE(t.rows.size() == 1);
    CHECK_FALSE(t.rows[0].error.empty());
    CHECK(std::isnan(t.rows[0].subopt));
    CHECK(t.aggregates[0].failures == 1);
  }
  SUBCASE("unpenalised least squares is consistent on covered data") {
    const LinearMdp clean = generate_random_mdp(1, 8, 4, 5, 6, 1.0, RewardNoise::none);
    spec.mdp = clean;
    spec.settings = zero_beta_settings();
    spec.n_grid = {100, 3200};
    spec.trials = 10;
    const SweepTable t = sweep(spec);
    CHECK(t.aggregates[1].median < t.aggregates[0].median);
    CHECK(t.aggregates[1].median <= 0.05 * t.rows[0].vstar);
    CHECK(t.loglog_slope("parted-linear") < 0.0);
  }
  SUBCASE("rejects empty grids") {
    spec.n_grid.clear();
    CHECK_THROWS_AS(sweep(spec), std::invalid_argument);
  }
}

TEST_CASE("pessimism trials and calibration") {
  const LinearMdp m = generate_random_mdp(4, 4, 2, 3, 3, 1.0);
  LinearPartedConfig huge;
  huge.beta.c_beta1 = huge.beta.c_beta2 = 10.0;
  for (const PessimismTrial& t : pessimism_trials(m, 50, 5, 1, "uniform", huge, 1)) {
    CHECK(t.pessimistic);
    CHECK(t.within_penalty);
  }
  CalibrationSpec spec;
  spec.mdp = m;
  spec.N = 50;
  spec.trials = 10;
  spec.master_seed = 3;
  spec.bisection_steps = 10;
  spec.jobs = 1;
  const CalibrationResult res = calibrate_beta(spec);
  REQUIRE(res.found);
  CHECK(res.pass_rate >= 0.9);
  for (const CalibrationProbe& p : res.probes)
    if (p.pass_rate >= 0.9 && p.upper_bound_ok) CHECK(p.scale >= res.scale);
  // The calibrated constant reproduces its pass rate.
  LinearPartedConfig at = spec.base;
  at.beta.c_beta1 = at.beta.c_beta2 = res.scale;
  int passed = 0;
  for (const PessimismTrial& t : pessimism_trials(m, 50, 10, 3, "uniform", at, 1)) passed += t.pessimistic;
  CHECK(passed / 10.0 == doctest::Approx(res.pass_rate));

  spec.scale_low = 1e-9;
  spec.scale_high = 1e-8;
  CHECK_FALSE(calibrate_beta(spec).found);
}
