#include "parted/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "parted/config.hpp"
#include "parted/evaluation.hpp"
#include "parted/io.hpp"
#include "parted/rng.hpp"
#include "parted/simd/kernels.hpp"

namespace parted {

namespace {

class ValidationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flags shared by the subcommands. Each is applied on top of the loaded
// config only when given on the command line.
struct Flags {
  std::string config, out, mdp, data, solution;
  std::uint64_t seed = 0;
  std::size_t N = 0;
  std::string solver, clip, mode, behavior, noise;
  double beta1 = 0.0, beta2 = 0.0, lambda1 = 0.0, lambda2 = 0.0, heterogeneity = 0.0;
  int jobs = 0, m = 0, S = 0, A = 0, H = 0, d = 0;

  CLI::App* app = nullptr;
  bool given(const std::string& name) const { return app->count(name) > 0; }
};

enum class SeedTarget { mdp, data, sweep };

void add_common(CLI::App* app, Flags& f, bool out_required) {
  f.app = app;
  app->add_option("--config", f.config, "JSON config or a manifest written by an earlier run");
  auto* out = app->add_option("--out", f.out, "output file");
  if (out_required) out->required();
  app->add_option("--seed", f.seed, "seed for this stage");
}

void add_mdp_input(CLI::App* app, Flags& f) {
  app->add_option("--mdp", f.mdp, "MDP JSON (default: generate from the config's mdp section)");
}

void add_solver_flags(CLI::App* app, Flags& f) {
  app->add_option("--solver", f.solver, "parted-linear | parted-neural | pevi-oracle | uniform-split")
      ->check(CLI::IsMember({"parted-linear", "parted-neural", "pevi-oracle", "uniform-split"}));
  app->add_option("--beta1", f.beta1, "explicit beta1 (needs --beta2)");
  app->add_option("--beta2", f.beta2, "explicit beta2 (needs --beta1)");
  app->add_option("--lambda1", f.lambda1, "ridge regulariser of the reward regression");
  app->add_option("--lambda2", f.lambda2, "ridge regulariser of the transition-value regression");
  app->add_option("--clip", f.clip, "per-step | flat")->check(CLI::IsMember({"per-step", "flat"}));
  app->add_option("--mode", f.mode, "neural fit: gd | ntk")->check(CLI::IsMember({"gd", "ntk"}));
  app->add_option("--m", f.m, "neural half-width m");
}

ExperimentConfig resolve(const Flags& f, SeedTarget seed_target) {
  ExperimentConfig c = f.config.empty() ? ExperimentConfig{} : load_config(f.config);
  if (f.given("--seed")) {
    switch (seed_target) {
      case SeedTarget::mdp: c.mdp.seed = f.seed; break;
      case SeedTarget::data: c.data.seed = f.seed; break;
      case SeedTarget::sweep: c.sweep.seed = f.seed; break;
    }
  }
  auto opt = [&](const char* name) { return f.app->get_option_no_throw(name) && f.given(name); };
  if (opt("--S")) c.mdp.num_states = f.S;
  if (opt("--A")) c.mdp.num_actions = f.A;
  if (opt("--H")) c.mdp.horizon = f.H;
  if (opt("--d")) c.mdp.feature_dim = f.d;
  if (opt("--heterogeneity")) c.mdp.heterogeneity = f.heterogeneity;
  if (opt("--noise")) c.mdp.noise = parse_noise(f.noise);
  if (opt("--behavior")) c.data.behavior = f.behavior;
  if (opt("--N")) {
    c.data.N = f.N;
    c.sweep.n_grid = {f.N};
  }
  if (opt("--solver")) {
    c.solver.name = parse_solver(f.solver);
    c.sweep.solvers = {c.solver.name};
  }
  if (opt("--beta1") != opt("--beta2")) throw ConfigError("--beta1 and --beta2 must be given together");
  if (opt("--beta1")) {
    c.beta.mode = "explicit";
    c.beta.spec.beta1 = f.beta1;
    c.beta.spec.beta2 = f.beta2;
  }
  if (opt("--lambda1")) c.solver.lambda1 = f.lambda1;
  if (opt("--lambda2")) c.solver.lambda2 = f.lambda2;
  if (opt("--clip")) c.solver.clip = parse_clip(f.clip);
  if (opt("--mode")) c.solver.mode = parse_fit_mode(f.mode);
  if (opt("--m")) c.solver.m = f.m;
  if (opt("--jobs")) c.sweep.jobs = f.jobs;
  if (const char* env = std::getenv("PARTED_DEBUG_STEP_REWARDS"); env && std::string(env) == "1") {
    c.data.step_rewards = true;
  }
  validate_config(c);
  return c;
}

LinearMdp load_or_build_mdp(const Flags& f, const ExperimentConfig& c) {
  if (f.mdp.empty()) return build_mdp(c.mdp);
  return mdp_from_json(parse_json(read_text(f.mdp), "MDP file '" + f.mdp + "'"));
}

void write_manifest(const Flags& f, const std::string& command, const ExperimentConfig& c) {
  Json m;
  m["tool"] = "parted";
  m["version"] = kVersion;
  m["command"] = command;
  Json inputs;
  inputs["mdp"] = f.mdp.empty() ? Json(nullptr) : Json(f.mdp);
  inputs["data"] = f.data.empty() ? Json(nullptr) : Json(f.data);
  inputs["solution"] = f.solution.empty() ? Json(nullptr) : Json(f.solution);
  m["inputs"] = std::move(inputs);
  m["output"] = f.out;
  Json seeds;
  seeds["mdp"] = c.mdp.seed;
  seeds["data"] = c.data.seed;
  seeds["sweep_master"] = c.sweep.seed;
  seeds["cell_seed_rule"] = "hash64(master, solver_index, n_index, trial_index)";
  m["seeds"] = std::move(seeds);
  m["simd_backend"] = std::string(simd::backend_name(simd::active_backend()));
  m["resolved_config"] = config_to_json(c);
  write_text(f.out + ".manifest.json", dump_json(m));
}

int cmd_gen_mdp(const Flags& f) {
  const ExperimentConfig c = resolve(f, SeedTarget::mdp);
  const LinearMdp mdp = build_mdp(c.mdp);
  write_text(f.out, dump_json(mdp_to_json(mdp)));
  write_manifest(f, "gen-mdp", c);
  return 0;
}

int cmd_collect(const Flags& f) {
  const ExperimentConfig c = resolve(f, SeedTarget::data);
  const LinearMdp mdp = load_or_build_mdp(f, c);
  const Policy pol = make_behavior_policy(mdp, c.data.behavior);
  const OfflineDataset data = collect(mdp, pol, c.data.N, c.data.seed, c.data.step_rewards, c.data.behavior);
  write_text(f.out, dataset_to_jsonl(data));
  write_manifest(f, "collect", c);
  return 0;
}

Json diagnostics_to_json(const FitDiagnostics& d) {
  Json j;
  j["objective"] = d.objective;
  j["grad_norm"] = d.grad_norm;
  j["iterations"] = d.iterations;
  j["converged"] = d.converged;
  j["diverged"] = d.diverged;
  j["param_dist"] = d.param_dist;
  j["ball_radius"] = d.ball_radius;
  j["within_ball"] = d.within_ball();
  return j;
}

int cmd_solve(const Flags& f) {
  ExperimentConfig c = resolve(f, SeedTarget::data);
  const LinearMdp mdp = load_or_build_mdp(f, c);
  const OfflineDataset data = dataset_from_jsonl(read_text(f.data));
  if (data.header.num_states != mdp.num_states || data.header.num_actions != mdp.num_actions ||
      data.header.horizon != mdp.horizon) {
    throw IoError("dataset '" + f.data + "' does not match the MDP");
  }
  SolverSettings s = solver_settings(c);
  s.neural.net_seed = c.solver.net_seed.value_or(mix64(data.header.seed));
  Json out;
  switch (c.solver.name) {
    case SolverKind::parted_neural: {
      const NeuralPartedSolution sol = solve_neural_parted(data, mdp.features, s.neural);
      out = solution_to_json(sol.result);
      out["lambda1"] = sol.lambda1;
      out["lambda2"] = sol.lambda2;
      out["network"] = network_to_json(sol.net);
      out["reward_fit"] = diagnostics_to_json(sol.reward_diagnostics);
      Json vf = Json::array();
      for (const auto& d : sol.value_diagnostics) vf.push_back(diagnostics_to_json(d));
      out["value_fits"] = std::move(vf);
      break;
    }
    default: {
      const PessimisticSolution sol = run_solver(c.solver.name, data, mdp.features, s);
      out = solution_to_json(sol);
      out["lambda1"] = s.linear.lambda1;
      out["lambda2"] = s.linear.lambda2;
      break;
    }
  }
  for (const auto& w : out["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
  write_text(f.out, dump_json(out));
  write_manifest(f, "solve", c);
  return 0;
}

int cmd_eval(const Flags& f) {
  const ExperimentConfig c = resolve(f, SeedTarget::data);
  const LinearMdp mdp = load_or_build_mdp(f, c);
  const PessimisticSolution sol = solution_from_json(parse_json(read_text(f.solution), "solution file"));
  if (sol.horizon != mdp.horizon || sol.num_states != mdp.num_states || sol.num_actions != mdp.num_actions) {
    throw IoError("solution '" + f.solution + "' does not match the MDP");
  }
  EvalReport rep;
  if (!f.data.empty()) {
    rep = evaluate(mdp, sol, dataset_from_jsonl(read_text(f.data)));
  } else {
    rep = evaluate(mdp, sol);
  }
  write_text(f.out, dump_json(report_to_json(rep)));
  write_manifest(f, "eval", c);
  if (rep.residual > 1e-8 || rep.subopt < -1e-10) {
    throw ValidationFailure("decomposition residual or suboptimality outside tolerance");
  }
  return 0;
}

int cmd_sweep(const Flags& f) {
  const ExperimentConfig c = resolve(f, SeedTarget::sweep);
  SweepSpec spec;
  spec.mdp = load_or_build_mdp(f, c);
  spec.solvers = c.sweep.solvers;
  spec.n_grid = c.sweep.n_grid;
  spec.trials = c.sweep.trials;
  spec.master_seed = c.sweep.seed;
  spec.behavior = c.data.behavior;
  spec.settings = solver_settings(c);
  spec.jobs = c.sweep.jobs;
  spec.record_wall_time = c.sweep.record_wall_time;
  const SweepTable table = sweep(spec);
  std::vector<std::string> names;
  for (auto k : spec.solvers) names.emplace_back(solver_name(k));
  write_text(f.out, sweep_csv(table));
  write_text(f.out + ".summary.json", dump_json(sweep_summary_to_json(table, names)));
  write_manifest(f, "sweep", c);
  for (const auto& r : table.rows) {
    if (!r.error.empty()) std::cerr << "cell " << r.solver << " N=" << r.N << " seed=" << r.seed << ": " << r.error << "\n";
  }
  return 0;
}

int cmd_calibrate(const Flags& f) {
  const ExperimentConfig c = resolve(f, SeedTarget::sweep);
  CalibrationSpec spec;
  spec.mdp = load_or_build_mdp(f, c);
  spec.N = c.data.N;
  spec.trials = c.sweep.trials;
  spec.master_seed = c.sweep.seed;
  spec.behavior = c.data.behavior;
  spec.base = solver_settings(c).linear;
  spec.target_rate = c.beta.calibration_target;
  spec.scale_low = c.beta.calibration_low;
  spec.scale_high = c.beta.calibration_high;
  spec.bisection_steps = c.beta.calibration_steps;
  spec.jobs = c.sweep.jobs;
  const CalibrationResult res = calibrate_beta(spec);
  write_text(f.out, dump_json(calibration_to_json(res)));
  write_manifest(f, "calibrate-beta", c);
  if (!res.found) throw ValidationFailure("no constant in the search range reaches the target pessimism rate");
  return 0;
}

int cmd_check(const Flags& f) {
  const ExperimentConfig c = resolve(f, SeedTarget::mdp);
  const LinearMdp mdp = load_or_build_mdp(f, c);
  const ValidationReport v = validate_mdp(mdp);
  Json j;
  Json& val = j["validation"];
  val["passed"] = v.passed();
  val["shapes_ok"] = v.shapes_ok;
  val["shape_error"] = v.shape_error;
  val["max_violation"] = v.max_violation();
  const bool ok = v.passed();
  if (!f.data.empty()) {
    const CoverageReport cov = coverage_diagnostics(mdp.features, dataset_from_jsonl(read_text(f.data)));
    j["coverage"] = coverage_to_json(cov);
    if (!cov.well_explored) std::cerr << "warning: dataset is not well explored (some lambda_min <= threshold)\n";
  }
  const std::string text = dump_json(j);
  if (f.out.empty()) {
    std::cout << text;
  } else {
    write_text(f.out, text);
    write_manifest(f, "check", c);
  }
  if (!ok) throw ValidationFailure("MDP validation failed");
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Offline RL from trajectory-wise rewards: reward redistribution with pessimistic value iteration"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Flags gen, col, sol, ev, sw, cal, chk;

  auto* g = app.add_subcommand("gen-mdp", "generate a random linear MDP");
  add_common(g, gen, true);
  g->add_option("--S", gen.S, "number of states");
  g->add_option("--A", gen.A, "number of actions");
  g->add_option("--H", gen.H, "horizon");
  g->add_option("--d", gen.d, "feature dimension");
  g->add_option("--heterogeneity", gen.heterogeneity, "reward heterogeneity in [0,1]");
  g->add_option("--noise", gen.noise, "none | bernoulli")->check(CLI::IsMember({"none", "bernoulli"}));

  auto* c = app.add_subcommand("collect", "roll out a behaviour policy into an offline dataset");
  add_common(c, col, true);
  add_mdp_input(c, col);
  c->add_option("--N", col.N, "number of trajectories");
  c->add_option("--behavior", col.behavior, "uniform | eps-greedy:<eps>");

  auto* s = app.add_subcommand("solve", "run a solver on a dataset");
  add_common(s, sol, true);
  add_mdp_input(s, sol);
  s->add_option("--data", sol.data, "dataset file")->required();
  add_solver_flags(s, sol);

  auto* e = app.add_subcommand("eval", "exact suboptimality and decomposition of a solution");
  add_common(e, ev, true);
  add_mdp_input(e, ev);
  e->add_option("--solution", ev.solution, "solution file")->required();
  e->add_option("--data", ev.data, "dataset file (adds coverage diagnostics)");

  auto* w = app.add_subcommand("sweep", "collect/solve/evaluate over solvers x N x trials, CSV output");
  add_common(w, sw, true);
  add_mdp_input(w, sw);
  add_solver_flags(w, sw);
  w->add_option("--N", sw.N, "single N instead of the configured grid");
  w->add_option("--jobs", sw.jobs, "worker threads (0: all cores)");

  auto* k = app.add_subcommand("calibrate-beta", "smallest common theorem2 constant passing the pessimism check");
  add_common(k, cal, true);
  add_mdp_input(k, cal);
  k->add_option("--N", cal.N, "trajectories per trial");
  k->add_option("--lambda1", cal.lambda1, "ridge regulariser of the reward regression");
  k->add_option("--lambda2", cal.lambda2, "ridge regulariser of the transition-value regression");
  k->add_option("--clip", cal.clip, "per-step | flat")->check(CLI::IsMember({"per-step", "flat"}));
  k->add_option("--jobs", cal.jobs, "worker threads (0: all cores)");

  auto* h = app.add_subcommand("check", "validate an MDP and, given data, its coverage");
  add_common(h, chk, false);
  add_mdp_input(h, chk);
  h->add_option("--data", chk.data, "dataset file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForVersion& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    std::cerr << "error: " << ex.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (g->parsed()) return cmd_gen_mdp(gen);
    if (c->parsed()) return cmd_collect(col);
    if (s->parsed()) return cmd_solve(sol);
    if (e->parsed()) return cmd_eval(ev);
    if (w->parsed()) return cmd_sweep(sw);
    if (k->parsed()) return cmd_calibrate(cal);
    if (h->parsed()) return cmd_check(chk);
  } catch (const ValidationFailure& ex) {
    std::cerr << "validation failed: " << ex.what() << "\n";
    return 1;
  } catch (const ConfigError& ex) {
    std::cerr << "config error: " << ex.what() << "\n";
    return 2;
  } catch (const IoError& ex) {
    std::cerr << "i/o error: " << ex.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace parted
