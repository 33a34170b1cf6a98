#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <string>

#include "parted/config.hpp"
#include "parted/io.hpp"
#include "support.hpp"

using namespace parted;

namespace {

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("empty object gives the documented defaults") {
    const ExperimentConfig c = parse_config("{}");
    CHECK(c.mdp.num_states == 8);
    CHECK(c.mdp.num_actions == 4);
    CHECK(c.mdp.horizon == 5);
    CHECK(c.mdp.feature_dim == 6);
    CHECK(c.data.N == 200);
    CHECK(c.solver.name == SolverKind::parted_linear);
    CHECK_FALSE(c.solver.lambda1.has_value());
    CHECK(c.beta.mode == "auto");
    CHECK(c.sweep.n_grid == std::vector<std::size_t>{100, 200, 400, 800, 1600});
  }
  SUBCASE("values are read") {
    const ExperimentConfig c = parse_config(R"({"mdp": {"S": 3, "noise": "none"},
      "solver": {"name": "parted-neural", "lambda1": 2.5, "clip": "per-step", "mode": "ntk", "activation": "tanh"},
      "beta": {"mode": "explicit", "beta1": 0.5, "beta2": 0.25},
      "sweep": {"solvers": ["pevi-oracle", "uniform-split"], "n_grid": [10, 20], "trials": 3}})");
    CHECK(c.mdp.num_states == 3);
    CHECK(c.mdp.noise == RewardNoise::none);
    CHECK(c.solver.name == SolverKind::parted_neural);
    CHECK(*c.solver.lambda1 == 2.5);
    CHECK(*c.solver.clip == ClipMode::per_step);
    CHECK(c.solver.mode == FitMode::ntk_closed_form);
    CHECK(c.solver.activation == Activation::tanh);
    CHECK(c.beta.spec.beta1 == 0.5);
    CHECK(c.sweep.solvers == std::vector{SolverKind::pevi_oracle, SolverKind::uniform_split});
    CHECK(c.sweep.trials == 3);

    const SolverSettings s = solver_settings(c);
    CHECK(s.neural.beta.mode == BetaSpec::Mode::explicit_values);
    CHECK(s.neural.clip == ClipMode::per_step);
  }
  SUBCASE("auto choices resolve per solver family") {
    const SolverSettings s = solver_settings(parse_config("{}"));
    CHECK(s.linear.beta.mode == BetaSpec::Mode::theorem2);
    CHECK(s.linear.clip == ClipMode::per_step);
    CHECK(s.linear.lambda1 == 1.0);
    CHECK(s.neural.beta.mode == BetaSpec::Mode::theorem1);
    CHECK(s.neural.clip == ClipMode::flat);
    CHECK_FALSE(s.neural.lambda1.has_value());
  }
  SUBCASE("unknown keys are rejected with their path") {
    CHECK(contains(config_error(R"({"mdp": {"states": 3}})"), "mdp.states"));
    CHECK(contains(config_error(R"({"extra": 1})"), "extra"));
    CHECK(contains(config_error(R"({"solver": {"lamda1": 1}})"), "solver.lamda1"));
  }
  SUBCASE("duplicate keys are rejected with their path") {
    CHECK(contains(config_error(R"({"mdp": {"S": 3, "S": 4}})"), "mdp.S"));
  }
  SUBCASE("wrong types and bad enums are rejected") {
    CHECK(contains(config_error(R"({"mdp": {"S": "three"}})"), "mdp.S"));
    CHECK(contains(config_error(R"({"solver": {"name": "pevi"}})"), "solver.name"));
    CHECK(contains(config_error(R"({"solver": {"clip": "sometimes"}})"), "solver.clip"));
    CHECK(contains(config_error(R"({"beta": {"mode": "theorem3"}})"), "beta.mode"));
    CHECK_FALSE(config_error("{not json").empty());
  }
  SUBCASE("out-of-range values are rejected") {
    CHECK(contains(config_error(R"({"mdp": {"heterogeneity": 1.5}})"), "mdp.heterogeneity"));
    CHECK(contains(config_error(R"({"data": {"N": 0}})"), "data.N"));
    CHECK(contains(config_error(R"({"solver": {"lambda2": -1}})"), "solver.lambda2"));
    CHECK(contains(config_error(R"({"beta": {"delta": 1.0}})"), "beta.delta"));
    CHECK(contains(config_error(R"({"sweep": {"n_grid": []}})"), "sweep.n_grid"));
    CHECK(contains(config_error(R"({"sweep": {"trials": 0}})"), "sweep.trials"));
  }
  SUBCASE("config_to_json round-trips, including through a manifest") {
    const ExperimentConfig c = parse_config(R"({"mdp": {"seed": 42, "heterogeneity": 0.3},
      "solver": {"lambda2": 0.125, "net_seed": 7}, "sweep": {"n_grid": [5]}})");
    const Json j = config_to_json(c);
    CHECK(config_to_json(parse_config(j.dump())) == j);
    Json manifest;
    manifest["tool"] = "parted";
    manifest["resolved_config"] = j;
    CHECK(config_to_json(parse_config(manifest.dump())) == j);
  }
  SUBCASE("load_config maps I/O failures to ConfigError") {
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
  }
}

TEST_CASE("artifact round-trips") {
  const LinearMdp m = generate_random_mdp(3, 5, 3, 4, 4, 0.7);

  SUBCASE("mdp") {
    const Json j = mdp_to_json(m);
    const LinearMdp back = mdp_from_json(parse_json(dump_json(j), "mdp"));
    CHECK(back == m);
    CHECK(dump_json(mdp_to_json(back)) == dump_json(j));
  }
  SUBCASE("dataset with and without step rewards") {
    for (bool steps : {false, true}) {
      const OfflineDataset data = collect(m, Policy::uniform(4, 5, 3), 30, 11, steps, "uniform");
      const std::string text = dataset_to_jsonl(data);
      const OfflineDataset back = dataset_from_jsonl(text);
      CHECK(back == data);
      CHECK(back.has_step_rewards() == steps);
      CHECK(dataset_to_jsonl(back) == text);
    }
  }
  SUBCASE("solution") {
    const OfflineDataset data = collect(m, Policy::uniform(4, 5, 3), 40, 12);
    const PessimisticSolution sol = run_solver(SolverKind::parted_linear, data, m.features, SolverSettings{});
    const Json j = solution_to_json(sol);
    const PessimisticSolution back = solution_from_json(parse_json(dump_json(j), "solution"));
    CHECK(back.q == sol.q);
    CHECK(back.v == sol.v);
    CHECK(back.policy == sol.policy);
    CHECK(back.penalty == sol.penalty);
    CHECK(back.beta1 == sol.beta1);
    CHECK(back.beta2 == sol.beta2);
    CHECK(back.clip == sol.clip);
    CHECK(dump_json(solution_to_json(back)) == dump_json(j));
  }
  SUBCASE("network") {
    const TwoLayerNet net = TwoLayerNet::init_symmetric(99, 5, 4, Activation::smoothed_relu);
    const TwoLayerNet back = network_from_json(parse_json(dump_json(network_to_json(net)), "network"));
    CHECK(back == net);
  }
  SUBCASE("awkward doubles survive") {
    LinearMdp odd = m;
    odd.anchor_rewards[0][0] = 0.1 + 0.2;
    odd.anchor_rewards[0][1] = 5e-324;
    odd.anchor_rewards[0][2] = std::nextafter(1.0, 0.0);
    CHECK(mdp_from_json(parse_json(dump_json(mdp_to_json(odd)), "mdp")) == odd);
  }
  SUBCASE("malformed inputs raise IoError") {
    CHECK_THROWS_AS(parse_json("[1,", "x"), IoError);
    CHECK_THROWS_AS(read_text("/nonexistent/file"), IoError);
    CHECK_THROWS_AS(dataset_from_jsonl("{\"not\": \"a header\"}\n"), IoError);
  }
}

TEST_CASE("write_text and read_text") {
  const auto path = std::filesystem::temp_directory_path() / "parted_io_test.txt";
  write_text(path.string(), "abc\n");
  CHECK(read_text(path.string()) == "abc\n");
  std::filesystem::remove(path);
}
