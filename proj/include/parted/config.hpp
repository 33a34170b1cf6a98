#pragma once

// Experiment configuration: a JSON object with sections mdp, data, solver,
// beta and sweep. Every key is optional and defaults as below; unknown or
// duplicate keys and out-of-range values are rejected with the key path in
// the message.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "parted/io.hpp"
#include "parted/solvers.hpp"

namespace parted {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MdpConfig {
  std::uint64_t seed = 1;
  int num_states = 8;
  int num_actions = 4;
  int horizon = 5;
  int feature_dim = 6;
  double heterogeneity = 1.0;
  RewardNoise noise = RewardNoise::bernoulli;
};

struct DataConfig {
  std::size_t N = 200;
  std::uint64_t seed = 0;
  std::string behavior = "uniform";
  bool step_rewards = false;  ///< keep hidden per-step rewards (also enabled by PARTED_DEBUG_STEP_REWARDS=1)
};

struct SolverConfig {
  SolverKind name = SolverKind::parted_linear;
  std::optional<double> lambda1;  ///< unset: 1 for linear solvers, 1 + 1/N for the neural one
  std::optional<double> lambda2;
  std::optional<ClipMode> clip;   ///< unset: per-step for linear solvers, flat for the neural one
  FitMode mode = FitMode::gd_train;
  int m = 16;
  Activation activation = Activation::xtanh;
  double step_size = 0.0;  ///< 0 selects 1/(2N)
  int max_iters = 50000;
  double tolerance = 1e-8;
  PenaltyPoint penalty_point = PenaltyPoint::learned;
  std::size_t dual_threshold = 4096;
  std::optional<std::uint64_t> net_seed;  ///< unset: derived from the dataset seed
};

struct BetaConfig {
  /// auto: theorem2 for linear solvers, theorem1 for the neural one.
  std::string mode = "auto";
  BetaSpec spec;
  double calibration_target = 0.9;
  double calibration_low = 1e-4;
  double calibration_high = 10.0;
  int calibration_steps = 24;
};

struct SweepConfig {
  std::vector<SolverKind> solvers{SolverKind::parted_linear};
  std::vector<std::size_t> n_grid{100, 200, 400, 800, 1600};
  int trials = 20;
  std::uint64_t seed = 0;
  int jobs = 0;
  bool record_wall_time = false;
};

struct ExperimentConfig {
  MdpConfig mdp;
  DataConfig data;
  SolverConfig solver;
  BetaConfig beta;
  SweepConfig sweep;
};

/// Strict parse. A manifest (an object with "resolved_config") is accepted too.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Range checks shared by the parser and CLI overrides.
void validate_config(const ExperimentConfig& cfg);

/// Every key with its resolved value.
Json config_to_json(const ExperimentConfig& cfg);

LinearMdp build_mdp(const MdpConfig& cfg);

/// Settings for every solver with the auto beta/clip/lambda choices resolved
/// per family (linear: theorem2, per-step clip, lambda 1; neural: theorem1,
/// flat clip, lambda 1 + 1/N).
SolverSettings solver_settings(const ExperimentConfig& cfg);

BetaSpec::Mode parse_beta_mode(const std::string& name);
std::string beta_mode_name(BetaSpec::Mode mode);
ClipMode parse_clip(const std::string& name);
std::string clip_name(ClipMode mode);
FitMode parse_fit_mode(const std::string& name);

}  // namespace parted
