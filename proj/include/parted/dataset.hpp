#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "parted/linalg.hpp"
#include "parted/mdp.hpp"

namespace parted {

/// One episode: H+1 visited states (the last one is s_{H+1}, needed by the
/// transition-value regression), H actions and the single trajectory return.
/// Per-step rewards exist only when collection ran in debug mode and are
/// reachable solely through StepRewardAccess.
class TrajectoryRecord {
 public:
  TrajectoryRecord(std::vector<int> states, std::vector<int> actions, double ret,
                   std::optional<Vector> step_rewards = std::nullopt);

  int horizon() const { return static_cast<int>(actions_.size()); }
  const std::vector<int>& states() const { return states_; }
  const std::vector<int>& actions() const { return actions_; }
  /// r(tau)
  double ret() const { return ret_; }
  bool has_step_rewards() const { return step_rewards_.has_value(); }

  bool operator==(const TrajectoryRecord&) const = default;

 private:
  friend class StepRewardAccess;

  std::vector<int> states_;
  std::vector<int> actions_;
  double ret_;
  std::optional<Vector> step_rewards_;
};

/// Debug-only view of hidden per-step rewards (oracle baseline, tests, I/O).
class StepRewardAccess {
 public:
  /// Throws std::invalid_argument when the record carries no step rewards.
  static std::span<const double> rewards(const TrajectoryRecord& record);
};

struct DatasetHeader {
  int feature_dim = 0;
  int horizon = 0;
  int num_states = 0;
  int num_actions = 0;
  std::size_t size = 0;
  std::uint64_t seed = 0;
  std::string policy;

  bool operator==(const DatasetHeader&) const = default;
};

struct OfflineDataset {
  DatasetHeader header;
  std::vector<TrajectoryRecord> records;

  std::size_t size() const { return records.size(); }
  bool has_step_rewards() const;

  bool operator==(const OfflineDataset&) const = default;
};

/// Roll out `behavior` N times from mdp.initial_state. Pure in (mdp, behavior, N, seed).
OfflineDataset collect(const LinearMdp& mdp, const Policy& behavior, std::size_t num_trajectories,
                       std::uint64_t seed, bool record_step_rewards = false, std::string policy_tag = "custom");

/// Behaviour policies by descriptor: "uniform" or "eps-greedy:<eps>" (around pi*).
Policy make_behavior_policy(const LinearMdp& mdp, const std::string& descriptor);

/// Phi(tau) = [phi(x_1); ...; phi(x_H)] in R^{dH}.
Vector trajectory_feature(const FeatureTable& features, const TrajectoryRecord& record);

/// Phi_h(x): phi(s,a) in block h of a length-dH vector, zero elsewhere.
Vector one_block_hot(const FeatureTable& features, int horizon, int h, int s, int a);

/// N x dH matrix with rows Phi(tau).
Matrix trajectory_design(const FeatureTable& features, const OfflineDataset& data);

/// N x d matrix with rows phi(x^tau_h).
Matrix step_design(const FeatureTable& features, const OfflineDataset& data, int h);

/// V(s^tau_{h+1}) for every record.
Vector next_state_values(const OfflineDataset& data, int h, std::span<const double> v_next);

struct CoverageReport {
  double lambda_min_trajectory = 0.0;  ///< lambda_min of (1/N) sum Phi(tau) Phi(tau)^T
  Vector lambda_min_step;              ///< per h, lambda_min of (1/N) sum phi phi^T
  double threshold = 0.0;
  bool well_explored = false;

  double lambda_min_step_overall() const;
};

CoverageReport coverage_diagnostics(const FeatureTable& features, const OfflineDataset& data, double threshold = 1e-6);

}  // namespace parted
