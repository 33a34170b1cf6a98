#pragma once

// Finite-state episodic linear MDPs and exact dynamic-programming oracles.
//
// Steps are 0-based throughout: h = 0 .. H-1, with value tables carrying an
// extra terminal row h = H that is identically zero.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "parted/linalg.hpp"
#include "parted/rng.hpp"

namespace parted {

/// Dense S x A table of feature vectors.
class FeatureTable {
 public:
  FeatureTable() = default;
  FeatureTable(int num_states, int num_actions, int dim);
  FeatureTable(int num_states, int num_actions, int dim, Vector values);

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  int dim() const { return dim_; }

  std::span<const double> at(int s, int a) const {
    return {values_.data() + (static_cast<std::size_t>(s) * num_actions_ + a) * dim_, static_cast<std::size_t>(dim_)};
  }
  std::span<double> at(int s, int a) {
    return {values_.data() + (static_cast<std::size_t>(s) * num_actions_ + a) * dim_, static_cast<std::size_t>(dim_)};
  }

  const Vector& values() const { return values_; }

  bool operator==(const FeatureTable&) const = default;

 private:
  int num_states_ = 0;
  int num_actions_ = 0;
  int dim_ = 0;
  Vector values_;
};

enum class RewardNoise { none, bernoulli };

/// Linear MDP built as a mixture of d anchors: phi(s,a) lies on the simplex,
/// anchor j at step h has next-state distribution mu_h[j, :] and mean reward
/// rho_h[j]. Hence P_h(s'|s,a) = <phi(s,a), mu_h[:, s']> and
/// R_h(s,a) = <phi(s,a), rho_h>.
struct LinearMdp {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  int feature_dim = 0;
  FeatureTable features;
  std::vector<Matrix> anchor_transitions;  ///< per step, d x S row-stochastic
  std::vector<Vector> anchor_rewards;      ///< per step, length d, entries in [0,1]
  RewardNoise reward_noise = RewardNoise::bernoulli;
  int initial_state = 0;

  double transition_prob(int h, int s, int a, int next) const;
  Vector next_state_distribution(int h, int s, int a) const;
  double mean_reward(int h, int s, int a) const;

  bool operator==(const LinearMdp&) const = default;
};

/// Per-step S x A tables (Q-functions, rewards, penalties).
using StepTables = std::vector<Matrix>;

/// Maximum violation of each structural invariant; 0 means exact.
struct ValidationReport {
  bool shapes_ok = true;
  std::string shape_error;
  double feature_simplex = 0.0;     ///< negative entries or |sum - 1| of phi(s,a)
  double feature_norm = 0.0;        ///< max(|phi| - 1, 0)
  double anchor_stochastic = 0.0;   ///< negative entries or |row sum - 1| of mu_h
  double anchor_reward_range = 0.0; ///< distance of rho_h entries outside [0,1]
  double transition_validity = 0.0; ///< negative P_h entries or |sum_s' P_h - 1|
  double reward_range = 0.0;        ///< distance of R_h outside [0,1]
  double theta_norm = 0.0;          ///< max(|rho_h| - sqrt(d), 0)
  double initial_state = 0.0;       ///< 1 if s_1 is out of range

  double max_violation() const;
  bool passed(double tol = 1e-10) const { return shapes_ok && max_violation() <= tol; }
};

ValidationReport validate_mdp(const LinearMdp& mdp);

/// Random anchor MDP, deterministic in `seed`. Features and anchor rows are
/// normalised exponentials of uniform draws (flat Dirichlet). Reward anchors
/// are uniform on [0,1] then mixed toward 0.5: rho = het * u + (1 - het) * 0.5.
LinearMdp generate_random_mdp(std::uint64_t seed, int num_states, int num_actions, int horizon, int feature_dim,
                              double reward_heterogeneity, RewardNoise noise = RewardNoise::bernoulli);

/// Markov policy as an H x S x A probability table.
class Policy {
 public:
  Policy() = default;
  Policy(int horizon, int num_states, int num_actions);

  static Policy deterministic(int horizon, int num_states, int num_actions, std::span<const int> actions);
  static Policy uniform(int horizon, int num_states, int num_actions);

  int horizon() const { return horizon_; }
  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }

  double prob(int h, int s, int a) const { return probs_[index(h, s, a)]; }
  void set_prob(int h, int s, int a, double p) { probs_[index(h, s, a)] = p; }
  std::span<const double> distribution(int h, int s) const { return {probs_.data() + index(h, s, 0), static_cast<std::size_t>(num_actions_)}; }

  /// Action with the largest probability (smallest index on ties).
  int action(int h, int s) const;
  bool is_deterministic() const;
  int sample(int h, int s, Rng& rng) const;

  /// Largest |row sum - 1| or negative mass; 0 for a valid policy.
  double max_violation() const;

  bool operator==(const Policy&) const = default;

 private:
  std::size_t index(int h, int s, int a) const {
    return (static_cast<std::size_t>(h) * num_states_ + s) * num_actions_ + a;
  }

  int horizon_ = 0;
  int num_states_ = 0;
  int num_actions_ = 0;
  Vector probs_;
};

/// Index of the largest entry; the smallest index wins ties.
int argmax_first(std::span<const double> values);

/// Inverse-CDF draw of s_{h+1} ~ P_h(. | s, a).
int transition(const LinearMdp& mdp, int h, int s, int a, Rng& rng);

/// Observed reward at (h, s, a) under the MDP's noise model.
double sample_reward(const LinearMdp& mdp, int h, int s, int a, Rng& rng);

/// (B_h V_next)(s,a) = R_h(s,a) + sum_s' P_h(s'|s,a) V_next(s').
Matrix bellman_apply(const LinearMdp& mdp, int h, std::span<const double> v_next);

struct OptimalValues {
  Matrix v;        ///< (H+1) x S
  StepTables q;    ///< H tables, S x A
  Policy policy;   ///< greedy, smallest-index ties
};

OptimalValues exact_optimal_values(const LinearMdp& mdp);

struct PolicyValues {
  Matrix v;      ///< (H+1) x S
  StepTables q;  ///< H tables, S x A
};

PolicyValues exact_policy_values(const LinearMdp& mdp, const Policy& policy);

/// d_h(s) = Pr[s_h = s] under `policy` from `start`; H x S.
Matrix state_occupancy(const LinearMdp& mdp, const Policy& policy, int start);

}  // namespace parted
