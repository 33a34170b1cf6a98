#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "parted/beta.hpp"
#include "parted/dataset.hpp"
#include "parted/linalg.hpp"
#include "parted/solution.hpp"

namespace parted {

enum class RewardSource {
  redistributed,        ///< trajectory-level ridge regression of returns
  oracle_step_rewards,  ///< per-step regression of the hidden step rewards (debug datasets only)
};

struct LinearPartedConfig {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  BetaSpec beta;
  ClipMode clip = ClipMode::per_step;
  RewardSource reward_source = RewardSource::redistributed;
};

struct LinearPartedSolution {
  PessimisticSolution result;
  Vector theta;                              ///< Theta_hat in R^{dH}; empty when not redistributed
  std::optional<RidgeSystem> reward_system;  ///< Sigma, dimension dH
  std::vector<RidgeSystem> value_systems;    ///< Lambda_h indexed by step
};

/// Rejects non-positive or non-finite regularisers; returns warnings for values below 1.
std::vector<std::string> check_regularisers(double lambda1, double lambda2);

/// Resolves (beta1, beta2) for a linear solve. theorem1 mode uses the linear
/// kernel <phi, phi'> for the Gram matrices.
std::pair<double, double> resolve_linear_betas(const BetaSpec& spec, const FeatureTable& features,
                                               const OfflineDataset& data, double lambda1, double lambda2);

struct Redistribution {
  Vector theta;
  RidgeSystem system;
};

/// Theta_hat = (lambda1 I + sum Phi(tau) Phi(tau)^T)^{-1} sum Phi(tau) r(tau).
Redistribution redistribute_rewards_linear(const OfflineDataset& data, const FeatureTable& features, double lambda1);

/// R_hat_h(s,a) = <phi(s,a), theta_h> for consecutive length-d slices theta_h.
StepTables proxy_reward_tables(const FeatureTable& features, std::span<const double> theta, int horizon);

struct ValueFit {
  Vector w;
  RidgeSystem system;
};

/// w_hat_h = (lambda2 I + sum phi phi^T)^{-1} sum phi V_next(s_{h+1}) over step-h samples.
ValueFit fit_transition_value_linear(const OfflineDataset& data, const FeatureTable& features,
                                     std::span<const double> v_next, double lambda2, int h);

/// <phi(s,a), w> as an S x A table.
Matrix linear_table(const FeatureTable& features, std::span<const double> w);

/// b_{r,h}(s,a) = bonus(Sigma, one_block_hot(h,s,a)) for every step.
StepTables reward_bonus_tables(const RidgeSystem& sigma, const FeatureTable& features, int horizon);

/// b_v(s,a) = bonus(Lambda, phi(s,a)).
Matrix value_bonus_table(const RidgeSystem& lambda, const FeatureTable& features);

struct LinearPenalties {
  StepTables reward_bonus;
  StepTables value_bonus;
};

LinearPenalties penalties_linear(const RidgeSystem& sigma, std::span<const RidgeSystem> lambdas,
                                 const FeatureTable& features);

using StepTarget = std::function<double(const TrajectoryRecord&, int h)>;

/// Per-step ridge regression of an arbitrary step target on phi(x_h) with
/// regulariser `lambda`; fills `params` with the per-step solutions.
StepTables per_step_reward_fit(const OfflineDataset& data, const FeatureTable& features, double lambda,
                               const StepTarget& target, std::vector<Vector>* params = nullptr);

/// Shared backward pass for every linear solver: given reward tables and
/// their bonuses, fits the transition value per step and runs the clipped
/// pessimistic induction.
LinearPartedSolution linear_backward_induction(const OfflineDataset& data, const FeatureTable& features,
                                               StepTables reward_hat, StepTables reward_bonus, double beta1,
                                               double beta2, double lambda2, ClipMode clip);

LinearPartedSolution solve_linear_parted(const OfflineDataset& data, const FeatureTable& features,
                                         const LinearPartedConfig& config);

}  // namespace parted
