#include "parted/baselines.hpp"

#include <stdexcept>

namespace parted {

namespace {

// The joint regression of r_h + V_next on phi splits, by linearity of the
// ridge solution in its targets, into a reward fit and the shared
// transition-value fit; the split keeps the value channel identical to PARTED.
LinearPartedSolution per_step_pevi(const OfflineDataset& data, const FeatureTable& features,
                                   const LinearPartedConfig& config, const StepTarget& target, const char* tag) {
  auto warnings = check_regularisers(config.lambda1, config.lambda2);
  const int H = data.header.horizon;
  const double beta2 = resolve_linear_betas(config.beta, features, data, config.lambda1, config.lambda2).second;
  std::vector<Vector> params;
  StepTables reward_hat = per_step_reward_fit(data, features, config.lambda2, target, &params);
  StepTables no_bonus(H, Matrix(features.num_states(), features.num_actions()));
  LinearPartedSolution out = linear_backward_induction(data, features, std::move(reward_hat), std::move(no_bonus),
                                                       0.0, beta2, config.lambda2, config.clip);
  out.result.solver = tag;
  out.result.reward_params = std::move(params);
  out.result.warnings.insert(out.result.warnings.begin(), warnings.begin(), warnings.end());
  return out;
}

}  // namespace

LinearPartedSolution solve_pevi_oracle(const OfflineDataset& data, const FeatureTable& features,
                                       const LinearPartedConfig& config) {
  if (!data.has_step_rewards()) {
    throw std::invalid_argument("pevi-oracle needs per-step rewards; collect with PARTED_DEBUG_STEP_REWARDS=1");
  }
  return per_step_pevi(
      data, features, config, [](const TrajectoryRecord& r, int h) { return StepRewardAccess::rewards(r)[h]; },
      "pevi-oracle");
}

LinearPartedSolution solve_uniform_split(const OfflineDataset& data, const FeatureTable& features,
                                         const LinearPartedConfig& config) {
  return per_step_pevi(
      data, features, config,
      [](const TrajectoryRecord& r, int) { return r.ret() / static_cast<double>(r.horizon()); }, "uniform-split");
}

}  // namespace parted
