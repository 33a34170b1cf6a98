#pragma once

#include "parted/parted_linear.hpp"

namespace parted {

/// Pessimistic value iteration with the true per-step rewards: per-step ridge
/// regression of r_h + V_hat_{h+1}(s_{h+1}) on phi(x_h), penalty beta2 * b_v only.
/// Needs a dataset collected with step rewards recorded.
LinearPartedSolution solve_pevi_oracle(const OfflineDataset& data, const FeatureTable& features,
                                       const LinearPartedConfig& config);

/// Same as the oracle but every step of tau is credited r(tau)/H.
LinearPartedSolution solve_uniform_split(const OfflineDataset& data, const FeatureTable& features,
                                         const LinearPartedConfig& config);

}  // namespace parted
