#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "parted/beta.hpp"
#include "parted/neural.hpp"
#include "parted/solution.hpp"

namespace parted {

enum class PenaltyPoint {
  learned,  ///< tangent features at the fitted parameters (Theta_hat, w_hat_h)
  init,     ///< tangent features at initialisation
};

struct NeuralPartedConfig {
  int m = 16;
  std::uint64_t net_seed = 0;
  Activation activation = Activation::xtanh;
  std::optional<double> lambda1;  ///< default 1 + 1/N
  std::optional<double> lambda2;  ///< default 1 + 1/N
  OptimizerConfig optimizer;
  FitMode mode = FitMode::gd_train;
  BetaSpec beta = [] {
    BetaSpec b;
    b.mode = BetaSpec::Mode::theorem1;
    return b;
  }();
  PenaltyPoint penalty_point = PenaltyPoint::learned;
  ClipMode clip = ClipMode::flat;
  BonusPath bonus_path = BonusPath::automatic;
  std::size_t dual_threshold = 4096;
};

struct NeuralPartedSolution {
  PessimisticSolution result;
  TwoLayerNet net;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::vector<Vector> theta;  ///< reward network weights per step
  std::vector<Vector> w;      ///< value network weights per step
  FitDiagnostics reward_diagnostics;
  std::vector<FitDiagnostics> value_diagnostics;  ///< per step
  bool reward_bonus_primal = true;
};

/// (beta1, beta2) from the NTK Gram matrices at initialisation.
std::pair<double, double> compute_beta_theorem1(const OfflineDataset& data, const FeatureTable& inputs,
                                                const TwoLayerNet& net, double lambda1, double lambda2,
                                                const BetaSpec& spec);

/// Network inputs are x = inputs.at(s, a); the reward and value networks all
/// start from the same symmetric initialisation.
NeuralPartedSolution solve_neural_parted(const OfflineDataset& data, const FeatureTable& inputs,
                                         const NeuralPartedConfig& config);

}  // namespace parted
