#include "parted/parted_neural.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "parted/parted_linear.hpp"

namespace parted {

std::pair<double, double> compute_beta_theorem1(const OfflineDataset& data, const FeatureTable& inputs,
                                                const TwoLayerNet& net, double lambda1, double lambda2,
                                                const BetaSpec& spec) {
  const NtkGrams grams = ntk_grams(net, inputs, data);
  return theorem1_betas(grams.reward, grams.steps, net.input_dim(), lambda1, lambda2, spec.a2, spec.big_a2,
                        spec.c_eps, spec.log_cover);
}

namespace {

std::pair<double, double> resolve_neural_betas(const NeuralPartedConfig& cfg, const OfflineDataset& data,
                                               const FeatureTable& inputs, const TwoLayerNet& net, double lambda1,
                                               double lambda2) {
  const auto& spec = cfg.beta;
  const int H = data.header.horizon;
  std::pair<double, double> betas;
  switch (spec.mode) {
    case BetaSpec::Mode::explicit_values:
      betas = {spec.beta1, spec.beta2};
      break;
    case BetaSpec::Mode::theorem1:
      betas = compute_beta_theorem1(data, inputs, net, lambda1, lambda2, spec);
      break;
    case BetaSpec::Mode::corollary1: {
      const double d = inputs.dim();
      betas = corollary1_betas(spec.d1 > 0.0 ? spec.d1 : d * H, spec.d2 > 0.0 ? spec.d2 : d, H, data.size(), lambda2,
                               spec.constant);
      break;
    }
    case BetaSpec::Mode::theorem2:
      throw std::invalid_argument("theorem2 beta formulas apply to the linear solver only");
  }
  if (!(betas.first >= 0.0 && betas.second >= 0.0) || !std::isfinite(betas.first) || !std::isfinite(betas.second)) {
    throw std::invalid_argument("beta multipliers must be finite and non-negative");
  }
  return betas;
}

Matrix prediction_table(const TwoLayerNet& net, const FeatureTable& inputs, std::span<const double> w, FitMode mode) {
  Matrix out(inputs.num_states(), inputs.num_actions());
  for (int s = 0; s < inputs.num_states(); ++s) {
    for (int a = 0; a < inputs.num_actions(); ++a) {
      out(s, a) = mode == FitMode::gd_train ? net.evaluate(w, inputs.at(s, a))
                                            : net.evaluate_linearized(w, inputs.at(s, a));
    }
  }
  return out;
}

}  // namespace

NeuralPartedSolution solve_neural_parted(const OfflineDataset& data, const FeatureTable& inputs,
                                         const NeuralPartedConfig& config) {
  if (data.size() < 1) throw std::invalid_argument("neural solver: dataset is empty");
  const double default_lambda = 1.0 + 1.0 / static_cast<double>(data.size());
  NeuralPartedSolution out;
  out.lambda1 = config.lambda1.value_or(default_lambda);
  out.lambda2 = config.lambda2.value_or(default_lambda);
  auto warnings = check_regularisers(out.lambda1, out.lambda2);
  out.net = TwoLayerNet::init_symmetric(config.net_seed, config.m, inputs.dim(), config.activation);
  const TwoLayerNet& net = out.net;
  const int H = data.header.horizon;
  const auto [beta1, beta2] = resolve_neural_betas(config, data, inputs, net, out.lambda1, out.lambda2);

  // The linearised model's tangent features are those at initialisation.
  const bool at_init = config.mode == FitMode::ntk_closed_form || config.penalty_point == PenaltyPoint::init;

  RewardNetworkFit reward =
      fit_reward_network(data, inputs, net, out.lambda1, config.optimizer, config.mode, config.dual_threshold);
  StepTables reward_hat;
  for (int h = 0; h < H; ++h) reward_hat.push_back(prediction_table(net, inputs, reward.theta[h], config.mode));
  const std::vector<Vector> init_theta(H, net.init_weights());
  BonusTables reward_bonus = neural_reward_bonus(data, inputs, net, at_init ? init_theta : reward.theta, out.lambda1,
                                                 config.bonus_path, config.dual_threshold);
  out.reward_bonus_primal = reward_bonus.primal;

  out.w.resize(H);
  out.value_diagnostics.resize(H);
  auto fitter = [&](int h, std::span<const double> v_next) {
    ValueNetworkFit fit = fit_value_network(data, inputs, v_next, net, out.lambda2, config.optimizer, config.mode, h,
                                            config.dual_threshold);
    StepEstimate est;
    est.transition_value = prediction_table(net, inputs, fit.w, config.mode);
    const std::span<const double> point = at_init ? std::span<const double>(net.init_weights()) : fit.w;
    est.value_bonus =
        std::move(neural_value_bonus(data, inputs, net, point, out.lambda2, h, config.bonus_path, config.dual_threshold)
                      .tables[0]);
    est.params = fit.w;
    out.w[h] = std::move(fit.w);
    out.value_diagnostics[h] = std::move(fit.diagnostics);
    return est;
  };
  out.result = pessimistic_backward_induction(reward_hat, reward_bonus.tables, beta1, beta2, config.clip, fitter);
  out.result.solver = "parted-neural";
  out.result.reward_params = reward.theta;
  out.theta = std::move(reward.theta);
  out.reward_diagnostics = std::move(reward.diagnostics);

  out.result.warnings = std::move(warnings);
  if (out.reward_diagnostics.diverged) out.result.warnings.push_back("reward network fit diverged");
  if (config.mode == FitMode::gd_train && !out.reward_diagnostics.converged) {
    out.result.warnings.push_back("reward network fit stopped at the iteration cap with |grad| = " +
                                  std::to_string(out.reward_diagnostics.grad_norm));
  }
  for (int h = 0; h < H; ++h) {
    const auto& d = out.value_diagnostics[h];
    if (d.diverged) out.result.warnings.push_back("value network fit diverged at step " + std::to_string(h));
  }
  return out;
}

}  // namespace parted
