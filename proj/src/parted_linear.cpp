#include "parted/parted_linear.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace parted {

namespace {

void check_shapes(const OfflineDataset& data, const FeatureTable& features) {
  if (data.size() < 1) throw std::invalid_argument("linear solver: dataset is empty");
  const auto& hd = data.header;
  if (hd.num_states != features.num_states() || hd.num_actions != features.num_actions()) {
    throw std::invalid_argument("linear solver: dataset state/action counts do not match the feature table");
  }
  for (const auto& r : data.records) {
    if (r.horizon() != hd.horizon) throw std::invalid_argument("linear solver: record horizon differs from header");
  }
}

}  // namespace

std::vector<std::string> check_regularisers(double lambda1, double lambda2) {
  std::vector<std::string> warnings;
  for (auto [name, value] : {std::pair{"lambda1", lambda1}, std::pair{"lambda2", lambda2}}) {
    if (!std::isfinite(value) || value <= 0.0) {
      throw std::invalid_argument(std::string(name) + " must be positive and finite");
    }
    if (value < 1.0) warnings.push_back(std::string(name) + " below 1 weakens the ridge bounds");
  }
  return warnings;
}

std::pair<double, double> resolve_linear_betas(const BetaSpec& spec, const FeatureTable& features,
                                               const OfflineDataset& data, double lambda1, double lambda2) {
  const int d = features.dim();
  const int H = data.header.horizon;
  std::pair<double, double> betas;
  switch (spec.mode) {
    case BetaSpec::Mode::explicit_values:
      betas = {spec.beta1, spec.beta2};
      break;
    case BetaSpec::Mode::theorem2:
      betas = theorem2_betas(d, H, data.size(), spec.c_beta1, spec.c_beta2, spec.delta);
      break;
    case BetaSpec::Mode::corollary1: {
      const double d1 = spec.d1 > 0.0 ? spec.d1 : static_cast<double>(d) * H;
      const double d2 = spec.d2 > 0.0 ? spec.d2 : static_cast<double>(d);
      betas = corollary1_betas(d1, d2, H, data.size(), lambda2, spec.constant);
      break;
    }
    case BetaSpec::Mode::theorem1: {
      std::vector<Matrix> step_grams;
      for (int h = 0; h < H; ++h) step_grams.push_back(gram_matrix(step_design(features, data, h)));
      betas = theorem1_betas(gram_matrix(trajectory_design(features, data)), step_grams, d, lambda1, lambda2,
                             spec.a2, spec.big_a2, spec.c_eps, spec.log_cover);
      break;
    }
  }
  if (!(betas.first >= 0.0 && betas.second >= 0.0) || !std::isfinite(betas.first) || !std::isfinite(betas.second)) {
    throw std::invalid_argument("beta multipliers must be finite and non-negative");
  }
  return betas;
}

Redistribution redistribute_rewards_linear(const OfflineDataset& data, const FeatureTable& features, double lambda1) {
  check_shapes(data, features);
  Vector returns(data.size());
  for (std::size_t n = 0; n < data.size(); ++n) returns[n] = data.records[n].ret();
  RidgeFit fit = ridge_fit(trajectory_design(features, data), returns, lambda1);
  return {std::move(fit.solution), std::move(fit.system)};
}

StepTables proxy_reward_tables(const FeatureTable& features, std::span<const double> theta, int horizon) {
  const std::size_t d = static_cast<std::size_t>(features.dim());
  if (theta.size() != d * static_cast<std::size_t>(horizon)) {
    throw std::invalid_argument("proxy rewards: parameter length must be d*H");
  }
  StepTables out;
  for (int h = 0; h < horizon; ++h) out.push_back(linear_table(features, theta.subspan(h * d, d)));
  return out;
}

ValueFit fit_transition_value_linear(const OfflineDataset& data, const FeatureTable& features,
                                     std::span<const double> v_next, double lambda2, int h) {
  check_shapes(data, features);
  if (h < 0 || h >= data.header.horizon) throw std::invalid_argument("transition value fit: step out of range");
  if (static_cast<int>(v_next.size()) != features.num_states()) {
    throw std::invalid_argument("transition value fit: V_next must have one entry per state");
  }
  RidgeFit fit = ridge_fit(step_design(features, data, h), next_state_values(data, h, v_next), lambda2);
  return {std::move(fit.solution), std::move(fit.system)};
}

Matrix linear_table(const FeatureTable& features, std::span<const double> w) {
  if (static_cast<int>(w.size()) != features.dim()) throw std::invalid_argument("linear_table: dimension mismatch");
  Matrix out(features.num_states(), features.num_actions());
  for (int s = 0; s < features.num_states(); ++s) {
    for (int a = 0; a < features.num_actions(); ++a) out(s, a) = dot(features.at(s, a), w);
  }
  return out;
}

StepTables reward_bonus_tables(const RidgeSystem& sigma, const FeatureTable& features, int horizon) {
  if (sigma.dim() != static_cast<std::size_t>(features.dim()) * horizon) {
    throw std::invalid_argument("reward bonus: Sigma dimension must be d*H");
  }
  Vector scratch(sigma.dim());
  StepTables out;
  for (int h = 0; h < horizon; ++h) {
    Matrix t(features.num_states(), features.num_actions());
    for (int s = 0; s < features.num_states(); ++s) {
      for (int a = 0; a < features.num_actions(); ++a) {
        t(s, a) = sigma.bonus(one_block_hot(features, horizon, h, s, a), scratch);
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

Matrix value_bonus_table(const RidgeSystem& lambda, const FeatureTable& features) {
  if (lambda.dim() != static_cast<std::size_t>(features.dim())) {
    throw std::invalid_argument("value bonus: Lambda dimension must be d");
  }
  Vector scratch(lambda.dim());
  Matrix out(features.num_states(), features.num_actions());
  for (int s = 0; s < features.num_states(); ++s) {
    for (int a = 0; a < features.num_actions(); ++a) out(s, a) = lambda.bonus(features.at(s, a), scratch);
  }
  return out;
}

LinearPenalties penalties_linear(const RidgeSystem& sigma, std::span<const RidgeSystem> lambdas,
                                 const FeatureTable& features) {
  LinearPenalties out;
  out.reward_bonus = reward_bonus_tables(sigma, features, static_cast<int>(lambdas.size()));
  for (const auto& l : lambdas) out.value_bonus.push_back(value_bonus_table(l, features));
  return out;
}

StepTables per_step_reward_fit(const OfflineDataset& data, const FeatureTable& features, double lambda,
                               const StepTarget& target, std::vector<Vector>* params) {
  check_shapes(data, features);
  const int H = data.header.horizon;
  StepTables out;
  if (params) params->clear();
  for (int h = 0; h < H; ++h) {
    Vector y(data.size());
    for (std::size_t n = 0; n < data.size(); ++n) y[n] = target(data.records[n], h);
    RidgeFit fit = ridge_fit(step_design(features, data, h), y, lambda);
    out.push_back(linear_table(features, fit.solution));
    if (params) params->push_back(std::move(fit.solution));
  }
  return out;
}

LinearPartedSolution linear_backward_induction(const OfflineDataset& data, const FeatureTable& features,
                                               StepTables reward_hat, StepTables reward_bonus, double beta1,
                                               double beta2, double lambda2, ClipMode clip) {
  check_shapes(data, features);
  const int H = data.header.horizon;
  std::vector<std::optional<RidgeSystem>> systems(H);
  auto fitter = [&](int h, std::span<const double> v_next) {
    ValueFit fit = fit_transition_value_linear(data, features, v_next, lambda2, h);
    StepEstimate est{linear_table(features, fit.w), value_bonus_table(fit.system, features), fit.w};
    systems[h].emplace(std::move(fit.system));
    return est;
  };
  LinearPartedSolution out;
  out.result = pessimistic_backward_induction(reward_hat, reward_bonus, beta1, beta2, clip, fitter);
  for (auto& s : systems) out.value_systems.push_back(std::move(*s));
  const std::size_t N = data.size();
  if (N < static_cast<std::size_t>(features.dim())) {
    out.result.warnings.push_back("N=" + std::to_string(N) + " is below the feature dimension d=" +
                                  std::to_string(features.dim()) + "; ridge regularisation carries the fit");
  }
  return out;
}

LinearPartedSolution solve_linear_parted(const OfflineDataset& data, const FeatureTable& features,
                                         const LinearPartedConfig& config) {
  check_shapes(data, features);
  auto warnings = check_regularisers(config.lambda1, config.lambda2);
  const int H = data.header.horizon;
  const auto [beta1, beta2] = resolve_linear_betas(config.beta, features, data, config.lambda1, config.lambda2);

  Redistribution red = redistribute_rewards_linear(data, features, config.lambda1);
  StepTables reward_bonus = reward_bonus_tables(red.system, features, H);
  StepTables reward_hat;
  std::vector<Vector> reward_params;
  if (config.reward_source == RewardSource::redistributed) {
    reward_hat = proxy_reward_tables(features, red.theta, H);
    const std::size_t d = static_cast<std::size_t>(features.dim());
    for (int h = 0; h < H; ++h) {
      reward_params.emplace_back(red.theta.begin() + h * d, red.theta.begin() + (h + 1) * d);
    }
  } else {
    reward_hat = per_step_reward_fit(
        data, features, config.lambda2,
        [](const TrajectoryRecord& r, int h) { return StepRewardAccess::rewards(r)[h]; }, &reward_params);
  }

  LinearPartedSolution out = linear_backward_induction(data, features, std::move(reward_hat), std::move(reward_bonus),
                                                       beta1, beta2, config.lambda2, config.clip);
  out.result.solver = "parted-linear";
  out.result.reward_params = std::move(reward_params);
  if (config.reward_source == RewardSource::redistributed) out.theta = std::move(red.theta);
  out.reward_system.emplace(std::move(red.system));
  out.result.warnings.insert(out.result.warnings.begin(), warnings.begin(), warnings.end());
  return out;
}

}  // namespace parted
