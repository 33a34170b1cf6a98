#include "parted/beta.hpp"

#include <algorithm>
#include <stdexcept>

namespace parted {

std::pair<double, double> theorem2_betas(int feature_dim, int horizon, std::size_t num_trajectories, double c_beta1,
                                         double c_beta2, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("theorem2 betas: delta must lie in (0,1)");
  const double d = feature_dim;
  const double H = horizon;
  const double N = static_cast<double>(num_trajectories);
  const double beta1 = c_beta1 * H * std::sqrt(d * H * std::log(N / delta));
  const double beta2 = c_beta2 * d * H * H * std::sqrt(std::log(d * H * H * H * std::pow(N, 2.5) / delta));
  return {beta1, beta2};
}

std::pair<double, double> corollary1_betas(double d1, double d2, int horizon, std::size_t num_trajectories,
                                           double lambda2, double constant) {
  if (!(d1 > 0.0 && d2 > 0.0)) throw std::invalid_argument("corollary1 betas: D1 and D2 must be positive");
  const double H = horizon;
  const double N = static_cast<double>(num_trajectories);
  const double dmax = std::max(d1, d2);
  const double eps = std::sqrt(lambda2) * dmax * H / (2.0 * N);
  const double beta1 = constant * H * std::sqrt(d1 * std::log(N * H * H));
  const double beta2 = constant * H * dmax * std::log(N * H * H * dmax / eps);
  return {beta1, beta2};
}

std::pair<double, double> theorem1_betas(const Matrix& reward_gram, const std::vector<Matrix>& step_grams,
                                         int input_dim, double lambda1, double lambda2, double a2, double big_a2,
                                         double c_eps, double log_cover) {
  const double N = static_cast<double>(reward_gram.rows());
  const double H = static_cast<double>(step_grams.size());
  const double d = input_dim;
  if (N < 1 || H < 1) throw std::invalid_argument("theorem1 betas: need at least one trajectory and one step");
  const double log_nh2 = std::log(N * H * H);
  const double reward_gain = gram_log_det_ratio(reward_gram, lambda1);
  double step_gain = 0.0;
  for (const auto& k : step_grams) step_gain = std::max(step_gain, gram_log_det_ratio(k, lambda2));
  const double beta1 = H * std::sqrt(4.0 * a2 * a2 * lambda1 / d + 2.0 * reward_gain + 10.0 * log_nh2);
  const double beta2 = H * std::sqrt(8.0 * big_a2 * big_a2 * lambda2 / d + 4.0 * step_gain + 6.0 * c_eps +
                                     16.0 * (log_nh2 + log_cover));
  return {beta1, beta2};
}

}  // namespace parted
