#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "parted/linalg.hpp"

namespace parted {

/// How the penalty multipliers (beta1, beta2) are chosen.
struct BetaSpec {
  enum class Mode {
    explicit_values,  ///< beta1, beta2 as given
    theorem2,         ///< linear-MDP rates with constants c_beta1, c_beta2 and confidence delta
    theorem1,         ///< information-gain form from the Gram matrices
    corollary1,       ///< effective-dimension form from D1, D2
  };

  Mode mode = Mode::theorem2;

  double beta1 = 0.0;
  double beta2 = 0.0;

  double c_beta1 = 0.1;
  double c_beta2 = 0.1;
  double delta = 0.1;

  double a2 = 1.0;
  double big_a2 = 1.0;
  double c_eps = 1.0;
  double log_cover = std::log(1000.0);

  double d1 = 0.0;  ///< 0 selects the linear-MDP value d*H
  double d2 = 0.0;  ///< 0 selects d
  double constant = 1.0;
};

/// beta1 = c1 * H * sqrt(dH log(N/delta)),
/// beta2 = c2 * d * H^2 * sqrt(log(d H^3 N^{5/2} / delta)).
std::pair<double, double> theorem2_betas(int feature_dim, int horizon, std::size_t num_trajectories, double c_beta1,
                                         double c_beta2, double delta);

/// beta1 = c * H * sqrt(D1 log(N H^2)),
/// beta2 = c * H * D * log(N H^2 D / eps), D = max(D1, D2),
/// with eps = sqrt(lambda2) * D * H / (2N) (unit feature-norm constant).
std::pair<double, double> corollary1_betas(double d1, double d2, int horizon, std::size_t num_trajectories,
                                           double lambda2, double constant);

/// Information-gain multipliers:
///   beta1 = H sqrt(4 a2^2 l1/d + 2 logdet(I + K_r/l1) + 10 log(N H^2))
///   beta2 = H sqrt(8 A2^2 l2/d + 4 max_h logdet(I + K_vh/l2) + 6 C_eps + 16 (log(N H^2) + log_cover))
/// `reward_gram` is K_r (N x N), `step_grams[h]` is K_{v,h}; `input_dim` is d.
std::pair<double, double> theorem1_betas(const Matrix& reward_gram, const std::vector<Matrix>& step_grams,
                                         int input_dim, double lambda1, double lambda2, double a2, double big_a2,
                                         double c_eps, double log_cover);

}  // namespace parted
