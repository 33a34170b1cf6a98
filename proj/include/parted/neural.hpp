#pragma once

// Two-layer networks f(x; w) = (2m)^{-1/2} sum_r b_r sigma(w_r^T x) with a
// frozen sign layer, their neural-tangent features phi(x, w) = grad_w f, the
// induced kernels, and the regularised fits used by the neural solver.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "parted/dataset.hpp"
#include "parted/linalg.hpp"
#include "parted/mdp.hpp"

namespace parted {

enum class Activation {
  xtanh,          ///< u tanh(u): smooth, bounded derivative, sigma'(0) = 0 (default)
  tanh,           ///< tanh(u); sigma'(0) = 1
  smoothed_relu,  ///< softplus(u) - u/2 - log 2; sigma' = logistic(u) - 1/2
};

std::string_view activation_name(Activation act);
Activation parse_activation(std::string_view name);

double activate(Activation act, double u);
double activation_derivative(Activation act, double u);
/// Upper bound C_sigma on |sigma'|.
double activation_bound(Activation act);

class TwoLayerNet {
 public:
  TwoLayerNet() = default;
  TwoLayerNet(int half_width, int input_dim, Activation act, Vector signs, Vector init_weights,
              std::uint64_t seed = 0);

  /// b_r ~ Unif{-1,+1}, w_r ~ N(0, I/d) for r < m; b_{r+m} = -b_r, w_{r+m} = w_r.
  static TwoLayerNet init_symmetric(std::uint64_t seed, int half_width, int input_dim,
                                    Activation act = Activation::xtanh);

  int half_width() const { return m_; }
  int width() const { return 2 * m_; }
  int input_dim() const { return d_; }
  std::size_t num_params() const { return static_cast<std::size_t>(2 * m_) * d_; }
  Activation activation() const { return act_; }
  std::uint64_t seed() const { return seed_; }
  const Vector& signs() const { return signs_; }
  /// w_0, row r at [r*d, (r+1)*d).
  const Vector& init_weights() const { return w0_; }

  double evaluate(std::span<const double> w, std::span<const double> x) const;
  /// out = grad_w f(x; w); returns f(x; w).
  double evaluate_with_gradient(std::span<const double> w, std::span<const double> x, std::span<double> out) const;
  void gradient(std::span<const double> w, std::span<const double> x, std::span<double> out) const {
    evaluate_with_gradient(w, x, out);
  }
  /// f(x; w0) + <phi(x, w0), w - w0>
  double evaluate_linearized(std::span<const double> w, std::span<const double> x) const;

  bool operator==(const TwoLayerNet&) const = default;

 private:
  int m_ = 0;
  int d_ = 0;
  Activation act_ = Activation::xtanh;
  Vector signs_;
  Vector w0_;
  std::uint64_t seed_ = 0;
};

/// K(x, x') = <phi(x, w0), phi(x', w0)> = (2m)^{-1} sum_r sigma'(w0_r^T x) sigma'(w0_r^T x') x^T x'.
double ntk_kernel(const TwoLayerNet& net, std::span<const double> x, std::span<const double> xp);

/// K_H(tau, tau') = sum_h K(x_h, x'_h), inputs x = inputs.at(s, a).
double trajectory_kernel(const TwoLayerNet& net, const FeatureTable& inputs, const TrajectoryRecord& a,
                         const TrajectoryRecord& b);

/// Table of phi(x(s,a), w) in R^{2md}.
FeatureTable ntk_features(const TwoLayerNet& net, const FeatureTable& inputs, std::span<const double> w);

/// Kernel Gram matrices at initialisation: K_r over trajectories and K_{v,h} per step.
struct NtkGrams {
  Matrix reward;
  std::vector<Matrix> steps;
};
NtkGrams ntk_grams(const TwoLayerNet& net, const FeatureTable& inputs, const OfflineDataset& data);

enum class FitMode { gd_train, ntk_closed_form };

std::string_view fit_mode_name(FitMode mode);

struct OptimizerConfig {
  double step_size = 0.0;  ///< 0 selects 1/(2N)
  int max_iters = 50000;
  double tolerance = 1e-8;  ///< stop once |grad| <= tolerance
  int divergence_window = 50;
};

struct FitDiagnostics {
  double objective = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
  Vector param_dist;         ///< |theta_h - theta_0| per fitted vector
  double ball_radius = 0.0;  ///< H sqrt(N / lambda)

  bool within_ball(double slack = 1e-9) const;
};

struct RewardNetworkFit {
  std::vector<Vector> theta;  ///< H weight vectors
  FitDiagnostics diagnostics;
};

/// Minimises sum_tau (sum_h f(x_h; theta_h) - r(tau))^2 + lambda1 sum_h |theta_h - theta_0|^2
/// by full-batch gradient descent, or solves its linearisation around theta_0
/// in closed form (ridge on stacked tangent features, dual form above `dual_threshold`).
RewardNetworkFit fit_reward_network(const OfflineDataset& data, const FeatureTable& inputs, const TwoLayerNet& net,
                                    double lambda1, const OptimizerConfig& opt, FitMode mode,
                                    std::size_t dual_threshold = 4096);

struct ValueNetworkFit {
  Vector w;
  FitDiagnostics diagnostics;
};

/// Minimises sum_tau (f(x_h; w) - V_next(s_{h+1}))^2 + lambda2 |w - w_0|^2.
ValueNetworkFit fit_value_network(const OfflineDataset& data, const FeatureTable& inputs,
                                  std::span<const double> v_next, const TwoLayerNet& net, double lambda2,
                                  const OptimizerConfig& opt, FitMode mode, int h, std::size_t dual_threshold = 4096);

struct BonusTables {
  StepTables tables;
  bool primal = true;
};

/// b_{r,h}(x) = [Phi_h^T Sigma(Theta)^{-1} Phi_h]^{1/2}, Phi_h the one-block-hot
/// of phi(x, theta_h), Sigma(Theta) = lambda1 I + sum Phi(tau, Theta) Phi(tau, Theta)^T.
BonusTables neural_reward_bonus(const OfflineDataset& data, const FeatureTable& inputs, const TwoLayerNet& net,
                                const std::vector<Vector>& theta, double lambda1, BonusPath path,
                                std::size_t dual_threshold = 4096);

/// b_{v,h}(x) = [phi(x,w)^T Lambda_h(w)^{-1} phi(x,w)]^{1/2}. Single-table result.
BonusTables neural_value_bonus(const OfflineDataset& data, const FeatureTable& inputs, const TwoLayerNet& net,
                               std::span<const double> w, double lambda2, int h, BonusPath path,
                               std::size_t dual_threshold = 4096);

}  // namespace parted
