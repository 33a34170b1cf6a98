#pragma once

// Helpers shared by the unit tests: random instances and Eigen views used as
// independent oracles.

#include <Eigen/Dense>

#include "parted/linalg.hpp"
#include "parted/mdp.hpp"
#include "parted/rng.hpp"

namespace parted::test {

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (double& x : m.flat()) x = scale * (2.0 * rng.uniform() - 1.0);
  return m;
}

inline Vector random_vector(Rng& rng, std::size_t n, double scale = 1.0) {
  Vector v(n);
  for (double& x : v) x = scale * (2.0 * rng.uniform() - 1.0);
  return v;
}

inline Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

inline Eigen::VectorXd to_eigen(std::span<const double> v) {
  Eigen::VectorXd e(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) e(i) = v[i];
  return e;
}

/// reg I + V^T V
inline Eigen::MatrixXd regularised_gram(const Matrix& samples, double reg) {
  const Eigen::MatrixXd v = to_eigen(samples);
  return reg * Eigen::MatrixXd::Identity(v.cols(), v.cols()) + v.transpose() * v;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.flat().size(); ++i) e = std::max(e, std::abs(a.flat()[i] - b.flat()[i]));
  return e;
}

inline double max_abs_diff(const StepTables& a, const StepTables& b) {
  double e = 0.0;
  for (std::size_t h = 0; h < a.size(); ++h) e = std::max(e, max_abs_diff(a[h], b[h]));
  return e;
}

/// Random policy with Dirichlet(1)-like rows.
inline Policy random_policy(Rng& rng, int H, int S, int A) {
  Policy p(H, S, A);
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s) {
      double total = 0.0;
      Vector w(A);
      for (double& x : w) total += (x = -std::log(rng.uniform_open_low()));
      for (int a = 0; a < A; ++a) p.set_prob(h, s, a, w[a] / total);
    }
  return p;
}

/// Tabular MDP written as a linear MDP with one-hot features (d = S*A):
/// transitions[h](s*A + a, s') and rewards[h](s, a).
inline LinearMdp tabular_mdp(int S, int A, const std::vector<Matrix>& transitions, const std::vector<Matrix>& rewards,
                             RewardNoise noise = RewardNoise::none) {
  LinearMdp m;
  m.num_states = S;
  m.num_actions = A;
  m.horizon = static_cast<int>(transitions.size());
  m.feature_dim = S * A;
  m.reward_noise = noise;
  m.features = FeatureTable(S, A, S * A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) m.features.at(s, a)[s * A + a] = 1.0;
  for (int h = 0; h < m.horizon; ++h) {
    m.anchor_transitions.push_back(transitions[h]);
    Vector rho(S * A);
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) rho[s * A + a] = rewards[h](s, a);
    m.anchor_rewards.push_back(rho);
  }
  return m;
}

/// Same transition and reward table at every step.
inline LinearMdp stationary_tabular_mdp(int S, int A, int H, const Matrix& transitions, const Matrix& rewards,
                                        RewardNoise noise = RewardNoise::none) {
  return tabular_mdp(S, A, std::vector<Matrix>(H, transitions), std::vector<Matrix>(H, rewards), noise);
}

}  // namespace parted::test
