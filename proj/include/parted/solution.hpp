#pragma once

// Pieces shared by every pessimistic solver: the solution tables, the clip
// rule and the backward induction loop that turns reward/transition-value
// estimates and their bonuses into clipped Q-values and a greedy policy.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "parted/linalg.hpp"
#include "parted/mdp.hpp"

namespace parted {

enum class ClipMode {
  per_step,  ///< Q_h <= H - h + 1 (1-based h)
  flat,      ///< Q_h <= H
};

/// Upper clip level for 0-based step h.
double clip_cap(ClipMode mode, int horizon, int h);

struct PessimisticSolution {
  std::string solver;
  int horizon = 0;
  int num_states = 0;
  int num_actions = 0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  ClipMode clip = ClipMode::per_step;

  StepTables reward_hat;            ///< R_hat_h(s,a)
  StepTables transition_value_hat;  ///< (P_hat_h V_hat_{h+1})(s,a)
  StepTables reward_bonus;          ///< b_{r,h}(s,a)
  StepTables value_bonus;           ///< b_{v,h}(s,a)
  StepTables penalty;               ///< Gamma_h = beta1 b_r + beta2 b_v
  StepTables q;                     ///< clipped Q_hat_h
  Matrix v;                         ///< (H+1) x S, V_hat_h(s) = Q_hat_h(s, pi_hat_h(s))
  Policy policy;                    ///< greedy in q, smallest index on ties

  std::vector<Vector> reward_params;  ///< theta_hat_h per step (solver-specific length)
  std::vector<Vector> value_params;   ///< w_hat_h per step
  std::vector<std::string> warnings;
};

/// Transition-value estimate and its bonus for one step, given V_hat_{h+1}.
struct StepEstimate {
  Matrix transition_value;  ///< S x A
  Matrix value_bonus;       ///< S x A
  Vector params;            ///< fitted parameters, recorded in value_params
};

using TransitionFitter = std::function<StepEstimate(int h, std::span<const double> v_next)>;

/// Runs h = H-1 .. 0:
///   Gamma_h = beta1 * b_r + beta2 * b_v
///   Q_h     = min{R_hat + P_hat V_{h+1} - Gamma_h, cap_h}^+
///   pi_h    = greedy(Q_h), V_h(s) = Q_h(s, pi_h(s)).
PessimisticSolution pessimistic_backward_induction(const StepTables& reward_hat, const StepTables& reward_bonus,
                                                   double beta1, double beta2, ClipMode clip,
                                                   const TransitionFitter& fit);

/// delta_h(s,a) = (B_h V_hat_{h+1})(s,a) - Q_hat_h(s,a), computed on the true MDP.
StepTables evaluation_errors(const LinearMdp& mdp, const PessimisticSolution& solution);

}  // namespace parted
