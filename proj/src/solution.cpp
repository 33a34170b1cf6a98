#include "parted/solution.hpp"

#include <algorithm>
#include <stdexcept>

namespace parted {

double clip_cap(ClipMode mode, int horizon, int h) {
  return mode == ClipMode::per_step ? static_cast<double>(horizon - h) : static_cast<double>(horizon);
}

PessimisticSolution pessimistic_backward_induction(const StepTables& reward_hat, const StepTables& reward_bonus,
                                                   double beta1, double beta2, ClipMode clip,
                                                   const TransitionFitter& fit) {
  if (reward_hat.empty() || reward_hat.size() != reward_bonus.size()) {
    throw std::invalid_argument("backward induction: reward tables must be non-empty and aligned");
  }
  const int H = static_cast<int>(reward_hat.size());
  const int S = static_cast<int>(reward_hat[0].rows());
  const int A = static_cast<int>(reward_hat[0].cols());

  PessimisticSolution sol;
  sol.horizon = H;
  sol.num_states = S;
  sol.num_actions = A;
  sol.beta1 = beta1;
  sol.beta2 = beta2;
  sol.clip = clip;
  sol.reward_hat = reward_hat;
  sol.reward_bonus = reward_bonus;
  sol.transition_value_hat.resize(H);
  sol.value_bonus.resize(H);
  sol.penalty.resize(H);
  sol.q.resize(H);
  sol.value_params.resize(H);
  sol.v = Matrix(H + 1, S);
  sol.policy = Policy(H, S, A);

  for (int h = H - 1; h >= 0; --h) {
    StepEstimate est = fit(h, sol.v.row(h + 1));
    if (static_cast<int>(est.transition_value.rows()) != S || static_cast<int>(est.transition_value.cols()) != A ||
        est.value_bonus.rows() != est.transition_value.rows() || est.value_bonus.cols() != est.transition_value.cols()) {
      throw std::invalid_argument("backward induction: transition estimate has the wrong shape");
    }
    const double cap = clip_cap(clip, H, h);
    Matrix gamma(S, A);
    Matrix q(S, A);
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        gamma(s, a) = beta1 * reward_bonus[h](s, a) + beta2 * est.value_bonus(s, a);
        const double raw = reward_hat[h](s, a) + est.transition_value(s, a) - gamma(s, a);
        q(s, a) = std::max(std::min(raw, cap), 0.0);
      }
      const int best = argmax_first(q.row(s));
      sol.policy.set_prob(h, s, best, 1.0);
      sol.v(h, s) = q(s, best);
    }
    sol.transition_value_hat[h] = std::move(est.transition_value);
    sol.value_bonus[h] = std::move(est.value_bonus);
    sol.value_params[h] = std::move(est.params);
    sol.penalty[h] = std::move(gamma);
    sol.q[h] = std::move(q);
  }
  return sol;
}

StepTables evaluation_errors(const LinearMdp& mdp, const PessimisticSolution& solution) {
  if (solution.horizon != mdp.horizon || solution.num_states != mdp.num_states ||
      solution.num_actions != mdp.num_actions) {
    throw std::invalid_argument("evaluation_errors: solution does not match the MDP");
  }
  StepTables delta(mdp.horizon);
  for (int h = 0; h < mdp.horizon; ++h) {
    delta[h] = bellman_apply(mdp, h, solution.v.row(h + 1));
    auto out = delta[h].flat();
    const auto q = solution.q[h].flat();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= q[i];
  }
  return delta;
}

}  // namespace parted
