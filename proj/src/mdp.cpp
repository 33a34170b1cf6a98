#include "parted/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace parted {

FeatureTable::FeatureTable(int num_states, int num_actions, int dim)
    : FeatureTable(num_states, num_actions, dim,
                   Vector(static_cast<std::size_t>(num_states) * num_actions * dim, 0.0)) {}

FeatureTable::FeatureTable(int num_states, int num_actions, int dim, Vector values)
    : num_states_(num_states), num_actions_(num_actions), dim_(dim), values_(std::move(values)) {
  if (num_states < 0 || num_actions < 0 || dim < 0 ||
      values_.size() != static_cast<std::size_t>(num_states) * num_actions * dim) {
    throw std::invalid_argument("FeatureTable: value count does not match S*A*dim");
  }
}

double LinearMdp::transition_prob(int h, int s, int a, int next) const {
  const auto phi = features.at(s, a);
  const Matrix& mu = anchor_transitions[h];
  double p = 0.0;
  for (int j = 0; j < feature_dim; ++j) p += phi[j] * mu(j, next);
  return p;
}

Vector LinearMdp::next_state_distribution(int h, int s, int a) const {
  const auto phi = features.at(s, a);
  const Matrix& mu = anchor_transitions[h];
  Vector p(num_states, 0.0);
  for (int j = 0; j < feature_dim; ++j) {
    if (phi[j] == 0.0) continue;
    for (int n = 0; n < num_states; ++n) p[n] += phi[j] * mu(j, n);
  }
  return p;
}

double LinearMdp::mean_reward(int h, int s, int a) const { return dot(features.at(s, a), anchor_rewards[h]); }

double ValidationReport::max_violation() const {
  return std::max({feature_simplex, feature_norm, anchor_stochastic, anchor_reward_range, transition_validity,
                   reward_range, theta_norm, initial_state});
}

namespace {

double range_violation(double x, double lo, double hi) {
  if (x < lo) return lo - x;
  if (x > hi) return x - hi;
  return 0.0;
}

double simplex_violation(std::span<const double> v) {
  double worst = 0.0;
  double sum = 0.0;
  for (double x : v) {
    worst = std::max(worst, -x);
    sum += x;
  }
  return std::max(worst, std::abs(sum - 1.0));
}

std::string check_shapes(const LinearMdp& m) {
  if (m.num_states < 1 || m.num_actions < 1 || m.horizon < 1 || m.feature_dim < 1) return "sizes must be >= 1";
  if (m.features.num_states() != m.num_states || m.features.num_actions() != m.num_actions ||
      m.features.dim() != m.feature_dim) {
    return "feature table shape mismatch";
  }
  if (static_cast<int>(m.anchor_transitions.size()) != m.horizon) return "anchor_transitions must have H entries";
  if (static_cast<int>(m.anchor_rewards.size()) != m.horizon) return "anchor_rewards must have H entries";
  for (const auto& mu : m.anchor_transitions) {
    if (static_cast<int>(mu.rows()) != m.feature_dim || static_cast<int>(mu.cols()) != m.num_states) {
      return "anchor transition matrix must be d x S";
    }
  }
  for (const auto& rho : m.anchor_rewards) {
    if (static_cast<int>(rho.size()) != m.feature_dim) return "anchor reward vector must have length d";
  }
  return {};
}

}  // namespace

ValidationReport validate_mdp(const LinearMdp& mdp) {
  ValidationReport r;
  r.shape_error = check_shapes(mdp);
  if (!r.shape_error.empty()) {
    r.shapes_ok = false;
    return r;
  }
  const int S = mdp.num_states, A = mdp.num_actions, H = mdp.horizon, d = mdp.feature_dim;
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      r.feature_simplex = std::max(r.feature_simplex, simplex_violation(mdp.features.at(s, a)));
      r.feature_norm = std::max(r.feature_norm, norm(mdp.features.at(s, a)) - 1.0);
    }
  }
  for (int h = 0; h < H; ++h) {
    for (int j = 0; j < d; ++j) {
      r.anchor_stochastic = std::max(r.anchor_stochastic, simplex_violation(mdp.anchor_transitions[h].row(j)));
      r.anchor_reward_range = std::max(r.anchor_reward_range, range_violation(mdp.anchor_rewards[h][j], 0.0, 1.0));
    }
    r.theta_norm = std::max(r.theta_norm, norm(mdp.anchor_rewards[h]) - std::sqrt(static_cast<double>(d)));
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        r.transition_validity =
            std::max(r.transition_validity, simplex_violation(mdp.next_state_distribution(h, s, a)));
        r.reward_range = std::max(r.reward_range, range_violation(mdp.mean_reward(h, s, a), 0.0, 1.0));
      }
    }
  }
  if (mdp.initial_state < 0 || mdp.initial_state >= S) r.initial_state = 1.0;
  return r;
}

namespace {

// Flat Dirichlet draw: normalised -log(u) for u uniform on (0,1].
void draw_simplex(Rng& rng, std::span<double> out) {
  double sum = 0.0;
  for (double& x : out) {
    x = -std::log(rng.uniform_open_low());
    sum += x;
  }
  for (double& x : out) x /= sum;
}

}  // namespace

LinearMdp generate_random_mdp(std::uint64_t seed, int num_states, int num_actions, int horizon, int feature_dim,
                              double reward_heterogeneity, RewardNoise noise) {
  if (num_states < 1 || num_actions < 1 || horizon < 1 || feature_dim < 1) {
    throw std::invalid_argument("generate_random_mdp: S, A, H, d must all be >= 1");
  }
  if (!(reward_heterogeneity >= 0.0 && reward_heterogeneity <= 1.0)) {
    throw std::invalid_argument("generate_random_mdp: reward_heterogeneity must lie in [0,1]");
  }
  Rng rng(seed);
  LinearMdp m;
  m.num_states = num_states;
  m.num_actions = num_actions;
  m.horizon = horizon;
  m.feature_dim = feature_dim;
  m.reward_noise = noise;
  m.initial_state = 0;
  m.features = FeatureTable(num_states, num_actions, feature_dim);
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < num_actions; ++a) draw_simplex(rng, m.features.at(s, a));
  }
  for (int h = 0; h < horizon; ++h) {
    Matrix mu(feature_dim, num_states);
    for (int j = 0; j < feature_dim; ++j) draw_simplex(rng, mu.row(j));
    m.anchor_transitions.push_back(std::move(mu));
  }
  for (int h = 0; h < horizon; ++h) {
    Vector rho(feature_dim);
    for (double& x : rho) x = reward_heterogeneity * rng.uniform() + (1.0 - reward_heterogeneity) * 0.5;
    m.anchor_rewards.push_back(std::move(rho));
  }
  return m;
}

Policy::Policy(int horizon, int num_states, int num_actions)
    : horizon_(horizon),
      num_states_(num_states),
      num_actions_(num_actions),
      probs_(static_cast<std::size_t>(horizon) * num_states * num_actions, 0.0) {}

Policy Policy::deterministic(int horizon, int num_states, int num_actions, std::span<const int> actions) {
  if (actions.size() != static_cast<std::size_t>(horizon) * num_states) {
    throw std::invalid_argument("Policy::deterministic: expected H*S actions");
  }
  Policy p(horizon, num_states, num_actions);
  for (int h = 0; h < horizon; ++h) {
    for (int s = 0; s < num_states; ++s) {
      const int a = actions[static_cast<std::size_t>(h) * num_states + s];
      if (a < 0 || a >= num_actions) throw std::invalid_argument("Policy::deterministic: action out of range");
      p.set_prob(h, s, a, 1.0);
    }
  }
  return p;
}

Policy Policy::uniform(int horizon, int num_states, int num_actions) {
  Policy p(horizon, num_states, num_actions);
  std::fill(p.probs_.begin(), p.probs_.end(), 1.0 / num_actions);
  return p;
}

int Policy::action(int h, int s) const { return argmax_first(distribution(h, s)); }

bool Policy::is_deterministic() const {
  return std::all_of(probs_.begin(), probs_.end(), [](double p) { return p == 0.0 || p == 1.0; });
}

int Policy::sample(int h, int s, Rng& rng) const {
  const auto dist = distribution(h, s);
  const double u = rng.uniform();
  double cum = 0.0;
  int last_positive = 0;
  for (int a = 0; a < num_actions_; ++a) {
    if (dist[a] <= 0.0) continue;
    cum += dist[a];
    last_positive = a;
    if (u < cum) return a;
  }
  return last_positive;
}

double Policy::max_violation() const {
  double worst = 0.0;
  for (int h = 0; h < horizon_; ++h) {
    for (int s = 0; s < num_states_; ++s) worst = std::max(worst, simplex_violation(distribution(h, s)));
  }
  return worst;
}

int argmax_first(std::span<const double> values) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

int transition(const LinearMdp& mdp, int h, int s, int a, Rng& rng) {
  const Vector p = mdp.next_state_distribution(h, s, a);
  const double u = rng.uniform();
  double cum = 0.0;
  int last_positive = 0;
  for (int n = 0; n < mdp.num_states; ++n) {
    if (p[n] <= 0.0) continue;
    cum += p[n];
    last_positive = n;
    if (u < cum) return n;
  }
  return last_positive;
}

double sample_reward(const LinearMdp& mdp, int h, int s, int a, Rng& rng) {
  const double mean = mdp.mean_reward(h, s, a);
  if (mdp.reward_noise == RewardNoise::none) return mean;
  return rng.bernoulli(mean) ? 1.0 : 0.0;
}

Matrix bellman_apply(const LinearMdp& mdp, int h, std::span<const double> v_next) {
  if (static_cast<int>(v_next.size()) != mdp.num_states) throw std::invalid_argument("bellman_apply: V has wrong size");
  // Transition value through the anchors: (P_h V)(s,a) = <phi(s,a), mu_h V>.
  const Matrix& mu = mdp.anchor_transitions[h];
  Vector anchor_values(mdp.feature_dim);
  for (int j = 0; j < mdp.feature_dim; ++j) anchor_values[j] = dot(mu.row(j), v_next);
  Matrix out(mdp.num_states, mdp.num_actions);
  for (int s = 0; s < mdp.num_states; ++s) {
    for (int a = 0; a < mdp.num_actions; ++a) {
      out(s, a) = mdp.mean_reward(h, s, a) + dot(mdp.features.at(s, a), anchor_values);
    }
  }
  return out;
}

OptimalValues exact_optimal_values(const LinearMdp& mdp) {
  const int H = mdp.horizon, S = mdp.num_states, A = mdp.num_actions;
  OptimalValues out{Matrix(H + 1, S), StepTables(H), Policy(H, S, A)};
  for (int h = H - 1; h >= 0; --h) {
    out.q[h] = bellman_apply(mdp, h, out.v.row(h + 1));
    for (int s = 0; s < S; ++s) {
      const int a = argmax_first(out.q[h].row(s));
      out.policy.set_prob(h, s, a, 1.0);
      out.v(h, s) = out.q[h](s, a);
    }
  }
  return out;
}

PolicyValues exact_policy_values(const LinearMdp& mdp, const Policy& policy) {
  const int H = mdp.horizon, S = mdp.num_states;
  PolicyValues out{Matrix(H + 1, S), StepTables(H)};
  for (int h = H - 1; h >= 0; --h) {
    out.q[h] = bellman_apply(mdp, h, out.v.row(h + 1));
    for (int s = 0; s < S; ++s) out.v(h, s) = dot(out.q[h].row(s), policy.distribution(h, s));
  }
  return out;
}

Matrix state_occupancy(const LinearMdp& mdp, const Policy& policy, int start) {
  const int H = mdp.horizon, S = mdp.num_states, A = mdp.num_actions;
  Matrix d(H, S);
  d(0, start) = 1.0;
  for (int h = 0; h + 1 < H; ++h) {
    for (int s = 0; s < S; ++s) {
      if (d(h, s) == 0.0) continue;
      for (int a = 0; a < A; ++a) {
        const double w = d(h, s) * policy.prob(h, s, a);
        if (w == 0.0) continue;
        const Vector p = mdp.next_state_distribution(h, s, a);
        for (int n = 0; n < S; ++n) d(h + 1, n) += w * p[n];
      }
    }
  }
  return d;
}

}  // namespace parted
