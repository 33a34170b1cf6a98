#include "parted/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

namespace parted {

TrajectoryRecord::TrajectoryRecord(std::vector<int> states, std::vector<int> actions, double ret,
                                   std::optional<Vector> step_rewards)
    : states_(std::move(states)), actions_(std::move(actions)), ret_(ret), step_rewards_(std::move(step_rewards)) {
  if (states_.size() != actions_.size() + 1) {
    throw std::invalid_argument("TrajectoryRecord: expected H+1 states for H actions");
  }
  if (step_rewards_ && step_rewards_->size() != actions_.size()) {
    throw std::invalid_argument("TrajectoryRecord: step reward count must equal H");
  }
}

std::span<const double> StepRewardAccess::rewards(const TrajectoryRecord& record) {
  if (!record.step_rewards_) {
    throw std::invalid_argument("trajectory has no per-step rewards; collect with PARTED_DEBUG_STEP_REWARDS=1");
  }
  return *record.step_rewards_;
}

bool OfflineDataset::has_step_rewards() const {
  return !records.empty() &&
         std::all_of(records.begin(), records.end(), [](const auto& r) { return r.has_step_rewards(); });
}

OfflineDataset collect(const LinearMdp& mdp, const Policy& behavior, std::size_t num_trajectories,
                       std::uint64_t seed, bool record_step_rewards, std::string policy_tag) {
  if (num_trajectories < 1) throw std::invalid_argument("collect: N must be >= 1");
  const int H = mdp.horizon;
  Rng rng(seed);
  OfflineDataset out;
  out.header = DatasetHeader{mdp.feature_dim, H, mdp.num_states, mdp.num_actions, num_trajectories, seed,
                             std::move(policy_tag)};
  out.records.reserve(num_trajectories);
  for (std::size_t n = 0; n < num_trajectories; ++n) {
    std::vector<int> states(H + 1);
    std::vector<int> actions(H);
    Vector rewards(H);
    states[0] = mdp.initial_state;
    double ret = 0.0;
    for (int h = 0; h < H; ++h) {
      actions[h] = behavior.sample(h, states[h], rng);
      rewards[h] = sample_reward(mdp, h, states[h], actions[h], rng);
      ret += rewards[h];
      states[h + 1] = transition(mdp, h, states[h], actions[h], rng);
    }
    std::optional<Vector> hidden;
    if (record_step_rewards) hidden = std::move(rewards);
    out.records.emplace_back(std::move(states), std::move(actions), ret, std::move(hidden));
  }
  return out;
}

Policy make_behavior_policy(const LinearMdp& mdp, const std::string& descriptor) {
  const int H = mdp.horizon, S = mdp.num_states, A = mdp.num_actions;
  if (descriptor == "uniform") return Policy::uniform(H, S, A);
  const std::string prefix = "eps-greedy:";
  if (descriptor.starts_with(prefix)) {
    double eps = 0.0;
    const char* first = descriptor.data() + prefix.size();
    const char* last = descriptor.data() + descriptor.size();
    auto [ptr, ec] = std::from_chars(first, last, eps);
    if (ec != std::errc() || ptr != last || !(eps >= 0.0 && eps <= 1.0)) {
      throw std::invalid_argument("behaviour policy: bad epsilon in '" + descriptor + "'");
    }
    const Policy greedy = exact_optimal_values(mdp).policy;
    Policy p(H, S, A);
    for (int h = 0; h < H; ++h) {
      for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) p.set_prob(h, s, a, eps / A + (1.0 - eps) * greedy.prob(h, s, a));
      }
    }
    return p;
  }
  throw std::invalid_argument("unknown behaviour policy '" + descriptor + "'");
}

Vector trajectory_feature(const FeatureTable& features, const TrajectoryRecord& record) {
  const int d = features.dim();
  Vector out(static_cast<std::size_t>(d) * record.horizon());
  for (int h = 0; h < record.horizon(); ++h) {
    const auto phi = features.at(record.states()[h], record.actions()[h]);
    std::copy(phi.begin(), phi.end(), out.begin() + static_cast<std::ptrdiff_t>(h) * d);
  }
  return out;
}

Vector one_block_hot(const FeatureTable& features, int horizon, int h, int s, int a) {
  if (h < 0 || h >= horizon) throw std::invalid_argument("one_block_hot: step out of range");
  const int d = features.dim();
  Vector out(static_cast<std::size_t>(d) * horizon, 0.0);
  const auto phi = features.at(s, a);
  std::copy(phi.begin(), phi.end(), out.begin() + static_cast<std::ptrdiff_t>(h) * d);
  return out;
}

Matrix trajectory_design(const FeatureTable& features, const OfflineDataset& data) {
  const std::size_t dim = static_cast<std::size_t>(features.dim()) * data.header.horizon;
  Matrix out(data.size(), dim);
  for (std::size_t n = 0; n < data.size(); ++n) {
    const Vector row = trajectory_feature(features, data.records[n]);
    if (row.size() != dim) throw std::invalid_argument("trajectory_design: record horizon mismatch");
    std::copy(row.begin(), row.end(), out.row(n).begin());
  }
  return out;
}

Matrix step_design(const FeatureTable& features, const OfflineDataset& data, int h) {
  Matrix out(data.size(), features.dim());
  for (std::size_t n = 0; n < data.size(); ++n) {
    const auto& r = data.records[n];
    const auto phi = features.at(r.states()[h], r.actions()[h]);
    std::copy(phi.begin(), phi.end(), out.row(n).begin());
  }
  return out;
}

Vector next_state_values(const OfflineDataset& data, int h, std::span<const double> v_next) {
  Vector out(data.size());
  for (std::size_t n = 0; n < data.size(); ++n) out[n] = v_next[data.records[n].states()[h + 1]];
  return out;
}

double CoverageReport::lambda_min_step_overall() const {
  return lambda_min_step.empty() ? 0.0 : *std::min_element(lambda_min_step.begin(), lambda_min_step.end());
}

namespace {

Matrix normalised_second_moment(const Matrix& design) {
  Matrix second = [&] {
    Matrix g(design.cols(), design.cols());
    for (std::size_t n = 0; n < design.rows(); ++n) {
      const auto v = design.row(n);
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] == 0.0) continue;
        for (std::size_t j = 0; j < v.size(); ++j) g(i, j) += v[i] * v[j];
      }
    }
    return g;
  }();
  const double inv_n = 1.0 / static_cast<double>(design.rows());
  for (double& x : second.flat()) x *= inv_n;
  return second;
}

double normalised_min_eigen(const Matrix& design) { return min_eigenvalue(normalised_second_moment(design)); }

}  // namespace

CoverageReport coverage_diagnostics(const FeatureTable& features, const OfflineDataset& data, double threshold) {
  if (data.size() < 1) throw std::invalid_argument("coverage_diagnostics: empty dataset");
  CoverageReport report;
  report.threshold = threshold;
  report.lambda_min_trajectory = normalised_min_eigen(trajectory_design(features, data));
  for (int h = 0; h < data.header.horizon; ++h) {
    report.lambda_min_step.push_back(normalised_min_eigen(step_design(features, data, h)));
  }
  report.well_explored = report.lambda_min_trajectory > threshold && report.lambda_min_step_overall() > threshold;
  return report;
}

}  // namespace parted
