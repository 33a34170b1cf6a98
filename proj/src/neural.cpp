#include "parted/neural.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "parted/rng.hpp"
#include "parted/simd/kernels.hpp"

namespace parted {

std::string_view activation_name(Activation act) {
  switch (act) {
    case Activation::xtanh: return "xtanh";
    case Activation::tanh: return "tanh";
    case Activation::smoothed_relu: return "smoothed_relu";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  if (name == "xtanh") return Activation::xtanh;
  if (name == "tanh") return Activation::tanh;
  if (name == "smoothed_relu") return Activation::smoothed_relu;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

namespace {

double softplus(double u) { return std::log1p(std::exp(-std::abs(u))) + std::max(u, 0.0); }

}  // namespace

double activate(Activation act, double u) {
  switch (act) {
    case Activation::xtanh: return u * std::tanh(u);
    case Activation::tanh: return std::tanh(u);
    case Activation::smoothed_relu: return softplus(u) - 0.5 * u - std::numbers::ln2;
  }
  return 0.0;
}

double activation_derivative(Activation act, double u) {
  switch (act) {
    case Activation::xtanh: {
      const double t = std::tanh(u);
      return t + u * (1.0 - t * t);
    }
    case Activation::tanh: {
      const double t = std::tanh(u);
      return 1.0 - t * t;
    }
    case Activation::smoothed_relu: return 1.0 / (1.0 + std::exp(-u)) - 0.5;
  }
  return 0.0;
}

double activation_bound(Activation act) {
  switch (act) {
    // sup |tanh u + u sech^2 u| is attained where u tanh u = 1 (u ~ 1.1997) and is just under 1.2.
    case Activation::xtanh: return 1.2;
    case Activation::tanh: return 1.0;
    case Activation::smoothed_relu: return 0.5;
  }
  return 0.0;
}

TwoLayerNet::TwoLayerNet(int half_width, int input_dim, Activation act, Vector signs, Vector init_weights,
                         std::uint64_t seed)
    : m_(half_width), d_(input_dim), act_(act), signs_(std::move(signs)), w0_(std::move(init_weights)), seed_(seed) {
  if (m_ < 1 || d_ < 1) throw std::invalid_argument("network: m and d must be >= 1");
  if (signs_.size() != static_cast<std::size_t>(2 * m_) || w0_.size() != num_params()) {
    throw std::invalid_argument("network: sign or weight array has the wrong length");
  }
  for (double b : signs_) {
    if (b != 1.0 && b != -1.0) throw std::invalid_argument("network: second-layer signs must be +1 or -1");
  }
}

TwoLayerNet TwoLayerNet::init_symmetric(std::uint64_t seed, int half_width, int input_dim, Activation act) {
  if (half_width < 1 || input_dim < 1) throw std::invalid_argument("init_symmetric: m and d must be >= 1");
  const int m = half_width, d = input_dim;
  Rng rng(seed);
  Vector signs(2 * m);
  for (int r = 0; r < m; ++r) {
    signs[r] = rng.bernoulli(0.5) ? 1.0 : -1.0;
    signs[r + m] = -signs[r];
  }
  Vector w(static_cast<std::size_t>(2 * m) * d);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (int r = 0; r < m; ++r) {
    for (int j = 0; j < d; ++j) {
      w[r * d + j] = scale * rng.normal();
      w[(r + m) * d + j] = w[r * d + j];
    }
  }
  return TwoLayerNet(m, d, act, std::move(signs), std::move(w), seed);
}

double TwoLayerNet::evaluate(std::span<const double> w, std::span<const double> x) const {
  if (w.size() != num_params() || x.size() != static_cast<std::size_t>(d_)) {
    throw std::invalid_argument("network: weight or input length mismatch");
  }
  double sum = 0.0;
  for (int r = 0; r < 2 * m_; ++r) sum += signs_[r] * activate(act_, simd::dot(w.subspan(r * d_, d_), x));
  return sum / std::sqrt(2.0 * m_);
}

double TwoLayerNet::evaluate_with_gradient(std::span<const double> w, std::span<const double> x,
                                           std::span<double> out) const {
  if (w.size() != num_params() || x.size() != static_cast<std::size_t>(d_) || out.size() != num_params()) {
    throw std::invalid_argument("network: weight, input or gradient length mismatch");
  }
  const double scale = 1.0 / std::sqrt(2.0 * m_);
  double sum = 0.0;
  for (int r = 0; r < 2 * m_; ++r) {
    const double u = simd::dot(w.subspan(r * d_, d_), x);
    sum += signs_[r] * activate(act_, u);
    const double coef = scale * signs_[r] * activation_derivative(act_, u);
    for (int j = 0; j < d_; ++j) out[r * d_ + j] = coef * x[j];
  }
  return sum * scale;
}

double TwoLayerNet::evaluate_linearized(std::span<const double> w, std::span<const double> x) const {
  Vector g(num_params());
  const double f0 = evaluate_with_gradient(w0_, x, g);
  double lin = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) lin += g[i] * (w[i] - w0_[i]);
  return f0 + lin;
}

double ntk_kernel(const TwoLayerNet& net, std::span<const double> x, std::span<const double> xp) {
  const int d = net.input_dim();
  if (x.size() != static_cast<std::size_t>(d) || xp.size() != x.size()) {
    throw std::invalid_argument("ntk_kernel: input length mismatch");
  }
  const auto& w0 = net.init_weights();
  double acc = 0.0;
  for (int r = 0; r < net.width(); ++r) {
    const std::span<const double> wr(w0.data() + r * d, d);
    acc += activation_derivative(net.activation(), simd::dot(wr, x)) *
           activation_derivative(net.activation(), simd::dot(wr, xp));
  }
  return acc / net.width() * simd::dot(x, xp);
}

double trajectory_kernel(const TwoLayerNet& net, const FeatureTable& inputs, const TrajectoryRecord& a,
                         const TrajectoryRecord& b) {
  if (a.horizon() != b.horizon()) throw std::invalid_argument("trajectory_kernel: horizons differ");
  double k = 0.0;
  for (int h = 0; h < a.horizon(); ++h) {
    k += ntk_kernel(net, inputs.at(a.states()[h], a.actions()[h]), inputs.at(b.states()[h], b.actions()[h]));
  }
  return k;
}

FeatureTable ntk_features(const TwoLayerNet& net, const FeatureTable& inputs, std::span<const double> w) {
  if (inputs.dim() != net.input_dim()) throw std::invalid_argument("ntk_features: input dimension mismatch");
  FeatureTable out(inputs.num_states(), inputs.num_actions(), static_cast<int>(net.num_params()));
  for (int s = 0; s < inputs.num_states(); ++s) {
    for (int a = 0; a < inputs.num_actions(); ++a) net.gradient(w, inputs.at(s, a), out.at(s, a));
  }
  return out;
}

namespace {

void check_inputs(const OfflineDataset& data, const FeatureTable& inputs, const TwoLayerNet& net,
                  bool allow_empty = false) {
  if (!allow_empty && data.size() < 1) throw std::invalid_argument("neural fit: dataset is empty");
  if (data.header.num_states != inputs.num_states() || data.header.num_actions != inputs.num_actions()) {
    throw std::invalid_argument("neural fit: dataset does not match the input table");
  }
  if (inputs.dim() != net.input_dim()) throw std::invalid_argument("neural fit: input dimension mismatch");
}

int pair_index(const FeatureTable& inputs, const TrajectoryRecord& r, int h) {
  return r.states()[h] * inputs.num_actions() + r.actions()[h];
}

std::span<const double> input_of(const FeatureTable& inputs, int u) {
  return inputs.at(u / inputs.num_actions(), u % inputs.num_actions());
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return acc;
}

double default_step(const OptimizerConfig& opt, std::size_t n) {
  if (opt.step_size > 0.0) return opt.step_size;
  return 1.0 / (2.0 * static_cast<double>(n));
}

// Tracks consecutive objective increases.
struct DivergenceWatch {
  int window;
  int streak = 0;
  double last = std::numeric_limits<double>::infinity();

  bool update(double objective) {
    if (!std::isfinite(objective)) return true;
    streak = objective > last ? streak + 1 : 0;
    last = objective;
    return streak >= window;
  }
};

}  // namespace

NtkGrams ntk_grams(const TwoLayerNet& net, const FeatureTable& inputs, const OfflineDataset& data) {
  check_inputs(data, inputs, net);
  const int U = inputs.num_states() * inputs.num_actions();
  Matrix ku(U, U);
  for (int i = 0; i < U; ++i) {
    for (int j = 0; j <= i; ++j) ku(i, j) = ku(j, i) = ntk_kernel(net, input_of(inputs, i), input_of(inputs, j));
  }
  const std::size_t N = data.size();
  const int H = data.header.horizon;
  NtkGrams g{Matrix(N, N), std::vector<Matrix>(H, Matrix(N, N))};
  for (int h = 0; h < H; ++h) {
    for (std::size_t i = 0; i < N; ++i) {
      const int ui = pair_index(inputs, data.records[i], h);
      for (std::size_t j = 0; j < N; ++j) {
        const double k = ku(ui, pair_index(inputs, data.records[j], h));
        g.steps[h](i, j) = k;
        g.reward(i, j) += k;
      }
    }
  }
  return g;
}

std::string_view fit_mode_name(FitMode mode) { return mode == FitMode::gd_train ? "gd" : "ntk"; }

bool FitDiagnostics::within_ball(double slack) const {
  for (double d : param_dist) {
    if (d > ball_radius + slack) return false;
  }
  return true;
}

RewardNetworkFit fit_reward_network(const OfflineDataset& data, const FeatureTable& inputs, const TwoLayerNet& net,
                                    double lambda1, const OptimizerConfig& opt, FitMode mode,
                                    std::size_t dual_threshold) {
  check_inputs(data, inputs, net);
  if (!(lambda1 > 0.0) || !std::isfinite(lambda1)) throw std::invalid_argument("reward fit: lambda1 must be > 0");
  const std::size_t N = data.size();
  const int H = data.header.horizon;
  const std::size_t P = net.num_params();
  const Vector& theta0 = net.init_weights();
  Vector returns(N);
  for (std::size_t n = 0; n < N; ++n) returns[n] = data.records[n].ret();

  RewardNetworkFit out;
  out.theta.assign(H, theta0);
  FitDiagnostics& diag = out.diagnostics;
  diag.ball_radius = H * std::sqrt(static_cast<double>(N) / lambda1);

  if (mode == FitMode::ntk_closed_form) {
    const FeatureTable phi0 = ntk_features(net, inputs, theta0);
    const Matrix design = trajectory_design(phi0, data);
    const Vector delta = design.cols() <= dual_threshold ? ridge_fit(design, returns, lambda1).solution
                                                         : ridge_solve_dual(design, returns, lambda1);
    for (int h = 0; h < H; ++h) {
      for (std::size_t i = 0; i < P; ++i) out.theta[h][i] += delta[h * P + i];
    }
    double obj = lambda1 * simd::sum_squares(delta);
    for (std::size_t n = 0; n < N; ++n) {
      const double e = simd::dot(design.row(n), delta) - returns[n];
      obj += e * e;
    }
    diag.objective = obj;
    diag.converged = true;
  } else {
    const int U = inputs.num_states() * inputs.num_actions();
    std::vector<std::vector<int>> idx(H, std::vector<int>(N));
    std::vector<std::vector<char>> used(H, std::vector<char>(U, 0));
    for (int h = 0; h < H; ++h) {
      for (std::size_t n = 0; n < N; ++n) {
        idx[h][n] = pair_index(inputs, data.records[n], h);
        used[h][idx[h][n]] = 1;
      }
    }
    const double eta = default_step(opt, N);
    Matrix f(H, U);
    std::vector<Matrix> grads(H, Matrix(U, P));
    Matrix coef(H, U);
    Vector resid(N);
    std::vector<Vector> g(H, Vector(P));
    DivergenceWatch watch{opt.divergence_window};
    for (int it = 0;; ++it) {
      for (int h = 0; h < H; ++h) {
        for (int u = 0; u < U; ++u) {
          if (used[h][u]) f(h, u) = net.evaluate_with_gradient(out.theta[h], input_of(inputs, u), grads[h].row(u));
        }
      }
      double obj = 0.0;
      for (std::size_t n = 0; n < N; ++n) {
        double pred = 0.0;
        for (int h = 0; h < H; ++h) pred += f(h, idx[h][n]);
        resid[n] = pred - returns[n];
        obj += resid[n] * resid[n];
      }
      for (double& c : coef.flat()) c = 0.0;
      for (int h = 0; h < H; ++h) {
        for (std::size_t n = 0; n < N; ++n) coef(h, idx[h][n]) += resid[n];
      }
      double gnorm2 = 0.0;
      for (int h = 0; h < H; ++h) {
        obj += lambda1 * squared_distance(out.theta[h], theta0);
        for (std::size_t i = 0; i < P; ++i) g[h][i] = 2.0 * lambda1 * (out.theta[h][i] - theta0[i]);
        for (int u = 0; u < U; ++u) {
          if (coef(h, u) != 0.0) simd::axpy(2.0 * coef(h, u), grads[h].row(u), g[h]);
        }
        gnorm2 += simd::sum_squares(g[h]);
      }
      diag.objective = obj;
      diag.grad_norm = std::sqrt(gnorm2);
      diag.iterations = it;
      if (watch.update(obj)) {
        diag.diverged = true;
        break;
      }
      if (diag.grad_norm <= opt.tolerance) {
        diag.converged = true;
        break;
      }
      if (it >= opt.max_iters) break;
      for (int h = 0; h < H; ++h) simd::axpy(-eta, g[h], out.theta[h]);
    }
  }
  for (int h = 0; h < H; ++h) diag.param_dist.push_back(std::sqrt(squared_distance(out.theta[h], theta0)));
  return out;
}

ValueNetworkFit fit_value_network(const OfflineDataset& data, const FeatureTable& inputs,
                                  std::span<const double> v_next, const TwoLayerNet& net, double lambda2,
                                  const OptimizerConfig& opt, FitMode mode, int h, std::size_t dual_threshold) {
  check_inputs(data, inputs, net);
  if (!(lambda2 > 0.0) || !std::isfinite(lambda2)) throw std::invalid_argument("value fit: lambda2 must be > 0");
  if (h < 0 || h >= data.header.horizon) throw std::invalid_argument("value fit: step out of range");
  if (static_cast<int>(v_next.size()) != inputs.num_states()) {
    throw std::invalid_argument("value fit: V_next must have one entry per state");
  }
  const std::size_t N = data.size();
  const std::size_t P = net.num_params();
  const Vector& w0 = net.init_weights();
  const Vector targets = next_state_values(data, h, v_next);

  ValueNetworkFit out;
  out.w = w0;
  FitDiagnostics& diag = out.diagnostics;
  diag.ball_radius = data.header.horizon * std::sqrt(static_cast<double>(N) / lambda2);

  if (mode == FitMode::ntk_closed_form) {
    const FeatureTable phi0 = ntk_features(net, inputs, w0);
    const Matrix design = step_design(phi0, data, h);
    const Vector delta = design.cols() <= dual_threshold ? ridge_fit(design, targets, lambda2).solution
                                                         : ridge_solve_dual(design, targets, lambda2);
    for (std::size_t i = 0; i < P; ++i) out.w[i] += delta[i];
    double obj = lambda2 * simd::sum_squares(delta);
    for (std::size_t n = 0; n < N; ++n) {
      const double e = simd::dot(design.row(n), delta) - targets[n];
      obj += e * e;
    }
    diag.objective = obj;
    diag.converged = true;
  } else {
    const int U = inputs.num_states() * inputs.num_actions();
    Vector count(U), sum(U);
    double sum_sq = 0.0;
    for (std::size_t n = 0; n < N; ++n) {
      const int u = pair_index(inputs, data.records[n], h);
      count[u] += 1.0;
      sum[u] += targets[n];
      sum_sq += targets[n] * targets[n];
    }
    const double eta = default_step(opt, N);
    Matrix grads(U, P);
    Vector f(U), g(P);
    DivergenceWatch watch{opt.divergence_window};
    for (int it = 0;; ++it) {
      double obj = sum_sq + lambda2 * squared_distance(out.w, w0);
      for (std::size_t i = 0; i < P; ++i) g[i] = 2.0 * lambda2 * (out.w[i] - w0[i]);
      for (int u = 0; u < U; ++u) {
        if (count[u] == 0.0) continue;
        f[u] = net.evaluate_with_gradient(out.w, input_of(inputs, u), grads.row(u));
        obj += count[u] * f[u] * f[u] - 2.0 * f[u] * sum[u];
        simd::axpy(2.0 * (count[u] * f[u] - sum[u]), grads.row(u), g);
      }
      diag.objective = obj;
      diag.grad_norm = std::sqrt(simd::sum_squares(g));
      diag.iterations = it;
      if (watch.update(obj)) {
        diag.diverged = true;
        break;
      }
      if (diag.grad_norm <= opt.tolerance) {
        diag.converged = true;
        break;
      }
      if (it >= opt.max_iters) break;
      simd::axpy(-eta, g, out.w);
    }
  }
  diag.param_dist.push_back(std::sqrt(squared_distance(out.w, w0)));
  return out;
}

BonusTables neural_reward_bonus(const OfflineDataset& data, const FeatureTable& inputs, const TwoLayerNet& net,
                                const std::vector<Vector>& theta, double lambda1, BonusPath path,
                                std::size_t dual_threshold) {
  check_inputs(data, inputs, net, true);
  const int H = data.header.horizon;
  if (static_cast<int>(theta.size()) != H) throw std::invalid_argument("reward bonus: need one weight vector per step");
  const std::size_t P = net.num_params();
  std::vector<FeatureTable> feats;
  for (int h = 0; h < H; ++h) feats.push_back(ntk_features(net, inputs, theta[h]));
  Matrix samples(data.size(), P * H);
  for (std::size_t n = 0; n < data.size(); ++n) {
    const auto& r = data.records[n];
    for (int h = 0; h < H; ++h) {
      const auto phi = feats[h].at(r.states()[h], r.actions()[h]);
      std::copy(phi.begin(), phi.end(), samples.row(n).begin() + h * P);
    }
  }
  const FeatureBonus bonus(std::move(samples), lambda1, path, dual_threshold);
  BonusTables out;
  out.primal = bonus.is_primal();
  Vector query(P * H, 0.0);
  for (int h = 0; h < H; ++h) {
    Matrix t(inputs.num_states(), inputs.num_actions());
    for (int s = 0; s < inputs.num_states(); ++s) {
      for (int a = 0; a < inputs.num_actions(); ++a) {
        const auto phi = feats[h].at(s, a);
        std::copy(phi.begin(), phi.end(), query.begin() + h * P);
        t(s, a) = bonus.bonus(query);
      }
    }
    std::fill(query.begin() + h * P, query.begin() + (h + 1) * P, 0.0);
    out.tables.push_back(std::move(t));
  }
  return out;
}

BonusTables neural_value_bonus(const OfflineDataset& data, const FeatureTable& inputs, const TwoLayerNet& net,
                               std::span<const double> w, double lambda2, int h, BonusPath path,
                               std::size_t dual_threshold) {
  check_inputs(data, inputs, net, true);
  const FeatureTable feats = ntk_features(net, inputs, w);
  const FeatureBonus bonus(step_design(feats, data, h), lambda2, path, dual_threshold);
  BonusTables out;
  out.primal = bonus.is_primal();
  Matrix t(inputs.num_states(), inputs.num_actions());
  for (int s = 0; s < inputs.num_states(); ++s) {
    for (int a = 0; a < inputs.num_actions(); ++a) t(s, a) = bonus.bonus(feats.at(s, a));
  }
  out.tables.push_back(std::move(t));
  return out;
}

}  // namespace parted
