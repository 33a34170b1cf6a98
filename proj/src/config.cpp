#include "parted/config.hpp"

#include <cmath>
#include <set>

namespace parted {

BetaSpec::Mode parse_beta_mode(const std::string& name) {
  if (name == "explicit") return BetaSpec::Mode::explicit_values;
  if (name == "theorem1") return BetaSpec::Mode::theorem1;
  if (name == "theorem2") return BetaSpec::Mode::theorem2;
  if (name == "corollary1") return BetaSpec::Mode::corollary1;
  throw std::invalid_argument("unknown beta mode '" + name + "'");
}

std::string beta_mode_name(BetaSpec::Mode mode) {
  switch (mode) {
    case BetaSpec::Mode::explicit_values: return "explicit";
    case BetaSpec::Mode::theorem1: return "theorem1";
    case BetaSpec::Mode::theorem2: return "theorem2";
    case BetaSpec::Mode::corollary1: return "corollary1";
  }
  return "?";
}

ClipMode parse_clip(const std::string& name) {
  if (name == "per-step") return ClipMode::per_step;
  if (name == "flat") return ClipMode::flat;
  throw std::invalid_argument("unknown clip mode '" + name + "'");
}

std::string clip_name(ClipMode mode) { return mode == ClipMode::per_step ? "per-step" : "flat"; }

FitMode parse_fit_mode(const std::string& name) {
  if (name == "gd") return FitMode::gd_train;
  if (name == "ntk") return FitMode::ntk_closed_form;
  throw std::invalid_argument("unknown fit mode '" + name + "'");
}

namespace {

PenaltyPoint parse_penalty_point(const std::string& name) {
  if (name == "learned") return PenaltyPoint::learned;
  if (name == "init") return PenaltyPoint::init;
  throw std::invalid_argument("unknown penalty point '" + name + "'");
}

std::string penalty_point_name(PenaltyPoint p) { return p == PenaltyPoint::learned ? "learned" : "init"; }

// Reads one JSON object, remembering which keys were consumed so that the
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const Json& root, std::string path) : path_(std::move(path)) {
    if (root.is_null()) return;
    if (!root.is_object()) throw ConfigError(where() + "must be an object");
    obj_ = &root;
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const Json* find(const std::string& key) {
    seen_.insert(key);
    if (!obj_) return nullptr;
    auto it = obj_->find(key);
    return it == obj_->end() ? nullptr : &*it;
  }

  template <class T>
  void get(const std::string& key, T& out) {
    if (const Json* v = find(key)) {
      try {
        out = v->get<T>();
      } catch (const Json::exception&) {
        throw ConfigError(key_path(key) + ": wrong type");
      }
    }
  }

  template <class T>
  void get_optional(const std::string& key, std::optional<T>& out) {
    if (const Json* v = find(key)) {
      if (v->is_null()) {
        out.reset();
        return;
      }
      T tmp{};
      get(key, tmp);
      out = tmp;
    }
  }

  template <class T, class Parse>
  void get_enum(const std::string& key, T& out, Parse parse) {
    std::string name;
    if (const Json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(key_path(key) + ": expected a string");
      name = v->get<std::string>();
      try {
        out = parse(name);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(key_path(key) + ": " + e.what());
      }
    }
  }

  const Json& child(const std::string& key) {
    static const Json null;
    const Json* v = find(key);
    return v ? *v : null;
  }

  void finish() const {
    if (!obj_) return;
    for (auto it = obj_->begin(); it != obj_->end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(key_path(it.key()) + ": unknown key");
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config: " : path_ + ": "; }

  std::string path_;
  const Json* obj_ = nullptr;
  std::set<std::string> seen_;
};

// Parses while rejecting duplicate keys, which nlohmann would otherwise
// resolve silently by keeping the last value.
Json parse_strict(const std::string& text) {
  std::vector<std::set<std::string>> seen;
  std::vector<std::string> path;
  auto cb = [&](int, Json::parse_event_t ev, Json& parsed) {
    switch (ev) {
      case Json::parse_event_t::object_start:
        seen.emplace_back();
        path.emplace_back();
        break;
      case Json::parse_event_t::object_end:
        seen.pop_back();
        path.pop_back();
        break;
      case Json::parse_event_t::key: {
        const auto key = parsed.get<std::string>();
        path.back() = key;
        if (!seen.back().insert(key).second) {
          std::string full;
          for (const auto& p : path) full += (full.empty() ? "" : ".") + p;
          throw ConfigError(full + ": duplicate key");
        }
        break;
      }
      default:
        break;
    }
    return true;
  };
  try {
    return Json::parse(text, cb);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
}

template <class T>
std::vector<std::string> names_of(const std::vector<T>& v, std::string_view (*name)(T)) {
  std::vector<std::string> out;
  for (const auto& x : v) out.emplace_back(name(x));
  return out;
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key + ": " + what);
}

}  // namespace

void validate_config(const ExperimentConfig& c) {
  require(c.mdp.num_states >= 1, "mdp.S", "must be >= 1");
  require(c.mdp.num_actions >= 1, "mdp.A", "must be >= 1");
  require(c.mdp.horizon >= 1, "mdp.H", "must be >= 1");
  require(c.mdp.feature_dim >= 1, "mdp.d", "must be >= 1");
  require(c.mdp.heterogeneity >= 0.0 && c.mdp.heterogeneity <= 1.0, "mdp.heterogeneity", "must lie in [0, 1]");
  require(c.data.N >= 1, "data.N", "must be >= 1");
  for (auto [key, v] : {std::pair{"solver.lambda1", c.solver.lambda1}, std::pair{"solver.lambda2", c.solver.lambda2}}) {
    if (v) require(std::isfinite(*v) && *v > 0.0, key, "must be positive and finite");
  }
  require(c.solver.m >= 1, "solver.m", "must be >= 1");
  require(c.solver.step_size >= 0.0 && std::isfinite(c.solver.step_size), "solver.step_size", "must be >= 0");
  require(c.solver.max_iters >= 0, "solver.max_iters", "must be >= 0");
  require(c.solver.tolerance >= 0.0, "solver.tolerance", "must be >= 0");
  require(c.solver.dual_threshold >= 1, "solver.dual_threshold", "must be >= 1");
  if (c.beta.mode != "auto") {
    try {
      parse_beta_mode(c.beta.mode);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("beta.mode: ") + e.what());
    }
  }
  const auto& b = c.beta.spec;
  require(b.beta1 >= 0.0 && std::isfinite(b.beta1), "beta.beta1", "must be finite and >= 0");
  require(b.beta2 >= 0.0 && std::isfinite(b.beta2), "beta.beta2", "must be finite and >= 0");
  require(b.c_beta1 >= 0.0, "beta.c_beta1", "must be >= 0");
  require(b.c_beta2 >= 0.0, "beta.c_beta2", "must be >= 0");
  require(b.delta > 0.0 && b.delta < 1.0, "beta.delta", "must lie in (0, 1)");
  require(b.d1 >= 0.0, "beta.d1", "must be >= 0");
  require(b.d2 >= 0.0, "beta.d2", "must be >= 0");
  require(c.beta.calibration_target > 0.0 && c.beta.calibration_target <= 1.0, "beta.calibration_target",
          "must lie in (0, 1]");
  require(c.beta.calibration_low > 0.0 && c.beta.calibration_high > c.beta.calibration_low, "beta.calibration_high",
          "need 0 < calibration_low < calibration_high");
  require(c.beta.calibration_steps >= 0, "beta.calibration_steps", "must be >= 0");
  require(!c.sweep.solvers.empty(), "sweep.solvers", "must not be empty");
  require(!c.sweep.n_grid.empty(), "sweep.n_grid", "must not be empty");
  for (auto n : c.sweep.n_grid) require(n >= 1, "sweep.n_grid", "entries must be >= 1");
  require(c.sweep.trials >= 1, "sweep.trials", "must be >= 1");
  require(c.sweep.jobs >= 0, "sweep.jobs", "must be >= 0");
}

ExperimentConfig parse_config(const std::string& text) {
  Json root = parse_strict(text);
  if (root.is_object() && root.contains("resolved_config")) root = root.at("resolved_config");
  ExperimentConfig c;
  Section top(root, "");

  Section mdp(top.child("mdp"), "mdp");
  mdp.get("seed", c.mdp.seed);
  mdp.get("S", c.mdp.num_states);
  mdp.get("A", c.mdp.num_actions);
  mdp.get("H", c.mdp.horizon);
  mdp.get("d", c.mdp.feature_dim);
  mdp.get("heterogeneity", c.mdp.heterogeneity);
  mdp.get_enum("noise", c.mdp.noise, [](const std::string& s) {
    if (s == "none") return RewardNoise::none;
    if (s == "bernoulli") return RewardNoise::bernoulli;
    throw std::invalid_argument("unknown reward noise '" + s + "'");
  });
  mdp.finish();

  Section data(top.child("data"), "data");
  data.get("N", c.data.N);
  data.get("seed", c.data.seed);
  data.get("behavior", c.data.behavior);
  data.get("step_rewards", c.data.step_rewards);
  data.finish();

  Section sol(top.child("solver"), "solver");
  sol.get_enum("name", c.solver.name, [](const std::string& s) { return parse_solver(s); });
  sol.get_optional("lambda1", c.solver.lambda1);
  sol.get_optional("lambda2", c.solver.lambda2);
  if (const Json* v = sol.find("clip"); v && !v->is_null()) {
    ClipMode m{};
    sol.get_enum("clip", m, parse_clip);
    c.solver.clip = m;
  }
  sol.get_enum("mode", c.solver.mode, parse_fit_mode);
  sol.get("m", c.solver.m);
  sol.get_enum("activation", c.solver.activation, [](const std::string& s) { return parse_activation(s); });
  sol.get("step_size", c.solver.step_size);
  sol.get("max_iters", c.solver.max_iters);
  sol.get("tolerance", c.solver.tolerance);
  sol.get_enum("penalty_point", c.solver.penalty_point, parse_penalty_point);
  sol.get("dual_threshold", c.solver.dual_threshold);
  sol.get_optional("net_seed", c.solver.net_seed);
  sol.finish();

  Section beta(top.child("beta"), "beta");
  beta.get("mode", c.beta.mode);
  auto& b = c.beta.spec;
  beta.get("beta1", b.beta1);
  beta.get("beta2", b.beta2);
  beta.get("c_beta1", b.c_beta1);
  beta.get("c_beta2", b.c_beta2);
  beta.get("delta", b.delta);
  beta.get("a2", b.a2);
  beta.get("A2", b.big_a2);
  beta.get("c_eps", b.c_eps);
  beta.get("log_cover", b.log_cover);
  beta.get("d1", b.d1);
  beta.get("d2", b.d2);
  beta.get("constant", b.constant);
  beta.get("calibration_target", c.beta.calibration_target);
  beta.get("calibration_low", c.beta.calibration_low);
  beta.get("calibration_high", c.beta.calibration_high);
  beta.get("calibration_steps", c.beta.calibration_steps);
  beta.finish();

  Section sw(top.child("sweep"), "sweep");
  if (const Json* v = sw.find("solvers")) {
    if (!v->is_array()) throw ConfigError("sweep.solvers: expected an array");
    c.sweep.solvers.clear();
    for (const auto& s : *v) {
      try {
        c.sweep.solvers.push_back(parse_solver(s.get<std::string>()));
      } catch (const std::exception& e) {
        throw ConfigError(std::string("sweep.solvers: ") + e.what());
      }
    }
  }
  sw.get("n_grid", c.sweep.n_grid);
  sw.get("trials", c.sweep.trials);
  sw.get("seed", c.sweep.seed);
  sw.get("jobs", c.sweep.jobs);
  sw.get("record_wall_time", c.sweep.record_wall_time);
  sw.finish();

  top.finish();
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text);
}

Json config_to_json(const ExperimentConfig& c) {
  Json j;
  Json& mdp = j["mdp"];
  mdp["seed"] = c.mdp.seed;
  mdp["S"] = c.mdp.num_states;
  mdp["A"] = c.mdp.num_actions;
  mdp["H"] = c.mdp.horizon;
  mdp["d"] = c.mdp.feature_dim;
  mdp["heterogeneity"] = c.mdp.heterogeneity;
  mdp["noise"] = noise_name(c.mdp.noise);
  Json& data = j["data"];
  data["N"] = c.data.N;
  data["seed"] = c.data.seed;
  data["behavior"] = c.data.behavior;
  data["step_rewards"] = c.data.step_rewards;
  Json& s = j["solver"];
  s["name"] = std::string(solver_name(c.solver.name));
  s["lambda1"] = c.solver.lambda1 ? Json(*c.solver.lambda1) : Json(nullptr);
  s["lambda2"] = c.solver.lambda2 ? Json(*c.solver.lambda2) : Json(nullptr);
  s["clip"] = c.solver.clip ? Json(clip_name(*c.solver.clip)) : Json(nullptr);
  s["mode"] = std::string(fit_mode_name(c.solver.mode));
  s["m"] = c.solver.m;
  s["activation"] = std::string(activation_name(c.solver.activation));
  s["step_size"] = c.solver.step_size;
  s["max_iters"] = c.solver.max_iters;
  s["tolerance"] = c.solver.tolerance;
  s["penalty_point"] = penalty_point_name(c.solver.penalty_point);
  s["dual_threshold"] = c.solver.dual_threshold;
  s["net_seed"] = c.solver.net_seed ? Json(*c.solver.net_seed) : Json(nullptr);
  Json& b = j["beta"];
  const auto& bs = c.beta.spec;
  b["mode"] = c.beta.mode;
  b["beta1"] = bs.beta1;
  b["beta2"] = bs.beta2;
  b["c_beta1"] = bs.c_beta1;
  b["c_beta2"] = bs.c_beta2;
  b["delta"] = bs.delta;
  b["a2"] = bs.a2;
  b["A2"] = bs.big_a2;
  b["c_eps"] = bs.c_eps;
  b["log_cover"] = bs.log_cover;
  b["d1"] = bs.d1;
  b["d2"] = bs.d2;
  b["constant"] = bs.constant;
  b["calibration_target"] = c.beta.calibration_target;
  b["calibration_low"] = c.beta.calibration_low;
  b["calibration_high"] = c.beta.calibration_high;
  b["calibration_steps"] = c.beta.calibration_steps;
  Json& sw = j["sweep"];
  sw["solvers"] = names_of(c.sweep.solvers, &solver_name);
  sw["n_grid"] = c.sweep.n_grid;
  sw["trials"] = c.sweep.trials;
  sw["seed"] = c.sweep.seed;
  sw["jobs"] = c.sweep.jobs;
  sw["record_wall_time"] = c.sweep.record_wall_time;
  return j;
}

LinearMdp build_mdp(const MdpConfig& c) {
  return generate_random_mdp(c.seed, c.num_states, c.num_actions, c.horizon, c.feature_dim, c.heterogeneity, c.noise);
}

SolverSettings solver_settings(const ExperimentConfig& c) {
  SolverSettings s;
  auto beta_for = [&](BetaSpec::Mode fallback) {
    BetaSpec beta = c.beta.spec;
    beta.mode = c.beta.mode == "auto" ? fallback : parse_beta_mode(c.beta.mode);
    return beta;
  };

  auto& lin = s.linear;
  lin.lambda1 = c.solver.lambda1.value_or(1.0);
  lin.lambda2 = c.solver.lambda2.value_or(1.0);
  lin.clip = c.solver.clip.value_or(ClipMode::per_step);
  lin.beta = beta_for(BetaSpec::Mode::theorem2);

  auto& nn = s.neural;
  nn.m = c.solver.m;
  nn.activation = c.solver.activation;
  nn.lambda1 = c.solver.lambda1;
  nn.lambda2 = c.solver.lambda2;
  nn.optimizer.step_size = c.solver.step_size;
  nn.optimizer.max_iters = c.solver.max_iters;
  nn.optimizer.tolerance = c.solver.tolerance;
  nn.mode = c.solver.mode;
  nn.beta = beta_for(BetaSpec::Mode::theorem1);
  nn.penalty_point = c.solver.penalty_point;
  nn.clip = c.solver.clip.value_or(ClipMode::flat);
  nn.dual_threshold = c.solver.dual_threshold;
  nn.net_seed = c.solver.net_seed.value_or(0);
  return s;
}

}  // namespace parted
