#include "parted/io.hpp"

#include "parted/config.hpp"

#include <fstream>
#include <sstream>

namespace parted {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out.flush()) throw IoError("write to '" + path + "' failed");
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw IoError(what + ": " + e.what());
  }
}

namespace {

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(Json(std::vector<double>(m.row(r).begin(), m.row(r).end())));
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  const std::size_t rows = j.size();
  const std::size_t cols = rows ? j.at(0).size() : 0;
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = j.at(r).get<std::vector<double>>();
    if (row.size() != cols) throw IoError("ragged matrix in JSON");
    std::copy(row.begin(), row.end(), m.row(r).begin());
  }
  return m;
}

Json tables_to_json(const StepTables& t) {
  Json out = Json::array();
  for (const auto& m : t) out.push_back(matrix_to_json(m));
  return out;
}

StepTables tables_from_json(const Json& j) {
  StepTables t;
  for (const auto& m : j) t.push_back(matrix_from_json(m));
  return t;
}

Json vectors_to_json(const std::vector<Vector>& vs) {
  Json out = Json::array();
  for (const auto& v : vs) out.push_back(Json(v));
  return out;
}

template <class F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw IoError(std::string(what) + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

std::string noise_name(RewardNoise n) { return n == RewardNoise::none ? "none" : "bernoulli"; }

RewardNoise parse_noise(const std::string& s) {
  if (s == "none") return RewardNoise::none;
  if (s == "bernoulli") return RewardNoise::bernoulli;
  throw IoError("unknown reward_noise '" + s + "'");
}

Json mdp_to_json(const LinearMdp& mdp) {
  Json j;
  j["num_states"] = mdp.num_states;
  j["num_actions"] = mdp.num_actions;
  j["horizon"] = mdp.horizon;
  j["feature_dim"] = mdp.feature_dim;
  j["reward_noise"] = noise_name(mdp.reward_noise);
  j["initial_state"] = mdp.initial_state;
  Json feats = Json::array();
  for (int s = 0; s < mdp.num_states; ++s) {
    for (int a = 0; a < mdp.num_actions; ++a) {
      const auto phi = mdp.features.at(s, a);
      feats.push_back(Json(std::vector<double>(phi.begin(), phi.end())));
    }
  }
  j["features"] = std::move(feats);
  j["anchor_transitions"] = tables_to_json(mdp.anchor_transitions);
  j["anchor_rewards"] = vectors_to_json(mdp.anchor_rewards);
  return j;
}

LinearMdp mdp_from_json(const Json& j) {
  return guarded("MDP file", [&] {
    LinearMdp mdp;
    mdp.num_states = j.at("num_states").get<int>();
    mdp.num_actions = j.at("num_actions").get<int>();
    mdp.horizon = j.at("horizon").get<int>();
    mdp.feature_dim = j.at("feature_dim").get<int>();
    mdp.reward_noise = parse_noise(j.at("reward_noise").get<std::string>());
    mdp.initial_state = j.at("initial_state").get<int>();
    const auto& feats = j.at("features");
    if (feats.size() != static_cast<std::size_t>(mdp.num_states) * mdp.num_actions) {
      throw IoError("MDP file: features must have S*A rows");
    }
    Vector values;
    for (const auto& row : feats) {
      const auto v = row.get<std::vector<double>>();
      if (v.size() != static_cast<std::size_t>(mdp.feature_dim)) throw IoError("MDP file: feature row of wrong length");
      values.insert(values.end(), v.begin(), v.end());
    }
    mdp.features = FeatureTable(mdp.num_states, mdp.num_actions, mdp.feature_dim, std::move(values));
    mdp.anchor_transitions = tables_from_json(j.at("anchor_transitions"));
    for (const auto& r : j.at("anchor_rewards")) mdp.anchor_rewards.push_back(r.get<std::vector<double>>());
    const ValidationReport rep = validate_mdp(mdp);
    if (!rep.shapes_ok) throw IoError("MDP file: " + rep.shape_error);
    return mdp;
  });
}

std::string dataset_to_jsonl(const OfflineDataset& data) {
  const auto& h = data.header;
  Json head;
  head["d"] = h.feature_dim;
  head["H"] = h.horizon;
  head["S"] = h.num_states;
  head["A"] = h.num_actions;
  head["N"] = h.size;
  head["seed"] = h.seed;
  head["policy"] = h.policy;
  std::string out = head.dump() + "\n";
  for (const auto& r : data.records) {
    Json rec;
    rec["states"] = r.states();
    rec["actions"] = r.actions();
    rec["ret"] = r.ret();
    if (r.has_step_rewards()) {
      const auto sr = StepRewardAccess::rewards(r);
      rec["step_rewards"] = std::vector<double>(sr.begin(), sr.end());
    }
    out += rec.dump() + "\n";
  }
  return out;
}

OfflineDataset dataset_from_jsonl(const std::string& text) {
  return guarded("dataset file", [&] {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw IoError("dataset file: missing header line");
    const Json head = parse_json(line, "dataset header");
    OfflineDataset data;
    auto& h = data.header;
    h.feature_dim = head.at("d").get<int>();
    h.horizon = head.at("H").get<int>();
    h.num_states = head.at("S").get<int>();
    h.num_actions = head.at("A").get<int>();
    h.size = head.at("N").get<std::size_t>();
    h.seed = head.at("seed").get<std::uint64_t>();
    h.policy = head.at("policy").get<std::string>();
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const Json rec = parse_json(line, "dataset line " + std::to_string(lineno));
      std::optional<Vector> step;
      if (rec.contains("step_rewards")) step = rec.at("step_rewards").get<std::vector<double>>();
      auto states = rec.at("states").get<std::vector<int>>();
      auto actions = rec.at("actions").get<std::vector<int>>();
      if (static_cast<int>(actions.size()) != h.horizon) {
        throw IoError("dataset line " + std::to_string(lineno) + ": expected H actions");
      }
      for (int s : states) {
        if (s < 0 || s >= h.num_states) throw IoError("dataset line " + std::to_string(lineno) + ": state out of range");
      }
      for (int a : actions) {
        if (a < 0 || a >= h.num_actions) {
          throw IoError("dataset line " + std::to_string(lineno) + ": action out of range");
        }
      }
      data.records.emplace_back(std::move(states), std::move(actions), rec.at("ret").get<double>(), std::move(step));
    }
    if (data.records.size() != h.size) throw IoError("dataset file: header N does not match the record count");
    return data;
  });
}

Json solution_to_json(const PessimisticSolution& sol) {
  Json j;
  j["solver"] = sol.solver;
  j["horizon"] = sol.horizon;
  j["num_states"] = sol.num_states;
  j["num_actions"] = sol.num_actions;
  j["beta1"] = sol.beta1;
  j["beta2"] = sol.beta2;
  j["clip"] = clip_name(sol.clip);
  Json actions = Json::array();
  for (int h = 0; h < sol.horizon; ++h) {
    std::vector<int> row(sol.num_states);
    for (int s = 0; s < sol.num_states; ++s) row[s] = sol.policy.action(h, s);
    actions.push_back(row);
  }
  j["policy"] = std::move(actions);
  j["q"] = tables_to_json(sol.q);
  j["v"] = matrix_to_json(sol.v);
  j["reward_hat"] = tables_to_json(sol.reward_hat);
  j["transition_value_hat"] = tables_to_json(sol.transition_value_hat);
  j["reward_bonus"] = tables_to_json(sol.reward_bonus);
  j["value_bonus"] = tables_to_json(sol.value_bonus);
  j["penalty"] = tables_to_json(sol.penalty);
  j["reward_params"] = vectors_to_json(sol.reward_params);
  j["value_params"] = vectors_to_json(sol.value_params);
  j["warnings"] = sol.warnings;
  return j;
}

PessimisticSolution solution_from_json(const Json& j) {
  return guarded("solution file", [&] {
    PessimisticSolution sol;
    sol.solver = j.at("solver").get<std::string>();
    sol.horizon = j.at("horizon").get<int>();
    sol.num_states = j.at("num_states").get<int>();
    sol.num_actions = j.at("num_actions").get<int>();
    sol.beta1 = j.at("beta1").get<double>();
    sol.beta2 = j.at("beta2").get<double>();
    sol.clip = parse_clip(j.at("clip").get<std::string>());
    sol.q = tables_from_json(j.at("q"));
    sol.v = matrix_from_json(j.at("v"));
    sol.reward_hat = tables_from_json(j.at("reward_hat"));
    sol.transition_value_hat = tables_from_json(j.at("transition_value_hat"));
    sol.reward_bonus = tables_from_json(j.at("reward_bonus"));
    sol.value_bonus = tables_from_json(j.at("value_bonus"));
    sol.penalty = tables_from_json(j.at("penalty"));
    for (const auto& v : j.at("reward_params")) sol.reward_params.push_back(v.get<std::vector<double>>());
    for (const auto& v : j.at("value_params")) sol.value_params.push_back(v.get<std::vector<double>>());
    sol.warnings = j.at("warnings").get<std::vector<std::string>>();
    const auto acts = j.at("policy").get<std::vector<std::vector<int>>>();
    const std::size_t H = sol.horizon, S = sol.num_states;
    if (acts.size() != H || sol.q.size() != H || sol.v.rows() != H + 1 || sol.v.cols() != S ||
        sol.reward_bonus.size() != H || sol.value_bonus.size() != H || sol.penalty.size() != H) {
      throw IoError("solution file: table shapes do not match the horizon");
    }
    std::vector<int> flat;
    for (const auto& row : acts) {
      if (row.size() != S) throw IoError("solution file: policy row of wrong length");
      flat.insert(flat.end(), row.begin(), row.end());
    }
    sol.policy = Policy::deterministic(sol.horizon, sol.num_states, sol.num_actions, flat);
    return sol;
  });
}

Json network_to_json(const TwoLayerNet& net) {
  Json j;
  j["seed"] = net.seed();
  j["m"] = net.half_width();
  j["d"] = net.input_dim();
  j["activation"] = std::string(activation_name(net.activation()));
  j["signs"] = net.signs();
  j["init_weights"] = net.init_weights();
  return j;
}

TwoLayerNet network_from_json(const Json& j) {
  return guarded("network checkpoint", [&] {
    return TwoLayerNet(j.at("m").get<int>(), j.at("d").get<int>(),
                       parse_activation(j.at("activation").get<std::string>()),
                       j.at("signs").get<std::vector<double>>(), j.at("init_weights").get<std::vector<double>>(),
                       j.at("seed").get<std::uint64_t>());
  });
}

Json coverage_to_json(const CoverageReport& cov) {
  Json j;
  j["lambda_min_trajectory"] = cov.lambda_min_trajectory;
  j["lambda_min_step"] = cov.lambda_min_step;
  j["threshold"] = cov.threshold;
  j["well_explored"] = cov.well_explored;
  return j;
}

Json report_to_json(const EvalReport& rep) {
  Json j;
  j["solver"] = rep.solver;
  j["N"] = rep.N;
  j["seed"] = rep.seed;
  j["beta1"] = rep.beta1;
  j["beta2"] = rep.beta2;
  j["subopt"] = rep.subopt;
  j["vstar"] = rep.vstar;
  j["vpi"] = rep.vpi;
  j["min_delta"] = rep.min_delta;
  j["max_delta"] = rep.max_delta;
  j["pessimistic"] = rep.pessimistic;
  j["within_penalty"] = rep.within_penalty;
  j["max_penalty_sum"] = rep.max_penalty_sum;
  Json dec;
  dec["pihat_term"] = rep.term_pihat;
  dec["pistar_term"] = rep.term_pistar;
  dec["greedy_term"] = rep.term_greedy;
  dec["residual"] = rep.residual;
  j["decomposition"] = std::move(dec);
  j["delta"] = tables_to_json(rep.delta);
  if (rep.coverage) j["coverage"] = coverage_to_json(*rep.coverage);
  return j;
}

Json calibration_to_json(const CalibrationResult& res) {
  Json j;
  j["found"] = res.found;
  j["scale"] = res.scale;
  j["pass_rate"] = res.pass_rate;
  Json probes = Json::array();
  for (const auto& p : res.probes) {
    Json q;
    q["scale"] = p.scale;
    q["pass_rate"] = p.pass_rate;
    q["upper_bound_ok"] = p.upper_bound_ok;
    probes.push_back(std::move(q));
  }
  j["probes"] = std::move(probes);
  return j;
}

Json sweep_summary_to_json(const SweepTable& table, const std::vector<std::string>& solvers) {
  Json j;
  Json aggs = Json::array();
  for (const auto& a : table.aggregates) {
    Json x;
    x["solver"] = a.solver;
    x["N"] = a.N;
    x["count"] = a.count;
    x["failures"] = a.failures;
    x["median"] = a.median;
    x["mean"] = a.mean;
    x["q1"] = a.q1;
    x["q3"] = a.q3;
    x["iqr"] = a.iqr();
    aggs.push_back(std::move(x));
  }
  j["aggregates"] = std::move(aggs);
  Json slopes;
  for (const auto& s : solvers) slopes[s] = table.loglog_slope(s);
  j["loglog_slope"] = std::move(slopes);
  Json errors = Json::array();
  for (const auto& r : table.rows) {
    if (r.error.empty()) continue;
    Json e;
    e["solver"] = r.solver;
    e["N"] = r.N;
    e["seed"] = r.seed;
    e["error"] = r.error;
    errors.push_back(std::move(e));
  }
  j["errors"] = std::move(errors);
  return j;
}

}  // namespace parted
