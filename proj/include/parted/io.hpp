#pragma once

// JSON encodings of every artifact the CLI reads or writes. Doubles are
// written in shortest round-trip form, so a save/load cycle is exact and
// repeated runs produce identical bytes.

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "parted/dataset.hpp"
#include "parted/evaluation.hpp"
#include "parted/mdp.hpp"
#include "parted/neural.hpp"
#include "parted/solution.hpp"

namespace parted {

using Json = nlohmann::ordered_json;

/// File system or format problems; the CLI maps these to exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

/// Pretty-printed JSON with a trailing newline.
std::string dump_json(const Json& j);
Json parse_json(const std::string& text, const std::string& what);

std::string noise_name(RewardNoise noise);
RewardNoise parse_noise(const std::string& name);

Json mdp_to_json(const LinearMdp& mdp);
LinearMdp mdp_from_json(const Json& j);

/// JSON Lines: a header object, then one object per trajectory.
std::string dataset_to_jsonl(const OfflineDataset& data);
OfflineDataset dataset_from_jsonl(const std::string& text);

Json solution_to_json(const PessimisticSolution& sol);
PessimisticSolution solution_from_json(const Json& j);

/// Seed, m, d, activation and full-precision weights; enough to rebuild the network.
Json network_to_json(const TwoLayerNet& net);
TwoLayerNet network_from_json(const Json& j);

Json report_to_json(const EvalReport& rep);
Json coverage_to_json(const CoverageReport& cov);
Json calibration_to_json(const CalibrationResult& res);
Json sweep_summary_to_json(const SweepTable& table, const std::vector<std::string>& solvers);

}  // namespace parted
