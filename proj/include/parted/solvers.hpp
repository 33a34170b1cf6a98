#pragma once

#include <string>
#include <string_view>

#include "parted/baselines.hpp"
#include "parted/parted_linear.hpp"
#include "parted/parted_neural.hpp"

namespace parted {

enum class SolverKind { parted_linear, parted_neural, pevi_oracle, uniform_split };

std::string_view solver_name(SolverKind kind);
/// Accepts the CLI tags parted-linear, parted-neural, pevi-oracle, uniform-split.
SolverKind parse_solver(std::string_view tag);

struct SolverSettings {
  LinearPartedConfig linear;
  NeuralPartedConfig neural;
};

/// Runs one solver on the MDP's feature table (the neural solver uses it as network input).
PessimisticSolution run_solver(SolverKind kind, const OfflineDataset& data, const FeatureTable& features,
                               const SolverSettings& settings);

}  // namespace parted
