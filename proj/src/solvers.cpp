#include "parted/solvers.hpp"

#include <stdexcept>

namespace parted {

std::string_view solver_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::parted_linear: return "parted-linear";
    case SolverKind::parted_neural: return "parted-neural";
    case SolverKind::pevi_oracle: return "pevi-oracle";
    case SolverKind::uniform_split: return "uniform-split";
  }
  return "?";
}

SolverKind parse_solver(std::string_view tag) {
  for (auto k : {SolverKind::parted_linear, SolverKind::parted_neural, SolverKind::pevi_oracle,
                 SolverKind::uniform_split}) {
    if (solver_name(k) == tag) return k;
  }
  throw std::invalid_argument("unknown solver '" + std::string(tag) + "'");
}

PessimisticSolution run_solver(SolverKind kind, const OfflineDataset& data, const FeatureTable& features,
                               const SolverSettings& settings) {
  switch (kind) {
    case SolverKind::parted_linear: return solve_linear_parted(data, features, settings.linear).result;
    case SolverKind::parted_neural: return solve_neural_parted(data, features, settings.neural).result;
    case SolverKind::pevi_oracle: return solve_pevi_oracle(data, features, settings.linear).result;
    case SolverKind::uniform_split: return solve_uniform_split(data, features, settings.linear).result;
  }
  throw std::invalid_argument("unknown solver");
}

}  // namespace parted
