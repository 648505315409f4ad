#pragma once

#include <optional>
#include <string>

#include "qoc/costs.hpp"

namespace qoc {

enum class RunStatus {
  converged,
  max_iters,
  converged_with_warning,
  stalled,
  failed,
};

const char* to_string(RunStatus status);

struct IterationRecord {
  int k = 0;
  double objective = 0.0;
  double terminant = 0.0;
  double fluence = 0.0;
  double state_penalty = 0.0;
  double max_control_change = 0.0;
  int adjustments = 0;  // sigma/gamma re-selections spent on this iteration
};

/// Per-iteration record of the objective and its components, the final
/// control, and the sweep count ("Cauchy problems" in the cost accounting).
struct OptimizationTrace {
  std::vector<IterationRecord> iterations;
  ControlField final_control;
  RunStatus status = RunStatus::converged;
  int cauchy_count = 0;
  std::string note;
  std::vector<double> band_power;  // spectral runs: in-band power of each applied increment

  std::vector<StateTrajectory> final_state_trajectories;
  std::optional<DensityTrajectory> final_density_trajectory;

  double final_objective() const { return iterations.back().objective; }
  double final_terminant() const { return iterations.back().terminant; }
};

}  // namespace qoc
