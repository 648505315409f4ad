#pragma once

#include <filesystem>

#include "qoc/alt_methods.hpp"
#include "qoc/config.hpp"
#include "qoc/problems.hpp"

namespace qoc {

struct RunResult {
  int exit_code = 0;  // 0 ok, 2 validation, 3 numeric failure, 4 warning/stall
  std::string message;
  std::filesystem::path out_dir;
};

/// Executes one batch command against a parsed config.
/// Commands: propagate, optimize, gpe-optimize, controllability, spectrum,
/// compare.
RunResult run_command(const std::string& command, Config config);

/// 17-significant-digit float formatting shared by all output files.
std::string format_g17(double v);

/// Config-file form of a catalog entry (id, grid, method defaults).
std::string catalog_entry_config(const ProblemCatalogEntry& entry);

/// The problem/initial-control pair a config resolves to; exposed so tests
/// can drive runs in-process.
struct LoadedProblem {
  std::string id;
  std::optional<StateProblem> state;
  std::optional<DensityProblem> density;
  std::optional<EnsembleProblem> ensemble;
  std::optional<GpeProblem> gpe;
  ControlField u0;
  std::optional<Matrix> forbidden_projector;
};

LoadedProblem load_problem(Config& config);

}  // namespace qoc
