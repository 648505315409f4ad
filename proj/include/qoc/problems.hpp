#pragma once

#include <map>
#include <optional>

#include "qoc/controllability.hpp"
#include "qoc/gpe.hpp"

namespace qoc {

/// Curated desk-scale model problem with defaults for the optimizers and
/// provenance notes (basis conventions, parameter choices).
struct ProblemCatalogEntry {
  std::string id;
  std::string description;

  std::optional<StateProblem> state;
  std::optional<EnsembleProblem> ensemble;
  std::optional<GpeProblem> gpe;

  TimeGrid default_grid{1.0, 100};
  ControlField default_control;  // initial guess on the default grid

  double default_gamma_u = 1.0;
  int default_max_iters = 200;

  // P3-style forbidden subspace: the penalty installs D = I - P_forbidden
  // with lambda_state < 0, the allowed-subspace form the monotone methods
  // require (D >= 0, lambda <= 0).
  std::optional<Matrix> forbidden_projector;

  // P5 gate targets by name.
  std::map<std::string, Matrix> gates;

  std::optional<ControllabilityVerdict> expected_verdict;
  std::string notes;
};

const std::vector<ProblemCatalogEntry>& catalog();
const ProblemCatalogEntry& catalog_entry(const std::string& id);

Matrix gate_cnot();
Matrix gate_cphase();
Matrix gate_qft4();
Matrix gate_bgate();

/// Installs the forbidden-level penalty on a state problem:
/// D = I - P_forbidden with the given lambda_state < 0.
void apply_forbidden_penalty(StateProblem& problem, const Matrix& forbidden_projector,
                             double lambda_state);

}  // namespace qoc
