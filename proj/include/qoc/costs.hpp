#pragma once

#include <array>
#include <optional>
#include <variant>

#include "qoc/dynamics.hpp"

namespace qoc {

/// Pulse envelope S(t) >= 0 on [0, T].
struct ShapeFn {
  enum class Kind { constant, sine_squared, gaussian_palao };
  Kind kind = Kind::constant;

  double operator()(double t, double horizon) const;
};

enum class OverlapVariant { squared, real_part };
enum class NonHermVariant { real_part, abs_squared };

struct ObservableTerminant {
  Matrix observable;  // -<psi(T), O psi(T)>
};

struct OverlapTerminant {
  Vector target;
  OverlapVariant variant = OverlapVariant::squared;
};

struct GateTerminant {
  Matrix gate;  // -(1/n^2) |Tr(W^dag U(T))|^2
};

struct DensityOverlapTerminant {
  Matrix rho_target;  // -Tr(rho(T) rho_target)
};

struct UnitaryObservableTerminant {
  Matrix observable;
  Matrix rho0;  // -Tr(O U rho0 U^dag)
};

struct UnitaryNonHermitianTerminant {
  Matrix op;
  Matrix rho0;
  NonHermVariant variant = NonHermVariant::real_part;
};

/// Per-member overlap terminant summed over an ensemble; targets come from
/// the Ensemble itself.
struct EnsembleOverlapTerminant {
  OverlapVariant variant = OverlapVariant::squared;
};

struct LocalInvariantsTerminant {
  Matrix target_gate;
  Matrix projector;  // coordinate projector P_n
};

using Terminant =
    std::variant<ObservableTerminant, OverlapTerminant, GateTerminant, DensityOverlapTerminant,
                 UnitaryObservableTerminant, UnitaryNonHermitianTerminant,
                 EnsembleOverlapTerminant, LocalInvariantsTerminant>;

/// Terminant selector plus running-cost weights and shape function.
/// Sign conventions follow the source formulas: lambda_state is stored
/// signed and never flipped here.
struct ObjectiveSpec {
  Terminant terminant;
  double lambda_u = 0.0;
  double lambda_state = 0.0;
  std::optional<Matrix> state_penalty_operator;
  double lambda_du = 0.0;
  double gamma_u = 1.0;
  ShapeFn shape;

  void validate() const;
};

struct StateProblem {
  ControlSystem system;
  Vector psi0;
  ObjectiveSpec objective;
};

struct DensityProblem {
  ControlSystem system;
  Matrix rho0;
  ObjectiveSpec objective;
};

struct UnitaryProblem {
  ControlSystem system;
  ObjectiveSpec objective;
};

struct EnsembleProblem {
  ControlSystem system;
  Ensemble ensemble;
  ObjectiveSpec objective;
};

struct ObjectiveBreakdown {
  double terminant = 0.0;
  double fluence = 0.0;
  double state_penalty = 0.0;
  double h1_penalty = 0.0;

  double total() const { return terminant + fluence + state_penalty + h1_penalty; }
};

double terminant_observable(const Vector& psiT, const Matrix& observable);
double terminant_overlap(const Vector& psiT, const Vector& target, OverlapVariant variant);
double terminant_gate(const Matrix& uT, const Matrix& gate);
double terminant_density(const Matrix& rhoT, const Matrix& rho_target);
double terminant_unitary_observable(const Matrix& uT, const Matrix& observable,
                                    const Matrix& rho0);
double terminant_unitary_nonhermitian(const Matrix& uT, const Matrix& op, const Matrix& rho0,
                                      NonHermVariant variant);

/// Local invariants (g1, g2, g3) of a two-qubit unitary, computed in the
/// Bell basis after normalizing the determinant to 1.
std::array<double, 3> local_invariants(const Matrix& u);

/// Leakage of the projected gate: 1 - (1/n) Tr(U_n U_n^dag).
double gate_leakage(const Matrix& u_projected);

double terminant_local_invariants(const std::vector<Vector>& ensemble_finals,
                                  const Matrix& target_gate, const Matrix& projector);

double fluence(const ControlField& control, const ShapeFn& shape, double lambda_u);

double state_penalty(const StateTrajectory& trajectory, const Matrix& penalty_op,
                     double lambda_state);
double state_penalty(const DensityTrajectory& trajectory, const Matrix& penalty_op,
                     double lambda_state);

/// Time-indexed penalty operator, one matrix per node.
double state_penalty(const StateTrajectory& trajectory,
                     const std::vector<Matrix>& penalty_ops, double lambda_state);

double h1_penalty(const ControlField& control, double lambda_du);

ObjectiveBreakdown total_objective(const StateProblem& problem, const ControlField& control);
ObjectiveBreakdown total_objective(const DensityProblem& problem, const ControlField& control);
ObjectiveBreakdown total_objective(const UnitaryProblem& problem, const ControlField& control);
ObjectiveBreakdown total_objective(const EnsembleProblem& problem, const ControlField& control);

/// Same, but reusing an already-propagated trajectory.
ObjectiveBreakdown objective_from_trajectory(const StateProblem& problem,
                                             const ControlField& control,
                                             const StateTrajectory& trajectory);
ObjectiveBreakdown objective_from_trajectory(const DensityProblem& problem,
                                             const ControlField& control,
                                             const DensityTrajectory& trajectory);
ObjectiveBreakdown objective_from_trajectory(const EnsembleProblem& problem,
                                             const ControlField& control,
                                             const std::vector<StateTrajectory>& trajectories);

/// Terminant value on a set of ensemble finals (used by the ensemble
/// optimizers and the objective evaluation).
double ensemble_terminant(const ObjectiveSpec& objective, const Ensemble& ensemble,
                          const std::vector<Vector>& finals);

/// Wirtinger gradient d(terminant)/d(psi_j^*) for each ensemble member,
/// used for costate terminal conditions (chi_j(T) = -dF/dpsi_j^*).
std::vector<Vector> ensemble_terminant_gradient(const ObjectiveSpec& objective,
                                                const Ensemble& ensemble,
                                                const std::vector<Vector>& finals);

}  // namespace qoc
