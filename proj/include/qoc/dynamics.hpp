#pragma once

#include <optional>

#include "qoc/core.hpp"

namespace qoc {

/// Time-indexed pure-state samples at the N+1 grid nodes.
struct StateTrajectory {
  TimeGrid grid;
  std::vector<Vector> samples;

  const Vector& front() const { return samples.front(); }
  const Vector& back() const { return samples.back(); }
};

struct DensityTrajectory {
  TimeGrid grid;
  std::vector<Matrix> samples;
};

struct UnitaryTrajectory {
  TimeGrid grid;
  std::vector<Matrix> samples;
};

/// Backward-propagated costate samples; no normalization requirement.
struct VectorCostate {
  TimeGrid grid;
  std::vector<Vector> samples;
};

struct MatrixCostate {
  TimeGrid grid;
  std::vector<Matrix> samples;
};

/// Set of states sharing one control; optionally with per-member targets
/// and a subspace projector for gate objectives.
struct Ensemble {
  std::vector<Vector> initial;
  std::vector<Vector> targets;
  std::optional<Matrix> subspace_projector;

  int size() const { return static_cast<int>(initial.size()); }
  int dim() const { return static_cast<int>(initial.front().size()); }
};

enum class DensityRoute { von_neumann, conjugation };

/// exp(-i dt H[u_j]) for one interval.
Matrix step_propagator(const ControlSystem& system, const RealVector& u, double dt);

/// Frechet derivative of the step propagator in direction of control l:
/// d/du_l exp(-i dt H[u]). Exact via the divided-difference formula on the
/// eigenbasis of H[u].
Matrix step_propagator_derivative(const ControlSystem& system, const RealVector& u,
                                  double dt, int channel);

/// Step propagator together with its derivatives along every channel,
/// sharing one eigendecomposition.
void step_propagator_with_derivatives(const ControlSystem& system, const RealVector& u,
                                      double dt, Matrix* propagator,
                                      std::vector<Matrix>* derivatives);

StateTrajectory propagate_state(const ControlSystem& system, const ControlField& control,
                                const QuantumState& psi0);

UnitaryTrajectory propagate_unitary(const ControlSystem& system, const ControlField& control);

DensityTrajectory propagate_density(const ControlSystem& system, const ControlField& control,
                                    const DensityMatrix& rho0,
                                    DensityRoute route = DensityRoute::von_neumann);

/// Backward sweep of d(chi)/dt = -i H[u] chi + source(t), from chi(T) = chiT.
/// The homogeneous part is integrated exactly per interval; the source by an
/// explicit rectangle rule.
VectorCostate propagate_costate_state(const ControlSystem& system, const ControlField& control,
                                      const Vector& chiT,
                                      const std::vector<Vector>* inhomogeneity = nullptr);

/// Backward sweep of d(sigma)/dt = -i [H[u], sigma] + source(t).
MatrixCostate propagate_costate_density(const ControlSystem& system, const ControlField& control,
                                        const Matrix& sigmaT,
                                        const std::vector<Matrix>* inhomogeneity = nullptr);

std::vector<StateTrajectory> propagate_ensemble(const ControlSystem& system,
                                                const ControlField& control,
                                                const Ensemble& ensemble);

}  // namespace qoc
