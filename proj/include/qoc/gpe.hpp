#pragma once

#include <functional>

#include "qoc/krotov.hpp"

namespace qoc {

/// Periodic spatial grid for the spectral split-step propagator.
struct SpatialGrid {
  double x_min = -8.0;
  double x_max = 8.0;
  int points = 256;  // power of two, >= 16

  SpatialGrid() = default;
  SpatialGrid(double x_min_, double x_max_, int points_);

  double dx() const { return (x_max - x_min) / points; }
  double x(int i) const { return x_min + i * dx(); }
  double wavenumber(int i) const {
    const int shifted = i <= points / 2 ? i : i - points;
    return 2.0 * M_PI * shifted / (x_max - x_min);
  }
};

/// Condensate wavefunction, L2-normalized: sum |psi_i|^2 dx = 1.
struct GpeState {
  Vector field;
  SpatialGrid grid;

  GpeState() = default;
  GpeState(Vector field_, SpatialGrid grid_);
};

/// Controlled potential families for the condensate problems.
struct GpePotential {
  enum class Kind { trap_lattice, shifted_harmonic, split_well, polynomial };
  Kind kind = Kind::shifted_harmonic;

  double v0 = 1.0;          // trap_lattice lattice intensity
  double wavenumber = 1.0;  // trap_lattice laser wavenumber
  double x0 = 1.0;          // shifted_harmonic displacement scale
  double d = 1.0;           // split_well separation
  double p2 = 0.5, p4 = 0.0, p6 = 0.0;  // polynomial coefficients

  // trap_lattice switching profile s(t), sampled with normalized time
  // t / T in [0, 1]; default linear ramp.
  std::function<double(double)> switching = [](double tau) { return tau; };

  double value(double x, double u, double s) const;
  double du(double x, double u) const;  // dV/du (s-independent in all variants)
  bool linear_in_u() const { return kind == Kind::trap_lattice; }
};

struct GpeProblem {
  SpatialGrid grid;
  GpePotential potential;
  double kappa = 0.0;  // >= 0
  Vector psi0;
  Vector psi_target;
  double lambda_du = 0.0;
  ShapeFn shape;
};

double l2_norm(const Vector& field, double dx);
Complex l2_inner(const Vector& a, const Vector& b, double dx);

/// Strang split-step propagation; returns the N+1 node wavefunctions.
std::vector<Vector> gpe_propagate(const GpeProblem& problem, const ControlField& control);

/// GP energy <K> + <V> + (kappa/2) int |psi|^4 at fixed control value u
/// and switching value s.
double gpe_energy(const SpatialGrid& grid, const GpePotential& potential, double u, double s,
                  double kappa, const Vector& psi);

struct GroundStateOptions {
  double tau = 0.05;       // initial imaginary-time step
  double residual_tol = 1e-6;
  int max_steps = 200000;
};

/// Imaginary-time relaxation with renormalization at fixed control value.
/// The result satisfies ||H_GP[psi] psi - mu psi|| <= residual_tol.
Vector gpe_ground_state(const SpatialGrid& grid, const GpePotential& potential, double u,
                        double kappa, const GroundStateOptions& opts = {});

/// Lowest state orthogonal to `below` (imaginary time with projection).
Vector gpe_excited_state(const SpatialGrid& grid, const GpePotential& potential, double u,
                         double kappa, const Vector& below,
                         const GroundStateOptions& opts = {});

/// Stationarity residual ||H_GP psi - mu psi||_L2 with mu the Rayleigh quotient.
double gpe_stationarity_residual(const SpatialGrid& grid, const GpePotential& potential,
                                 double u, double s, double kappa, const Vector& psi);

/// Backward sweep of the linearized (costate) equation
///   dchi/dt = -i (K + V[u] + 2 kappa |psi|^2) chi + i kappa psi^2 chi*,
/// mirrored Strang splitting against the stored forward trajectory.
std::vector<Vector> gpe_costate_backward(const GpeProblem& problem, const ControlField& control,
                                         const std::vector<Vector>& forward, const Vector& chiT);

enum class GpeUpdate { full, simplified };

/// Second-order Krotov for the controlled Gross-Pitaevskii equation.
OptimizationTrace krotov_gpe(const GpeProblem& problem, const ControlField& u0, double gamma_u,
                             const SigmaSpec& sigma, GpeUpdate update,
                             const KrotovOptions& opts);

}  // namespace qoc
