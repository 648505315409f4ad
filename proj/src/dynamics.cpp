#include "qoc/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace qoc {

namespace {

void check_dims(const ControlSystem& system, const ControlField& control, int state_dim) {
  if (control.channels() != system.num_controls())
    throw std::invalid_argument("propagate: control channel count mismatch");
  if (state_dim != system.dim())
    throw std::invalid_argument("propagate: state dimension mismatch");
}

}  // namespace

Matrix step_propagator(const ControlSystem& system, const RealVector& u, double dt) {
  return hermitian_expm(hamiltonian_at(system, u), dt).matrix;
}

namespace {

Matrix frechet_from_eigen(const Matrix& q, const RealVector& lam, double dt,
                          const Matrix& direction) {
  const int n = static_cast<int>(lam.size());
  Matrix e = q.adjoint() * direction * q;
  for (int p = 0; p < n; ++p) {
    const Complex fp = std::exp(Complex(0.0, -dt * lam(p)));
    for (int r = 0; r < n; ++r) {
      const double gap = lam(p) - lam(r);
      Complex phi;
      if (std::abs(gap) < 1e-12) {
        phi = Complex(0.0, -dt) * fp;
      } else {
        phi = (fp - std::exp(Complex(0.0, -dt * lam(r)))) / gap;
      }
      e(p, r) *= phi;
    }
  }
  return q * e * q.adjoint();
}

}  // namespace

Matrix step_propagator_derivative(const ControlSystem& system, const RealVector& u,
                                  double dt, int channel) {
  const Matrix h = hamiltonian_at(system, u);
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success)
    throw NumericError("step_propagator_derivative: eigendecomposition failed");
  return frechet_from_eigen(es.eigenvectors(), es.eigenvalues(), dt,
                            system.controls[channel]);
}

void step_propagator_with_derivatives(const ControlSystem& system, const RealVector& u,
                                      double dt, Matrix* propagator,
                                      std::vector<Matrix>* derivatives) {
  const Matrix h = hamiltonian_at(system, u);
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success)
    throw NumericError("step_propagator_with_derivatives: eigendecomposition failed");
  const auto& q = es.eigenvectors();
  if (propagator) {
    Vector phases(h.rows());
    for (int i = 0; i < h.rows(); ++i)
      phases(i) = std::exp(Complex(0.0, -dt * es.eigenvalues()(i)));
    *propagator = q * phases.asDiagonal() * q.adjoint();
  }
  if (derivatives) {
    derivatives->clear();
    for (int l = 0; l < system.num_controls(); ++l)
      derivatives->push_back(
          frechet_from_eigen(q, es.eigenvalues(), dt, system.controls[l]));
  }
}

StateTrajectory propagate_state(const ControlSystem& system, const ControlField& control,
                                const QuantumState& psi0) {
  check_dims(system, control, psi0.dim());
  const int steps = control.samples();
  const double dt = control.grid.dt();

  StateTrajectory traj;
  traj.grid = control.grid;
  traj.samples.reserve(steps + 1);
  traj.samples.push_back(psi0.amplitudes);
  for (int j = 0; j < steps; ++j) {
    const Matrix v = step_propagator(system, control.at(j), dt);
    traj.samples.push_back(v * traj.samples.back());
    if (std::abs(traj.samples.back().norm() - 1.0) > kNormTol)
      throw NumericError("propagate_state: norm drift exceeded tolerance");
  }
  return traj;
}

UnitaryTrajectory propagate_unitary(const ControlSystem& system, const ControlField& control) {
  check_dims(system, control, system.dim());
  const int steps = control.samples();
  const int n = system.dim();
  const double dt = control.grid.dt();

  UnitaryTrajectory traj;
  traj.grid = control.grid;
  traj.samples.reserve(steps + 1);
  traj.samples.push_back(Matrix::Identity(n, n));
  for (int j = 0; j < steps; ++j) {
    const Matrix v = step_propagator(system, control.at(j), dt);
    traj.samples.push_back(v * traj.samples.back());
    Matrix defect = traj.samples.back().adjoint() * traj.samples.back() - Matrix::Identity(n, n);
    if (max_abs(defect) > kUnitaryTol)
      throw NumericError("propagate_unitary: unitarity drift exceeded tolerance");
  }
  return traj;
}

DensityTrajectory propagate_density(const ControlSystem& system, const ControlField& control,
                                    const DensityMatrix& rho0, DensityRoute route) {
  check_dims(system, control, rho0.dim());
  const int steps = control.samples();
  const double dt = control.grid.dt();

  DensityTrajectory traj;
  traj.grid = control.grid;
  traj.samples.reserve(steps + 1);
  traj.samples.push_back(rho0.matrix);

  if (route == DensityRoute::von_neumann) {
    for (int j = 0; j < steps; ++j) {
      const Matrix v = step_propagator(system, control.at(j), dt);
      traj.samples.push_back(v * traj.samples.back() * v.adjoint());
    }
  } else {
    const UnitaryTrajectory u = propagate_unitary(system, control);
    for (int j = 1; j <= steps; ++j)
      traj.samples.push_back(u.samples[j] * rho0.matrix * u.samples[j].adjoint());
  }

  const double tr0 = traj.samples.front().trace().real();
  const double pur0 = (traj.samples.front() * traj.samples.front()).trace().real();
  for (const auto& rho : traj.samples) {
    if (std::abs(rho.trace().real() - tr0) > kNormTol ||
        std::abs((rho * rho).trace().real() - pur0) > kNormTol)
      throw NumericError("propagate_density: trace/purity drift exceeded tolerance");
  }
  return traj;
}

VectorCostate propagate_costate_state(const ControlSystem& system, const ControlField& control,
                                      const Vector& chiT,
                                      const std::vector<Vector>* inhomogeneity) {
  check_dims(system, control, static_cast<int>(chiT.size()));
  const int steps = control.samples();
  const double dt = control.grid.dt();
  if (inhomogeneity && static_cast<int>(inhomogeneity->size()) != steps + 1)
    throw std::invalid_argument("propagate_costate_state: inhomogeneity not sampled on the grid");

  VectorCostate costate;
  costate.grid = control.grid;
  costate.samples.assign(steps + 1, Vector());
  costate.samples[steps] = chiT;
  for (int j = steps - 1; j >= 0; --j) {
    const Matrix v = step_propagator(system, control.at(j), dt);
    Vector chi = v.adjoint() * costate.samples[j + 1];
    if (inhomogeneity) chi -= dt * (*inhomogeneity)[j];
    costate.samples[j] = std::move(chi);
  }
  return costate;
}

MatrixCostate propagate_costate_density(const ControlSystem& system, const ControlField& control,
                                        const Matrix& sigmaT,
                                        const std::vector<Matrix>* inhomogeneity) {
  check_dims(system, control, static_cast<int>(sigmaT.rows()));
  const int steps = control.samples();
  const double dt = control.grid.dt();
  if (inhomogeneity && static_cast<int>(inhomogeneity->size()) != steps + 1)
    throw std::invalid_argument("propagate_costate_density: inhomogeneity not sampled on the grid");

  MatrixCostate costate;
  costate.grid = control.grid;
  costate.samples.assign(steps + 1, Matrix());
  costate.samples[steps] = sigmaT;
  for (int j = steps - 1; j >= 0; --j) {
    const Matrix v = step_propagator(system, control.at(j), dt);
    Matrix sigma = v.adjoint() * costate.samples[j + 1] * v;
    if (inhomogeneity) sigma -= dt * (*inhomogeneity)[j];
    costate.samples[j] = std::move(sigma);
  }
  return costate;
}

std::vector<StateTrajectory> propagate_ensemble(const ControlSystem& system,
                                                const ControlField& control,
                                                const Ensemble& ensemble) {
  std::vector<StateTrajectory> out;
  out.reserve(ensemble.size());
  for (const auto& psi0 : ensemble.initial)
    out.push_back(propagate_state(system, control, QuantumState(psi0)));
  return out;
}

}  // namespace qoc
