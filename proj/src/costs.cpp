#include "qoc/costs.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace qoc {

namespace {

// Bell-basis change matrix for the two-qubit local invariants.
Matrix bell_matrix() {
  const double s = 1.0 / std::sqrt(2.0);
  const Complex i(0.0, 1.0);
  Matrix b(4, 4);
  b << s, 0, 0, s * i,
      0, s * i, s, 0,
      0, s * i, -s, 0,
      s, 0, 0, -s * i;
  return b;
}

// Indices of the coordinates kept by a 0/1 coordinate projector.
std::vector<int> projector_indices(const Matrix& projector) {
  const int n = static_cast<int>(projector.rows());
  std::vector<int> idx;
  for (int a = 0; a < n; ++a) {
    const double d = projector(a, a).real();
    if (std::abs(d - 1.0) < 1e-9) idx.push_back(a);
    else if (std::abs(d) > 1e-9)
      throw std::invalid_argument("projector must be a coordinate projector");
  }
  Matrix check = Matrix::Zero(n, n);
  for (int a : idx) check(a, a) = 1.0;
  if (max_abs(check - projector) > 1e-9)
    throw std::invalid_argument("projector must be a coordinate projector");
  return idx;
}

Matrix assemble_projected(const std::vector<Vector>& finals, const std::vector<int>& idx) {
  Matrix u(idx.size(), finals.size());
  for (size_t b = 0; b < finals.size(); ++b)
    for (size_t a = 0; a < idx.size(); ++a) u(a, b) = finals[b](idx[a]);
  return u;
}

// g1, g2, g3 of a (near-)unitary 4x4 matrix, determinant normalized to 1.
// The Bell-basis transform is B^dag U B: the columns of B are the magic
// states, and only this orientation makes local unitaries real orthogonal.
std::array<double, 3> invariants_of(const Matrix& u) {
  const Complex det = u.determinant();
  if (std::abs(det) < 1e-12) throw NumericError("local_invariants: singular input");
  const Matrix b = bell_matrix();
  const Matrix ub = b.adjoint() * (u / std::pow(det, 0.25)) * b;
  const Matrix m = ub.transpose() * ub;
  const Complex tau = m.trace();
  const Complex h = tau * tau;
  const Complex s = (m * m).trace();
  return {h.real() / 16.0, h.imag() / 16.0, (h - s).real() / 4.0};
}

Matrix polar_unitary(const Matrix& u) {
  Eigen::JacobiSVD<Matrix> svd(u, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

void require_hermitian(const Matrix& m, const char* what) {
  if (!is_hermitian(m, 1e-10)) throw std::invalid_argument(std::string(what) + ": not Hermitian");
}

}  // namespace

double ShapeFn::operator()(double t, double horizon) const {
  switch (kind) {
    case Kind::constant:
      return 1.0;
    case Kind::sine_squared: {
      const double s = std::sin(M_PI * t / horizon);
      return s * s;
    }
    case Kind::gaussian_palao: {
      const double x = t / horizon - 0.5;
      return std::exp(-32.0 * x * x);
    }
  }
  return 1.0;
}

void ObjectiveSpec::validate() const {
  if (lambda_u < 0.0) throw std::invalid_argument("ObjectiveSpec: lambda_u must be >= 0");
  if (lambda_du < 0.0) throw std::invalid_argument("ObjectiveSpec: lambda_du must be >= 0");
  if (!(gamma_u > 0.0)) throw std::invalid_argument("ObjectiveSpec: gamma_u must be > 0");
  if (state_penalty_operator) require_hermitian(*state_penalty_operator, "state penalty operator");
}

double terminant_observable(const Vector& psiT, const Matrix& observable) {
  require_hermitian(observable, "terminant_observable");
  return -(psiT.dot(observable * psiT)).real();
}

double terminant_overlap(const Vector& psiT, const Vector& target, OverlapVariant variant) {
  const Complex c = psiT.dot(target);
  if (variant == OverlapVariant::squared) return 1.0 - std::norm(c);
  return 1.0 - c.real();
}

double terminant_gate(const Matrix& uT, const Matrix& gate) {
  const double n = static_cast<double>(uT.rows());
  const Complex tr = (gate.adjoint() * uT).trace();
  return -std::norm(tr) / (n * n);
}

double terminant_density(const Matrix& rhoT, const Matrix& rho_target) {
  return -(rhoT * rho_target).trace().real();
}

double terminant_unitary_observable(const Matrix& uT, const Matrix& observable,
                                    const Matrix& rho0) {
  require_hermitian(observable, "terminant_unitary_observable");
  return -(observable * uT * rho0 * uT.adjoint()).trace().real();
}

double terminant_unitary_nonhermitian(const Matrix& uT, const Matrix& op, const Matrix& rho0,
                                      NonHermVariant variant) {
  const Complex tr = (op.adjoint() * uT * rho0 * uT.adjoint()).trace();
  if (variant == NonHermVariant::real_part) return -tr.real();
  return -std::norm(tr);
}

std::array<double, 3> local_invariants(const Matrix& u) {
  if (u.rows() != 4 || u.cols() != 4)
    throw std::invalid_argument("local_invariants: expected a 4x4 unitary");
  return invariants_of(u);
}

double gate_leakage(const Matrix& u_projected) {
  const double n = static_cast<double>(u_projected.rows());
  return 1.0 - (u_projected * u_projected.adjoint()).trace().real() / n;
}

double terminant_local_invariants(const std::vector<Vector>& ensemble_finals,
                                  const Matrix& target_gate, const Matrix& projector) {
  const std::vector<int> idx = projector_indices(projector);
  if (idx.size() != 4 || ensemble_finals.size() != 4)
    throw std::invalid_argument("terminant_local_invariants: projected subspace must have dim 4");
  Matrix un = assemble_projected(ensemble_finals, idx);

  Matrix for_g = un;
  if (max_abs(un.adjoint() * un - Matrix::Identity(4, 4)) > 1e-6) for_g = polar_unitary(un);
  const auto g = invariants_of(for_g);
  const auto gt = invariants_of(target_gate);

  double value = gate_leakage(un);
  for (int i = 0; i < 3; ++i) value += (g[i] - gt[i]) * (g[i] - gt[i]);
  return value;
}

double fluence(const ControlField& control, const ShapeFn& shape, double lambda_u) {
  const double dt = control.grid.dt();
  double acc = 0.0;
  for (int j = 0; j < control.samples(); ++j) {
    const double s = shape(control.grid.midpoint(j), control.grid.horizon);
    const double uu = control.values.col(j).matrix().squaredNorm();
    if (s <= 0.0) {
      if (uu > 0.0) throw NumericError("fluence: shape vanishes where the control is nonzero");
      continue;
    }
    acc += dt * uu / s;
  }
  return lambda_u * acc;
}

double state_penalty(const StateTrajectory& trajectory, const Matrix& penalty_op,
                     double lambda_state) {
  require_hermitian(penalty_op, "state_penalty");
  const double dt = trajectory.grid.dt();
  double acc = 0.0;
  for (int j = 0; j < trajectory.grid.intervals; ++j)
    acc += dt * (trajectory.samples[j].dot(penalty_op * trajectory.samples[j])).real();
  return lambda_state * acc;
}

double state_penalty(const DensityTrajectory& trajectory, const Matrix& penalty_op,
                     double lambda_state) {
  require_hermitian(penalty_op, "state_penalty");
  const double dt = trajectory.grid.dt();
  double acc = 0.0;
  for (int j = 0; j < trajectory.grid.intervals; ++j)
    acc += dt * (trajectory.samples[j] * penalty_op).trace().real();
  return lambda_state * acc;
}

double state_penalty(const StateTrajectory& trajectory,
                     const std::vector<Matrix>& penalty_ops, double lambda_state) {
  if (penalty_ops.size() < static_cast<size_t>(trajectory.grid.intervals))
    throw std::invalid_argument("state_penalty: operator table not sampled on the grid");
  const double dt = trajectory.grid.dt();
  double acc = 0.0;
  for (int j = 0; j < trajectory.grid.intervals; ++j) {
    require_hermitian(penalty_ops[j], "state_penalty");
    acc += dt * (trajectory.samples[j].dot(penalty_ops[j] * trajectory.samples[j])).real();
  }
  return lambda_state * acc;
}

double h1_penalty(const ControlField& control, double lambda_du) {
  const double dt = control.grid.dt();
  double acc = 0.0;
  for (int l = 0; l < control.channels(); ++l)
    for (int j = 0; j + 1 < control.samples(); ++j) {
      const double d = (control.values(l, j + 1) - control.values(l, j)) / dt;
      acc += dt * d * d;
    }
  return lambda_du * acc;
}

namespace {

double terminal_value(const ObjectiveSpec& objective, const Vector& psiT) {
  if (const auto* t = std::get_if<ObservableTerminant>(&objective.terminant))
    return terminant_observable(psiT, t->observable);
  if (const auto* t = std::get_if<OverlapTerminant>(&objective.terminant))
    return terminant_overlap(psiT, t->target, t->variant);
  throw ConfigError("objective terminant does not apply to a single-state problem");
}

ObjectiveBreakdown running_costs(const ObjectiveSpec& objective, const ControlField& control) {
  ObjectiveBreakdown b;
  b.fluence = fluence(control, objective.shape, objective.lambda_u);
  b.h1_penalty = h1_penalty(control, objective.lambda_du);
  return b;
}

}  // namespace

ObjectiveBreakdown objective_from_trajectory(const StateProblem& problem,
                                             const ControlField& control,
                                             const StateTrajectory& trajectory) {
  ObjectiveBreakdown b = running_costs(problem.objective, control);
  b.terminant = terminal_value(problem.objective, trajectory.back());
  if (problem.objective.state_penalty_operator)
    b.state_penalty = state_penalty(trajectory, *problem.objective.state_penalty_operator,
                                    problem.objective.lambda_state);
  return b;
}

ObjectiveBreakdown total_objective(const StateProblem& problem, const ControlField& control) {
  problem.objective.validate();
  const StateTrajectory traj =
      propagate_state(problem.system, control, QuantumState(problem.psi0));
  return objective_from_trajectory(problem, control, traj);
}

ObjectiveBreakdown objective_from_trajectory(const DensityProblem& problem,
                                             const ControlField& control,
                                             const DensityTrajectory& trajectory) {
  ObjectiveBreakdown b = running_costs(problem.objective, control);
  const auto* t = std::get_if<DensityOverlapTerminant>(&problem.objective.terminant);
  if (!t) throw ConfigError("density problem requires a density_overlap terminant");
  b.terminant = terminant_density(trajectory.samples.back(), t->rho_target);
  if (problem.objective.state_penalty_operator)
    b.state_penalty = state_penalty(trajectory, *problem.objective.state_penalty_operator,
                                    problem.objective.lambda_state);
  return b;
}

ObjectiveBreakdown total_objective(const DensityProblem& problem, const ControlField& control) {
  problem.objective.validate();
  const DensityTrajectory traj =
      propagate_density(problem.system, control, DensityMatrix(problem.rho0));
  return objective_from_trajectory(problem, control, traj);
}

ObjectiveBreakdown total_objective(const UnitaryProblem& problem, const ControlField& control) {
  problem.objective.validate();
  const UnitaryTrajectory traj = propagate_unitary(problem.system, control);
  ObjectiveBreakdown b = running_costs(problem.objective, control);
  const Matrix& uT = traj.samples.back();
  if (const auto* t = std::get_if<GateTerminant>(&problem.objective.terminant))
    b.terminant = terminant_gate(uT, t->gate);
  else if (const auto* t = std::get_if<UnitaryObservableTerminant>(&problem.objective.terminant))
    b.terminant = terminant_unitary_observable(uT, t->observable, t->rho0);
  else if (const auto* t = std::get_if<UnitaryNonHermitianTerminant>(&problem.objective.terminant))
    b.terminant = terminant_unitary_nonhermitian(uT, t->op, t->rho0, t->variant);
  else
    throw ConfigError("objective terminant does not apply to a unitary problem");
  return b;
}

double ensemble_terminant(const ObjectiveSpec& objective, const Ensemble& ensemble,
                          const std::vector<Vector>& finals) {
  if (const auto* t = std::get_if<ObservableTerminant>(&objective.terminant)) {
    double acc = 0.0;
    for (const auto& psi : finals) acc += terminant_observable(psi, t->observable);
    return acc;
  }
  if (const auto* t = std::get_if<OverlapTerminant>(&objective.terminant)) {
    if (finals.size() != 1)
      throw ConfigError("overlap terminant applies to a single-member ensemble");
    return terminant_overlap(finals[0], t->target, t->variant);
  }
  if (const auto* t = std::get_if<EnsembleOverlapTerminant>(&objective.terminant)) {
    if (ensemble.targets.size() != finals.size())
      throw ConfigError("ensemble overlap terminant requires per-member targets");
    double acc = 0.0;
    for (size_t j = 0; j < finals.size(); ++j)
      acc += terminant_overlap(finals[j], ensemble.targets[j], t->variant);
    return acc;
  }
  if (const auto* t = std::get_if<GateTerminant>(&objective.terminant)) {
    const double n = static_cast<double>(finals.size());
    Complex tr = 0.0;
    for (size_t j = 0; j < finals.size(); ++j) tr += t->gate.col(j).dot(finals[j]);
    return -std::norm(tr) / (n * n);
  }
  if (const auto* t = std::get_if<LocalInvariantsTerminant>(&objective.terminant)) {
    // Smooth polynomial form on the raw projected block; the evaluation op
    // with its polar-decomposition rule lives in terminant_local_invariants.
    const std::vector<int> idx = projector_indices(t->projector);
    if (idx.size() != 4 || finals.size() != 4)
      throw std::invalid_argument("local invariants terminant needs a dim-4 subspace");
    const Matrix un = assemble_projected(finals, idx);
    const auto g = invariants_of(un);
    const auto gt = invariants_of(t->target_gate);
    double value = gate_leakage(un);
    for (int i = 0; i < 3; ++i) value += (g[i] - gt[i]) * (g[i] - gt[i]);
    return value;
  }
  throw ConfigError("objective terminant does not apply to an ensemble problem");
}

std::vector<Vector> ensemble_terminant_gradient(const ObjectiveSpec& objective,
                                                const Ensemble& ensemble,
                                                const std::vector<Vector>& finals) {
  std::vector<Vector> grad(finals.size());
  if (const auto* t = std::get_if<ObservableTerminant>(&objective.terminant)) {
    for (size_t j = 0; j < finals.size(); ++j) grad[j] = -(t->observable * finals[j]);
    return grad;
  }
  if (const auto* t = std::get_if<OverlapTerminant>(&objective.terminant)) {
    if (finals.size() != 1)
      throw ConfigError("overlap terminant applies to a single-member ensemble");
    if (t->variant == OverlapVariant::squared)
      grad[0] = -t->target.dot(finals[0]) * t->target;
    else
      grad[0] = -0.5 * t->target;
    return grad;
  }
  if (const auto* t = std::get_if<EnsembleOverlapTerminant>(&objective.terminant)) {
    for (size_t j = 0; j < finals.size(); ++j) {
      if (t->variant == OverlapVariant::squared)
        grad[j] = -ensemble.targets[j].dot(finals[j]) * ensemble.targets[j];
      else
        grad[j] = -0.5 * ensemble.targets[j];
    }
    return grad;
  }
  if (const auto* t = std::get_if<GateTerminant>(&objective.terminant)) {
    const double n = static_cast<double>(finals.size());
    Complex tr = 0.0;
    for (size_t j = 0; j < finals.size(); ++j) tr += t->gate.col(j).dot(finals[j]);
    for (size_t j = 0; j < finals.size(); ++j) grad[j] = -(tr / (n * n)) * t->gate.col(j);
    return grad;
  }
  if (const auto* t = std::get_if<LocalInvariantsTerminant>(&objective.terminant)) {
    const std::vector<int> idx = projector_indices(t->projector);
    if (idx.size() != 4 || finals.size() != 4)
      throw std::invalid_argument("local invariants terminant needs a dim-4 subspace");
    const Matrix un = assemble_projected(finals, idx);
    const auto gt = invariants_of(t->target_gate);

    const Complex det = un.determinant();
    if (std::abs(det) < 1e-12) throw NumericError("local invariants gradient: singular block");
    const Complex det_quarter = std::pow(det, 0.25);
    const Matrix uhat = un / det_quarter;
    const Matrix b = bell_matrix();
    const Matrix ub = b.adjoint() * uhat * b;
    const Matrix m = ub.transpose() * ub;
    const Complex tau = m.trace();
    const Complex h = tau * tau;
    const Complex s = (m * m).trace();
    const std::array<double, 3> g = {h.real() / 16.0, h.imag() / 16.0, (h - s).real() / 4.0};

    // Holomorphic differentials with the convention d(phi) = Tr(P dUhat).
    const Matrix p_tau = 2.0 * b * ub.transpose() * b.adjoint();
    const Matrix p_s = 4.0 * b * m * ub.transpose() * b.adjoint();
    const Matrix un_inv = un.inverse();
    auto chain_to_un = [&](const Matrix& p) -> Matrix {
      return (p - 0.25 * (p * un).trace() * un_inv) / det_quarter;
    };
    const Matrix q_tau2 = chain_to_un(2.0 * tau * p_tau);
    const Matrix q_s = chain_to_un(p_s);

    // dF/dU* for F = sum_i (g_i - g_i(W))^2 + 1 - (1/4) Tr(U U^dag).
    // For holomorphic phi with d(phi) = Tr(Q dU):
    //   d(Re phi)/dU*_{ab} = (1/2) conj(Q_ba),  d(Im phi)/dU*_{ab} = (i/2) conj(Q_ba).
    const Complex c1 = 2.0 * (g[0] - gt[0]);
    const Complex c2 = 2.0 * (g[1] - gt[1]);
    const Complex c3 = 2.0 * (g[2] - gt[2]);
    Matrix df = Matrix::Zero(4, 4);
    const Matrix q1 = q_tau2 / 16.0;
    const Matrix q3 = (q_tau2 - q_s) / 4.0;
    df += c1 * 0.5 * q1.transpose().conjugate();
    df += c2 * (Complex(0.0, 0.5) * q1.transpose().conjugate());
    df += c3 * 0.5 * q3.transpose().conjugate();
    df -= 0.25 * un;

    const int dim = static_cast<int>(finals[0].size());
    for (size_t j = 0; j < finals.size(); ++j) {
      grad[j] = Vector::Zero(dim);
      for (size_t a = 0; a < idx.size(); ++a) grad[j](idx[a]) = df(a, j);
    }
    return grad;
  }
  throw ConfigError("objective terminant gradient not available for this terminant");
}

ObjectiveBreakdown objective_from_trajectory(const EnsembleProblem& problem,
                                             const ControlField& control,
                                             const std::vector<StateTrajectory>& trajectories) {
  ObjectiveBreakdown b = running_costs(problem.objective, control);
  std::vector<Vector> finals;
  finals.reserve(trajectories.size());
  for (const auto& traj : trajectories) finals.push_back(traj.back());
  b.terminant = ensemble_terminant(problem.objective, problem.ensemble, finals);
  if (problem.objective.state_penalty_operator) {
    for (const auto& traj : trajectories)
      b.state_penalty += state_penalty(traj, *problem.objective.state_penalty_operator,
                                       problem.objective.lambda_state);
  }
  return b;
}

ObjectiveBreakdown total_objective(const EnsembleProblem& problem, const ControlField& control) {
  problem.objective.validate();
  const auto trajs = propagate_ensemble(problem.system, control, problem.ensemble);
  return objective_from_trajectory(problem, control, trajs);
}

}  // namespace qoc
