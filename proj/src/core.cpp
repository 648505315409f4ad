#include "qoc/core.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace qoc {

double max_abs(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

bool is_hermitian(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m - m.adjoint()) <= tol;
}

ControlSystem::ControlSystem(Matrix drift_, std::vector<Matrix> controls_,
                             std::vector<std::string> labels_)
    : drift(std::move(drift_)), controls(std::move(controls_)), labels(std::move(labels_)) {
  const int n = static_cast<int>(drift.rows());
  if (n < 2 || drift.cols() != n)
    throw std::invalid_argument("ControlSystem: drift must be square with n >= 2");
  if (controls.empty())
    throw std::invalid_argument("ControlSystem: at least one control operator required");
  if (!is_hermitian(drift))
    throw std::invalid_argument("ControlSystem: drift is not Hermitian");
  for (const auto& h : controls) {
    if (h.rows() != n || h.cols() != n)
      throw std::invalid_argument("ControlSystem: control operator dimension mismatch");
    if (!is_hermitian(h))
      throw std::invalid_argument("ControlSystem: control operator is not Hermitian");
  }
  if (!labels.empty() && labels.size() != controls.size())
    throw std::invalid_argument("ControlSystem: label count mismatch");
}

TimeGrid::TimeGrid(double horizon_, int intervals_)
    : horizon(horizon_), intervals(intervals_) {
  if (!(horizon > 0.0)) throw std::invalid_argument("TimeGrid: horizon must be positive");
  if (intervals < 1) throw std::invalid_argument("TimeGrid: need at least one interval");
}

ControlField::ControlField(TimeGrid grid_, RealArray values_,
                           std::vector<ChannelBounds> bounds_)
    : grid(grid_), values(std::move(values_)), bounds(std::move(bounds_)) {
  if (bounds.empty()) bounds.assign(values.rows(), ChannelBounds{});
  validate();
}

ControlField ControlField::constant(const TimeGrid& grid, int channels, double value,
                                    std::vector<ChannelBounds> bounds) {
  RealArray v = RealArray::Constant(channels, grid.intervals, value);
  return ControlField(grid, std::move(v), std::move(bounds));
}

double ControlField::clip(int channel, double v) const {
  const auto& b = bounds[channel];
  return std::min(std::max(v, b.lo), b.hi);
}

void ControlField::validate() const {
  if (values.cols() != grid.intervals)
    throw std::invalid_argument("ControlField: sample count does not match grid");
  if (values.rows() < 1)
    throw std::invalid_argument("ControlField: need at least one channel");
  if (bounds.size() != static_cast<size_t>(values.rows()))
    throw std::invalid_argument("ControlField: bounds count mismatch");
  for (int l = 0; l < channels(); ++l) {
    const auto& b = bounds[l];
    if (!(b.lo <= b.hi)) throw std::invalid_argument("ControlField: empty bounds box");
    for (int j = 0; j < samples(); ++j) {
      const double v = values(l, j);
      if (v < b.lo || v > b.hi)
        throw std::invalid_argument("ControlField: value outside bounds");
    }
  }
}

QuantumState::QuantumState(Vector amplitudes_) : amplitudes(std::move(amplitudes_)) {
  if (std::abs(amplitudes.norm() - 1.0) > kNormTol)
    throw std::invalid_argument("QuantumState: not normalized");
}

DensityMatrix::DensityMatrix(Matrix matrix_) : matrix(std::move(matrix_)) {
  if (!is_hermitian(matrix))
    throw std::invalid_argument("DensityMatrix: not Hermitian");
  if (std::abs(matrix.trace().real() - 1.0) > kNormTol ||
      std::abs(matrix.trace().imag()) > kNormTol)
    throw std::invalid_argument("DensityMatrix: trace is not 1");
  Eigen::SelfAdjointEigenSolver<Matrix> es(matrix, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw NumericError("DensityMatrix: eigendecomposition failed");
  if (es.eigenvalues().minCoeff() < -1e-10)
    throw std::invalid_argument("DensityMatrix: negative eigenvalue");
}

DensityMatrix DensityMatrix::pure(const Vector& psi) {
  return DensityMatrix(psi * psi.adjoint());
}

UnitaryMatrix::UnitaryMatrix(Matrix matrix_) : matrix(std::move(matrix_)) {
  const int n = static_cast<int>(matrix.rows());
  if (matrix.cols() != n) throw std::invalid_argument("UnitaryMatrix: not square");
  Matrix defect = matrix.adjoint() * matrix - Matrix::Identity(n, n);
  if (max_abs(defect) > kUnitaryTol)
    throw std::invalid_argument("UnitaryMatrix: not unitary");
}

Matrix hamiltonian_at(const ControlSystem& system, const RealVector& u) {
  if (u.size() != system.num_controls())
    throw std::invalid_argument("hamiltonian_at: control vector length mismatch");
  Matrix h = system.drift;
  for (int l = 0; l < system.num_controls(); ++l) h += u(l) * system.controls[l];
  return h;
}

Matrix commutator(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
    throw std::invalid_argument("commutator: dimension mismatch");
  return a * b - b * a;
}

UnitaryMatrix hermitian_expm(const Matrix& h, double s) {
  if (!is_hermitian(h)) throw std::invalid_argument("hermitian_expm: not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success)
    throw NumericError("hermitian_expm: eigendecomposition failed");
  const auto& v = es.eigenvectors();
  Vector phases(h.rows());
  for (int i = 0; i < h.rows(); ++i)
    phases(i) = std::exp(Complex(0.0, -s * es.eigenvalues()(i)));
  return UnitaryMatrix(v * phases.asDiagonal() * v.adjoint());
}

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace qoc
