#pragma once

#include <Eigen/Dense>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace qoc {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using RealArray = Eigen::ArrayXXd;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kNormTol = 1e-10;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Thrown when a numerical procedure fails (eigensolver breakdown,
/// blow-up of an auxiliary ODE, ill-conditioned linear system, ...).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown when a method is invoked outside its stated problem class
/// or a run configuration is invalid.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double max_abs(const Matrix& m);
bool is_hermitian(const Matrix& m, double tol = kHermitianTol);

/// Drift plus control operators defining H[u] = H0 + sum_l u_l H_l on C^n.
struct ControlSystem {
  Matrix drift;
  std::vector<Matrix> controls;
  std::vector<std::string> labels;

  ControlSystem(Matrix drift_, std::vector<Matrix> controls_,
                std::vector<std::string> labels_ = {});

  int dim() const { return static_cast<int>(drift.rows()); }
  int num_controls() const { return static_cast<int>(controls.size()); }
};

/// Uniform grid of N intervals on [0, T]; dt is derived, never stored.
struct TimeGrid {
  double horizon = 1.0;
  int intervals = 1;

  TimeGrid() = default;
  TimeGrid(double horizon_, int intervals_);

  double dt() const { return horizon / intervals; }
  double node(int j) const { return horizon * j / intervals; }
  double midpoint(int j) const { return horizon * (j + 0.5) / intervals; }
};

struct ChannelBounds {
  double lo = -kInf;
  double hi = kInf;
};

/// Multi-channel piecewise-constant control: channel l takes the value
/// values(l, j) on the interval [t_j, t_{j+1}).
struct ControlField {
  TimeGrid grid;
  RealArray values;  // m x N
  std::vector<ChannelBounds> bounds;

  ControlField() = default;
  ControlField(TimeGrid grid_, RealArray values_,
               std::vector<ChannelBounds> bounds_ = {});

  static ControlField constant(const TimeGrid& grid, int channels, double value,
                               std::vector<ChannelBounds> bounds = {});

  int channels() const { return static_cast<int>(values.rows()); }
  int samples() const { return static_cast<int>(values.cols()); }
  RealVector at(int j) const { return values.col(j).matrix(); }
  double clip(int channel, double v) const;
  void validate() const;
};

/// Unit-norm pure state.
struct QuantumState {
  Vector amplitudes;

  explicit QuantumState(Vector amplitudes_);
  int dim() const { return static_cast<int>(amplitudes.size()); }
};

/// Hermitian, unit-trace, positive semidefinite density operator.
struct DensityMatrix {
  Matrix matrix;

  explicit DensityMatrix(Matrix matrix_);
  int dim() const { return static_cast<int>(matrix.rows()); }

  static DensityMatrix pure(const Vector& psi);
};

struct UnitaryMatrix {
  Matrix matrix;

  explicit UnitaryMatrix(Matrix matrix_);
  int dim() const { return static_cast<int>(matrix.rows()); }
};

/// H0 + sum_l u_l H_l.
Matrix hamiltonian_at(const ControlSystem& system, const RealVector& u);

/// AB - BA.
Matrix commutator(const Matrix& a, const Matrix& b);

/// exp(-i s H) for Hermitian H, via eigendecomposition.
UnitaryMatrix hermitian_expm(const Matrix& h, double s);

Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();
Matrix kron(const Matrix& a, const Matrix& b);

}  // namespace qoc
