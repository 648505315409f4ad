#pragma once

#include "qoc/trace.hpp"

namespace qoc {

enum class KrotovForm { lambda_u_form, gamma_form };

/// Choice of the quadratic part of the improvement function.
/// zero: first-order method. exponential: Sigma(t) = (alpha (e^{gamma (T-t)} - 1)
/// + beta) I. riccati: Sigma from the backward matrix ODE (real-state method).
struct SigmaSpec {
  enum class Kind { zero, exponential, riccati };
  Kind kind = Kind::zero;

  double alpha = -1.0;  // < 0
  double beta = -1.0;   // < 0
  double gamma = 1.0;   // > 0

  double riccati_delta = 1e-3;  // delta_i(t), > 0
  double riccati_alpha = 1e-3;  // terminal diagonal shift, > 0

  // Applied when an iteration fails to improve: alpha, beta (and the
  // riccati diagonals) scale by adapt_strength; gamma by adapt_gamma.
  double adapt_strength = 2.0;
  double adapt_gamma = 1.5;

  void validate() const;
};

struct KrotovOptions {
  KrotovForm form = KrotovForm::gamma_form;
  double gamma_u = 1.0;  // Gamma-regularizer weight, > 0 for gamma_form
  SigmaSpec sigma;
  int max_iters = 1000;
  double tol_dJ = 1e-8;
  int max_adaptations = 8;
};

/// Real bilinear system dy/dt = (A + sum_l u_l B_l) y.
struct RealBilinearSystem {
  RealMatrix a;
  std::vector<RealMatrix> b;

  int dim() const { return static_cast<int>(a.rows()); }
  int num_controls() const { return static_cast<int>(b.size()); }
};

/// Terminant -<y(T), M y(T)> with M >= 0, running cost lambda_u int |u|^2 dt.
struct RealStateProblem {
  RealBilinearSystem system;
  RealVector y0;
  RealMatrix terminant_matrix;
  double lambda_u = 0.0;
};

struct RealStateTrajectory {
  TimeGrid grid;
  std::vector<RealVector> samples;
};

struct SpectralBand {
  double omega = 0.0;   // >= 0
  double sigma = 1.0;   // > 0
  double weight = 1.0;  // lambda_spec, > 0
};

struct SpectralConstraint {
  std::vector<SpectralBand> components;
  int expansion_rank = 12;  // separable terms per band and trig factor

  void validate() const;
};

OptimizationTrace krotov1_schrodinger(const StateProblem& problem, const ControlField& u0,
                                      const KrotovOptions& opts);

OptimizationTrace krotov1_density(const DensityProblem& problem, const ControlField& u0,
                                  const KrotovOptions& opts);

OptimizationTrace krotov2_ensemble(const EnsembleProblem& problem, const ControlField& u0,
                                   const KrotovOptions& opts);

OptimizationTrace krotov_realstate(const RealStateProblem& problem, const ControlField& u0,
                                   const KrotovOptions& opts);

/// Sigma(t_j) at the N+1 grid nodes for the exponential form.
std::vector<double> sigma_exponential(const TimeGrid& grid, double alpha, double beta,
                                      double gamma);

/// Backward-integrated matrix Sigma(t_j) for the bilinear real-state system:
/// dSigma/dt = -(Sigma A_u + A_u^T Sigma) + delta I, Sigma(T) = 2 M - alpha I.
std::vector<RealMatrix> sigma_riccati(const RealBilinearSystem& system,
                                      const ControlField& control, const RealMatrix& terminant,
                                      double delta, double alpha_terminal,
                                      int substeps_per_interval = 8);

/// Solve du(t) = I_hat(t) + int_0^T K(t,t') du(t') dt' by degenerate-kernel
/// expansion of the Gaussian-cosine kernel; the discretized residual is
/// checked to 1e-8 in max norm (the expansion rank is raised if needed).
RealVector fredholm_degenerate_solve(const RealVector& i_hat, const SpectralConstraint& kernel,
                                     const TimeGrid& grid, const ShapeFn& shape, double gamma_u);

OptimizationTrace krotov_spectral(const EnsembleProblem& problem, const ControlField& u0,
                                  const SpectralConstraint& constraint, double gamma_u,
                                  const KrotovOptions& opts);

OptimizationTrace krotov_spectral(const StateProblem& problem, const ControlField& u0,
                                  const SpectralConstraint& constraint, double gamma_u,
                                  const KrotovOptions& opts);

/// In-band DFT power of a node series, bands taken as |omega - omega_m| <= 2 sigma_m.
double band_power(const RealVector& series, double horizon,
                  const SpectralConstraint& constraint);

}  // namespace qoc
