#pragma once

#include <cstdint>
#include <functional>

#include "qoc/trace.hpp"

namespace qoc {

struct MadayTuriniciParams {
  double delta = 1.0;
  double eta = 0.0;

  void validate() const;
};

/// Zhu-Rabitz nonlocal-improvement method for the stated problem class:
/// O >= 0, scalar control, lambda_u > 0, S == 1, no state penalty, Q = R.
OptimizationTrace zhu_rabitz(const StateProblem& problem, const ControlField& u0,
                             int max_iters = 100, double tol_dJ = 1e-10);

/// Maday-Turinici scheme; (1,0) is the first-order Krotov update sequence,
/// (1,1) the Zhu-Rabitz one.
OptimizationTrace maday_turinici(const StateProblem& problem, const ControlField& u0,
                                 MadayTuriniciParams params, int max_iters = 100,
                                 double tol_dJ = 1e-10);

/// Unitary-dynamics problem with the observable terminant and the
/// regularizer -Tr(U^dag M U), M >= 0.
struct UnitaryRegularizedProblem {
  ControlSystem system;
  Matrix observable;
  Matrix rho0;
  Matrix reg;  // M
  double lambda_u = 1.0;
};

OptimizationTrace maday_turinici_unitary(const UnitaryRegularizedProblem& problem,
                                         const ControlField& u0, MadayTuriniciParams params,
                                         int max_iters = 100, double tol_dJ = 1e-10);

struct GrapeOptions {
  enum class Optimizer { quasi_newton, fixed_step };
  Optimizer optimizer = Optimizer::quasi_newton;
  double step_size = 0.5;  // fixed-step variant
  int max_iters = 200;
  double tol_dJ = 1e-10;
  double grad_tol = 1e-12;
  int memory = 10;
};

/// Gradient of the discretized objective with respect to every control
/// sample, by the exact discrete adjoint (Frechet derivative of each step
/// propagator). Optionally returns the objective breakdown of the sweep.
RealArray grape_gradient(const EnsembleProblem& problem, const ControlField& control,
                         ObjectiveBreakdown* breakdown = nullptr, int* cauchy_count = nullptr);
RealArray grape_gradient(const StateProblem& problem, const ControlField& control,
                         ObjectiveBreakdown* breakdown = nullptr, int* cauchy_count = nullptr);

OptimizationTrace grape(const EnsembleProblem& problem, const ControlField& u0,
                        const GrapeOptions& opts);
OptimizationTrace grape(const StateProblem& problem, const ControlField& u0,
                        const GrapeOptions& opts);
OptimizationTrace grape(const UnitaryProblem& problem, const ControlField& u0,
                        const GrapeOptions& opts);

struct SteepestDescentOptions {
  std::optional<std::pair<double, double>> band;  // (omega_min, omega_max)
  int max_iters = 100;
  double tol_dJ = 1e-10;
  int line_search_evals = 40;
};

OptimizationTrace steepest_descent(const StateProblem& problem, const ControlField& u0,
                                   const SteepestDescentOptions& opts);

/// (1 - alpha) u + alpha F(u) with F a low-pass DFT filter keeping
/// |omega| <= cutoff. The result carries no box (smoothing may leave Q).
ControlField smooth_control(const ControlField& u, double alpha, double cutoff);

struct CrabBasis {
  RealVector a;
  RealVector b;
  std::vector<double> omegas;
  ControlField u_guess;
  ShapeFn shape;
};

/// omega_j = 2 pi j (1 + r_j) / T with r_j drawn uniformly from [-0.5, 0.5].
std::vector<double> crab_frequencies(int n_terms, double horizon, std::uint64_t seed);

ControlField crab_expand(const CrabBasis& basis, const TimeGrid& grid);

struct NelderMeadResult {
  RealVector best;
  double value = 0.0;
  int evaluations = 0;
};

NelderMeadResult nelder_mead(const std::function<double(const RealVector&)>& objective,
                             std::vector<RealVector> simplex, int iters);

struct CrabOptions {
  int n_terms = 4;
  int iters = 400;
  std::uint64_t seed = 1;
  double simplex_scale = 0.1;
};

OptimizationTrace crab_optimize(const StateProblem& problem, const ControlField& u_guess,
                                const CrabOptions& opts);

}  // namespace qoc
