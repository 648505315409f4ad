#include "qoc/krotov.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>

#include "qoc/fft.hpp"

namespace qoc {

namespace {

constexpr double kFixedPointTol = 1e-12;

double accept_slack(double j) { return 1e-13 * (1.0 + std::abs(j)); }

bool is_psd(const Matrix& m, double tol = 1e-10) {
  if (!is_hermitian(m, 1e-10)) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

void check_penalty_preconditions(const ObjectiveSpec& obj) {
  if (!obj.state_penalty_operator) return;
  if (obj.lambda_state > 0.0)
    throw ConfigError("krotov: state penalty requires lambda_state <= 0");
  if (!is_psd(*obj.state_penalty_operator))
    throw ConfigError("krotov: state penalty operator must be positive semidefinite");
}

void check_terminant_preconditions(const ObjectiveSpec& obj) {
  if (const auto* t = std::get_if<ObservableTerminant>(&obj.terminant)) {
    if (!is_psd(t->observable))
      throw ConfigError("krotov: observable terminant requires O >= 0");
  }
}

using NodeStates = std::vector<std::vector<Vector>>;  // [member][node]

NodeStates propagate_members(const ControlSystem& system, const ControlField& control,
                             const std::vector<Vector>& initials) {
  NodeStates states(initials.size());
  for (size_t m = 0; m < initials.size(); ++m)
    states[m] = propagate_state(system, control, QuantumState(initials[m])).samples;
  return states;
}

std::vector<Vector> finals_of(const NodeStates& states) {
  std::vector<Vector> finals;
  finals.reserve(states.size());
  for (const auto& s : states) finals.push_back(s.back());
  return finals;
}

ObjectiveBreakdown evaluate_ensemble(const EnsembleProblem& problem, const ControlField& control,
                                     const NodeStates& states) {
  std::vector<StateTrajectory> trajs(states.size());
  for (size_t m = 0; m < states.size(); ++m) trajs[m] = {control.grid, states[m]};
  return objective_from_trajectory(problem, control, trajs);
}

NodeStates backward_costates(const EnsembleProblem& problem, const ControlField& control,
                             const NodeStates& states) {
  const auto finals = finals_of(states);
  const auto grads =
      ensemble_terminant_gradient(problem.objective, problem.ensemble, finals);
  const int nodes = control.samples() + 1;
  const bool has_source = problem.objective.state_penalty_operator &&
                          problem.objective.lambda_state != 0.0;

  NodeStates costates(states.size());
  for (size_t m = 0; m < states.size(); ++m) {
    if (has_source) {
      std::vector<Vector> source(nodes);
      const Matrix& d = *problem.objective.state_penalty_operator;
      for (int j = 0; j < nodes; ++j)
        source[j] = problem.objective.lambda_state * (d * states[m][j]);
      costates[m] =
          propagate_costate_state(problem.system, control, -grads[m], &source).samples;
    } else {
      costates[m] = propagate_costate_state(problem.system, control, -grads[m]).samples;
    }
  }
  return costates;
}

struct SweepResult {
  ControlField control;
  NodeStates states;
  double max_du = 0.0;
};

// Sequential forward sweep: u^{(k+1)}_j is the clipped stationary point of
// the Pontryagin function evaluated with the stored costate at t_j and the
// already-updated state at t_j; the step then uses the new control.
SweepResult forward_update_sweep(const ControlSystem& system, const ObjectiveSpec& objective,
                                 const ControlField& u_prev, const NodeStates& prev_states,
                                 const NodeStates& costates, KrotovForm form, double gamma_u,
                                 const std::vector<double>* sigma_nodes) {
  const int steps = u_prev.samples();
  const int channels = u_prev.channels();
  const int members = static_cast<int>(prev_states.size());
  const double dt = u_prev.grid.dt();
  const double lam = (form == KrotovForm::lambda_u_form) ? objective.lambda_u : 0.0;
  const double gam = (form == KrotovForm::gamma_form) ? gamma_u : 0.0;
  const double lam_extra = (form == KrotovForm::gamma_form) ? objective.lambda_u : 0.0;
  const double denom = lam + gam + lam_extra;

  SweepResult out;
  out.control = u_prev;
  out.states.assign(members, {});
  for (int m = 0; m < members; ++m) {
    out.states[m].reserve(steps + 1);
    out.states[m].push_back(prev_states[m].front());
  }

  for (int j = 0; j < steps; ++j) {
    const double s = objective.shape(u_prev.grid.midpoint(j), u_prev.grid.horizon);
    const double sigma = sigma_nodes ? (*sigma_nodes)[j] : 0.0;
    RealVector u_new(channels);
    for (int l = 0; l < channels; ++l) {
      double raw = 0.0;
      for (int m = 0; m < members; ++m) {
        const Vector& psi = out.states[m][j];
        const Vector hpsi = system.controls[l] * psi;
        Complex pairing = costates[m][j].dot(hpsi);
        if (sigma_nodes) {
          const Vector dpsi = psi - prev_states[m][j];
          pairing += 0.5 * sigma * dpsi.dot(hpsi);
        }
        raw += pairing.imag();
      }
      const double cand = (s * raw + gam * u_prev.values(l, j)) / denom;
      u_new(l) = u_prev.clip(l, cand);
      out.max_du = std::max(out.max_du, std::abs(u_new(l) - u_prev.values(l, j)));
      out.control.values(l, j) = u_new(l);
    }
    const Matrix v = step_propagator(system, u_new, dt);
    for (int m = 0; m < members; ++m) out.states[m].push_back(v * out.states[m][j]);
  }
  return out;
}

void record_iteration(OptimizationTrace& trace, int k, const ObjectiveBreakdown& b,
                      double max_du, int adjustments) {
  IterationRecord rec;
  rec.k = k;
  rec.objective = b.total();
  rec.terminant = b.terminant;
  rec.fluence = b.fluence;
  rec.state_penalty = b.state_penalty;
  rec.max_control_change = max_du;
  rec.adjustments = adjustments;
  trace.iterations.push_back(rec);
}

OptimizationTrace run_ensemble_krotov(const EnsembleProblem& problem, const ControlField& u0,
                                      const KrotovOptions& opts, bool second_order) {
  problem.objective.validate();
  check_penalty_preconditions(problem.objective);
  if (!second_order) check_terminant_preconditions(problem.objective);
  if (opts.form == KrotovForm::lambda_u_form && !(problem.objective.lambda_u > 0.0))
    throw ConfigError("krotov: lambda_u form requires lambda_u > 0 in the objective");
  if (opts.form == KrotovForm::gamma_form && !(opts.gamma_u > 0.0))
    throw ConfigError("krotov: gamma form requires gamma_u > 0");
  if (second_order) opts.sigma.validate();

  OptimizationTrace trace;
  ControlField u_cur = u0;
  NodeStates states = propagate_members(problem.system, u_cur, problem.ensemble.initial);
  trace.cauchy_count += problem.ensemble.size();
  ObjectiveBreakdown cur = evaluate_ensemble(problem, u_cur, states);
  record_iteration(trace, 0, cur, 0.0, 0);

  SigmaSpec sigma = second_order ? opts.sigma : SigmaSpec{};
  double gamma_u = opts.gamma_u;
  trace.status = RunStatus::max_iters;

  for (int k = 1; k <= opts.max_iters; ++k) {
    const NodeStates costates = backward_costates(problem, u_cur, states);
    trace.cauchy_count += problem.ensemble.size();

    int adjustments = 0;
    bool accepted = false;
    SweepResult sweep;
    ObjectiveBreakdown next;
    while (true) {
      std::vector<double> sigma_nodes;
      const std::vector<double>* sigma_ptr = nullptr;
      if (sigma.kind == SigmaSpec::Kind::exponential) {
        sigma_nodes = sigma_exponential(u_cur.grid, sigma.alpha, sigma.beta, sigma.gamma);
        sigma_ptr = &sigma_nodes;
      }
      sweep = forward_update_sweep(problem.system, problem.objective, u_cur, states, costates,
                                   opts.form, gamma_u, sigma_ptr);
      trace.cauchy_count += problem.ensemble.size();
      next = evaluate_ensemble(problem, sweep.control, sweep.states);
      if (next.total() <= cur.total() + accept_slack(cur.total())) {
        accepted = true;
        break;
      }
      if (adjustments >= opts.max_adaptations) break;
      ++adjustments;
      if (sigma.kind == SigmaSpec::Kind::exponential) {
        sigma.alpha *= sigma.adapt_strength;
        sigma.beta *= sigma.adapt_strength;
        sigma.gamma *= sigma.adapt_gamma;
      } else if (opts.form == KrotovForm::gamma_form) {
        gamma_u *= 2.0;
      } else {
        break;  // nothing to adapt in the lambda_u form
      }
    }

    if (!accepted) {
      if (next.total() - cur.total() < opts.tol_dJ) {
        trace.status = RunStatus::converged;
        trace.note = "update step within tolerance";
      } else {
        trace.status = RunStatus::converged_with_warning;
        trace.note = "no improving control found after exhausting adaptation";
      }
      break;
    }

    const double dj = cur.total() - next.total();
    u_cur = sweep.control;
    states = sweep.states;
    cur = next;
    record_iteration(trace, k, cur, sweep.max_du, adjustments);

    if (sweep.max_du <= kFixedPointTol) {
      trace.status = RunStatus::converged;
      trace.note = "fixed point of the update map";
      break;
    }
    if (std::abs(dj) < opts.tol_dJ) {
      trace.status = RunStatus::converged;
      break;
    }
  }

  trace.final_control = u_cur;
  trace.final_state_trajectories.reserve(states.size());
  for (auto& s : states)
    trace.final_state_trajectories.push_back({u_cur.grid, std::move(s)});
  return trace;
}

}  // namespace

void SigmaSpec::validate() const {
  if (kind == Kind::exponential) {
    if (!(alpha < 0.0) || !(beta < 0.0) || !(gamma > 0.0))
      throw ConfigError("SigmaSpec: exponential form requires alpha, beta < 0 and gamma > 0");
  }
  if (kind == Kind::riccati) {
    if (!(riccati_delta > 0.0) || !(riccati_alpha > 0.0))
      throw ConfigError("SigmaSpec: riccati form requires positive diagonals");
  }
}

void SpectralConstraint::validate() const {
  for (const auto& c : components) {
    if (c.omega < 0.0 || !(c.sigma > 0.0) || !(c.weight >= 0.0))
      throw ConfigError("SpectralConstraint: need omega >= 0, sigma > 0, weight >= 0");
  }
  if (expansion_rank < 1) throw ConfigError("SpectralConstraint: expansion rank must be >= 1");
}

OptimizationTrace krotov1_schrodinger(const StateProblem& problem, const ControlField& u0,
                                      const KrotovOptions& opts) {
  EnsembleProblem ensemble_problem{problem.system, Ensemble{{problem.psi0}, {}, {}},
                                   problem.objective};
  return run_ensemble_krotov(ensemble_problem, u0, opts, /*second_order=*/false);
}

OptimizationTrace krotov2_ensemble(const EnsembleProblem& problem, const ControlField& u0,
                                   const KrotovOptions& opts) {
  if (opts.sigma.kind == SigmaSpec::Kind::riccati)
    throw ConfigError("krotov2_ensemble: the riccati Sigma belongs to the real-state method");
  return run_ensemble_krotov(problem, u0, opts, /*second_order=*/true);
}

OptimizationTrace krotov1_density(const DensityProblem& problem, const ControlField& u0,
                                  const KrotovOptions& opts) {
  problem.objective.validate();
  if (opts.form != KrotovForm::gamma_form || problem.objective.lambda_u != 0.0)
    throw ConfigError("krotov1_density: stated setting is lambda_u = 0 with the Gamma form");
  if (!(opts.gamma_u > 0.0)) throw ConfigError("krotov1_density: gamma_u must be > 0");
  const auto* term = std::get_if<DensityOverlapTerminant>(&problem.objective.terminant);
  if (!term) throw ConfigError("krotov1_density: requires a density_overlap terminant");

  const ControlSystem& system = problem.system;
  const int steps = u0.samples();
  const double dt = u0.grid.dt();

  auto propagate_nodes = [&](const ControlField& u) {
    return propagate_density(system, u, DensityMatrix(problem.rho0)).samples;
  };
  auto evaluate = [&](const ControlField& u, const std::vector<Matrix>& nodes) {
    DensityTrajectory traj{u.grid, nodes};
    return objective_from_trajectory(problem, u, traj);
  };

  OptimizationTrace trace;
  ControlField u_cur = u0;
  std::vector<Matrix> rho = propagate_nodes(u_cur);
  ++trace.cauchy_count;
  ObjectiveBreakdown cur = evaluate(u_cur, rho);
  record_iteration(trace, 0, cur, 0.0, 0);

  double gamma_u = opts.gamma_u;
  trace.status = RunStatus::max_iters;

  for (int k = 1; k <= opts.max_iters; ++k) {
    // Conjugate sweep with terminal value rho_target and source -lambda D.
    std::vector<Matrix> sigma;
    if (problem.objective.state_penalty_operator && problem.objective.lambda_state != 0.0) {
      std::vector<Matrix> source(steps + 1,
                                 -problem.objective.lambda_state *
                                     (*problem.objective.state_penalty_operator));
      sigma = propagate_costate_density(system, u_cur, term->rho_target, &source).samples;
    } else {
      sigma = propagate_costate_density(system, u_cur, term->rho_target).samples;
    }
    ++trace.cauchy_count;

    int adjustments = 0;
    bool accepted = false;
    ControlField u_new = u_cur;
    std::vector<Matrix> rho_new;
    ObjectiveBreakdown next;
    double max_du = 0.0;
    while (true) {
      u_new = u_cur;
      rho_new.assign(1, problem.rho0);
      rho_new.reserve(steps + 1);
      max_du = 0.0;
      for (int j = 0; j < steps; ++j) {
        const double s = problem.objective.shape(u_cur.grid.midpoint(j), u_cur.grid.horizon);
        RealVector uj(u_cur.channels());
        for (int l = 0; l < u_cur.channels(); ++l) {
          const Matrix& hl = system.controls[l];
          const Complex tr = (sigma[j] * (hl * rho_new[j] - rho_new[j] * hl)).trace();
          const double cand = u_cur.values(l, j) + s * tr.imag() / gamma_u;
          uj(l) = u_cur.clip(l, cand);
          max_du = std::max(max_du, std::abs(uj(l) - u_cur.values(l, j)));
          u_new.values(l, j) = uj(l);
        }
        const Matrix v = step_propagator(system, uj, dt);
        rho_new.push_back(v * rho_new[j] * v.adjoint());
      }
      ++trace.cauchy_count;
      next = evaluate(u_new, rho_new);
      if (next.total() <= cur.total() + accept_slack(cur.total())) {
        accepted = true;
        break;
      }
      if (adjustments >= opts.max_adaptations) break;
      ++adjustments;
      gamma_u *= 2.0;
    }

    if (!accepted) {
      if (next.total() - cur.total() < opts.tol_dJ) {
        trace.status = RunStatus::converged;
        trace.note = "update step within tolerance";
      } else {
        trace.status = RunStatus::converged_with_warning;
        trace.note = "no improving control found after exhausting adaptation";
      }
      break;
    }

    const double dj = cur.total() - next.total();
    u_cur = u_new;
    rho = rho_new;
    cur = next;
    record_iteration(trace, k, cur, max_du, adjustments);
    if (max_du <= kFixedPointTol) {
      trace.status = RunStatus::converged;
      trace.note = "fixed point of the update map";
      break;
    }
    if (std::abs(dj) < opts.tol_dJ) {
      trace.status = RunStatus::converged;
      break;
    }
  }

  trace.final_control = u_cur;
  trace.final_density_trajectory = DensityTrajectory{u_cur.grid, std::move(rho)};
  return trace;
}

std::vector<double> sigma_exponential(const TimeGrid& grid, double alpha, double beta,
                                      double gamma) {
  std::vector<double> out(grid.intervals + 1);
  for (int j = 0; j <= grid.intervals; ++j)
    out[j] = alpha * (std::exp(gamma * (grid.horizon - grid.node(j))) - 1.0) + beta;
  return out;
}

std::vector<RealMatrix> sigma_riccati(const RealBilinearSystem& system,
                                      const ControlField& control, const RealMatrix& terminant,
                                      double delta, double alpha_terminal,
                                      int substeps_per_interval) {
  const int n = system.dim();
  const int steps = control.samples();
  const double dt = control.grid.dt();
  const RealMatrix delta_eye = delta * RealMatrix::Identity(n, n);

  std::vector<RealMatrix> out(steps + 1);
  out[steps] = 2.0 * terminant - alpha_terminal * RealMatrix::Identity(n, n);

  for (int j = steps - 1; j >= 0; --j) {
    RealMatrix a = system.a;
    for (int l = 0; l < system.num_controls(); ++l) a += control.values(l, j) * system.b[l];
    auto rhs = [&](const RealMatrix& s) -> RealMatrix {
      return -(s * a + a.transpose() * s) + delta_eye;
    };
    RealMatrix s = out[j + 1];
    const double h = -dt / substeps_per_interval;  // integrate right to left
    for (int sub = 0; sub < substeps_per_interval; ++sub) {
      const RealMatrix k1 = rhs(s);
      const RealMatrix k2 = rhs(s + 0.5 * h * k1);
      const RealMatrix k3 = rhs(s + 0.5 * h * k2);
      const RealMatrix k4 = rhs(s + h * k3);
      s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (s.cwiseAbs().maxCoeff() > 1e12)
      throw NumericError("sigma_riccati: blow-up; re-select delta/alpha");
    out[j] = s;
  }
  return out;
}

OptimizationTrace krotov_realstate(const RealStateProblem& problem, const ControlField& u0,
                                   const KrotovOptions& opts) {
  const RealBilinearSystem& system = problem.system;
  const int n = system.dim();
  const int steps = u0.samples();
  const int channels = u0.channels();
  const double dt = u0.grid.dt();
  const double lam = problem.lambda_u;

  if (channels != system.num_controls())
    throw ConfigError("krotov_realstate: control channel count mismatch");
  if (!((problem.terminant_matrix - problem.terminant_matrix.transpose()).cwiseAbs().maxCoeff() <
        1e-10))
    throw ConfigError("krotov_realstate: terminant matrix must be symmetric");
  {
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(problem.terminant_matrix,
                                                 Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10)
      throw ConfigError("krotov_realstate: terminant matrix must be positive semidefinite");
  }
  const bool switching = (lam == 0.0);
  if (switching) {
    if (channels != 1)
      throw ConfigError("krotov_realstate: the switching form needs a scalar control");
    if (!std::isfinite(u0.bounds[0].lo) || !std::isfinite(u0.bounds[0].hi))
      throw ConfigError("krotov_realstate: the switching form needs a finite box");
    if (opts.sigma.kind != SigmaSpec::Kind::zero)
      throw ConfigError("krotov_realstate: the switching form is first order (Sigma = 0)");
  }

  auto step_matrix = [&](const RealVector& u) {
    RealMatrix a = system.a;
    for (int l = 0; l < channels; ++l) a += u(l) * system.b[l];
    return (dt * a).exp().eval();
  };
  auto propagate_nodes = [&](const ControlField& u) {
    std::vector<RealVector> y(steps + 1);
    y[0] = problem.y0;
    for (int j = 0; j < steps; ++j) y[j + 1] = step_matrix(u.at(j)) * y[j];
    return y;
  };
  auto evaluate = [&](const ControlField& u, const std::vector<RealVector>& y) {
    ObjectiveBreakdown b;
    b.terminant = -(y.back().dot(problem.terminant_matrix * y.back()));
    double acc = 0.0;
    for (int j = 0; j < steps; ++j) acc += u.values.col(j).matrix().squaredNorm();
    b.fluence = lam * dt * acc;
    return b;
  };

  OptimizationTrace trace;
  ControlField u_cur = u0;
  std::vector<RealVector> y = propagate_nodes(u_cur);
  ++trace.cauchy_count;
  ObjectiveBreakdown cur = evaluate(u_cur, y);
  record_iteration(trace, 0, cur, 0.0, 0);

  SigmaSpec sigma = opts.sigma;
  trace.status = RunStatus::max_iters;
  int singular_fallbacks = 0;

  for (int k = 1; k <= opts.max_iters; ++k) {
    // Conjugate sweep (3.33): dp/dt = -(A + u B)^T p, p(T) = 2 M y(T).
    std::vector<RealVector> p(steps + 1);
    p[steps] = 2.0 * problem.terminant_matrix * y[steps];
    for (int j = steps - 1; j >= 0; --j) {
      RealMatrix a = system.a;
      for (int l = 0; l < channels; ++l) a += u_cur.values(l, j) * system.b[l];
      p[j] = ((dt * a.transpose()).exp() * p[j + 1]).eval();
    }
    ++trace.cauchy_count;

    int adjustments = 0;
    bool accepted = false;
    ControlField u_new = u_cur;
    std::vector<RealVector> y_new;
    ObjectiveBreakdown next;
    double max_du = 0.0;
    while (true) {
      std::vector<double> sigma_scalar;
      std::vector<RealMatrix> sigma_matrix;
      if (sigma.kind == SigmaSpec::Kind::exponential)
        sigma_scalar = sigma_exponential(u_cur.grid, sigma.alpha, sigma.beta, sigma.gamma);
      else if (sigma.kind == SigmaSpec::Kind::riccati)
        sigma_matrix = sigma_riccati(system, u_cur, problem.terminant_matrix,
                                     sigma.riccati_delta, sigma.riccati_alpha);

      u_new = u_cur;
      y_new.assign(1, problem.y0);
      y_new.reserve(steps + 1);
      max_du = 0.0;
      for (int j = 0; j < steps; ++j) {
        RealVector q = p[j];
        if (sigma.kind == SigmaSpec::Kind::exponential)
          q += sigma_scalar[j] * (y_new[j] - y[j]);
        else if (sigma.kind == SigmaSpec::Kind::riccati)
          q += sigma_matrix[j] * (y_new[j] - y[j]);

        RealVector uj(channels);
        if (!switching) {
          for (int l = 0; l < channels; ++l) {
            const double cand = q.dot(system.b[l] * y_new[j]) / (2.0 * lam);
            uj(l) = u_cur.clip(l, cand);
          }
        } else {
          const RealMatrix& b = system.b[0];
          const RealVector by = b * y_new[j];
          const double g = p[j].dot(by);
          const double scale = 1.0 + p[j].norm() * by.norm();
          if (std::abs(g) > 1e-12 * scale) {
            uj(0) = (g > 0.0) ? u_cur.bounds[0].hi : u_cur.bounds[0].lo;
          } else {
            const double den = p[j].dot(b * by);
            if (std::abs(den) < 1e-12) {
              uj(0) = u_cur.values(0, j);
              ++singular_fallbacks;
            } else {
              const double num = p[j].dot((system.a * b - b * system.a) * y_new[j]);
              uj(0) = u_cur.clip(0, u_cur.values(0, j) + num / den);
            }
          }
        }
        for (int l = 0; l < channels; ++l) {
          max_du = std::max(max_du, std::abs(uj(l) - u_cur.values(l, j)));
          u_new.values(l, j) = uj(l);
        }
        y_new.push_back(step_matrix(uj) * y_new[j]);
      }
      ++trace.cauchy_count;
      next = evaluate(u_new, y_new);
      if (next.total() <= cur.total() + accept_slack(cur.total())) {
        accepted = true;
        break;
      }
      if (adjustments >= opts.max_adaptations ||
          sigma.kind == SigmaSpec::Kind::zero) break;
      ++adjustments;
      if (sigma.kind == SigmaSpec::Kind::exponential) {
        sigma.alpha *= sigma.adapt_strength;
        sigma.beta *= sigma.adapt_strength;
        sigma.gamma *= sigma.adapt_gamma;
      } else {
        sigma.riccati_delta *= sigma.adapt_strength;
        sigma.riccati_alpha *= sigma.adapt_strength;
      }
    }

    if (!accepted) {
      if (next.total() - cur.total() < opts.tol_dJ) {
        trace.status = RunStatus::converged;
        trace.note = "update step within tolerance";
      } else {
        trace.status = RunStatus::converged_with_warning;
        trace.note = "no improving control found after exhausting adaptation";
      }
      break;
    }
    const double dj = cur.total() - next.total();
    u_cur = u_new;
    y = y_new;
    cur = next;
    record_iteration(trace, k, cur, max_du, adjustments);
    if (max_du <= kFixedPointTol) {
      trace.status = RunStatus::converged;
      trace.note = "fixed point of the update map";
      break;
    }
    if (std::abs(dj) < opts.tol_dJ) {
      trace.status = RunStatus::converged;
      break;
    }
  }

  if (singular_fallbacks > 0)
    trace.note += (trace.note.empty() ? "" : "; ") +
                  std::to_string(singular_fallbacks) + " singular-arc fallbacks";
  trace.final_control = u_cur;
  return trace;
}

namespace {

// Separable expansion of the Gaussian-cosine kernel around the interval
// midpoint: one factor pair per (band, trig, Taylor order).
struct SeparableKernel {
  std::vector<RealVector> phi;  // includes -c_m S(t)
  std::vector<RealVector> eta;
};

SeparableKernel expand_kernel(const SpectralConstraint& kernel, const TimeGrid& grid,
                              const ShapeFn& shape, double gamma_u, int rank) {
  const int steps = grid.intervals;
  const double t_mid = 0.5 * grid.horizon;
  SeparableKernel out;
  for (const auto& band : kernel.components) {
    if (band.weight == 0.0) continue;
    const double c = band.weight * std::sqrt(2.0 * M_PI * band.sigma * band.sigma) /
                     (2.0 * M_PI * gamma_u);
    for (int r = 0; r < rank; ++r) {
      double log_coeff = 0.0;  // log of sigma^{2r}/r! split evenly between factors
      for (int q = 1; q <= r; ++q) log_coeff += std::log(band.sigma * band.sigma / q);
      const double half_coeff = std::exp(0.5 * log_coeff);
      for (int trig = 0; trig < 2; ++trig) {
        RealVector phi(steps), eta(steps);
        for (int j = 0; j < steps; ++j) {
          const double t = grid.midpoint(j);
          const double tc = t - t_mid;
          const double gauss = std::exp(-0.5 * band.sigma * band.sigma * tc * tc);
          const double osc = trig == 0 ? std::cos(band.omega * tc) : std::sin(band.omega * tc);
          const double base = osc * gauss * std::pow(tc, r) * half_coeff;
          eta(j) = base;
          phi(j) = -c * shape(t, grid.horizon) * base;
        }
        out.phi.push_back(std::move(phi));
        out.eta.push_back(std::move(eta));
      }
    }
  }
  return out;
}

double exact_kernel(const SpectralConstraint& kernel, const ShapeFn& shape, double gamma_u,
                    double horizon, double t, double tp) {
  double acc = 0.0;
  for (const auto& band : kernel.components) {
    if (band.weight == 0.0) continue;
    const double c = band.weight * std::sqrt(2.0 * M_PI * band.sigma * band.sigma) /
                     (2.0 * M_PI * gamma_u);
    const double d = t - tp;
    acc -= c * shape(t, horizon) * std::cos(band.omega * d) *
           std::exp(-0.5 * band.sigma * band.sigma * d * d);
  }
  return acc;
}

RealVector solve_with_rank(const RealVector& i_hat, const SpectralConstraint& kernel,
                           const TimeGrid& grid, const ShapeFn& shape, double gamma_u,
                           int rank) {
  const double dt = grid.dt();
  const SeparableKernel sep = expand_kernel(kernel, grid, shape, gamma_u, rank);
  const int terms = static_cast<int>(sep.phi.size());
  if (terms == 0) return i_hat;

  RealVector b(terms);
  RealMatrix g(terms, terms);
  for (int i = 0; i < terms; ++i) {
    b(i) = dt * sep.eta[i].dot(i_hat);
    for (int k2 = 0; k2 < terms; ++k2) g(i, k2) = dt * sep.eta[i].dot(sep.phi[k2]);
  }
  const RealMatrix lhs = RealMatrix::Identity(terms, terms) - g;
  {
    Eigen::JacobiSVD<RealMatrix> svd(lhs);
    const auto& s = svd.singularValues();
    if (s(s.size() - 1) <= 0.0 || s(0) / s(s.size() - 1) > 1e12)
      throw NumericError("fredholm_degenerate_solve: ill-conditioned degenerate-kernel system");
  }
  const RealVector z = lhs.partialPivLu().solve(b);

  RealVector du = i_hat;
  for (int i = 0; i < terms; ++i) du += z(i) * sep.phi[i];
  return du;
}

double fredholm_residual(const RealVector& du, const RealVector& i_hat,
                         const SpectralConstraint& kernel, const TimeGrid& grid,
                         const ShapeFn& shape, double gamma_u) {
  const int steps = grid.intervals;
  const double dt = grid.dt();
  double worst = 0.0;
  for (int j = 0; j < steps; ++j) {
    double integral = 0.0;
    for (int jp = 0; jp < steps; ++jp)
      integral += exact_kernel(kernel, shape, gamma_u, grid.horizon, grid.midpoint(j),
                               grid.midpoint(jp)) *
                  du(jp);
    worst = std::max(worst, std::abs(du(j) - i_hat(j) - dt * integral));
  }
  return worst;
}

}  // namespace

RealVector fredholm_degenerate_solve(const RealVector& i_hat, const SpectralConstraint& kernel,
                                     const TimeGrid& grid, const ShapeFn& shape,
                                     double gamma_u) {
  kernel.validate();
  if (i_hat.size() != grid.intervals)
    throw std::invalid_argument("fredholm_degenerate_solve: series not on the control grid");

  bool any = false;
  for (const auto& c : kernel.components) any = any || c.weight > 0.0;
  if (!any) return i_hat;

  int rank = kernel.expansion_rank;
  while (true) {
    RealVector du = solve_with_rank(i_hat, kernel, grid, shape, gamma_u, rank);
    if (fredholm_residual(du, i_hat, kernel, grid, shape, gamma_u) <= 1e-8) return du;
    if (rank >= 64)
      throw NumericError("fredholm_degenerate_solve: residual above 1e-8 at maximum rank");
    rank += 8;
  }
}

double band_power(const RealVector& series, double horizon,
                  const SpectralConstraint& constraint) {
  const int n = static_cast<int>(series.size());
  Vector z = series.cast<Complex>();
  dft(z);
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    const double omega = 2.0 * M_PI * std::min(k, n - k) / horizon;
    bool in_band = false;
    for (const auto& band : constraint.components)
      in_band = in_band || std::abs(omega - band.omega) <= 2.0 * band.sigma;
    if (in_band) acc += std::norm(z(k));
  }
  return acc;
}

OptimizationTrace krotov_spectral(const EnsembleProblem& problem, const ControlField& u0,
                                  const SpectralConstraint& constraint, double gamma_u,
                                  const KrotovOptions& opts) {
  problem.objective.validate();
  constraint.validate();
  if (!(gamma_u > 0.0)) throw ConfigError("krotov_spectral: gamma_u must be > 0");
  if (u0.channels() != 1) throw ConfigError("krotov_spectral: scalar control expected");
  if (std::isfinite(u0.bounds[0].lo) || std::isfinite(u0.bounds[0].hi))
    throw ConfigError("krotov_spectral: stated setting is Q = R (no box)");
  if (problem.objective.state_penalty_operator)
    throw ConfigError("krotov_spectral: stated setting is lambda_psi = 0");

  OptimizationTrace trace;
  ControlField u_cur = u0;
  NodeStates states = propagate_members(problem.system, u_cur, problem.ensemble.initial);
  trace.cauchy_count += problem.ensemble.size();
  ObjectiveBreakdown cur = evaluate_ensemble(problem, u_cur, states);
  record_iteration(trace, 0, cur, 0.0, 0);
  trace.band_power.push_back(0.0);
  trace.status = RunStatus::max_iters;

  KrotovOptions unconstrained = opts;
  unconstrained.form = KrotovForm::gamma_form;
  unconstrained.gamma_u = gamma_u;
  unconstrained.sigma = SigmaSpec{};  // step 1: Sigma == 0

  for (int k = 1; k <= opts.max_iters; ++k) {
    const NodeStates costates = backward_costates(problem, u_cur, states);
    trace.cauchy_count += problem.ensemble.size();
    const SweepResult unconstrained_sweep =
        forward_update_sweep(problem.system, problem.objective, u_cur, states, costates,
                             KrotovForm::gamma_form, gamma_u, nullptr);
    trace.cauchy_count += problem.ensemble.size();

    const RealVector i_hat =
        (unconstrained_sweep.control.values.row(0) - u_cur.values.row(0)).matrix().transpose();
    RealVector du = fredholm_degenerate_solve(i_hat, constraint, u_cur.grid,
                                              problem.objective.shape, gamma_u);

    int adjustments = 0;
    bool accepted = false;
    ControlField u_new = u_cur;
    NodeStates states_new;
    ObjectiveBreakdown next;
    while (true) {
      u_new.values.row(0) = u_cur.values.row(0) + du.transpose().array();
      states_new = propagate_members(problem.system, u_new, problem.ensemble.initial);
      trace.cauchy_count += problem.ensemble.size();
      next = evaluate_ensemble(problem, u_new, states_new);
      if (next.total() <= cur.total() + accept_slack(cur.total())) {
        accepted = true;
        break;
      }
      if (adjustments >= opts.max_adaptations) break;
      ++adjustments;
      du *= 0.5;
    }
    if (!accepted) {
      if (next.total() - cur.total() < opts.tol_dJ) {
        trace.status = RunStatus::converged;
        trace.note = "update step within tolerance";
      } else {
        trace.status = RunStatus::converged_with_warning;
        trace.note = "no improving spectral step after damping";
      }
      break;
    }

    const double dj = cur.total() - next.total();
    u_cur = u_new;
    states = states_new;
    cur = next;
    record_iteration(trace, k, cur, du.cwiseAbs().maxCoeff(), adjustments);
    trace.band_power.push_back(band_power(du, u_cur.grid.horizon, constraint));
    if (du.cwiseAbs().maxCoeff() <= kFixedPointTol) {
      trace.status = RunStatus::converged;
      trace.note = "fixed point of the update map";
      break;
    }
    if (std::abs(dj) < opts.tol_dJ) {
      trace.status = RunStatus::converged;
      break;
    }
  }

  trace.final_control = u_cur;
  for (auto& s : states) trace.final_state_trajectories.push_back({u_cur.grid, std::move(s)});
  return trace;
}

OptimizationTrace krotov_spectral(const StateProblem& problem, const ControlField& u0,
                                  const SpectralConstraint& constraint, double gamma_u,
                                  const KrotovOptions& opts) {
  EnsembleProblem ensemble_problem{problem.system, Ensemble{{problem.psi0}, {}, {}},
                                   problem.objective};
  return krotov_spectral(ensemble_problem, u0, constraint, gamma_u, opts);
}

}  // namespace qoc
