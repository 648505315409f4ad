#include "qoc/alt_methods.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

#include "qoc/fft.hpp"

namespace qoc {

namespace {

constexpr double kFixedPointTol = 1e-12;

double accept_slack(double j) { return 1e-13 * (1.0 + std::abs(j)); }

void record(OptimizationTrace& trace, int k, const ObjectiveBreakdown& b, double max_du,
            int adjustments = 0) {
  trace.iterations.push_back(
      {k, b.total(), b.terminant, b.fluence, b.state_penalty, max_du, adjustments});
}

// ---------------------------------------------------------------------------
// Zhu-Rabitz / Maday-Turinici (scalar control, O >= 0, lambda_u > 0, S == 1).

void check_mt_class(const StateProblem& problem, const ControlField& u0) {
  if (problem.system.num_controls() != 1 || u0.channels() != 1)
    throw ConfigError("method requires a scalar control");
  if (!(problem.objective.lambda_u > 0.0))
    throw ConfigError("method requires lambda_u > 0");
  if (problem.objective.shape.kind != ShapeFn::Kind::constant)
    throw ConfigError("method is stated for S(t) == 1");
  if (problem.objective.state_penalty_operator && problem.objective.lambda_state != 0.0)
    throw ConfigError("method is stated for lambda_psi = 0");
  if (std::isfinite(u0.bounds[0].lo) || std::isfinite(u0.bounds[0].hi))
    throw ConfigError("method is stated for Q = R (no box)");
  if (const auto* t = std::get_if<ObservableTerminant>(&problem.objective.terminant)) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(t->observable, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10)
      throw ConfigError("method requires O >= 0");
    return;
  }
  if (const auto* t = std::get_if<OverlapTerminant>(&problem.objective.terminant)) {
    if (t->variant == OverlapVariant::squared) return;
  }
  throw ConfigError("method requires an O >= 0 observable (or squared-overlap) terminant");
}

// chi(T) = O psi(T); shares the terminant-gradient helper used by Krotov so
// the equivalence between the methods is exact node by node.
Vector mt_terminal(const ObjectiveSpec& objective, const Vector& psiT) {
  Ensemble single{{psiT}, {}, {}};
  return -ensemble_terminant_gradient(objective, single, {psiT})[0];
}

double mt_pair(const Vector& chi, const Matrix& h1, const Vector& psi, double lambda_u) {
  return chi.dot(h1 * psi).imag() / lambda_u;
}

std::vector<Vector> state_nodes(const ControlSystem& system, const ControlField& u,
                                const Vector& psi0) {
  return propagate_state(system, u, QuantumState(psi0)).samples;
}

// Backward sweep with the eta-mixed self-consistent control: at node j the
// control is (1 - eta) u_base_j + eta * Im<chi(t_{j+1}), H1 psi_j> / lambda_u.
std::vector<Vector> mt_backward(const ControlSystem& system, const ControlField& u_base,
                                const std::vector<Vector>& psi_nodes, const Vector& chiT,
                                double eta, double lambda_u) {
  const int steps = u_base.samples();
  const double dt = u_base.grid.dt();
  const Matrix& h1 = system.controls[0];
  std::vector<Vector> chi(steps + 1);
  chi[steps] = chiT;
  for (int j = steps - 1; j >= 0; --j) {
    const double uj = (1.0 - eta) * u_base.values(0, j) +
                      eta * mt_pair(chi[j + 1], h1, psi_nodes[j], lambda_u);
    RealVector uv(1);
    uv(0) = uj;
    chi[j] = step_propagator(system, uv, dt).adjoint() * chi[j + 1];
  }
  return chi;
}

struct MtForward {
  ControlField control;
  std::vector<Vector> psi;
  double max_du = 0.0;
};

MtForward mt_forward(const ControlSystem& system, const ControlField& u_prev,
                     const std::vector<Vector>& chi, const Vector& psi0, double delta,
                     double lambda_u) {
  const int steps = u_prev.samples();
  const double dt = u_prev.grid.dt();
  const Matrix& h1 = system.controls[0];
  MtForward out;
  out.control = u_prev;
  out.psi.reserve(steps + 1);
  out.psi.push_back(psi0);
  for (int j = 0; j < steps; ++j) {
    const double uj = (1.0 - delta) * u_prev.values(0, j) +
                      delta * mt_pair(chi[j], h1, out.psi[j], lambda_u);
    out.control.values(0, j) = uj;
    out.max_du = std::max(out.max_du, std::abs(uj - u_prev.values(0, j)));
    RealVector uv(1);
    uv(0) = uj;
    out.psi.push_back(step_propagator(system, uv, dt) * out.psi[j]);
  }
  return out;
}

ObjectiveBreakdown mt_objective(const StateProblem& problem, const ControlField& u,
                                const std::vector<Vector>& psi) {
  StateTrajectory traj{u.grid, psi};
  return objective_from_trajectory(problem, u, traj);
}

}  // namespace

void MadayTuriniciParams::validate() const {
  if (delta < 0.0 || delta > 2.0 || eta < 0.0 || eta > 2.0)
    throw ConfigError("MadayTuriniciParams: delta and eta must lie in [0, 2]");
}

OptimizationTrace zhu_rabitz(const StateProblem& problem, const ControlField& u0,
                             int max_iters, double tol_dJ) {
  check_mt_class(problem, u0);
  const double lambda_u = problem.objective.lambda_u;

  OptimizationTrace trace;
  ControlField u_cur = u0;
  std::vector<Vector> psi = state_nodes(problem.system, u_cur, problem.psi0);
  ++trace.cauchy_count;
  ObjectiveBreakdown cur = mt_objective(problem, u_cur, psi);
  record(trace, 0, cur, 0.0);
  trace.status = RunStatus::max_iters;

  for (int k = 1; k <= max_iters; ++k) {
    const std::vector<Vector> chi =
        mt_backward(problem.system, u_cur, psi, mt_terminal(problem.objective, psi.back()),
                    /*eta=*/1.0, lambda_u);
    ++trace.cauchy_count;
    const MtForward fwd =
        mt_forward(problem.system, u_cur, chi, problem.psi0, /*delta=*/1.0, lambda_u);
    ++trace.cauchy_count;
    const ObjectiveBreakdown next = mt_objective(problem, fwd.control, fwd.psi);
    if (next.total() > cur.total() + accept_slack(cur.total())) {
      if (next.total() - cur.total() < tol_dJ) {
        trace.status = RunStatus::converged;
        trace.note = "update step within tolerance";
      } else {
        trace.status = RunStatus::converged_with_warning;
        trace.note = "iteration did not improve";
      }
      break;
    }
    const double dj = cur.total() - next.total();
    u_cur = fwd.control;
    psi = fwd.psi;
    cur = next;
    record(trace, k, cur, fwd.max_du);
    if (fwd.max_du <= kFixedPointTol) {
      trace.status = RunStatus::converged;
      trace.note = "fixed point of the update map";
      break;
    }
    if (std::abs(dj) < tol_dJ) {
      trace.status = RunStatus::converged;
      break;
    }
  }
  trace.final_control = u_cur;
  trace.final_state_trajectories.push_back({u_cur.grid, std::move(psi)});
  return trace;
}

OptimizationTrace maday_turinici(const StateProblem& problem, const ControlField& u0,
                                 MadayTuriniciParams params, int max_iters, double tol_dJ) {
  params.validate();
  check_mt_class(problem, u0);
  const double lambda_u = problem.objective.lambda_u;

  OptimizationTrace trace;
  ControlField u_cur = u0;
  std::vector<Vector> psi = state_nodes(problem.system, u_cur, problem.psi0);
  ++trace.cauchy_count;
  ObjectiveBreakdown cur = mt_objective(problem, u_cur, psi);
  record(trace, 0, cur, 0.0);

  std::vector<Vector> chi =
      mt_backward(problem.system, u_cur, psi, mt_terminal(problem.objective, psi.back()),
                  params.eta, lambda_u);
  ++trace.cauchy_count;
  trace.status = RunStatus::max_iters;

  for (int k = 1; k <= max_iters; ++k) {
    const MtForward fwd =
        mt_forward(problem.system, u_cur, chi, problem.psi0, params.delta, lambda_u);
    ++trace.cauchy_count;
    const ObjectiveBreakdown next = mt_objective(problem, fwd.control, fwd.psi);
    if (next.total() > cur.total() + accept_slack(cur.total())) {
      if (next.total() - cur.total() < tol_dJ) {
        trace.status = RunStatus::converged;
        trace.note = "update step within tolerance";
      } else {
        trace.status = RunStatus::converged_with_warning;
        trace.note = "iteration did not improve";
      }
      break;
    }
    const double dj = cur.total() - next.total();
    u_cur = fwd.control;
    psi = fwd.psi;
    cur = next;
    record(trace, k, cur, fwd.max_du);
    if (fwd.max_du <= kFixedPointTol) {
      trace.status = RunStatus::converged;
      trace.note = "fixed point of the update map";
      break;
    }
    if (std::abs(dj) < tol_dJ) {
      trace.status = RunStatus::converged;
      break;
    }
    chi = mt_backward(problem.system, u_cur, psi, mt_terminal(problem.objective, psi.back()),
                      params.eta, lambda_u);
    ++trace.cauchy_count;
  }
  trace.final_control = u_cur;
  trace.final_state_trajectories.push_back({u_cur.grid, std::move(psi)});
  return trace;
}

OptimizationTrace maday_turinici_unitary(const UnitaryRegularizedProblem& problem,
                                         const ControlField& u0, MadayTuriniciParams params,
                                         int max_iters, double tol_dJ) {
  params.validate();
  if (u0.channels() != problem.system.num_controls())
    throw ConfigError("maday_turinici_unitary: channel count mismatch");
  if (!(problem.lambda_u > 0.0))
    throw ConfigError("maday_turinici_unitary: lambda_u must be > 0");
  if (!is_hermitian(problem.reg, 1e-10) ||
      Eigen::SelfAdjointEigenSolver<Matrix>(problem.reg, Eigen::EigenvaluesOnly)
              .eigenvalues()
              .minCoeff() < -1e-10)
    throw ConfigError("maday_turinici_unitary: M must be symmetric positive semidefinite");
  for (const auto& b : u0.bounds)
    if (std::isfinite(b.lo) || std::isfinite(b.hi))
      throw ConfigError("maday_turinici_unitary: stated setting is Q = R^m");

  const ControlSystem& system = problem.system;
  const int steps = u0.samples();
  const int channels = u0.channels();
  const double dt = u0.grid.dt();
  const double lambda_u = problem.lambda_u;

  auto unitary_nodes = [&](const ControlField& u) {
    return propagate_unitary(system, u).samples;
  };
  auto pair = [&](const Matrix& bmat, int l, const Matrix& u_node) {
    return (bmat.adjoint() * (system.controls[l] * u_node)).trace().imag() / lambda_u;
  };
  // Regularized objective: F_O + fluence - Tr(U^dag M U); the M term is
  // reported in the state_penalty slot of the breakdown.
  auto evaluate = [&](const ControlField& u, const Matrix& uT) {
    ObjectiveBreakdown b;
    b.terminant = terminant_unitary_observable(uT, problem.observable, problem.rho0);
    double acc = 0.0;
    for (int j = 0; j < steps; ++j) acc += u.values.col(j).matrix().squaredNorm();
    b.fluence = lambda_u * dt * acc;
    b.state_penalty = -(uT.adjoint() * problem.reg * uT).trace().real();
    return b;
  };
  auto terminal_costate = [&](const Matrix& uT) {
    return (problem.observable * uT * problem.rho0 + uT * problem.reg).eval();
  };
  auto backward = [&](const ControlField& u_base, const std::vector<Matrix>& u_nodes,
                      double eta) {
    std::vector<Matrix> bmat(steps + 1);
    bmat[steps] = terminal_costate(u_nodes[steps]);
    for (int j = steps - 1; j >= 0; --j) {
      RealVector uv(channels);
      for (int l = 0; l < channels; ++l)
        uv(l) = (1.0 - eta) * u_base.values(l, j) + eta * pair(bmat[j + 1], l, u_nodes[j]);
      bmat[j] = step_propagator(system, uv, dt).adjoint() * bmat[j + 1];
    }
    return bmat;
  };

  OptimizationTrace trace;
  ControlField u_cur = u0;
  std::vector<Matrix> u_nodes = unitary_nodes(u_cur);
  ++trace.cauchy_count;
  ObjectiveBreakdown cur = evaluate(u_cur, u_nodes.back());
  record(trace, 0, cur, 0.0);
  std::vector<Matrix> bmat = backward(u_cur, u_nodes, params.eta);
  ++trace.cauchy_count;
  trace.status = RunStatus::max_iters;

  for (int k = 1; k <= max_iters; ++k) {
    ControlField u_new = u_cur;
    std::vector<Matrix> nodes_new(steps + 1);
    nodes_new[0] = Matrix::Identity(system.dim(), system.dim());
    double max_du = 0.0;
    for (int j = 0; j < steps; ++j) {
      RealVector uv(channels);
      for (int l = 0; l < channels; ++l) {
        uv(l) = (1.0 - params.delta) * u_cur.values(l, j) +
                params.delta * pair(bmat[j], l, nodes_new[j]);
        max_du = std::max(max_du, std::abs(uv(l) - u_cur.values(l, j)));
        u_new.values(l, j) = uv(l);
      }
      nodes_new[j + 1] = step_propagator(system, uv, dt) * nodes_new[j];
    }
    ++trace.cauchy_count;
    const ObjectiveBreakdown next = evaluate(u_new, nodes_new.back());
    if (next.total() > cur.total() + accept_slack(cur.total())) {
      if (next.total() - cur.total() < tol_dJ) {
        trace.status = RunStatus::converged;
        trace.note = "update step within tolerance";
      } else {
        trace.status = RunStatus::converged_with_warning;
        trace.note = "iteration did not improve";
      }
      break;
    }
    const double dj = cur.total() - next.total();
    u_cur = u_new;
    u_nodes = nodes_new;
    cur = next;
    record(trace, k, cur, max_du);
    if (max_du <= kFixedPointTol) {
      trace.status = RunStatus::converged;
      trace.note = "fixed point of the update map";
      break;
    }
    if (std::abs(dj) < tol_dJ) {
      trace.status = RunStatus::converged;
      break;
    }
    bmat = backward(u_cur, u_nodes, params.eta);
    ++trace.cauchy_count;
  }
  trace.final_control = u_cur;
  return trace;
}

// ---------------------------------------------------------------------------
// GRAPE: exact gradient of the discretized objective plus two optimizers.

namespace {

using NodeStates = std::vector<std::vector<Vector>>;

NodeStates forward_members(const ControlSystem& system, const ControlField& control,
                           const std::vector<Vector>& initials,
                           std::vector<Matrix>* propagators) {
  const int steps = control.samples();
  const double dt = control.grid.dt();
  if (propagators) propagators->resize(steps);
  NodeStates states(initials.size());
  for (size_t m = 0; m < initials.size(); ++m) {
    states[m].reserve(steps + 1);
    states[m].push_back(initials[m]);
  }
  for (int j = 0; j < steps; ++j) {
    const Matrix v = step_propagator(system, control.at(j), dt);
    for (auto& member : states) member.push_back(v * member[j]);
    if (propagators) (*propagators)[j] = v;
  }
  return states;
}

ObjectiveBreakdown ensemble_breakdown(const EnsembleProblem& problem,
                                      const ControlField& control, const NodeStates& states) {
  std::vector<StateTrajectory> trajs(states.size());
  for (size_t m = 0; m < states.size(); ++m) trajs[m] = {control.grid, states[m]};
  return objective_from_trajectory(problem, control, trajs);
}

}  // namespace

RealArray grape_gradient(const EnsembleProblem& problem, const ControlField& control,
                         ObjectiveBreakdown* breakdown, int* cauchy_count) {
  problem.objective.validate();
  const ControlSystem& system = problem.system;
  const int steps = control.samples();
  const int channels = control.channels();
  const double dt = control.grid.dt();
  const int members = problem.ensemble.size();
  const ObjectiveSpec& obj = problem.objective;

  NodeStates states = forward_members(system, control, problem.ensemble.initial, nullptr);
  if (cauchy_count) *cauchy_count += members;
  if (breakdown) *breakdown = ensemble_breakdown(problem, control, states);

  std::vector<Vector> finals;
  for (const auto& s : states) finals.push_back(s.back());
  std::vector<Vector> adj = ensemble_terminant_gradient(obj, problem.ensemble, finals);

  const bool has_penalty = obj.state_penalty_operator && obj.lambda_state != 0.0;
  RealArray grad = RealArray::Zero(channels, steps);

  for (int j = steps - 1; j >= 0; --j) {
    Matrix v;
    std::vector<Matrix> dv;
    step_propagator_with_derivatives(system, control.at(j), dt, &v, &dv);
    for (int l = 0; l < channels; ++l) {
      double g = 0.0;
      for (int m = 0; m < members; ++m)
        g += 2.0 * adj[m].dot(dv[l] * states[m][j]).real();
      // Direct running-cost terms of the discretized objective.
      const double s = obj.shape(control.grid.midpoint(j), control.grid.horizon);
      if (obj.lambda_u != 0.0) g += 2.0 * obj.lambda_u * dt * control.values(l, j) / s;
      if (obj.lambda_du != 0.0) {
        if (j + 1 < steps)
          g -= 2.0 * obj.lambda_du * (control.values(l, j + 1) - control.values(l, j)) / dt;
        if (j > 0)
          g += 2.0 * obj.lambda_du * (control.values(l, j) - control.values(l, j - 1)) / dt;
      }
      grad(l, j) = g;
    }
    for (int m = 0; m < members; ++m) {
      adj[m] = (v.adjoint() * adj[m]).eval();
      if (has_penalty)
        adj[m] += obj.lambda_state * dt * (*obj.state_penalty_operator * states[m][j]);
    }
  }
  if (cauchy_count) *cauchy_count += members;
  return grad;
}

RealArray grape_gradient(const StateProblem& problem, const ControlField& control,
                         ObjectiveBreakdown* breakdown, int* cauchy_count) {
  EnsembleProblem ep{problem.system, Ensemble{{problem.psi0}, {}, {}}, problem.objective};
  return grape_gradient(ep, control, breakdown, cauchy_count);
}

namespace {

RealArray project_to_box(const ControlField& proto, const RealArray& values) {
  RealArray out = values;
  for (int l = 0; l < proto.channels(); ++l)
    for (int j = 0; j < proto.samples(); ++j) out(l, j) = proto.clip(l, out(l, j));
  return out;
}

OptimizationTrace grape_run(const EnsembleProblem& problem, const ControlField& u0,
                            const GrapeOptions& opts) {
  OptimizationTrace trace;
  ControlField u = u0;
  ObjectiveBreakdown cur;
  RealArray g = grape_gradient(problem, u, &cur, &trace.cauchy_count);
  record(trace, 0, cur, 0.0);
  trace.status = RunStatus::max_iters;

  auto evaluate = [&](const RealArray& values, ObjectiveBreakdown* out) {
    ControlField cand = u;
    cand.values = values;
    NodeStates states = forward_members(problem.system, cand, problem.ensemble.initial, nullptr);
    trace.cauchy_count += problem.ensemble.size();
    *out = ensemble_breakdown(problem, cand, states);
    return cand;
  };

  if (g.abs().maxCoeff() < opts.grad_tol) {
    trace.status = RunStatus::converged;
    trace.note = "gradient below tolerance; no movement";
    trace.final_control = u;
    return trace;
  }

  std::deque<std::pair<RealArray, RealArray>> history;  // (s, y)

  for (int k = 1; k <= opts.max_iters; ++k) {
    RealArray direction = -g;
    if (opts.optimizer == GrapeOptions::Optimizer::quasi_newton && !history.empty()) {
      // Two-loop recursion over the stored curvature pairs.
      std::vector<double> alpha(history.size());
      RealArray q = g;
      for (int i = static_cast<int>(history.size()) - 1; i >= 0; --i) {
        const auto& [s, y] = history[i];
        const double rho = 1.0 / (s * y).sum();
        alpha[i] = rho * (s * q).sum();
        q -= alpha[i] * y;
      }
      const auto& [s_last, y_last] = history.back();
      q *= (s_last * y_last).sum() / (y_last * y_last).sum();
      for (size_t i = 0; i < history.size(); ++i) {
        const auto& [s, y] = history[i];
        const double rho = 1.0 / (s * y).sum();
        const double beta = rho * (y * q).sum();
        q += (alpha[i] - beta) * s;
      }
      direction = -q;
    }
    double slope = (direction * g).sum();
    if (slope >= 0.0) {  // not a descent direction; fall back to the gradient
      direction = -g;
      slope = (direction * g).sum();
    }

    double step = (opts.optimizer == GrapeOptions::Optimizer::fixed_step)
                      ? opts.step_size
                      : 1.0;
    bool improved = false;
    RealArray best_values;
    ObjectiveBreakdown best;
    // Backtracking with quadratic/cubic interpolation on the sampled values.
    double prev_step = 0.0, prev_phi = 0.0;
    for (int attempt = 0; attempt < 30; ++attempt) {
      const RealArray cand_values = project_to_box(u, u.values + step * direction);
      ObjectiveBreakdown cand;
      evaluate(cand_values, &cand);
      if (cand.total() <= cur.total() + 1e-4 * step * slope ||
          (opts.optimizer == GrapeOptions::Optimizer::fixed_step &&
           cand.total() < cur.total())) {
        best_values = cand_values;
        best = cand;
        improved = true;
        break;
      }
      double next;
      if (attempt == 0 || opts.optimizer == GrapeOptions::Optimizer::fixed_step) {
        // Minimizer of the quadratic through phi(0), phi'(0), phi(step).
        next = -slope * step * step / (2.0 * (cand.total() - cur.total() - slope * step));
      } else {
        // Cubic through phi(0), phi'(0) and the two most recent trials.
        const double d1 = cand.total() - cur.total() - slope * step;
        const double d2 = prev_phi - cur.total() - slope * prev_step;
        const double denom = step * step * prev_step * prev_step * (step - prev_step);
        const double a = (prev_step * prev_step * d1 - step * step * d2) / denom;
        const double b = (-prev_step * prev_step * prev_step * d1 +
                          step * step * step * d2) / denom;
        const double disc = b * b - 3.0 * a * slope;
        next = (a != 0.0 && disc >= 0.0) ? (-b + std::sqrt(disc)) / (3.0 * a)
                                         : 0.5 * step;
      }
      if (!(next > 0.05 * step) || !(next < 0.9 * step) || !std::isfinite(next))
        next = 0.5 * step;
      prev_step = step;
      prev_phi = cand.total();
      step = next;
      if (step < 1e-14) break;
    }
    if (!improved) {
      trace.status = RunStatus::stalled;
      trace.note = "line search failed";
      break;
    }

    const RealArray s = best_values - u.values;
    const double max_du = s.abs().maxCoeff();
    const double dj = cur.total() - best.total();
    u.values = best_values;
    cur = best;
    RealArray g_new = grape_gradient(problem, u, nullptr, &trace.cauchy_count);
    const RealArray y = g_new - g;
    if ((s * y).sum() > 1e-14 * std::sqrt((s * s).sum() * (y * y).sum())) {
      history.emplace_back(s, y);
      if (static_cast<int>(history.size()) > opts.memory) history.pop_front();
    }
    g = g_new;
    record(trace, k, cur, max_du);
    if (std::abs(dj) < opts.tol_dJ || g.abs().maxCoeff() < opts.grad_tol) {
      trace.status = RunStatus::converged;
      break;
    }
  }
  trace.final_control = u;
  return trace;
}

}  // namespace

OptimizationTrace grape(const EnsembleProblem& problem, const ControlField& u0,
                        const GrapeOptions& opts) {
  return grape_run(problem, u0, opts);
}

OptimizationTrace grape(const StateProblem& problem, const ControlField& u0,
                        const GrapeOptions& opts) {
  EnsembleProblem ep{problem.system, Ensemble{{problem.psi0}, {}, {}}, problem.objective};
  return grape_run(ep, u0, opts);
}

OptimizationTrace grape(const UnitaryProblem& problem, const ControlField& u0,
                        const GrapeOptions& opts) {
  const auto* t = std::get_if<GateTerminant>(&problem.objective.terminant);
  if (!t) throw ConfigError("grape(unitary): requires a gate terminant");
  const int n = problem.system.dim();
  Ensemble columns;
  for (int j = 0; j < n; ++j) {
    Vector e = Vector::Zero(n);
    e(j) = 1.0;
    columns.initial.push_back(e);
  }
  EnsembleProblem ep{problem.system, columns, problem.objective};
  return grape_run(ep, u0, opts);
}

// ---------------------------------------------------------------------------
// Steepest descent with exact golden-section line search.

OptimizationTrace steepest_descent(const StateProblem& problem, const ControlField& u0,
                                   const SteepestDescentOptions& opts) {
  EnsembleProblem ep{problem.system, Ensemble{{problem.psi0}, {}, {}}, problem.objective};

  OptimizationTrace trace;
  ControlField u = u0;
  ObjectiveBreakdown cur;
  RealArray g = grape_gradient(ep, u, &cur, &trace.cauchy_count);
  record(trace, 0, cur, 0.0);
  trace.status = RunStatus::max_iters;

  auto evaluate_total = [&](const RealArray& values) {
    ControlField cand = u;
    cand.values = project_to_box(u, values);
    ++trace.cauchy_count;
    return total_objective(problem, cand).total();
  };

  for (int k = 1; k <= opts.max_iters; ++k) {
    RealArray direction = -g;
    if (opts.band) {
      for (int l = 0; l < u.channels(); ++l) {
        const RealVector row = direction.row(l).matrix().transpose();
        direction.row(l) = band_filter(row, u.grid.horizon, opts.band->first,
                                       opts.band->second)
                               .transpose()
                               .array();
      }
    }
    const double dmax = direction.abs().maxCoeff();
    if (dmax == 0.0) {
      trace.status = RunStatus::converged;
      trace.note = "zero search direction";
      break;
    }

    // Golden-section search for beta on [0, beta_max]; if the wide bracket
    // holds no improvement, the remaining budget retries a narrow one.
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double best_beta = 0.0;
    double best_f = cur.total();
    auto golden = [&](double b, int evals) {
      double a = 0.0;
      double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
      double f1 = evaluate_total(u.values + x1 * direction);
      double f2 = evaluate_total(u.values + x2 * direction);
      if (f1 < best_f) best_f = f1, best_beta = x1;
      if (f2 < best_f) best_f = f2, best_beta = x2;
      for (int e = 2; e < evals; ++e) {
        if (f1 < f2) {
          b = x2;
          x2 = x1;
          f2 = f1;
          x1 = b - invphi * (b - a);
          f1 = evaluate_total(u.values + x1 * direction);
        } else {
          a = x1;
          x1 = x2;
          f1 = f2;
          x2 = a + invphi * (b - a);
          f2 = evaluate_total(u.values + x2 * direction);
        }
        if (f1 < best_f) best_f = f1, best_beta = x1;
        if (f2 < best_f) best_f = f2, best_beta = x2;
      }
    };
    const double beta_max = 10.0 / dmax;
    golden(beta_max, opts.line_search_evals / 2);
    if (best_f >= cur.total()) golden(beta_max / 256.0, opts.line_search_evals / 2);

    if (best_f >= cur.total()) {
      trace.status = RunStatus::stalled;
      trace.note = "line search found no improvement";
      break;
    }
    const RealArray new_values = project_to_box(u, u.values + best_beta * direction);
    const double max_du = (new_values - u.values).abs().maxCoeff();
    u.values = new_values;
    const double dj_prev = cur.total();
    g = grape_gradient(ep, u, &cur, &trace.cauchy_count);
    record(trace, k, cur, max_du);
    if (std::abs(dj_prev - cur.total()) < opts.tol_dJ) {
      trace.status = RunStatus::converged;
      break;
    }
  }
  trace.final_control = u;
  return trace;
}

ControlField smooth_control(const ControlField& u, double alpha, double cutoff) {
  if (alpha < 0.0 || alpha > 1.0)
    throw std::invalid_argument("smooth_control: alpha must lie in [0, 1]");
  RealArray out(u.channels(), u.samples());
  for (int l = 0; l < u.channels(); ++l) {
    const RealVector row = u.values.row(l).matrix().transpose();
    const RealVector filtered = band_filter(row, u.grid.horizon, 0.0, cutoff);
    out.row(l) = ((1.0 - alpha) * row + alpha * filtered).transpose().array();
  }
  return ControlField(u.grid, std::move(out),
                      std::vector<ChannelBounds>(u.channels(), ChannelBounds{}));
}

std::vector<double> crab_frequencies(int n_terms, double horizon, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-0.5, 0.5);
  std::vector<double> omegas(n_terms);
  for (int j = 1; j <= n_terms; ++j)
    omegas[j - 1] = 2.0 * M_PI * j * (1.0 + dist(rng)) / horizon;
  return omegas;
}

ControlField crab_expand(const CrabBasis& basis, const TimeGrid& grid) {
  if (basis.u_guess.channels() != 1)
    throw ConfigError("crab_expand: scalar control expected");
  if (basis.u_guess.samples() != grid.intervals)
    throw std::invalid_argument("crab_expand: guess not sampled on the grid");
  const int terms = static_cast<int>(basis.omegas.size());
  if (basis.a.size() != terms || basis.b.size() != terms)
    throw std::invalid_argument("crab_expand: coefficient count mismatch");

  RealArray values(1, grid.intervals);
  for (int j = 0; j < grid.intervals; ++j) {
    const double t = grid.midpoint(j);
    double series = 0.0;
    for (int i = 0; i < terms; ++i)
      series += basis.a(i) * std::sin(basis.omegas[i] * t) +
                basis.b(i) * std::cos(basis.omegas[i] * t);
    values(0, j) = basis.u_guess.values(0, j) *
                   (1.0 + basis.shape(t, grid.horizon) * series);
  }
  return ControlField(grid, std::move(values), {ChannelBounds{}});
}

NelderMeadResult nelder_mead(const std::function<double(const RealVector&)>& objective,
                             std::vector<RealVector> simplex, int iters) {
  if (simplex.size() < 2) throw std::invalid_argument("nelder_mead: degenerate simplex");
  const int p = static_cast<int>(simplex[0].size());
  if (static_cast<int>(simplex.size()) != p + 1)
    throw std::invalid_argument("nelder_mead: simplex needs p+1 vertices");

  NelderMeadResult result;
  std::vector<double> f(simplex.size());
  for (size_t i = 0; i < simplex.size(); ++i) f[i] = objective(simplex[i]);
  result.evaluations = static_cast<int>(simplex.size());

  auto order = [&]() {
    std::vector<size_t> idx(simplex.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return f[a] < f[b]; });
    std::vector<RealVector> s2(simplex.size());
    std::vector<double> f2(simplex.size());
    for (size_t i = 0; i < idx.size(); ++i) s2[i] = simplex[idx[i]], f2[i] = f[idx[i]];
    simplex.swap(s2);
    f.swap(f2);
  };

  for (int it = 0; it < iters; ++it) {
    order();
    RealVector centroid = RealVector::Zero(p);
    for (int i = 0; i < p; ++i) centroid += simplex[i];
    centroid /= static_cast<double>(p);

    const RealVector xr = centroid + (centroid - simplex.back());
    const double fr = objective(xr);
    ++result.evaluations;
    if (fr < f[0]) {
      const RealVector xe = centroid + 2.0 * (centroid - simplex.back());
      const double fe = objective(xe);
      ++result.evaluations;
      if (fe < fr) simplex.back() = xe, f.back() = fe;
      else simplex.back() = xr, f.back() = fr;
    } else if (fr < f[p - 1]) {
      simplex.back() = xr;
      f.back() = fr;
    } else {
      const RealVector xc = centroid + 0.5 * (simplex.back() - centroid);
      const double fc = objective(xc);
      ++result.evaluations;
      if (fc < f.back()) {
        simplex.back() = xc;
        f.back() = fc;
      } else {
        for (size_t i = 1; i < simplex.size(); ++i) {
          simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0]);
          f[i] = objective(simplex[i]);
          ++result.evaluations;
        }
      }
    }
  }
  order();
  result.best = simplex[0];
  result.value = f[0];
  return result;
}

OptimizationTrace crab_optimize(const StateProblem& problem, const ControlField& u_guess,
                                const CrabOptions& opts) {
  CrabBasis basis;
  basis.u_guess = u_guess;
  basis.shape = problem.objective.shape;
  basis.omegas = crab_frequencies(opts.n_terms, u_guess.grid.horizon, opts.seed);
  basis.a = RealVector::Zero(opts.n_terms);
  basis.b = RealVector::Zero(opts.n_terms);

  OptimizationTrace trace;
  auto expand = [&](const RealVector& x) {
    CrabBasis local = basis;
    local.a = x.head(opts.n_terms);
    local.b = x.tail(opts.n_terms);
    return crab_expand(local, u_guess.grid);
  };
  auto objective = [&](const RealVector& x) {
    ++trace.cauchy_count;
    return total_objective(problem, expand(x)).total();
  };

  const int p = 2 * opts.n_terms;
  std::vector<RealVector> simplex;
  simplex.push_back(RealVector::Zero(p));
  for (int i = 0; i < p; ++i) {
    RealVector v = RealVector::Zero(p);
    v(i) = opts.simplex_scale;
    simplex.push_back(v);
  }

  ObjectiveBreakdown start = total_objective(problem, u_guess);
  ++trace.cauchy_count;
  record(trace, 0, start, 0.0);

  const NelderMeadResult nm = nelder_mead(objective, simplex, opts.iters);
  const ControlField best_u = expand(nm.best);
  ObjectiveBreakdown best = total_objective(problem, best_u);
  ++trace.cauchy_count;
  if (best.total() <= start.total()) {
    record(trace, 1, best, (best_u.values - u_guess.values).abs().maxCoeff());
    trace.final_control = best_u;
    trace.status = RunStatus::converged;
  } else {
    trace.final_control = u_guess;
    trace.status = RunStatus::stalled;
    trace.note = "no parameter set improved on the guess";
  }
  trace.note += (trace.note.empty() ? "" : "; ") + std::string("seed=") +
                std::to_string(opts.seed);
  return trace;
}

}  // namespace qoc
