#include "qoc/gpe.hpp"

#include <cmath>

#include "qoc/fft.hpp"

namespace qoc {

namespace {

constexpr double kGpeNormTol = 1e-8;

Vector apply_kinetic_phase(const SpatialGrid& grid, const Vector& field, double tau) {
  // exp(-i tau k^2 / 2) in Fourier space.
  Vector hat = dft_copy(field);
  for (int i = 0; i < grid.points; ++i) {
    const double k = grid.wavenumber(i);
    hat(i) *= std::exp(Complex(0.0, -0.5 * tau * k * k));
  }
  dft(hat, true);
  return hat;
}

Vector apply_kinetic_decay(const SpatialGrid& grid, const Vector& field, double tau) {
  Vector hat = dft_copy(field);
  for (int i = 0; i < grid.points; ++i) {
    const double k = grid.wavenumber(i);
    hat(i) *= std::exp(-0.5 * tau * k * k);
  }
  dft(hat, true);
  return hat;
}

Vector apply_kinetic_operator(const SpatialGrid& grid, const Vector& field) {
  Vector hat = dft_copy(field);
  for (int i = 0; i < grid.points; ++i) {
    const double k = grid.wavenumber(i);
    hat(i) *= 0.5 * k * k;
  }
  dft(hat, true);
  return hat;
}

double switching_value(const GpePotential& potential, double t, double horizon) {
  if (potential.kind != GpePotential::Kind::trap_lattice) return 0.0;
  return potential.switching(t / horizon);
}

void renormalize(Vector& field, double dx) { field /= l2_norm(field, dx); }

}  // namespace

SpatialGrid::SpatialGrid(double x_min_, double x_max_, int points_)
    : x_min(x_min_), x_max(x_max_), points(points_) {
  if (!(x_max > x_min)) throw std::invalid_argument("SpatialGrid: empty domain");
  if (points < 16 || !is_power_of_two(points))
    throw std::invalid_argument("SpatialGrid: points must be a power of two, >= 16");
}

GpeState::GpeState(Vector field_, SpatialGrid grid_)
    : field(std::move(field_)), grid(grid_) {
  if (field.size() != grid.points)
    throw std::invalid_argument("GpeState: field size does not match the grid");
  if (std::abs(l2_norm(field, grid.dx()) - 1.0) > kGpeNormTol)
    throw std::invalid_argument("GpeState: not L2-normalized");
}

double GpePotential::value(double x, double u, double s) const {
  switch (kind) {
    case Kind::trap_lattice: {
      const double c = std::cos(wavenumber * x);
      return u * x * x + s * v0 * c * c;
    }
    case Kind::shifted_harmonic: {
      const double y = x - u * x0;
      return 0.5 * y * y;
    }
    case Kind::split_well: {
      // Seam |x| = u d / 4 evaluated by the first branch.
      const double ax = std::abs(x);
      if (ax >= u * d / 4.0) {
        const double y = ax - u * d / 2.0;
        return 0.5 * y * y;
      }
      return 0.5 * (u * u / 8.0 - x * x);
    }
    case Kind::polynomial: {
      const double y = x - u;
      const double y2 = y * y;
      return p2 * y2 + p4 * y2 * y2 + p6 * y2 * y2 * y2;
    }
  }
  return 0.0;
}

double GpePotential::du(double x, double u) const {
  switch (kind) {
    case Kind::trap_lattice:
      return x * x;
    case Kind::shifted_harmonic:
      return -(x - u * x0) * x0;
    case Kind::split_well: {
      const double ax = std::abs(x);
      if (ax >= u * d / 4.0) return -(ax - u * d / 2.0) * d / 2.0;
      return u / 8.0;
    }
    case Kind::polynomial: {
      const double y = x - u;
      return -(2.0 * p2 * y + 4.0 * p4 * y * y * y + 6.0 * p6 * y * y * y * y * y);
    }
  }
  return 0.0;
}

double l2_norm(const Vector& field, double dx) { return std::sqrt(field.squaredNorm() * dx); }

Complex l2_inner(const Vector& a, const Vector& b, double dx) { return a.dot(b) * dx; }

std::vector<Vector> gpe_propagate(const GpeProblem& problem, const ControlField& control) {
  if (control.channels() != 1) throw std::invalid_argument("gpe_propagate: scalar control");
  const SpatialGrid& grid = problem.grid;
  if (problem.psi0.size() != grid.points)
    throw std::invalid_argument("gpe_propagate: psi0 size mismatch");
  const double dt = control.grid.dt();
  const double dx = grid.dx();

  std::vector<Vector> nodes;
  nodes.reserve(control.samples() + 1);
  nodes.push_back(problem.psi0);
  double norm_prev = l2_norm(problem.psi0, dx);

  for (int j = 0; j < control.samples(); ++j) {
    const double u = control.values(0, j);
    const double s = switching_value(problem.potential, control.grid.midpoint(j),
                                     control.grid.horizon);
    Vector psi = apply_kinetic_phase(grid, nodes.back(), 0.5 * dt);
    for (int i = 0; i < grid.points; ++i) {
      const double v = problem.potential.value(grid.x(i), u, s) +
                       problem.kappa * std::norm(psi(i));
      psi(i) *= std::exp(Complex(0.0, -dt * v));
    }
    psi = apply_kinetic_phase(grid, psi, 0.5 * dt);
    const double norm = l2_norm(psi, dx);
    if (std::abs(norm - norm_prev) > 1e-10)
      throw NumericError("gpe_propagate: per-step norm drift above 1e-10");
    norm_prev = norm;
    nodes.push_back(std::move(psi));
  }
  return nodes;
}

double gpe_energy(const SpatialGrid& grid, const GpePotential& potential, double u, double s,
                  double kappa, const Vector& psi) {
  const double dx = grid.dx();
  const Vector kpsi = apply_kinetic_operator(grid, psi);
  double energy = l2_inner(psi, kpsi, dx).real();
  for (int i = 0; i < grid.points; ++i) {
    const double density = std::norm(psi(i));
    energy += potential.value(grid.x(i), u, s) * density * dx;
    energy += 0.5 * kappa * density * density * dx;
  }
  return energy;
}

double gpe_stationarity_residual(const SpatialGrid& grid, const GpePotential& potential,
                                 double u, double s, double kappa, const Vector& psi) {
  const double dx = grid.dx();
  Vector hpsi = apply_kinetic_operator(grid, psi);
  for (int i = 0; i < grid.points; ++i)
    hpsi(i) += (potential.value(grid.x(i), u, s) + kappa * std::norm(psi(i))) * psi(i);
  const Complex mu = l2_inner(psi, hpsi, dx);
  return l2_norm(hpsi - mu * psi, dx);
}

namespace {

// Dense position-space kinetic matrix of the spectral Laplacian (circulant).
RealMatrix dense_kinetic(const SpatialGrid& grid) {
  const int m = grid.points;
  Vector eps(m);
  for (int i = 0; i < m; ++i) {
    const double k = grid.wavenumber(i);
    eps(i) = 0.5 * k * k;
  }
  dft(eps, true);  // first circulant row
  RealMatrix kin(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) kin(i, j) = eps((i - j + m) % m).real();
  return kin;
}

Vector imaginary_time_relax(const SpatialGrid& grid, const GpePotential& potential, double u,
                            double kappa, const Vector* orthogonal_to, int which_state,
                            const GroundStateOptions& opts) {
  const double dx = grid.dx();
  Vector psi(grid.points);
  // Broad Gaussian seed, displaced slightly off-center when an excited
  // state is requested so the odd component is nonzero.
  const double center = which_state > 0 ? 0.3 : 0.0;
  for (int i = 0; i < grid.points; ++i) {
    const double x = grid.x(i) - center;
    psi(i) = std::exp(-0.25 * x * x);
  }
  renormalize(psi, dx);

  // Imaginary-time relaxation with renormalization. Its split-step fixed
  // point carries an O(tau) bias for kappa > 0, so it serves as the warmup.
  double tau = opts.tau;
  int warmup = std::min(opts.max_steps, 4000);
  for (int step = 0; step < warmup; ++step) {
    Vector next = apply_kinetic_decay(grid, psi, 0.5 * tau);
    for (int i = 0; i < grid.points; ++i) {
      const double v = potential.value(grid.x(i), u, 0.0) + kappa * std::norm(next(i));
      next(i) *= std::exp(-tau * v);
    }
    next = apply_kinetic_decay(grid, next, 0.5 * tau);
    if (orthogonal_to) next -= l2_inner(*orthogonal_to, next, dx) * (*orthogonal_to);
    renormalize(next, dx);
    psi = std::move(next);
    if (step == warmup / 2) tau *= 0.25;
    if (step % 50 == 0 &&
        gpe_stationarity_residual(grid, potential, u, 0.0, kappa, psi) <= opts.residual_tol)
      return psi;
  }
  if (gpe_stationarity_residual(grid, potential, u, 0.0, kappa, psi) <= opts.residual_tol)
    return psi;

  // Self-consistent diagonalization polish with density mixing; exact for
  // kappa = 0 in one pass.
  const RealMatrix kin = dense_kinetic(grid);
  RealVector density(grid.points);
  for (int i = 0; i < grid.points; ++i) density(i) = std::norm(psi(i));
  const double mix = 0.5;
  for (int it = 0; it < 600; ++it) {
    RealMatrix h = kin;
    for (int i = 0; i < grid.points; ++i)
      h(i, i) += potential.value(grid.x(i), u, 0.0) + kappa * density(i);
    Eigen::SelfAdjointEigenSolver<RealMatrix> es(h);
    if (es.info() != Eigen::Success)
      throw NumericError("gpe relaxation: dense eigensolver failed");
    RealVector phi = es.eigenvectors().col(which_state);
    phi /= std::sqrt(phi.squaredNorm() * dx);
    psi = phi.cast<Complex>();
    if (orthogonal_to) {
      psi -= l2_inner(*orthogonal_to, psi, dx) * (*orthogonal_to);
      renormalize(psi, dx);
    }
    const double residual = gpe_stationarity_residual(grid, potential, u, 0.0, kappa, psi);
    if (residual <= opts.residual_tol) return psi;
    for (int i = 0; i < grid.points; ++i)
      density(i) = (1.0 - mix) * density(i) + mix * std::norm(psi(i));
  }
  throw NumericError("gpe ground-state relaxation did not reach the residual tolerance");
}

}  // namespace

Vector gpe_ground_state(const SpatialGrid& grid, const GpePotential& potential, double u,
                        double kappa, const GroundStateOptions& opts) {
  return imaginary_time_relax(grid, potential, u, kappa, nullptr, 0, opts);
}

Vector gpe_excited_state(const SpatialGrid& grid, const GpePotential& potential, double u,
                         double kappa, const Vector& below, const GroundStateOptions& opts) {
  return imaginary_time_relax(grid, potential, u, kappa, &below, 1, opts);
}

namespace {

// Exact pointwise step of the local costate ODE
//   dchi/dt = -i a chi + i b chi*   (a real, b complex),
// using exp(tau M) = cos(w tau) I + sinc(w tau) tau M with w^2 = a^2 - |b|^2.
void local_costate_phase(Vector& chi, const Vector& a, const Vector& b, double tau) {
  for (int i = 0; i < chi.size(); ++i) {
    const double ai = a(i).real();
    const Complex bi = b(i);
    const double disc = ai * ai - std::norm(bi);
    double c, s_over_w;  // cos(w tau), sin(w tau)/w
    if (disc > 0.0) {
      const double w = std::sqrt(disc);
      c = std::cos(w * tau);
      s_over_w = std::sin(w * tau) / w;
    } else if (disc < 0.0) {
      const double m = std::sqrt(-disc);
      c = std::cosh(m * tau);
      s_over_w = std::sinh(m * tau) / m;
    } else {
      c = 1.0;
      s_over_w = tau;
    }
    const Complex chi_i = chi(i);
    chi(i) = c * chi_i + s_over_w * (Complex(0.0, -ai) * chi_i +
                                     Complex(0.0, 1.0) * bi * std::conj(chi_i));
  }
}

}  // namespace

std::vector<Vector> gpe_costate_backward(const GpeProblem& problem, const ControlField& control,
                                         const std::vector<Vector>& forward,
                                         const Vector& chiT) {
  const SpatialGrid& grid = problem.grid;
  const int steps = control.samples();
  if (static_cast<int>(forward.size()) != steps + 1)
    throw std::invalid_argument("gpe_costate_backward: forward trajectory not on the grid");
  const double dt = control.grid.dt();

  std::vector<Vector> chi(steps + 1);
  chi[steps] = chiT;
  Vector a(grid.points), b(grid.points);
  for (int j = steps - 1; j >= 0; --j) {
    const double u = control.values(0, j);
    const double s = switching_value(problem.potential, control.grid.midpoint(j),
                                     control.grid.horizon);
    // Mirror the forward Strang ordering; the nonlinear coefficients are
    // frozen at the half-kinetic-evolved forward state of this interval.
    const Vector psi_mid = apply_kinetic_phase(grid, forward[j], 0.5 * dt);
    for (int i = 0; i < grid.points; ++i) {
      a(i) = problem.potential.value(grid.x(i), u, s) + 2.0 * problem.kappa * std::norm(psi_mid(i));
      b(i) = problem.kappa * psi_mid(i) * psi_mid(i);
    }
    Vector c = apply_kinetic_phase(grid, chi[j + 1], -0.5 * dt);
    local_costate_phase(c, a, b, -dt);
    chi[j] = apply_kinetic_phase(grid, c, -0.5 * dt);
  }
  return chi;
}

namespace {

double gpe_h1(const ControlField& u, double lambda_du) {
  const double dt = u.grid.dt();
  double acc = 0.0;
  for (int j = 0; j + 1 < u.samples(); ++j) {
    const double d = (u.values(0, j + 1) - u.values(0, j)) / dt;
    acc += dt * d * d;
  }
  return lambda_du * acc;
}

ObjectiveBreakdown gpe_objective(const GpeProblem& problem, const ControlField& u,
                                 const Vector& psiT) {
  ObjectiveBreakdown b;
  const Complex c = l2_inner(problem.psi_target, psiT, problem.grid.dx());
  b.terminant = 1.0 - std::norm(c);
  b.h1_penalty = gpe_h1(u, problem.lambda_du);
  return b;
}

}  // namespace

OptimizationTrace krotov_gpe(const GpeProblem& problem, const ControlField& u0, double gamma_u,
                             const SigmaSpec& sigma_spec, GpeUpdate update,
                             const KrotovOptions& opts) {
  if (!(gamma_u > 0.0)) throw ConfigError("krotov_gpe: gamma_u must be > 0");
  if (problem.lambda_du != 0.0)
    throw ConfigError("krotov_gpe: stated setting is lambda_du = 0 (use GRAPE-H1 otherwise)");
  if (sigma_spec.kind == SigmaSpec::Kind::riccati)
    throw ConfigError("krotov_gpe: the riccati Sigma belongs to the real-state method");
  sigma_spec.validate();
  if (u0.channels() != 1) throw ConfigError("krotov_gpe: scalar control expected");
  if (std::abs(l2_norm(problem.psi0, problem.grid.dx()) - 1.0) > kGpeNormTol)
    throw std::invalid_argument("krotov_gpe: psi0 not normalized");

  const SpatialGrid& grid = problem.grid;
  const int steps = u0.samples();
  const double dt = u0.grid.dt();
  const double dx = grid.dx();

  OptimizationTrace trace;
  ControlField u_cur = u0;
  std::vector<Vector> psi = gpe_propagate(problem, u_cur);
  ++trace.cauchy_count;
  ObjectiveBreakdown cur = gpe_objective(problem, u_cur, psi.back());
  trace.iterations.push_back({0, cur.total(), cur.terminant, cur.fluence, cur.state_penalty,
                              0.0, 0});

  SigmaSpec sigma = sigma_spec;
  double gamma = gamma_u;
  trace.status = RunStatus::max_iters;
  int damped_nodes = 0;

  for (int k = 1; k <= opts.max_iters; ++k) {
    const Complex overlap = l2_inner(problem.psi_target, psi.back(), dx);
    const Vector chiT = overlap * problem.psi_target;
    const std::vector<Vector> chi = gpe_costate_backward(problem, u_cur, psi, chiT);
    ++trace.cauchy_count;

    int adjustments = 0;
    bool accepted = false;
    ControlField u_new = u_cur;
    std::vector<Vector> psi_new;
    ObjectiveBreakdown next;
    double max_du = 0.0;
    bool node_failure = false;

    while (true) {
      std::vector<double> sigma_nodes;
      if (sigma.kind == SigmaSpec::Kind::exponential)
        sigma_nodes = sigma_exponential(u_cur.grid, sigma.alpha, sigma.beta, sigma.gamma);

      u_new = u_cur;
      psi_new.assign(1, problem.psi0);
      psi_new.reserve(steps + 1);
      max_du = 0.0;
      node_failure = false;

      for (int j = 0; j < steps && !node_failure; ++j) {
        const double s_shape = problem.shape(u_cur.grid.midpoint(j), u_cur.grid.horizon);
        const double sig = sigma_nodes.empty() ? 0.0 : sigma_nodes[j];
        const Vector& psi_j = psi_new[j];

        auto update_value = [&](double z) {
          double pairing;
          Vector dv_psi(grid.points);
          for (int i = 0; i < grid.points; ++i)
            dv_psi(i) = problem.potential.du(grid.x(i), z) * psi_j(i);
          Complex total = l2_inner(chi[j], dv_psi, dx);
          if (sig != 0.0) {
            const Vector dpsi = psi_j - psi[j];
            total += 0.5 * sig * l2_inner(dpsi, dv_psi, dx);
          }
          pairing = total.imag();
          return pairing;
        };

        double factor = s_shape / gamma;
        double u_next = 0.0;
        if (update == GpeUpdate::simplified || problem.potential.linear_in_u()) {
          u_next = u_cur.values(0, j) + factor * update_value(u_cur.values(0, j));
        } else {
          // Damped fixed point for the implicit update.
          bool solved = false;
          while (factor >= s_shape / gamma / 1024.0) {
            double z = u_cur.values(0, j);
            bool diverged = false;
            for (int it = 0; it < 50; ++it) {
              const double rhs = u_cur.values(0, j) + factor * update_value(z);
              const double residual = std::abs(rhs - z);
              z = z + 0.5 * (rhs - z);
              if (!std::isfinite(z) || std::abs(z) > 1e8) {
                diverged = true;
                break;
              }
              if (residual <= 1e-10) break;
              if (it == 49) diverged = true;
            }
            if (!diverged) {
              u_next = z;
              solved = true;
              break;
            }
            factor *= 0.5;  // reduce the effective step for this node
            ++damped_nodes;
          }
          if (!solved) {
            node_failure = true;
            break;
          }
        }
        u_next = u_cur.clip(0, u_next);
        u_new.values(0, j) = u_next;
        max_du = std::max(max_du, std::abs(u_next - u_cur.values(0, j)));

        // Advance one interval with the new control value.
        const double s_switch = switching_value(problem.potential, u_cur.grid.midpoint(j),
                                                u_cur.grid.horizon);
        Vector step_psi = apply_kinetic_phase(grid, psi_new[j], 0.5 * dt);
        for (int i = 0; i < grid.points; ++i) {
          const double v = problem.potential.value(grid.x(i), u_next, s_switch) +
                           problem.kappa * std::norm(step_psi(i));
          step_psi(i) *= std::exp(Complex(0.0, -dt * v));
        }
        step_psi = apply_kinetic_phase(grid, step_psi, 0.5 * dt);
        psi_new.push_back(std::move(step_psi));
      }
      ++trace.cauchy_count;

      if (node_failure) {
        trace.status = RunStatus::failed;
        trace.note = "inner fixed point failed after exhausting step reduction";
        trace.final_control = u_cur;
        return trace;
      }

      next = gpe_objective(problem, u_new, psi_new.back());
      if (next.total() <= cur.total() + 1e-13 * (1.0 + std::abs(cur.total()))) {
        accepted = true;
        break;
      }
      if (adjustments >= opts.max_adaptations) break;
      ++adjustments;
      if (sigma.kind == SigmaSpec::Kind::exponential) {
        sigma.alpha *= sigma.adapt_strength;
        sigma.beta *= sigma.adapt_strength;
        sigma.gamma *= sigma.adapt_gamma;
      } else {
        gamma *= 2.0;
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
    psi = psi_new;
    cur = next;
    trace.iterations.push_back({k, cur.total(), cur.terminant, cur.fluence, cur.state_penalty,
                                max_du, adjustments});
    if (max_du <= 1e-12) {
      trace.status = RunStatus::converged;
      trace.note = "fixed point of the update map";
      break;
    }
    if (std::abs(dj) < opts.tol_dJ) {
      trace.status = RunStatus::converged;
      break;
    }
  }

  if (damped_nodes > 0)
    trace.note += (trace.note.empty() ? "" : "; ") + std::to_string(damped_nodes) +
                  " node-level step reductions";
  trace.final_control = u_cur;
  return trace;
}

}  // namespace qoc
