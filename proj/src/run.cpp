#include "qoc/run.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qoc/fft.hpp"

namespace qoc {

namespace {

namespace fs = std::filesystem;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

ShapeFn parse_shape(const std::string& name) {
  if (name == "constant") return {ShapeFn::Kind::constant};
  if (name == "sine_squared") return {ShapeFn::Kind::sine_squared};
  if (name == "gaussian") return {ShapeFn::Kind::gaussian_palao};
  throw ConfigError("unknown shape function: " + name);
}

// Piecewise-constant resample of a control onto a new grid; the profile is
// stretched with the horizon (lookup by relative position).
ControlField resample_control(const ControlField& src, const TimeGrid& grid) {
  RealArray values(src.channels(), grid.intervals);
  for (int j = 0; j < grid.intervals; ++j) {
    const double fraction = grid.midpoint(j) / grid.horizon;
    int k = static_cast<int>(fraction * src.grid.intervals);
    k = std::min(std::max(k, 0), src.grid.intervals - 1);
    for (int l = 0; l < src.channels(); ++l) values(l, j) = src.values(l, k);
  }
  return ControlField(grid, std::move(values), src.bounds);
}

ControlField build_initial_control(Config& config, const TimeGrid& grid,
                                   const ControlField& entry_default) {
  const std::string spec = config.get_string("method", "u0", "default");
  std::vector<ChannelBounds> bounds = entry_default.bounds;
  if (config.has("problem", "bound_lo") || config.has("problem", "bound_hi")) {
    const double lo = config.get_double("problem", "bound_lo", -kInf);
    const double hi = config.get_double("problem", "bound_hi", kInf);
    bounds.assign(entry_default.channels(), ChannelBounds{lo, hi});
  }
  if (spec == "default") {
    ControlField u = (entry_default.grid.intervals == grid.intervals &&
                      entry_default.grid.horizon == grid.horizon)
                         ? entry_default
                         : resample_control(entry_default, grid);
    u.bounds = bounds;
    u.validate();
    return u;
  }
  const auto parts = split(spec, ':');
  if (parts[0] == "constant" && parts.size() == 2) {
    RealArray values =
        RealArray::Constant(entry_default.channels(), grid.intervals, std::stod(parts[1]));
    return ControlField(grid, std::move(values), bounds);
  }
  if (parts[0] == "ramp" && parts.size() == 3) {
    const double a = std::stod(parts[1]), b = std::stod(parts[2]);
    RealArray values(entry_default.channels(), grid.intervals);
    for (int j = 0; j < grid.intervals; ++j) {
      const double f = grid.midpoint(j) / grid.horizon;
      for (int l = 0; l < entry_default.channels(); ++l)
        values(l, j) = a + (b - a) * f;
    }
    return ControlField(grid, std::move(values), bounds);
  }
  throw ConfigError("bad u0 spec (use default, constant:<v>, or ramp:<a>:<b>): " + spec);
}

void apply_objective_overrides(Config& config, ObjectiveSpec& objective) {
  objective.lambda_u = config.get_double("problem", "lambda_u", objective.lambda_u);
  objective.lambda_du = config.get_double("problem", "lambda_du", objective.lambda_du);
  objective.gamma_u = config.get_double("problem", "gamma_u", objective.gamma_u);
  if (config.has("problem", "shape"))
    objective.shape = parse_shape(config.require_string("problem", "shape"));
}

}  // namespace

LoadedProblem load_problem(Config& config) {
  LoadedProblem out;

  if (config.has("problem", "drift")) {
    // Inline state-problem definition.
    out.id = "inline";
    Matrix drift = parse_matrix_literal(config.require_string("problem", "drift"));
    std::vector<Matrix> controls;
    for (int l = 1;; ++l) {
      const std::string key = "control." + std::to_string(l);
      if (!config.has("problem", key)) break;
      controls.push_back(parse_matrix_literal(config.require_string("problem", key)));
    }
    if (controls.empty()) throw ConfigError("inline problem: need control.1");
    ControlSystem system(std::move(drift), std::move(controls));
    Vector psi0 = parse_vector_literal(config.require_string("problem", "psi0"));
    psi0.normalize();
    Vector target = parse_vector_literal(config.require_string("problem", "target"));
    target.normalize();
    ObjectiveSpec obj;
    obj.terminant = OverlapTerminant{target, OverlapVariant::squared};
    apply_objective_overrides(config, obj);
    out.state = StateProblem{system, psi0, obj};
    const double t_final = config.get_double("grid", "T", 1.0);
    const int intervals = config.get_int("grid", "N", 100);
    const TimeGrid grid(t_final, intervals);
    out.u0 = build_initial_control(config, grid,
                                   ControlField::constant(grid, system.num_controls(), 0.0));
    return out;
  }

  const std::string id = config.require_string("problem", "id");
  const ProblemCatalogEntry& entry = catalog_entry(id);
  out.id = id;
  out.forbidden_projector = entry.forbidden_projector;

  const double t_final = config.get_double("grid", "T", entry.default_grid.horizon);
  const int intervals = config.get_int("grid", "N", entry.default_grid.intervals);
  const TimeGrid grid(t_final, intervals);

  if (entry.gpe) {
    GpeProblem p = *entry.gpe;
    if (config.has("problem", "kappa")) {
      p.kappa = config.get_double("problem", "kappa", p.kappa);
      if (p.kappa < 0.0) throw ConfigError("kappa must be >= 0");
      if (entry.id == "P6") {
        p.psi0 = gpe_ground_state(p.grid, p.potential, 0.0, p.kappa);
        p.psi_target = gpe_ground_state(p.grid, p.potential, 1.0, p.kappa);
      } else {
        p.psi0 = gpe_ground_state(p.grid, p.potential, 0.0, p.kappa);
        p.psi_target = gpe_excited_state(p.grid, p.potential, 0.0, p.kappa, p.psi0);
      }
    }
    p.lambda_du = config.get_double("problem", "lambda_du", p.lambda_du);
    if (config.has("problem", "shape"))
      p.shape = parse_shape(config.require_string("problem", "shape"));
    out.gpe = std::move(p);
    out.u0 = build_initial_control(config, grid, entry.default_control);
    return out;
  }

  if (entry.ensemble) {
    EnsembleProblem p = *entry.ensemble;
    if (config.has("problem", "target_gate")) {
      const std::string gate = config.require_string("problem", "target_gate");
      const auto it = entry.gates.find(gate);
      if (it == entry.gates.end()) throw ConfigError("unknown target gate: " + gate);
      p.objective.terminant = GateTerminant{it->second};
    }
    if (config.get_string("problem", "terminant", "gate") == "local_invariants") {
      const Matrix w = std::get<GateTerminant>(p.objective.terminant).gate;
      p.objective.terminant = LocalInvariantsTerminant{w, Matrix::Identity(4, 4)};
    }
    apply_objective_overrides(config, p.objective);
    out.ensemble = std::move(p);
    out.u0 = build_initial_control(config, grid, entry.default_control);
    return out;
  }

  StateProblem p = *entry.state;
  if (config.has("problem", "overlap_variant")) {
    auto* overlap = std::get_if<OverlapTerminant>(&p.objective.terminant);
    if (!overlap) throw ConfigError("overlap_variant: problem has no overlap terminant");
    const std::string v = config.require_string("problem", "overlap_variant");
    if (v == "squared") overlap->variant = OverlapVariant::squared;
    else if (v == "real_part") overlap->variant = OverlapVariant::real_part;
    else throw ConfigError("overlap_variant must be squared or real_part");
  }
  apply_objective_overrides(config, p.objective);
  if (config.has("problem", "forbidden_penalty")) {
    if (!entry.forbidden_projector)
      throw ConfigError(id + " has no forbidden subspace defined");
    apply_forbidden_penalty(p, *entry.forbidden_projector,
                            config.get_double("problem", "forbidden_penalty", -1.0));
  }
  if (config.get_string("problem", "representation", "state") == "density") {
    const auto* overlap = std::get_if<OverlapTerminant>(&p.objective.terminant);
    if (!overlap) throw ConfigError("density representation needs an overlap terminant");
    ObjectiveSpec obj = p.objective;
    obj.terminant = DensityOverlapTerminant{overlap->target * overlap->target.adjoint()};
    obj.lambda_u = 0.0;
    out.density = DensityProblem{p.system, p.psi0 * p.psi0.adjoint(), obj};
  } else {
    out.state = std::move(p);
  }
  out.u0 = build_initial_control(config, grid, entry.default_control);
  return out;
}

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NumericError("cannot write " + path.string());
  out << content;
}

std::string trace_csv(const OptimizationTrace& trace) {
  std::string out = "k,J,terminant,fluence,state_penalty,max_du,adjustments\n";
  for (const auto& it : trace.iterations) {
    out += std::to_string(it.k) + "," + format_g17(it.objective) + "," +
           format_g17(it.terminant) + "," + format_g17(it.fluence) + "," +
           format_g17(it.state_penalty) + "," + format_g17(it.max_control_change) + "," +
           std::to_string(it.adjustments) + "\n";
  }
  return out;
}

std::string pulse_csv(const ControlField& u) {
  std::string out = "t_mid";
  for (int l = 0; l < u.channels(); ++l) out += ",u_" + std::to_string(l + 1);
  out += "\n";
  for (int j = 0; j < u.samples(); ++j) {
    out += format_g17(u.grid.midpoint(j));
    for (int l = 0; l < u.channels(); ++l) out += "," + format_g17(u.values(l, j));
    out += "\n";
  }
  return out;
}

std::string spectrum_csv(const ControlField& u) {
  std::string out = "omega";
  for (int l = 0; l < u.channels(); ++l) out += ",power_" + std::to_string(l + 1);
  out += "\n";
  const int n = u.samples();
  std::vector<RealVector> power(u.channels());
  for (int l = 0; l < u.channels(); ++l) {
    const RealVector row = u.values.row(l).matrix().transpose();
    power[l] = power_spectrum(row);
    // Parseval sanity: sum |u|^2 == (1/N) sum |u_hat|^2.
    const double lhs = row.squaredNorm();
    const double rhs = power[l].sum() / n;
    if (std::abs(lhs - rhs) > 1e-10 * (1.0 + lhs))
      throw NumericError("spectrum: Parseval residual above 1e-10");
  }
  for (int k = 0; k < n; ++k) {
    out += format_g17(2.0 * M_PI * k / u.grid.horizon);
    for (int l = 0; l < u.channels(); ++l) out += "," + format_g17(power[l](k));
    out += "\n";
  }
  return out;
}

std::string summary_text(const std::string& command, const OptimizationTrace* trace,
                         double wall_ms, std::uint64_t seed, const Config& config) {
  std::string out;
  out += "command = " + command + "\n";
  if (trace) {
    out += "status = " + std::string(to_string(trace->status)) + "\n";
    out += "iterations = " + std::to_string(trace->iterations.size() - 1) + "\n";
    out += "cauchy_problems = " + std::to_string(trace->cauchy_count) + "\n";
    out += "final_J = " + format_g17(trace->final_objective()) + "\n";
    out += "final_terminant = " + format_g17(trace->final_terminant()) + "\n";
    if (!trace->note.empty()) out += "note = " + trace->note + "\n";
  }
  out += "wall_ms = " + format_g17(wall_ms) + "\n";
  out += "seed = " + std::to_string(seed) + "\n";
  out += "--- config echo ---\n" + config.echo();
  return out;
}

int exit_code_for(RunStatus status) {
  switch (status) {
    case RunStatus::converged:
    case RunStatus::max_iters:
      return 0;
    case RunStatus::converged_with_warning:
    case RunStatus::stalled:
      return 4;
    case RunStatus::failed:
      return 3;
  }
  return 3;
}

SigmaSpec parse_sigma(Config& config) {
  SigmaSpec sigma;
  const std::string kind = config.get_string("method", "sigma", "zero");
  if (kind == "zero") {
    sigma.kind = SigmaSpec::Kind::zero;
  } else if (kind == "exponential") {
    sigma.kind = SigmaSpec::Kind::exponential;
    sigma.alpha = config.get_double("method", "sigma_alpha", -1.0);
    sigma.beta = config.get_double("method", "sigma_beta", -1.0);
    sigma.gamma = config.get_double("method", "sigma_gamma", 1.0);
  } else {
    throw ConfigError("unknown sigma kind: " + kind);
  }
  return sigma;
}

OptimizationTrace dispatch_optimize(const std::string& method, LoadedProblem& lp,
                                    Config& config, std::uint64_t seed) {
  const ProblemCatalogEntry* entry =
      lp.id == "inline" ? nullptr : &catalog_entry(lp.id);
  KrotovOptions opts;
  opts.gamma_u = config.get_double("method", "gamma_u",
                                   entry ? entry->default_gamma_u : 1.0);
  opts.max_iters = config.get_int("method", "max_iters",
                                  entry ? entry->default_max_iters : 200);
  opts.tol_dJ = config.get_double("method", "tol_dj", 1e-8);
  opts.form = config.get_string("method", "form", "gamma") == "lambda"
                  ? KrotovForm::lambda_u_form
                  : KrotovForm::gamma_form;
  opts.sigma = parse_sigma(config);

  if (method == "krotov1") {
    if (lp.density) return krotov1_density(*lp.density, lp.u0, opts);
    if (!lp.state) throw ConfigError("krotov1 needs a state problem");
    return krotov1_schrodinger(*lp.state, lp.u0, opts);
  }
  if (method == "krotov2") {
    if (lp.ensemble) return krotov2_ensemble(*lp.ensemble, lp.u0, opts);
    if (!lp.state) throw ConfigError("krotov2 needs a state or ensemble problem");
    EnsembleProblem ep{lp.state->system, Ensemble{{lp.state->psi0}, {}, {}},
                       lp.state->objective};
    return krotov2_ensemble(ep, lp.u0, opts);
  }
  if (method == "krotov_spectral") {
    SpectralConstraint constraint;
    const auto omegas = config.get_double_list("method", "spec_omegas");
    const auto sigmas = config.get_double_list("method", "spec_sigmas");
    const auto weights = config.get_double_list("method", "spec_weights");
    if (omegas.size() != sigmas.size() || omegas.size() != weights.size())
      throw ConfigError("krotov_spectral: spec_omegas/spec_sigmas/spec_weights sizes differ");
    for (size_t i = 0; i < omegas.size(); ++i)
      constraint.components.push_back({omegas[i], sigmas[i], weights[i]});
    constraint.expansion_rank = config.get_int("method", "spec_rank", 12);
    if (lp.ensemble) return krotov_spectral(*lp.ensemble, lp.u0, constraint, opts.gamma_u, opts);
    if (!lp.state) throw ConfigError("krotov_spectral needs a state problem");
    return krotov_spectral(*lp.state, lp.u0, constraint, opts.gamma_u, opts);
  }
  if (method == "zhu_rabitz") {
    if (!lp.state) throw ConfigError("zhu_rabitz needs a state problem");
    return zhu_rabitz(*lp.state, lp.u0, opts.max_iters, opts.tol_dJ);
  }
  if (method == "maday_turinici") {
    if (!lp.state) throw ConfigError("maday_turinici needs a state problem");
    MadayTuriniciParams params;
    params.delta = config.get_double("method", "delta", 1.0);
    params.eta = config.get_double("method", "eta", 0.0);
    return maday_turinici(*lp.state, lp.u0, params, opts.max_iters, opts.tol_dJ);
  }
  if (method == "grape") {
    GrapeOptions gopts;
    gopts.max_iters = opts.max_iters;
    gopts.tol_dJ = config.get_double("method", "grape_tol", 1e-10);
    gopts.optimizer = config.get_string("method", "optimizer", "quasi_newton") == "fixed_step"
                          ? GrapeOptions::Optimizer::fixed_step
                          : GrapeOptions::Optimizer::quasi_newton;
    gopts.step_size = config.get_double("method", "step_size", 0.5);
    if (lp.ensemble) return grape(*lp.ensemble, lp.u0, gopts);
    if (!lp.state) throw ConfigError("grape needs a state or ensemble problem");
    return grape(*lp.state, lp.u0, gopts);
  }
  if (method == "steepest_descent") {
    if (!lp.state) throw ConfigError("steepest_descent needs a state problem");
    SteepestDescentOptions sopts;
    sopts.max_iters = opts.max_iters;
    if (config.has("method", "band_min") || config.has("method", "band_max"))
      sopts.band = std::make_pair(config.get_double("method", "band_min", 0.0),
                                  config.get_double("method", "band_max", kInf));
    return steepest_descent(*lp.state, lp.u0, sopts);
  }
  if (method == "crab") {
    if (!lp.state) throw ConfigError("crab needs a state problem");
    CrabOptions copts;
    copts.n_terms = config.get_int("method", "crab_terms", 4);
    copts.iters = config.get_int("method", "crab_iters", 400);
    copts.simplex_scale = config.get_double("method", "crab_scale", 0.1);
    copts.seed = seed;
    return crab_optimize(*lp.state, lp.u0, copts);
  }
  if (method == "krotov_gpe") {
    if (!lp.gpe) throw ConfigError("krotov_gpe needs a GPE problem");
    const GpeUpdate update = config.get_string("method", "update", "simplified") == "full"
                                 ? GpeUpdate::full
                                 : GpeUpdate::simplified;
    return krotov_gpe(*lp.gpe, lp.u0, opts.gamma_u, opts.sigma, update, opts);
  }
  throw ConfigError("unknown method: " + method);
}

RunResult do_optimize(const std::string& command, Config& config) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t seed =
      static_cast<std::uint64_t>(config.get_int("output", "seed", 0));
  const fs::path out_dir = config.get_string("output", "dir", "run_out");
  const bool quiet = config.get_bool("output", "quiet", false);
  const std::string method = config.require_string("method", "name");

  LoadedProblem lp = load_problem(config);
  OptimizationTrace trace = dispatch_optimize(method, lp, config, seed);
  config.require_all_consumed();

  fs::create_directories(out_dir);
  write_file(out_dir / "trace.csv", trace_csv(trace));
  write_file(out_dir / "pulse.csv", pulse_csv(trace.final_control));
  write_file(out_dir / "spectrum.csv", spectrum_csv(trace.final_control));
  const double wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  write_file(out_dir / "summary.txt", summary_text(command, &trace, wall_ms, seed, config));

  if (!quiet)
    std::cout << method << " on " << lp.id << ": status=" << to_string(trace.status)
              << " J=" << format_g17(trace.final_objective())
              << " terminant=" << format_g17(trace.final_terminant())
              << " cauchy=" << trace.cauchy_count << "\n";
  return {exit_code_for(trace.status), trace.note, out_dir};
}

RunResult do_propagate(Config& config) {
  const fs::path out_dir = config.get_string("output", "dir", "run_out");
  const std::uint64_t seed =
      static_cast<std::uint64_t>(config.get_int("output", "seed", 0));
  const bool quiet = config.get_bool("output", "quiet", false);
  LoadedProblem lp = load_problem(config);
  config.require_all_consumed();
  fs::create_directories(out_dir);

  std::string out;
  if (lp.state) {
    const StateTrajectory traj =
        propagate_state(lp.state->system, lp.u0, QuantumState(lp.state->psi0));
    out = "t";
    for (int i = 0; i < lp.state->system.dim(); ++i) out += ",pop_" + std::to_string(i);
    out += ",norm_residual\n";
    for (size_t j = 0; j < traj.samples.size(); ++j) {
      out += format_g17(traj.grid.node(static_cast<int>(j)));
      for (int i = 0; i < traj.samples[j].size(); ++i)
        out += "," + format_g17(std::norm(traj.samples[j](i)));
      out += "," + format_g17(std::abs(traj.samples[j].norm() - 1.0)) + "\n";
    }
  } else if (lp.density) {
    const DensityTrajectory traj =
        propagate_density(lp.density->system, lp.u0, DensityMatrix(lp.density->rho0));
    out = "t";
    for (int i = 0; i < lp.density->system.dim(); ++i) out += ",pop_" + std::to_string(i);
    out += ",trace_residual\n";
    for (size_t j = 0; j < traj.samples.size(); ++j) {
      out += format_g17(traj.grid.node(static_cast<int>(j)));
      for (int i = 0; i < traj.samples[j].rows(); ++i)
        out += "," + format_g17(traj.samples[j](i, i).real());
      out += "," + format_g17(std::abs(traj.samples[j].trace().real() - 1.0)) + "\n";
    }
  } else if (lp.gpe) {
    const auto nodes = gpe_propagate(*lp.gpe, lp.u0);
    const double dx = lp.gpe->grid.dx();
    out = "t,norm_residual,target_overlap\n";
    for (size_t j = 0; j < nodes.size(); ++j) {
      const double norm = l2_norm(nodes[j], dx);
      const double ov = std::norm(l2_inner(lp.gpe->psi_target, nodes[j], dx));
      out += format_g17(lp.u0.grid.node(static_cast<int>(j))) + "," +
             format_g17(std::abs(norm - 1.0)) + "," + format_g17(ov) + "\n";
    }
  } else {
    throw ConfigError("propagate: ensemble problems not supported; pick a member");
  }
  write_file(out_dir / "populations.csv", out);
  write_file(out_dir / "pulse.csv", pulse_csv(lp.u0));
  write_file(out_dir / "summary.txt", summary_text("propagate", nullptr, 0.0, seed, config));
  if (!quiet) std::cout << "propagate " << lp.id << ": wrote populations.csv\n";
  return {0, "", out_dir};
}

RunResult do_controllability(Config& config) {
  const fs::path out_dir = config.get_string("output", "dir", "run_out");
  const bool quiet = config.get_bool("output", "quiet", false);
  (void)config.get_int("output", "seed", 0);
  const int depth_cap = config.get_int("method", "depth_cap", -1);
  LoadedProblem lp = load_problem(config);
  config.require_all_consumed();

  const ControlSystem* system = nullptr;
  if (lp.state) system = &lp.state->system;
  else if (lp.density) system = &lp.density->system;
  else if (lp.ensemble) system = &lp.ensemble->system;
  else throw ConfigError("controllability applies to finite-dimensional systems only");

  const LieClosureReport report = projective_controllability_verdict(*system, depth_cap);
  fs::create_directories(out_dir);
  std::string out;
  out += "verdict = " + std::string(to_string(report.verdict)) + "\n";
  out += "dimension = " + std::to_string(report.dimension) + "\n";
  out += "depth_reached = " + std::to_string(report.depth_reached) + "\n";
  out += "closed = " + std::string(report.closed ? "true" : "false") + "\n";
  out += "--- config echo ---\n" + config.echo();
  write_file(out_dir / "controllability.txt", out);
  if (!quiet)
    std::cout << "controllability " << lp.id << ": " << to_string(report.verdict)
              << " (dim " << report.dimension << ")\n";
  return {0, to_string(report.verdict), out_dir};
}

RunResult do_spectrum(Config& config) {
  const fs::path out_dir = config.get_string("output", "dir", "run_out");
  const bool quiet = config.get_bool("output", "quiet", false);
  const std::string pulse_path = config.require_string("spectrum", "pulse");
  const double horizon = config.get_double("spectrum", "T", 0.0);
  config.require_all_consumed();

  std::ifstream in(pulse_path);
  if (!in) throw ConfigError("cannot open pulse file: " + pulse_path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::vector<double>> columns;
  std::vector<double> times;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto parts = split(line, ',');
    times.push_back(std::stod(parts[0]));
    if (columns.empty()) columns.resize(parts.size() - 1);
    for (size_t c = 1; c < parts.size(); ++c) columns[c - 1].push_back(std::stod(parts[c]));
  }
  if (times.size() < 2) throw ConfigError("pulse file has fewer than two samples");
  const int n = static_cast<int>(times.size());
  const double dt = times[1] - times[0];
  const double t_total = horizon > 0.0 ? horizon : dt * n;

  RealArray values(columns.size(), n);
  for (size_t l = 0; l < columns.size(); ++l)
    for (int j = 0; j < n; ++j) values(static_cast<int>(l), j) = columns[l][j];
  ControlField u(TimeGrid(t_total, n), std::move(values));

  fs::create_directories(out_dir);
  write_file(out_dir / "spectrum.csv", spectrum_csv(u));
  if (!quiet) std::cout << "spectrum: wrote spectrum.csv (" << n << " bins)\n";
  return {0, "", out_dir};
}

RunResult do_compare(Config& config) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path out_dir = config.get_string("output", "dir", "run_out");
  const std::uint64_t seed =
      static_cast<std::uint64_t>(config.get_int("output", "seed", 0));
  const bool quiet = config.get_bool("output", "quiet", false);
  const std::string methods_str = config.require_string("compare", "methods");

  std::vector<std::string> methods;
  for (const auto& m : split(methods_str, ','))
    if (!m.empty()) methods.push_back(m);
  if (methods.empty()) throw ConfigError("compare: empty method list");

  std::string table = "method,iterations,cauchy_problems,final_terminant,wall_ms\n";
  int worst_exit = 0;
  for (const auto& method : methods) {
    Config local = config;  // each method consumes its own copy
    LoadedProblem lp = load_problem(local);
    const auto m0 = std::chrono::steady_clock::now();
    OptimizationTrace trace = dispatch_optimize(method, lp, local, seed);
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - m0).count();
    table += method + "," + std::to_string(trace.iterations.size() - 1) + "," +
             std::to_string(trace.cauchy_count) + "," + format_g17(trace.final_terminant()) +
             "," + format_g17(ms) + "\n";
    worst_exit = std::max(worst_exit, exit_code_for(trace.status));
    config.merge_consumed(local);
    if (!quiet)
      std::cout << "compare " << method << ": terminant "
                << format_g17(trace.final_terminant()) << "\n";
  }
  config.require_all_consumed();
  fs::create_directories(out_dir);
  write_file(out_dir / "compare.csv", table);
  const double wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  write_file(out_dir / "summary.txt", summary_text("compare", nullptr, wall_ms, seed, config));
  return {worst_exit, "", out_dir};
}

}  // namespace

const char* to_string(RunStatus status) {
  switch (status) {
    case RunStatus::converged: return "converged";
    case RunStatus::max_iters: return "max_iters";
    case RunStatus::converged_with_warning: return "converged_with_warning";
    case RunStatus::stalled: return "stalled";
    case RunStatus::failed: return "failed";
  }
  return "failed";
}

std::string catalog_entry_config(const ProblemCatalogEntry& entry) {
  std::string method = "krotov1";
  if (entry.ensemble) method = "krotov2";
  if (entry.gpe) method = "krotov_gpe";
  std::string out;
  out += "[problem]\n";
  out += "id = " + entry.id + "\n";
  out += "[grid]\n";
  out += "T = " + format_g17(entry.default_grid.horizon) + "\n";
  out += "N = " + std::to_string(entry.default_grid.intervals) + "\n";
  out += "[method]\n";
  out += "name = " + method + "\n";
  out += "gamma_u = " + format_g17(entry.default_gamma_u) + "\n";
  out += "max_iters = " + std::to_string(entry.default_max_iters) + "\n";
  return out;
}

RunResult run_command(const std::string& command, Config config) {
  try {
    if (command == "optimize" || command == "gpe-optimize")
      return do_optimize(command, config);
    if (command == "propagate") return do_propagate(config);
    if (command == "controllability") return do_controllability(config);
    if (command == "spectrum") return do_spectrum(config);
    if (command == "compare") return do_compare(config);
    throw ConfigError("unknown command: " + command);
  } catch (const ConfigError& e) {
    return {2, e.what(), {}};
  } catch (const std::invalid_argument& e) {
    return {2, e.what(), {}};
  } catch (const NumericError& e) {
    return {3, e.what(), {}};
  }
}

}  // namespace qoc
