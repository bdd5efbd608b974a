// Command-line front end: snapshot generation, basis construction, reduced
// simulation, and the two convergence sweeps.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 4 I/O or archive-format error.

#include <cstdio>
#include <iostream>
#include <memory>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "podvms/errors.hpp"
#include "podvms/harness.hpp"
#include "podvms/integrator.hpp"
#include "podvms/manufactured.hpp"
#include "podvms/pod.hpp"
#include "podvms/rom.hpp"
#include "podvms/run_config.hpp"

namespace {

using namespace podvms;

struct Options {
  std::string config_path;
  std::string out_path;
  std::string snapshots_path;
  std::string basis_path;
  std::string model_out_path;
  bool check_invariants = false;
};

RunConfig load_config(const Options& opt) {
  RunConfig cfg = opt.config_path.empty() ? RunConfig{} : RunConfig::from_file(opt.config_path);
  if (!opt.snapshots_path.empty()) cfg.snapshots_path = opt.snapshots_path;
  if (!opt.basis_path.empty()) cfg.basis_path = opt.basis_path;
  if (!opt.out_path.empty()) cfg.out_path = opt.out_path;
  cfg.validate();
  return cfg;
}

class InvariantLog {
 public:
  void check(const std::string& name, bool ok, double value = 0.0, double bound = 0.0) {
    std::printf("  invariant %-46s %s", name.c_str(), ok ? "ok" : "FAILED");
    if (bound != 0.0) std::printf("  (%.3e vs %.3e)", value, bound);
    std::printf("\n");
    if (!ok) failed_ = true;
  }
  void finish() const {
    if (failed_) throw NumericalError("invariant checks failed");
  }

 private:
  bool failed_ = false;
};

void check_space_invariants(const FeSpace& sp, InvariantLog& log) {
  const Mesh& mesh = sp.mesh();
  double area = 0.0, min_area = 1.0;
  for (int t = 0; t < sp.n_triangles(); ++t) {
    const double a = mesh.signed_area(t);
    area += a;
    min_area = std::min(min_area, a);
  }
  log.check("triangle areas sum to 1", std::abs(area - 1.0) <= 1e-12, std::abs(area - 1.0), 1e-12);
  log.check("triangle orientation positive", min_area > 0.0);

  const Vec ones(sp.n_dof(), 1.0);
  log.check("mass volume identity", std::abs(sp.mass_inner(ones, ones) - 2.0) <= 1e-12,
            std::abs(sp.mass_inner(ones, ones) - 2.0), 1e-12);
  double max_row = 0.0;
  for (std::size_t i = 0; i < sp.n_dof(); ++i) max_row = std::max(max_row, std::abs(sp.stiffness().row_sum(i)));
  log.check("stiffness annihilates constants", max_row <= 1e-12, max_row, 1e-12);

  std::mt19937_64 rng(7);
  std::normal_distribution<double> dist;
  bool spd = true;
  for (int k = 0; k < 16 && spd; ++k) {
    Vec v(sp.n_dof());
    for (double& x : v) x = dist(rng);
    spd = sp.mass_inner(v, v) > 0.0;
  }
  log.check("mass positive definite (sampled)", spd);
}

void check_basis_invariants(const SnapshotSet& snaps, const PodBasis& basis, std::size_t r, InvariantLog& log) {
  const FeSpace& sp = *basis.space;
  double gram_err = 0.0;
  std::vector<Vec> weighted(basis.rank());
  for (std::size_t j = 0; j < basis.rank(); ++j) weighted[j] = sp.mass_apply(basis.modes[j]);
  for (std::size_t i = 0; i < basis.rank(); ++i)
    for (std::size_t j = i; j < basis.rank(); ++j) {
      const double g = dot(basis.modes[i], weighted[j]);
      gram_err = std::max(gram_err, std::abs(g - (i == j ? 1.0 : 0.0)));
    }
  log.check("mode L2 orthonormality", gram_err <= 1e-10, gram_err, 1e-10);

  bool descending = true;
  for (std::size_t j = 1; j < basis.eigenvalues.size(); ++j)
    descending = descending && basis.eigenvalues[j] <= basis.eigenvalues[j - 1];
  log.check("eigenvalues descending", descending);

  const std::size_t rr = std::min(r, basis.rank());
  const auto [l2_direct, l2_tail] = l2_truncation_check(snaps, basis, rr);
  const auto [h1_direct, h1_tail] = h1_truncation_check(snaps, basis, rr);
  const double floor = 1e-12 * basis.eigenvalues.front();
  const double l2_rel = std::abs(l2_direct - l2_tail) / std::max(l2_tail, floor);
  const double h1_rel = std::abs(h1_direct - h1_tail) / std::max(h1_tail, floor);
  std::printf("  truncation identity at r = %zu: L2 direct %.12e tail %.12e | H1 direct %.12e tail %.12e\n",
              rr, l2_direct, l2_tail, h1_direct, h1_tail);
  log.check("L2 truncation identity", l2_rel <= 1e-8, l2_rel, 1e-8);
  log.check("H1 truncation identity", h1_rel <= 1e-8, h1_rel, 1e-8);
}

void check_model_invariants(const ReducedModel& model, InvariantLog& log) {
  const std::size_t r = model.r;
  double max_t = 0.0, diag_t = 0.0, antisym = 0.0;
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) {
      diag_t = std::max(diag_t, std::abs(model.tensor(i, j, j)));
      for (std::size_t l = 0; l < r; ++l) {
        max_t = std::max(max_t, std::abs(model.tensor(i, j, l)));
        antisym = std::max(antisym, std::abs(model.tensor(i, j, l) + model.tensor(i, l, j)));
      }
    }
  log.check("convection tensor diagonal slots vanish", diag_t <= 1e-12 * std::max(max_t, 1e-300), diag_t,
            1e-12 * max_t);
  log.check("convection tensor antisymmetry", antisym <= 1e-12 * std::max(max_t, 1e-300), antisym, 1e-12 * max_t);

  std::mt19937_64 rng(11);
  std::normal_distribution<double> dist;
  double energy = 0.0;
  for (int k = 0; k < 20; ++k) {
    Vec a(r);
    for (double& x : a) x = dist(rng);
    Vec n(r, 0.0);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j) {
        const double w = a[i] * a[j];
        for (std::size_t l = 0; l < r; ++l) n[l] += w * model.tensor(i, j, l);
      }
    const double nrm = norm2(a);
    energy = std::max(energy, std::abs(dot(a, n)) / (nrm * nrm * nrm * std::max(max_t, 1e-300)));
  }
  log.check("convection energy neutrality (sampled)", energy <= 1e-10, energy, 1e-10);

  const std::size_t cut = static_cast<std::size_t>(model.closure.effective_cutoff());
  double edge = 0.0;
  for (std::size_t i = 0; i < cut; ++i)
    for (std::size_t j = 0; j < r; ++j) edge = std::max(edge, std::abs(model.vms(i, j)));
  const double kscale = std::max(model.gram_h1.max_abs(), 1e-300);
  log.check("closure matrix vanishes on retained block", edge <= 1e-12 * kscale, edge, 1e-12 * kscale);
}

int cmd_gen_snapshots(const Options& opt) {
  const RunConfig cfg = load_config(opt);
  const std::string out = cfg.out_path.empty() ? "snapshots.podsnap" : cfg.out_path;
  const auto space = build_space(cfg.n_div);
  const SnapshotSet snaps = generate_snapshots(space, cfg.problem(), cfg.snapshot_dt, cfg.n_snapshots);
  write_snapshots(out, snaps);
  std::printf("wrote %zu snapshots (n_div = %d, n_dof = %zu) to %s\n", snaps.count(), cfg.n_div,
              space->n_dof(), out.c_str());
  if (opt.check_invariants) {
    InvariantLog log;
    check_space_invariants(*space, log);
    double max_energy = 0.0;
    for (const Vec& col : snaps.columns) max_energy = std::max(max_energy, space->mass_inner(col, col));
    log.check("snapshot energies bounded", max_energy <= 2.0, max_energy, 2.0);
    log.finish();
  }
  return 0;
}

int cmd_build_pod(const Options& opt) {
  const RunConfig cfg = load_config(opt);
  const std::string in = cfg.snapshots_path.empty() ? "snapshots.podsnap" : cfg.snapshots_path;
  const std::string out = cfg.out_path.empty() ? "basis.podbas" : cfg.out_path;

  const SnapshotSet snaps = read_snapshots(in);
  const DenseMatrix corr = correlation_matrix(snaps);
  const EigenDecomposition eig = sym_eig_descending(corr);
  const PodBasis basis = build_basis(snaps, eig, cfg.rank_tol);
  write_basis(out, basis, snaps.delta_t, snaps.nu);

  std::printf("basis rank d = %zu (from %zu snapshots) written to %s\n", basis.rank(), snaps.count(),
              out.c_str());
  std::printf("%-6s %-24s %-24s\n", "mode", "eigenvalue", "h1_norm_sq");
  for (std::size_t j = 0; j < basis.rank(); ++j)
    std::printf("%-6zu %-24.16e %-24.16e\n", j + 1, basis.eigenvalues[j], basis.h1_norms_sq[j]);

  if (opt.check_invariants) {
    InvariantLog log;
    check_basis_invariants(snaps, basis, static_cast<std::size_t>(cfg.r), log);
    log.finish();
  }
  return 0;
}

int cmd_simulate(const Options& opt) {
  const RunConfig cfg = load_config(opt);
  const std::string out = cfg.out_path.empty() ? "trajectory.csv" : cfg.out_path;

  std::shared_ptr<const PodBasis> basis;
  if (!cfg.basis_path.empty()) {
    basis = std::make_shared<const PodBasis>(read_basis(cfg.basis_path));
    if (basis->space->n_div() != cfg.n_div)
      throw ConfigError("basis archive mesh (n_div = " + std::to_string(basis->space->n_div()) +
                        ") does not match the configured n_div = " + std::to_string(cfg.n_div));
  } else {
    const auto space = build_space(cfg.n_div);
    const SnapshotSet snaps = generate_snapshots(space, cfg.problem(), cfg.snapshot_dt, cfg.n_snapshots);
    const EigenDecomposition eig = sym_eig_descending(correlation_matrix(snaps));
    basis = std::make_shared<const PodBasis>(build_basis(snaps, eig, cfg.rank_tol));
  }
  if (static_cast<std::size_t>(cfg.r) > basis->rank())
    throw ConfigError("r = " + std::to_string(cfg.r) + " exceeds the basis rank " + std::to_string(basis->rank()));

  const ReducedModel model = build_reduced_model(basis, static_cast<std::size_t>(cfg.r), cfg.closure(),
                                                 cfg.problem());
  const Trajectory traj = simulate(model, cfg.dt, cfg.t_final);
  write_trajectory_csv(out, traj);
  if (!opt.model_out_path.empty()) write_reduced_model(opt.model_out_path, model);

  const StabilityReport stab = stability_check(traj, model, cfg.nu);
  const double err = final_l2_error(traj, model, cfg.problem());
  std::printf("simulated %zu steps at dt = %s (variant %s, r = %d, R = %d, alpha = %g)\n",
              traj.states.size() - 1, format_g17(cfg.dt).c_str(), to_string(cfg.variant).c_str(), cfg.r,
              cfg.cutoff, cfg.alpha);
  std::printf("final-time L2 error vs exact solution: %s\n", format_g17(err).c_str());
  std::printf("energy bound: lhs = %s  rhs = %s  -> %s\n", format_g17(stab.lhs).c_str(),
              format_g17(stab.rhs).c_str(), stab.holds ? "holds" : "VIOLATED");
  if (!stab.holds) throw NumericalError("energy bound violated");

  if (opt.check_invariants) {
    InvariantLog log;
    check_model_invariants(model, log);
    log.finish();
  }
  return 0;
}

int cmd_sweep_dt(const Options& opt) {
  const RunConfig cfg = load_config(opt);
  const std::string out = cfg.out_path.empty() ? "sweep_dt.csv" : cfg.out_path;

  SweepContext ctx = cfg.basis_path.empty()
                         ? build_sweep_context(cfg)
                         : build_sweep_context(cfg, std::make_shared<const PodBasis>(read_basis(cfg.basis_path)));
  const SweepReport report = dt_sweep(ctx, cfg, cfg.sweep_dt_set);
  write_dt_sweep_csv(out, report);
  std::fputs(sweep_summary(report, "dt").c_str(), stdout);
  std::printf("wrote %s\n", out.c_str());

  for (const auto& row : report.rows)
    if (!row.stability.holds) throw NumericalError("energy bound violated in sweep run");
  if (opt.check_invariants) {
    InvariantLog log;
    const ReducedModel model =
        build_reduced_model(ctx.basis, static_cast<std::size_t>(cfg.r), cfg.closure(), ctx.problem,
                            ctx.riesz, ctx.cache, shared_operators(ctx, static_cast<std::size_t>(cfg.r)));
    check_model_invariants(model, log);
    log.finish();
  }
  return 0;
}

int cmd_sweep_r(const Options& opt) {
  const RunConfig cfg = load_config(opt);
  const std::string out = cfg.out_path.empty() ? "sweep_R.csv" : cfg.out_path;

  SweepContext ctx = cfg.basis_path.empty()
                         ? build_sweep_context(cfg)
                         : build_sweep_context(cfg, std::make_shared<const PodBasis>(read_basis(cfg.basis_path)));
  const SweepReport report = r_cutoff_sweep(ctx, cfg, cfg.sweep_r_set);
  write_r_sweep_csv(out, report);
  std::fputs(sweep_summary(report, "R").c_str(), stdout);
  std::printf("wrote %s\n", out.c_str());

  for (const auto& row : report.rows)
    if (!row.stability.holds) throw NumericalError("energy bound violated in sweep run");
  if (opt.check_invariants) {
    InvariantLog log;
    const ReducedModel model =
        build_reduced_model(ctx.basis, static_cast<std::size_t>(cfg.r), cfg.closure(), ctx.problem,
                            ctx.riesz, ctx.cache, shared_operators(ctx, static_cast<std::size_t>(cfg.r)));
    check_model_invariants(model, log);
    log.finish();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"variational-multiscale POD reduced-order modeling pipeline"};
  app.require_subcommand(1);

  Options opt;
  app.add_option("--config", opt.config_path, "configuration file (key = value lines)");
  app.add_option("--out", opt.out_path, "output path");
  app.add_option("--snapshots", opt.snapshots_path, "snapshot archive path");
  app.add_option("--basis", opt.basis_path, "basis archive path");
  app.add_flag("--check-invariants", opt.check_invariants, "run the inline property suite");

  auto* gen = app.add_subcommand("gen-snapshots", "sample the exact velocity into a snapshot archive");
  auto* pod = app.add_subcommand("build-pod", "build the orthonormal basis from a snapshot archive");
  auto* sim = app.add_subcommand("simulate", "integrate the reduced model and dump the trajectory");
  sim->add_option("--model-out", opt.model_out_path, "also write the reduced-model archive");
  auto* sdt = app.add_subcommand("sweep-dt", "final-time error for decreasing time steps");
  auto* swr = app.add_subcommand("sweep-R", "final-time error for increasing closure cutoffs");
  for (auto* sub : {gen, pod, sim, sdt, swr}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return cmd_gen_snapshots(opt);
    if (pod->parsed()) return cmd_build_pod(opt);
    if (sim->parsed()) return cmd_simulate(opt);
    if (sdt->parsed()) return cmd_sweep_dt(opt);
    if (swr->parsed()) return cmd_sweep_r(opt);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << std::endl;
    return 2;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << std::endl;
    return 4;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << std::endl;
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 3;
  }
  return 2;
}
