#include "podvms/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "podvms/errors.hpp"

namespace podvms {

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

RegressionResult loglog_regression(const std::vector<std::array<double, 2>>& points) {
  if (points.size() < 2) throw ConfigError("loglog_regression: need at least 2 points");
  const double n = static_cast<double>(points.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (const auto& p : points) {
    if (!(p[0] > 0.0) || !(p[1] > 0.0))
      throw ConfigError("loglog_regression: points must be strictly positive");
    const double x = std::log(p[0]);
    const double y = std::log(p[1]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double det = n * sxx - sx * sx;
  if (!(std::abs(det) > 0.0)) throw ConfigError("loglog_regression: degenerate abscissae");
  RegressionResult res;
  res.slope = (n * sxy - sx * sy) / det;
  res.intercept = (sy - res.slope * sx) / n;
  const double ss_tot = syy - sy * sy / n;
  double ss_res = 0.0;
  for (const auto& p : points) {
    const double d = std::log(p[1]) - (res.intercept + res.slope * std::log(p[0]));
    ss_res += d * d;
  }
  res.r_squared = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
  return res;
}

double final_l2_error(const Trajectory& traj, const ReducedModel& model, const ManufacturedProblem& problem) {
  if (!model.basis) throw ConfigError("final_l2_error: model carries no basis");
  const FeSpace& sp = *model.basis->space;
  const double t_end = traj.times.back();

  Vec diff = interpolate(sp, velocity_field(problem), t_end).coeffs;
  const Vec& a = traj.final_state();
  for (std::size_t j = 0; j < model.r; ++j)
    if (a[j] != 0.0) axpy(-a[j], model.basis->modes[j], diff);
  return std::sqrt(sp.mass_inner(diff, diff));
}

namespace {

// Fixed-size worker pool over an index range; results land by index so the
// assembled report does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const unsigned hw = std::thread::hardware_concurrency();
  const std::size_t workers = std::min<std::size_t>(n, hw == 0 ? 1 : hw);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::string echo_config(const RunConfig& cfg, std::size_t r) {
  std::ostringstream os;
  os << "n_div=" << cfg.n_div << " nu=" << cfg.nu << " r=" << r << " R=" << cfg.cutoff
     << " alpha=" << cfg.alpha << " variant=" << to_string(cfg.variant);
  return os.str();
}

}  // namespace

SweepContext build_sweep_context(const RunConfig& cfg) {
  SweepContext ctx;
  ctx.space = build_space(cfg.n_div);
  ctx.problem = cfg.problem();
  ctx.snapshots = generate_snapshots(ctx.space, ctx.problem, cfg.snapshot_dt, cfg.n_snapshots);
  const EigenDecomposition eig = sym_eig_descending(correlation_matrix(ctx.snapshots));
  ctx.basis = std::make_shared<const PodBasis>(build_basis(ctx.snapshots, eig, cfg.rank_tol));
  ctx.riesz = std::make_shared<const DualNormSolver>(*ctx.space);
  ctx.cache = std::make_shared<ForcingCache>();
  return ctx;
}

SweepContext build_sweep_context(const RunConfig& cfg, std::shared_ptr<const PodBasis> basis) {
  if (!basis) throw ConfigError("build_sweep_context: null basis");
  if (basis->space->n_div() != cfg.n_div)
    throw ConfigError("basis archive mesh (n_div = " + std::to_string(basis->space->n_div()) +
                      ") does not match the configured n_div = " + std::to_string(cfg.n_div));
  SweepContext ctx;
  ctx.space = basis->space;
  ctx.problem = cfg.problem();
  ctx.snapshots = generate_snapshots(ctx.space, ctx.problem, cfg.snapshot_dt, cfg.n_snapshots);
  ctx.basis = std::move(basis);
  ctx.riesz = std::make_shared<const DualNormSolver>(*ctx.space);
  ctx.cache = std::make_shared<ForcingCache>();
  return ctx;
}

std::shared_ptr<const ReducedOperators> shared_operators(const SweepContext& ctx, std::size_t r) {
  if (!ctx.operator_slot) return std::make_shared<const ReducedOperators>(assemble_reduced_operators(*ctx.basis, r));
  std::lock_guard<std::mutex> lock(ctx.operator_slot->mutex);
  if (!ctx.operator_slot->ops || ctx.operator_slot->ops->r != r)
    ctx.operator_slot->ops = std::make_shared<const ReducedOperators>(assemble_reduced_operators(*ctx.basis, r));
  return ctx.operator_slot->ops;
}

SweepReport dt_sweep(const RunConfig& cfg, const std::vector<double>& dt_set) {
  return dt_sweep(build_sweep_context(cfg), cfg, dt_set);
}

SweepReport dt_sweep(const SweepContext& ctx, const RunConfig& cfg, const std::vector<double>& dt_set) {
  if (dt_set.size() < 2) throw ConfigError("dt_sweep: need at least 2 time steps for the regression");
  const std::size_t r = static_cast<std::size_t>(cfg.r);
  const ReducedModel model = build_reduced_model(ctx.basis, r, cfg.closure(), ctx.problem, ctx.riesz,
                                                 ctx.cache, shared_operators(ctx, r));

  std::vector<double> dts = dt_set;
  std::sort(dts.begin(), dts.end(), std::greater<double>());

  SweepReport report;
  report.rows.resize(dts.size());
  report.config_echo = echo_config(cfg, r);
  parallel_for(dts.size(), [&](std::size_t i) {
    const Trajectory traj = simulate(model, dts[i], cfg.t_final);
    SweepRow row;
    row.control = dts[i];
    row.error = final_l2_error(traj, model, ctx.problem);
    row.stability = stability_check(traj, model, ctx.problem.nu);
    for (const int it : traj.newton_iters) row.newton_total += it;
    report.rows[i] = row;
  });

  std::vector<std::array<double, 2>> pts;
  pts.reserve(report.rows.size());
  for (const auto& row : report.rows) pts.push_back({row.control, row.error});
  report.regression = loglog_regression(pts);
  return report;
}

SweepReport r_cutoff_sweep(const RunConfig& cfg, const std::vector<int>& r_set) {
  return r_cutoff_sweep(build_sweep_context(cfg), cfg, r_set);
}

SweepReport r_cutoff_sweep(const SweepContext& ctx, const RunConfig& cfg, const std::vector<int>& r_set) {
  if (r_set.size() < 2) throw ConfigError("r_cutoff_sweep: need at least 2 cutoffs for the regression");
  const std::size_t r = static_cast<std::size_t>(cfg.r);
  for (const int cut : r_set)
    if (cut < 0 || static_cast<std::size_t>(cut) > r)
      throw ConfigError("r_cutoff_sweep: cutoff R = " + std::to_string(cut) + " outside [0, r = " +
                        std::to_string(r) + "]");

  // The reduced operators are shared across cutoffs; only the closure matrix
  // changes per run.
  RunConfig base = cfg;
  base.variant = ClosureVariant::kVms;
  const ReducedModel shared =
      build_reduced_model(ctx.basis, r, ClosureConfig{ClosureVariant::kVms, cfg.alpha, 0},
                          ctx.problem, ctx.riesz, ctx.cache, shared_operators(ctx, r));

  std::vector<int> cutoffs = r_set;
  std::sort(cutoffs.begin(), cutoffs.end());

  SweepReport report;
  report.rows.resize(cutoffs.size());
  report.config_echo = echo_config(base, r);
  parallel_for(cutoffs.size(), [&](std::size_t i) {
    const int cut = cutoffs[i];
    ReducedModel model = shared;  // copies operators; forcing hook and basis shared
    model.closure = ClosureConfig{ClosureVariant::kVms, cfg.alpha, cut};
    model.closure.validate(r);
    model.vms = vms_matrix(model.gram_h1, static_cast<std::size_t>(cut));

    const Trajectory traj = simulate(model, cfg.sweep_r_dt, cfg.t_final);
    const double err = final_l2_error(traj, model, ctx.problem);

    SweepRow row;
    row.control = static_cast<double>(cut);
    row.error = err * err;
    row.tail = 0.0;
    for (std::size_t j = ctx.basis->rank(); j-- > static_cast<std::size_t>(cut);)
      row.tail += ctx.basis->h1_norms_sq[j] * ctx.basis->eigenvalues[j];
    row.stability = stability_check(traj, model, ctx.problem.nu);
    for (const int it : traj.newton_iters) row.newton_total += it;
    report.rows[i] = row;
  });

  std::vector<std::array<double, 2>> pts;
  pts.reserve(report.rows.size());
  for (const auto& row : report.rows) pts.push_back({row.tail, row.error});
  report.regression = loglog_regression(pts);
  return report;
}

void write_dt_sweep_csv(const std::string& path, const SweepReport& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "dt,error\n";
  for (const auto& row : report.rows) out << format_g17(row.control) << ',' << format_g17(row.error) << "\n";
  if (!out) throw IoError("write failure on '" + path + "'");
}

void write_r_sweep_csv(const std::string& path, const SweepReport& report) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "R,tail,error_sq\n";
  for (const auto& row : report.rows)
    out << static_cast<int>(row.control) << ',' << format_g17(row.tail) << ',' << format_g17(row.error) << "\n";
  if (!out) throw IoError("write failure on '" + path + "'");
}

std::string sweep_summary(const SweepReport& report, const std::string& control_name) {
  std::ostringstream os;
  os << "sweep over " << control_name << " [" << report.config_echo << "]\n";
  for (const auto& row : report.rows) {
    os << "  " << control_name << " = " << format_g17(row.control) << "  error = " << format_g17(row.error);
    if (row.tail > 0.0) os << "  tail = " << format_g17(row.tail);
    os << "  energy bound " << (row.stability.holds ? "holds" : "VIOLATED") << "\n";
  }
  os << "  fit: slope = " << format_g17(report.regression.slope)
     << "  intercept(log) = " << format_g17(report.regression.intercept)
     << "  r^2 = " << format_g17(report.regression.r_squared) << "\n";
  return os.str();
}

}  // namespace podvms
