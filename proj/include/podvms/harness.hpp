#pragma once

#include <array>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "podvms/integrator.hpp"
#include "podvms/pod.hpp"
#include "podvms/rom.hpp"
#include "podvms/run_config.hpp"

namespace podvms {

struct RegressionResult {
  double slope = 0.0;
  double intercept = 0.0;  // in log space
  double r_squared = 0.0;
};

/// Least squares on (log x, log y). Requires >= 2 strictly positive points.
RegressionResult loglog_regression(const std::vector<std::array<double, 2>>& points);

/// L2 distance at the final time between the reconstructed reduced solution
/// and the nodal interpolant of the exact velocity.
double final_l2_error(const Trajectory& traj, const ReducedModel& model, const ManufacturedProblem& problem);

struct SweepRow {
  double control = 0.0;   // dt, or R
  double error = 0.0;     // E for the dt sweep, E^2 for the cutoff sweep
  double tail = 0.0;      // weighted eigenvalue tail (cutoff sweep only)
  StabilityReport stability;
  long newton_total = 0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  RegressionResult regression;
  std::string config_echo;
};

/// Shared pipeline state for the sweeps: space, snapshots, basis, Riesz
/// factor, the forcing memo, and a slot for the reduced operators so repeated
/// sweeps over the same order assemble the convection tensor once.
struct SweepContext {
  std::shared_ptr<const FeSpace> space;
  ManufacturedProblem problem;
  SnapshotSet snapshots;
  std::shared_ptr<const PodBasis> basis;
  std::shared_ptr<const DualNormSolver> riesz;
  std::shared_ptr<ForcingCache> cache;

  struct OperatorSlot {
    std::mutex mutex;
    std::shared_ptr<const ReducedOperators> ops;
  };
  std::shared_ptr<OperatorSlot> operator_slot = std::make_shared<OperatorSlot>();
};

SweepContext build_sweep_context(const RunConfig& cfg);
SweepContext build_sweep_context(const RunConfig& cfg, std::shared_ptr<const PodBasis> basis);

/// Reduced operators at order r through the context slot (assembled on first
/// use, reused afterwards; a different order replaces the slot).
std::shared_ptr<const ReducedOperators> shared_operators(const SweepContext& ctx, std::size_t r);

/// Final-time error for decreasing time steps at fixed (r, R, alpha);
/// regression of log E against log dt. Rows are ordered by decreasing dt.
SweepReport dt_sweep(const RunConfig& cfg, const std::vector<double>& dt_set);
SweepReport dt_sweep(const SweepContext& ctx, const RunConfig& cfg, const std::vector<double>& dt_set);

/// Squared final-time error for increasing closure cutoffs R at fixed small
/// dt; regression of log E^2 against the log of the weighted eigenvalue tail
/// above R. Rows are ordered by increasing R.
SweepReport r_cutoff_sweep(const RunConfig& cfg, const std::vector<int>& r_set);
SweepReport r_cutoff_sweep(const SweepContext& ctx, const RunConfig& cfg, const std::vector<int>& r_set);

// CSV emission, 17 significant digits: `dt,error` / `R,tail,error_sq`.
void write_dt_sweep_csv(const std::string& path, const SweepReport& report);
void write_r_sweep_csv(const std::string& path, const SweepReport& report);

/// Plain-text block with the fitted slope and per-row stability outcome.
std::string sweep_summary(const SweepReport& report, const std::string& control_name);

std::string format_g17(double v);

}  // namespace podvms
