#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "podvms/fe_core.hpp"
#include "podvms/linalg.hpp"

namespace podvms {

/// Traveling-front benchmark flow on the unit square, time horizon [0, 1]:
///   u(x, y, t) = (2/pi) atan(-k (y - t)) sin(pi y)
///   v(x, y, t) = (2/pi) atan(-k (x - t)) sin(pi x)
/// with zero pressure. The front steepness k defaults to 500. The field is
/// divergence free (u is independent of x, v of y); the forcing below is the
/// closed-form momentum residual u_t - nu Lap(u) + (u.grad) u.
struct ManufacturedProblem {
  double nu = 1e-3;
  double steepness = 500.0;
};

std::array<double, 2> exact_velocity(const ManufacturedProblem& p, double x, double y, double t);
std::array<double, 2> exact_forcing(const ManufacturedProblem& p, double x, double y, double t);

VectorField velocity_field(const ManufacturedProblem& p);
VectorField forcing_field(const ManufacturedProblem& p);

/// Velocity samples at uniformly spaced times, stored as FE coefficient columns.
struct SnapshotSet {
  std::shared_ptr<const FeSpace> space;
  std::vector<Vec> columns;          // M+1 coefficient vectors
  std::vector<double> sample_times;  // i * delta_t
  double delta_t = 0.0;              // snapshot spacing
  double nu = 0.0;

  std::size_t count() const { return columns.size(); }
};

/// Nodal interpolants of the exact velocity at t_i = i * delta_t, i = 0..n_intervals.
SnapshotSet generate_snapshots(std::shared_ptr<const FeSpace> space, const ManufacturedProblem& problem,
                               double delta_t, int n_intervals);

// Snapshot archive ("PODSNAP1"): magic, then little-endian u64 {n_div, n_dof,
// n_columns}, f64 {delta_t, nu}, then the coefficient matrix column-major as f64.
void write_snapshots(const std::string& path, const SnapshotSet& snaps);
SnapshotSet read_snapshots(const std::string& path);

}  // namespace podvms
