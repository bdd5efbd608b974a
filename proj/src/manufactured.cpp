#include "podvms/manufactured.hpp"

#include <cmath>
#include <numbers>

#include "podvms/errors.hpp"
#include "podvms/io_detail.hpp"

namespace podvms {

namespace {

constexpr double kPi = std::numbers::pi;

// Front profile g(s) = (2/pi) atan(-k s) and its derivatives.
struct Front {
  double g, g1, g2;
};

Front front(double k, double s) {
  const double den = 1.0 + k * k * s * s;
  Front f;
  f.g = (2.0 / kPi) * std::atan(-k * s);
  f.g1 = -(2.0 * k / kPi) / den;
  f.g2 = (4.0 * k * k * k / kPi) * s / (den * den);
  return f;
}

}  // namespace

std::array<double, 2> exact_velocity(const ManufacturedProblem& p, double x, double y, double t) {
  const double u = front(p.steepness, y - t).g * std::sin(kPi * y);
  const double v = front(p.steepness, x - t).g * std::sin(kPi * x);
  return {u, v};
}

// Each component has the one-dimensional structure w(s, c) = g(c - t) sin(pi c)
// with c the cross coordinate, so
//   w_t   = -g' sin,
//   Lap w = g'' sin + 2 pi g' cos - pi^2 g sin,
//   (cross derivative) w_c = g' sin + pi g cos,
// and the convection term couples the two components through the other
// component's value at the transposed argument.
std::array<double, 2> exact_forcing(const ManufacturedProblem& p, double x, double y, double t) {
  const double k = p.steepness;
  const double nu = p.nu;

  const Front fy = front(k, y - t);
  const double sy = std::sin(kPi * y), cy = std::cos(kPi * y);
  const Front fx = front(k, x - t);
  const double sx = std::sin(kPi * x), cx = std::cos(kPi * x);

  const double u = fy.g * sy;
  const double v = fx.g * sx;

  const double u_t = -fy.g1 * sy;
  const double lap_u = fy.g2 * sy + 2.0 * kPi * fy.g1 * cy - kPi * kPi * fy.g * sy;
  const double u_y = fy.g1 * sy + kPi * fy.g * cy;

  const double v_t = -fx.g1 * sx;
  const double lap_v = fx.g2 * sx + 2.0 * kPi * fx.g1 * cx - kPi * kPi * fx.g * sx;
  const double v_x = fx.g1 * sx + kPi * fx.g * cx;

  return {u_t - nu * lap_u + v * u_y, v_t - nu * lap_v + u * v_x};
}

VectorField velocity_field(const ManufacturedProblem& p) {
  return [p](double x, double y, double t) { return exact_velocity(p, x, y, t); };
}

VectorField forcing_field(const ManufacturedProblem& p) {
  return [p](double x, double y, double t) { return exact_forcing(p, x, y, t); };
}

SnapshotSet generate_snapshots(std::shared_ptr<const FeSpace> space, const ManufacturedProblem& problem,
                               double delta_t, int n_intervals) {
  if (!space) throw ConfigError("generate_snapshots: null space");
  if (!(delta_t > 0.0)) throw ConfigError("generate_snapshots: snapshot spacing must be positive");
  if (n_intervals < 0) throw ConfigError("generate_snapshots: negative snapshot count");
  if (delta_t * n_intervals > 1.0 + 1e-12)
    throw ConfigError("generate_snapshots: sampling window exceeds the time horizon [0, 1]");

  SnapshotSet snaps;
  snaps.space = space;
  snaps.delta_t = delta_t;
  snaps.nu = problem.nu;
  const VectorField uex = velocity_field(problem);
  snaps.columns.reserve(n_intervals + 1);
  snaps.sample_times.reserve(n_intervals + 1);
  for (int i = 0; i <= n_intervals; ++i) {
    const double t = i * delta_t;
    snaps.sample_times.push_back(t);
    snaps.columns.push_back(interpolate(*space, uex, t).coeffs);
  }
  return snaps;
}

void write_snapshots(const std::string& path, const SnapshotSet& snaps) {
  if (!snaps.space) throw IoError("write_snapshots: snapshot set has no space");
  io::Writer w(path);
  w.magic("PODSNAP1");
  w.u64(static_cast<std::uint64_t>(snaps.space->n_div()));
  w.u64(snaps.space->n_dof());
  w.u64(snaps.count());
  w.f64(snaps.delta_t);
  w.f64(snaps.nu);
  for (const Vec& col : snaps.columns) w.f64_block(col);
}

SnapshotSet read_snapshots(const std::string& path) {
  io::Reader r(path);
  r.expect_magic("PODSNAP1");
  const auto n_div = r.u64();
  const auto n_dof = r.u64();
  const auto n_cols = r.u64();
  const double delta_t = r.f64();
  const double nu = r.f64();
  if (n_div < 2 || n_div > 100000) throw IoError(path + ": implausible n_div " + std::to_string(n_div));
  const std::uint64_t fine = 2 * n_div + 1;
  if (n_dof != 2 * fine * fine)
    throw IoError(path + ": n_dof " + std::to_string(n_dof) + " inconsistent with n_div " + std::to_string(n_div));
  if (n_cols == 0) throw IoError(path + ": empty snapshot archive");

  SnapshotSet snaps;
  snaps.space = build_space(static_cast<int>(n_div));
  snaps.delta_t = delta_t;
  snaps.nu = nu;
  snaps.columns.reserve(n_cols);
  for (std::uint64_t i = 0; i < n_cols; ++i) {
    snaps.columns.push_back(r.f64_block(n_dof));
    snaps.sample_times.push_back(static_cast<double>(i) * delta_t);
  }
  r.expect_eof();
  return snaps;
}

}  // namespace podvms
