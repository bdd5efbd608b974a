#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "podvms/errors.hpp"
#include "podvms/manufactured.hpp"

using namespace podvms;

TEST_SUITE("manufactured") {

TEST_CASE("velocity vanishes on the front line and the side walls") {
  const ManufacturedProblem p;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const double x = uni(rng), t = uni(rng);
    CHECK(exact_velocity(p, x, t, t)[0] == 0.0);   // front line y = t
    CHECK(exact_velocity(p, x, 0.0, t)[0] == 0.0); // sin factor
    CHECK(std::abs(exact_velocity(p, x, 1.0, t)[0]) <= 1e-15);
    CHECK(exact_velocity(p, t, uni(rng), t)[1] == 0.0);
  }
}

TEST_CASE("velocity components depend on one coordinate only (solenoidal)") {
  const ManufacturedProblem p;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const double x1 = uni(rng), x2 = uni(rng), y1 = uni(rng), y2 = uni(rng), t = uni(rng);
    CHECK(exact_velocity(p, x1, y1, t)[0] == exact_velocity(p, x2, y1, t)[0]);
    CHECK(exact_velocity(p, x1, y1, t)[1] == exact_velocity(p, x1, y2, t)[1]);
  }
}

TEST_CASE("forcing matches the finite-difference momentum residual") {
  const ManufacturedProblem p;  // nu = 1e-3, steepness 500
  const double h = 1e-5;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  int checked_smooth = 0;
  for (int k = 0; k < 1000; ++k) {
    const double x = uni(rng), y = uni(rng), t = uni(rng);
    const auto vel = [&](double dx, double dy, double dt, int c) {
      return exact_velocity(p, x + dx, y + dy, t + dt)[c];
    };
    double residual[2];
    double scale[2];
    for (int c = 0; c < 2; ++c) {
      const double u_t = oracles::central_diff([&](double d) { return vel(0, 0, d, c); }, h);
      const double u_xx = oracles::central_second_diff([&](double d) { return vel(d, 0, 0, c); }, h);
      const double u_yy = oracles::central_second_diff([&](double d) { return vel(0, d, 0, c); }, h);
      const double u_x = oracles::central_diff([&](double d) { return vel(d, 0, 0, c); }, h);
      const double u_y = oracles::central_diff([&](double d) { return vel(0, d, 0, c); }, h);
      const auto uv = exact_velocity(p, x, y, t);
      const double conv = uv[0] * u_x + uv[1] * u_y;
      const double fc = exact_forcing(p, x, y, t)[c];
      residual[c] = u_t - p.nu * (u_xx + u_yy) + conv - fc;
      scale[c] = 1.0 + std::abs(u_t) + p.nu * std::abs(u_xx + u_yy) + std::abs(conv) + std::abs(fc);
    }
    // The curvature of the front inflates the finite-difference truncation
    // error near y = t / x = t, so the comparison is scaled by the term sizes.
    CHECK(std::abs(residual[0]) <= 1e-5 * scale[0]);
    CHECK(std::abs(residual[1]) <= 1e-5 * scale[1]);

    // Away from the fronts the plain bound is attainable.
    if (std::abs(y - t) > 0.05 && std::abs(x - t) > 0.05) {
      ++checked_smooth;
      CHECK(std::abs(residual[0]) <= 1e-5);
      CHECK(std::abs(residual[1]) <= 1e-5);
    }
  }
  CHECK(checked_smooth > 500);
}

TEST_CASE("zero steepness collapses the flow and the forcing") {
  ManufacturedProblem p;
  p.steepness = 0.0;
  p.nu = 0.37;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int k = 0; k < 100; ++k) {
    const double x = uni(rng), y = uni(rng), t = uni(rng);
    CHECK(exact_velocity(p, x, y, t)[0] == 0.0);
    CHECK(exact_velocity(p, x, y, t)[1] == 0.0);
    CHECK(exact_forcing(p, x, y, t)[0] == 0.0);
    CHECK(exact_forcing(p, x, y, t)[1] == 0.0);
  }
}

TEST_CASE("snapshot generation: counts, times, nodal values") {
  const auto space = build_space(8);
  const ManufacturedProblem p;
  const SnapshotSet snaps = generate_snapshots(space, p, 1e-2, 100);
  CHECK(snaps.count() == 101);
  for (std::size_t i = 1; i < snaps.sample_times.size(); ++i) {
    CHECK(snaps.sample_times[i] > snaps.sample_times[i - 1]);
    CHECK(snaps.sample_times[i] == doctest::Approx(static_cast<double>(i) * 1e-2).epsilon(1e-14));
  }

  // column values are exact point samples
  const std::size_t S = space->scalar_dofs();
  for (const std::size_t col : {std::size_t(0), std::size_t(47), std::size_t(100)}) {
    const double t = snaps.sample_times[col];
    for (const std::size_t k : {std::size_t(0), S / 2, S - 1}) {
      const auto& xy = space->dof_coords()[k];
      const auto ex = exact_velocity(p, xy[0], xy[1], t);
      CHECK(snaps.columns[col][k] == ex[0]);
      CHECK(snaps.columns[col][S + k] == ex[1]);
    }
  }

  // snapshot energies bounded by the domain volume times max |u|^2
  for (const Vec& col : snaps.columns) CHECK(space->mass_inner(col, col) <= 2.0);
}

TEST_CASE("single-snapshot generation") {
  const auto space = build_space(4);
  const SnapshotSet snaps = generate_snapshots(space, ManufacturedProblem{}, 0.5, 0);
  CHECK(snaps.count() == 1);
  CHECK(snaps.sample_times[0] == 0.0);
}

TEST_CASE("generation rejects a window beyond the horizon") {
  const auto space = build_space(4);
  CHECK_THROWS_AS(generate_snapshots(space, ManufacturedProblem{}, 2e-2, 100), ConfigError);
}

TEST_CASE("snapshot archive round trip") {
  const auto space = build_space(4);
  const SnapshotSet snaps = generate_snapshots(space, ManufacturedProblem{}, 0.1, 5);
  const std::string path = "snaps_test.podsnap";
  write_snapshots(path, snaps);

  const SnapshotSet loaded = read_snapshots(path);
  CHECK(loaded.count() == snaps.count());
  CHECK(loaded.delta_t == snaps.delta_t);
  CHECK(loaded.nu == snaps.nu);
  CHECK(loaded.space->n_div() == 4);
  for (std::size_t i = 0; i < snaps.count(); ++i)
    for (std::size_t k = 0; k < snaps.columns[i].size(); ++k)
      CHECK(loaded.columns[i][k] == snaps.columns[i][k]);

  // writing the loaded set again reproduces the bytes
  const std::string path2 = "snaps_test2.podsnap";
  write_snapshots(path2, loaded);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  const std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  const std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(b1 == b2);
  std::remove(path.c_str());
  std::remove(path2.c_str());
}

TEST_CASE("snapshot archive rejects corruption") {
  const auto space = build_space(4);
  const SnapshotSet snaps = generate_snapshots(space, ManufacturedProblem{}, 0.1, 2);
  const std::string path = "snaps_bad.podsnap";
  write_snapshots(path, snaps);

  // corrupt the magic
  {
    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(0);
    f.write("XXXXXXXX", 8);
  }
  CHECK_THROWS_AS(read_snapshots(path), IoError);
  CHECK_THROWS_WITH_AS(read_snapshots(path), doctest::Contains("snaps_bad.podsnap"), IoError);

  // rewrite, then truncate
  write_snapshots(path, snaps);
  {
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    bytes.resize(bytes.size() / 2);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << bytes;
  }
  CHECK_THROWS_AS(read_snapshots(path), IoError);
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_snapshots("does_not_exist.podsnap"), IoError);
}

}  // TEST_SUITE
