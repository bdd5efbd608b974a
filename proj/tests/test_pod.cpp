#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "oracles.hpp"
#include "podvms/errors.hpp"
#include "podvms/manufactured.hpp"
#include "podvms/pod.hpp"

using namespace podvms;

namespace {

// Smooth random velocity fields give snapshot sets with a genuinely decaying
// spectrum, unlike white-noise coefficients.
SnapshotSet random_smooth_snapshots(std::shared_ptr<const FeSpace> space, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  SnapshotSet snaps;
  snaps.space = space;
  snaps.delta_t = 0.01;
  snaps.nu = 1.0;
  for (std::size_t i = 0; i < count; ++i) {
    double c[8];
    for (double& x : c) x = dist(rng);
    const VectorField f = [&c](double x, double y, double) {
      const double pi = 3.14159265358979323846;
      return std::array<double, 2>{
          c[0] * std::sin(pi * x) * std::sin(pi * y) + c[1] * x * y + c[2] * std::cos(pi * y) + c[3],
          c[4] * std::sin(2 * pi * x) * y + c[5] * x * x + c[6] * std::cos(pi * x) + c[7]};
    };
    snaps.columns.push_back(interpolate(*space, f, 0.0).coeffs);
    snaps.sample_times.push_back(static_cast<double>(i) * snaps.delta_t);
  }
  return snaps;
}

DenseMatrix random_symmetric(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist;
  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double v = dist(rng);
      a(i, j) = v;
      a(j, i) = v;
    }
  return a;
}

}  // namespace

TEST_SUITE("pod") {

TEST_CASE("correlation matrix of a single snapshot") {
  const auto space = build_space(4);
  SnapshotSet snaps = random_smooth_snapshots(space, 1, 7);
  const DenseMatrix k = correlation_matrix(snaps);
  CHECK(k.rows() == 1);
  const double norm_sq = space->mass_inner(snaps.columns[0], snaps.columns[0]);
  CHECK(k(0, 0) == doctest::Approx(norm_sq).epsilon(1e-13));
}

TEST_CASE("correlation matrix of two identical snapshots") {
  const auto space = build_space(4);
  SnapshotSet snaps = random_smooth_snapshots(space, 1, 8);
  snaps.columns.push_back(snaps.columns[0]);
  snaps.sample_times.push_back(snaps.delta_t);
  const DenseMatrix k = correlation_matrix(snaps);
  CHECK(k.rows() == 2);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(k(i, j) == doctest::Approx(k(0, 0)).epsilon(1e-13));
}

TEST_CASE("correlation trace equals the mean snapshot energy") {
  const auto space = build_space(4);
  const SnapshotSet snaps = random_smooth_snapshots(space, 12, 9);
  const DenseMatrix k = correlation_matrix(snaps);
  double trace = 0.0;
  for (std::size_t i = 0; i < k.rows(); ++i) trace += k(i, i);
  double mean_energy = 0.0;
  for (const Vec& col : snaps.columns) mean_energy += space->mass_inner(col, col);
  mean_energy /= static_cast<double>(snaps.count());
  CHECK(std::abs(trace - mean_energy) <= 1e-12 * std::max(1.0, mean_energy));
}

TEST_CASE("jacobi: identity matrix") {
  const EigenDecomposition eig = sym_eig_descending(DenseMatrix::identity(5));
  for (double v : eig.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("jacobi: 2x2 hand-computed spectrum") {
  DenseMatrix k(2, 2);
  k(0, 0) = 2; k(0, 1) = 1;
  k(1, 0) = 1; k(1, 1) = 2;
  const EigenDecomposition eig = sym_eig_descending(k);
  CHECK(eig.values[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(eig.values[1] == doctest::Approx(1.0).epsilon(1e-14));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(eig.vectors(0, 0) * inv_sqrt2 + eig.vectors(1, 0) * inv_sqrt2) ==
        doctest::Approx(1.0).epsilon(1e-13));  // |<z_1, (1,1)/sqrt(2)>| = 1
  CHECK(std::abs(eig.vectors(0, 1) * inv_sqrt2 - eig.vectors(1, 1) * inv_sqrt2) ==
        doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("jacobi: reconstruction and orthogonality on random matrices") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 20;
    const DenseMatrix a = random_symmetric(n, rng);
    const EigenDecomposition eig = sym_eig_descending(a);

    for (std::size_t j = 1; j < n; ++j) CHECK(eig.values[j] <= eig.values[j - 1]);

    double ortho = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += eig.vectors(k, i) * eig.vectors(k, j);
        ortho = std::max(ortho, std::abs(s - (i == j ? 1.0 : 0.0)));
      }
    CHECK(ortho <= 1e-12);

    double recon = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += eig.vectors(i, k) * eig.values[k] * eig.vectors(j, k);
        recon += (s - a(i, j)) * (s - a(i, j));
      }
    CHECK(std::sqrt(recon) <= 1e-11 * a.frobenius_norm());
  }
}

TEST_CASE("jacobi agrees with shifted power iteration on the top eigenvalue") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const DenseMatrix a = random_symmetric(15, rng);
    const EigenDecomposition eig = sym_eig_descending(a);
    const double ref = oracles::top_eigenvalue_power(a);
    CHECK(std::abs(eig.values[0] - ref) <= 1e-9 * std::max(1.0, std::abs(ref)));
  }
}

TEST_CASE("jacobi rejects asymmetric input") {
  DenseMatrix a(2, 2);
  a(0, 0) = 1; a(0, 1) = 2;
  a(1, 0) = 3; a(1, 1) = 1;
  CHECK_THROWS_AS(sym_eig_descending(a), NumericalError);
}

TEST_CASE("basis from a single snapshot is the normalized snapshot") {
  const auto space = build_space(4);
  SnapshotSet snaps = random_smooth_snapshots(space, 1, 12);
  // fix the sign convention so the comparison is direct
  {
    std::size_t imax = 0;
    Vec& col = snaps.columns[0];
    for (std::size_t i = 1; i < col.size(); ++i)
      if (std::abs(col[i]) > std::abs(col[imax])) imax = i;
    if (col[imax] < 0.0)
      for (double& x : col) x = -x;
  }
  const EigenDecomposition eig = sym_eig_descending(correlation_matrix(snaps));
  const PodBasis basis = build_basis(snaps, eig);
  CHECK(basis.rank() == 1);
  const double nrm = std::sqrt(space->mass_inner(snaps.columns[0], snaps.columns[0]));
  for (std::size_t k = 0; k < snaps.columns[0].size(); ++k)
    CHECK(basis.modes[0][k] == doctest::Approx(snaps.columns[0][k] / nrm).epsilon(1e-12));
}

TEST_CASE("basis modes are orthonormal") {
  const auto space = build_space(6);
  const SnapshotSet snaps = random_smooth_snapshots(space, 10, 13);
  const EigenDecomposition eig = sym_eig_descending(correlation_matrix(snaps));
  const PodBasis basis = build_basis(snaps, eig);

  for (std::size_t i = 0; i < basis.rank(); ++i)
    for (std::size_t j = 0; j < basis.rank(); ++j) {
      const double g = space->mass_inner(basis.modes[i], basis.modes[j]);
      CHECK(std::abs(g - (i == j ? 1.0 : 0.0)) <= 1e-10);
    }
  for (std::size_t j = 1; j < basis.rank(); ++j) CHECK(basis.eigenvalues[j] <= basis.eigenvalues[j - 1]);
}

TEST_CASE("truncation identities on random snapshot sets") {
  const auto space = build_space(6);
  const SnapshotSet snaps = random_smooth_snapshots(space, 8, 14);
  const EigenDecomposition eig = sym_eig_descending(correlation_matrix(snaps));
  const PodBasis basis = build_basis(snaps, eig);
  const double lambda1 = basis.eigenvalues[0];

  for (std::size_t r = 0; r <= basis.rank(); ++r) {
    const auto [l2_direct, l2_tail] = l2_truncation_check(snaps, basis, r);
    const auto [h1_direct, h1_tail] = h1_truncation_check(snaps, basis, r);
    if (r == basis.rank()) {
      CHECK(l2_direct <= 1e-12 * lambda1);
      CHECK(l2_tail == 0.0);
      CHECK(h1_direct <= 1e-8 * basis.h1_norms_sq[0] * lambda1);
    } else {
      CHECK(std::abs(l2_direct - l2_tail) <= 1e-8 * l2_tail);
      CHECK(std::abs(h1_direct - h1_tail) <= 1e-8 * h1_tail);
    }
  }

  // r = 0: both sides equal the correlation trace
  const DenseMatrix k = correlation_matrix(snaps);
  double trace = 0.0;
  for (std::size_t i = 0; i < k.rows(); ++i) trace += k(i, i);
  const auto [direct0, tail0] = l2_truncation_check(snaps, basis, 0);
  CHECK(std::abs(direct0 - trace) <= 1e-12 * trace);
  CHECK(std::abs(tail0 - trace) <= 1e-12 * trace);
}

TEST_CASE("rank threshold drops trailing eigenvalues") {
  const auto space = build_space(4);
  SnapshotSet snaps = random_smooth_snapshots(space, 3, 15);
  snaps.columns.push_back(snaps.columns[0]);  // exactly dependent column
  snaps.sample_times.push_back(snaps.sample_times.back() + snaps.delta_t);
  const EigenDecomposition eig = sym_eig_descending(correlation_matrix(snaps));
  const PodBasis basis = build_basis(snaps, eig, 1e-12);
  CHECK(basis.rank() == 3);
}

TEST_CASE("inverse estimate holds and is tight at the extremal vector") {
  const auto space = build_space(6);
  const SnapshotSet snaps = random_smooth_snapshots(space, 8, 16);
  const EigenDecomposition eig = sym_eig_descending(correlation_matrix(snaps));
  const PodBasis basis = build_basis(snaps, eig);
  const std::size_t r = std::min<std::size_t>(basis.rank(), 5);

  Vec e1(r, 0.0);
  e1[0] = 1.0;
  CHECK(inverse_estimate_check(basis, r, e1));

  std::mt19937_64 rng(17);
  std::normal_distribution<double> dist;
  for (int k = 0; k < 100; ++k) {
    Vec c(r);
    for (double& x : c) x = dist(rng);
    CHECK(inverse_estimate_check(basis, r, c));
  }

  // Tightness: the top eigenvector of S_r = I + K_r attains the bound.
  const DenseMatrix kr = gram_h1_semi(basis, r);
  const EigenDecomposition kr_eig = sym_eig_descending(kr);
  Vec top(r);
  for (std::size_t i = 0; i < r; ++i) top[i] = kr_eig.vectors(i, 0);
  Vec v(space->n_dof(), 0.0);
  for (std::size_t j = 0; j < r; ++j) axpy(top[j], basis.modes[j], v);
  const double lhs = std::sqrt(space->h1_inner(v, v));
  const double rhs = std::sqrt((1.0 + kr_eig.values[0]) * space->mass_inner(v, v));
  CHECK(std::abs(lhs - rhs) <= 1e-10 * rhs);
}

TEST_CASE("basis archive round trip") {
  const auto space = build_space(4);
  const SnapshotSet snaps = random_smooth_snapshots(space, 5, 18);
  const EigenDecomposition eig = sym_eig_descending(correlation_matrix(snaps));
  const PodBasis basis = build_basis(snaps, eig);

  const std::string path = "basis_test.podbas";
  write_basis(path, basis, snaps.delta_t, snaps.nu);
  const PodBasis loaded = read_basis(path);
  CHECK(loaded.rank() == basis.rank());
  for (std::size_t j = 0; j < basis.rank(); ++j) {
    CHECK(loaded.eigenvalues[j] == basis.eigenvalues[j]);
    CHECK(loaded.h1_norms_sq[j] == doctest::Approx(basis.h1_norms_sq[j]).epsilon(1e-14));
    for (std::size_t k = 0; k < basis.modes[j].size(); ++k) CHECK(loaded.modes[j][k] == basis.modes[j][k]);
  }
  std::remove(path.c_str());
}

TEST_CASE("build_basis rejects degenerate input") {
  const auto space = build_space(4);
  SnapshotSet snaps;
  snaps.space = space;
  snaps.columns.push_back(Vec(space->n_dof(), 0.0));  // zero snapshot
  snaps.sample_times.push_back(0.0);
  snaps.delta_t = 1.0;
  const EigenDecomposition eig = sym_eig_descending(correlation_matrix(snaps));
  CHECK_THROWS_AS(build_basis(snaps, eig), NumericalError);
}

}  // TEST_SUITE
