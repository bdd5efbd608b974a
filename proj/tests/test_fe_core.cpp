#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "podvms/errors.hpp"
#include "podvms/fe_core.hpp"
#include "podvms/manufactured.hpp"

using namespace podvms;

namespace {

constexpr double kPi = std::numbers::pi;

FeFunction random_function(const FeSpace& sp, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, scale);
  FeFunction f(sp);
  for (double& x : f.coeffs) x = dist(rng);
  return f;
}

}  // namespace

TEST_SUITE("fe_core") {

TEST_CASE("mesh counts and areas") {
  for (const int n : {2, 5, 8}) {
    const Mesh mesh = Mesh::unit_square(n);
    CHECK(mesh.triangles.size() == static_cast<std::size_t>(2 * n * n));
    CHECK(mesh.vertices.size() == static_cast<std::size_t>((n + 1) * (n + 1)));
    double total = 0.0;
    double min_area = 1.0;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
      const double a = mesh.signed_area(static_cast<int>(t));
      total += a;
      min_area = std::min(min_area, a);
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);
    CHECK(min_area > 0.0);
  }
}

TEST_CASE("space rejects n_div below 2") {
  CHECK_THROWS_AS(FeSpace(1), ConfigError);
  CHECK_THROWS_AS(FeSpace(0), ConfigError);
}

TEST_CASE("dof counts") {
  const FeSpace coarse(2);
  CHECK(coarse.scalar_dofs() == 25);
  CHECK(coarse.n_triangles() == 8);

  const FeSpace fine(64);
  CHECK(fine.scalar_dofs() == 16641);  // 129^2
  CHECK(fine.n_dof() == 33282);
  CHECK(fine.h() == doctest::Approx(1.0 / 64));
}

TEST_CASE("quadrature integrates degree-5 monomials exactly") {
  const FeSpace sp(3);
  const auto& quad = TriQuadrature::rule();
  const double area = sp.element_area();
  for (int a = 0; a <= 5; ++a) {
    for (int b = 0; a + b <= 5; ++b) {
      double integral = 0.0;
      for (int t = 0; t < sp.n_triangles(); ++t) {
        const auto origin = sp.element_origin(t);
        const auto& offs = sp.qp_offsets(sp.element_class(t));
        for (int q = 0; q < TriQuadrature::n_points; ++q) {
          const double x = origin[0] + offs[q][0];
          const double y = origin[1] + offs[q][1];
          integral += area * quad.weight[q] * std::pow(x, a) * std::pow(y, b);
        }
      }
      const double exact = 1.0 / ((a + 1.0) * (b + 1.0));
      CHECK(std::abs(integral - exact) <= 1e-14);
    }
  }
}

TEST_CASE("mass matrix: volume identity and positive definiteness") {
  const FeSpace sp(4);
  const Vec ones(sp.n_dof(), 1.0);
  CHECK(std::abs(sp.mass_inner(ones, ones) - 2.0) <= 1e-12);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> dist;
  for (int k = 0; k < 100; ++k) {
    Vec v(sp.n_dof());
    for (double& x : v) x = dist(rng);
    CHECK(sp.mass_inner(v, v) > 0.0);
  }
  CHECK(sp.mass().max_asymmetry() <= 1e-15);
}

TEST_CASE("stiffness matrix annihilates constants and is PSD") {
  const FeSpace sp(4);
  double max_row = 0.0;
  for (std::size_t i = 0; i < sp.n_dof(); ++i) max_row = std::max(max_row, std::abs(sp.stiffness().row_sum(i)));
  CHECK(max_row <= 1e-12);

  std::mt19937_64 rng(4);
  std::normal_distribution<double> dist;
  for (int k = 0; k < 20; ++k) {
    Vec v(sp.n_dof());
    for (double& x : v) x = dist(rng);
    CHECK(sp.stiffness_inner(v, v) >= -1e-12);
  }
}

TEST_CASE("l2 inner product of the sine interpolant") {
  const FeSpace sp(64);
  const VectorField f = [](double x, double y, double) {
    return std::array<double, 2>{std::sin(kPi * x) * std::sin(kPi * y), 0.0};
  };
  const FeFunction u = interpolate(sp, f, 0.0);
  CHECK(std::abs(l2_inner(u, u) - 0.25) <= 1e-4);

  const FeFunction zero(sp);
  CHECK(l2_inner(u, zero) == 0.0);
}

TEST_CASE("l2 inner product symmetry") {
  const FeSpace sp(8);
  const FeFunction u = random_function(sp, 10);
  const FeFunction v = random_function(sp, 11);
  CHECK(std::abs(l2_inner(u, v) - l2_inner(v, u)) <= 1e-13);
}

TEST_CASE("h1 seminorm of the sine interpolant") {
  const FeSpace sp(64);
  const VectorField f = [](double x, double y, double) {
    return std::array<double, 2>{std::sin(kPi * x) * std::sin(kPi * y), 0.0};
  };
  const FeFunction u = interpolate(sp, f, 0.0);
  CHECK(std::abs(h1_semi_inner(u, u) - kPi * kPi / 2.0) <= 1e-3);

  const FeSpace coarse(8);
  const FeFunction c(coarse, Vec(coarse.n_dof(), 1.0));
  CHECK(std::abs(h1_semi_inner(c, c)) <= 1e-12);
}

TEST_CASE("load vector of trivial fields") {
  const FeSpace sp(6);
  const Vec zero_load = load_vector(sp, [](double, double, double) { return std::array<double, 2>{0, 0}; }, 0.0);
  CHECK(norm_inf(zero_load) == 0.0);

  // Pairing of f = (1, 0) with the constant-1 x-component equals the area.
  const Vec load = load_vector(sp, [](double, double, double) { return std::array<double, 2>{1, 0}; }, 0.0);
  Vec xconst(sp.n_dof(), 0.0);
  for (std::size_t i = 0; i < sp.scalar_dofs(); ++i) xconst[i] = 1.0;
  CHECK(std::abs(dot(load, xconst) - 1.0) <= 1e-12);
}

TEST_CASE("load vector pairing matches direct quadrature") {
  const FeSpace sp(8);
  const ManufacturedProblem prob;
  const VectorField f = forcing_field(prob);
  const FeFunction u = interpolate(sp, velocity_field(prob), 0.5);

  const Vec load = load_vector(sp, f, 0.5);
  const double via_load = dot(load, u.coeffs);
  const double direct = oracles::pairing_quadrature(sp, f, 0.5, u.coeffs);
  CHECK(std::abs(via_load - direct) <= 1e-10 * (1.0 + std::abs(direct)));
}

TEST_CASE("trilinear form: skew symmetry") {
  const FeSpace sp(6);
  for (std::uint64_t seed = 20; seed < 25; ++seed) {
    const FeFunction u = random_function(sp, seed);
    const FeFunction v = random_function(sp, seed + 100);
    const FeFunction w = random_function(sp, seed + 200);
    CHECK(std::abs(trilinear(u, v, v)) <= 1e-12);
    CHECK(std::abs(trilinear(u, v, w) + trilinear(u, w, v)) <= 1e-12);
  }
  const FeFunction zero(sp);
  CHECK(trilinear(zero, zero, zero) == 0.0);
}

TEST_CASE("interpolation error decreases under refinement") {
  // The front profile needs node spacing comparable to its width before the
  // interpolant converges, so the doubling test starts at n = 32.
  const ManufacturedProblem prob;
  const VectorField f = velocity_field(prob);
  double prev = -1.0;
  for (const int n : {32, 64}) {
    const FeSpace sp(n);
    const FeFunction u = interpolate(sp, f, 0.3);
    const double err = quadrature_l2_distance(sp, u.coeffs, f, 0.3);
    if (prev >= 0.0) CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("dual norm solver matches a dense reference") {
  const FeSpace sp(3);
  const DualNormSolver riesz(sp);

  const Vec load = load_vector(sp, [](double x, double y, double) {
    return std::array<double, 2>{x + y, std::cos(y)};
  }, 0.0);

  // dense reference on the full (mass + stiffness) operator
  const std::size_t n = sp.n_dof();
  DenseMatrix a(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    Vec e(n, 0.0);
    e[i] = 1.0;
    const Vec col_m = sp.mass_apply(e);
    const Vec col_s = sp.stiffness_apply(e);
    for (std::size_t j = 0; j < n; ++j) a(j, i) = col_m[j] + col_s[j];
  }
  const Vec sol = lu_solve(a, load);
  const double ref = dot(load, sol);
  CHECK(riesz.dual_norm_sq(load) == doctest::Approx(ref).epsilon(1e-11));
}

TEST_CASE("dimension mismatches are rejected") {
  const FeSpace a(2), b(3);
  const FeFunction u(a), v(b);
  CHECK_THROWS_AS(l2_inner(u, v), NumericalError);
  CHECK_THROWS_AS((FeFunction{a, Vec(7, 0.0)}), NumericalError);
}

}  // TEST_SUITE
