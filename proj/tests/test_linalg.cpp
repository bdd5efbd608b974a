#include <doctest.h>

#include <random>

#include "podvms/errors.hpp"
#include "podvms/linalg.hpp"
#include "podvms/sparse.hpp"

using namespace podvms;

TEST_SUITE("linalg") {

TEST_CASE("lu solves a known 3x3 system") {
  DenseMatrix a(3, 3);
  a(0, 0) = 2;  a(0, 1) = 1;  a(0, 2) = -1;
  a(1, 0) = -3; a(1, 1) = -1; a(1, 2) = 2;
  a(2, 0) = -2; a(2, 1) = 1;  a(2, 2) = 2;
  const Vec x = lu_solve(a, {8, -11, -3});
  CHECK(x[0] == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(x[1] == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(x[2] == doctest::Approx(-1.0).epsilon(1e-13));
}

TEST_CASE("lu rejects singular matrices") {
  DenseMatrix a(2, 2);
  a(0, 0) = 1; a(0, 1) = 2;
  a(1, 0) = 2; a(1, 1) = 4;
  CHECK_THROWS_AS(lu_solve(a, {1, 1}), NumericalError);
}

TEST_CASE("lu residual stays small on random systems") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t n = 20;
    DenseMatrix a(n, n);
    Vec b(n);
    for (std::size_t i = 0; i < n; ++i) {
      b[i] = dist(rng);
      for (std::size_t j = 0; j < n; ++j) a(i, j) = dist(rng);
    }
    const Vec x = lu_solve(a, b);
    const Vec ax = a.apply(x);
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) res = std::max(res, std::abs(ax[i] - b[i]));
    CHECK(res <= 1e-11);
  }
}

TEST_CASE("band cholesky matches dense solve") {
  const std::size_t n = 12;
  DenseMatrix a(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = 4.0 + static_cast<double>(i % 3);
    if (i + 1 < n) { a(i, i + 1) = -1.0; a(i + 1, i) = -1.0; }
    if (i + 2 < n) { a(i, i + 2) = 0.5;  a(i + 2, i) = 0.5; }
  }
  BandCholesky chol(n, 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = (i > 2 ? i - 2 : 0); j <= i; ++j)
      if (a(i, j) != 0.0) chol.set(i, j, a(i, j));
  chol.factor();

  Vec b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = std::sin(static_cast<double>(i) + 1.0);
  const Vec x = chol.solve(b);
  const Vec xref = lu_solve(a, b);
  for (std::size_t i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(xref[i]).epsilon(1e-12));
}

TEST_CASE("band cholesky rejects indefinite matrices") {
  BandCholesky chol(2, 1);
  chol.set(0, 0, 1.0);
  chol.set(1, 0, 3.0);
  chol.set(1, 1, 1.0);  // Schur complement 1 - 9 < 0
  CHECK_THROWS_AS(chol.factor(), NumericalError);
}

TEST_CASE("csr assembly sums duplicates and sorts columns") {
  CooBuilder b(3, 3);
  b.add(0, 2, 1.0);
  b.add(0, 0, 2.0);
  b.add(0, 2, 0.5);
  b.add(2, 1, -1.0);
  CsrMatrix m = b.to_csr();
  CHECK(m.nnz() == 3);
  const Vec y = m.apply({1.0, 1.0, 1.0});
  CHECK(y[0] == doctest::Approx(3.5));
  CHECK(y[1] == doctest::Approx(0.0));
  CHECK(y[2] == doctest::Approx(-1.0));
  CHECK(m.row_sum(0) == doctest::Approx(3.5));
}

TEST_CASE("csr_add merges patterns") {
  CooBuilder b1(2, 2), b2(2, 2);
  b1.add(0, 0, 1.0);
  b1.add(1, 1, 2.0);
  b2.add(0, 1, 3.0);
  b2.add(1, 1, 1.0);
  const CsrMatrix s = csr_add(b1.to_csr(), b2.to_csr());
  const Vec y = s.apply({1.0, 1.0});
  CHECK(y[0] == doctest::Approx(4.0));
  CHECK(y[1] == doctest::Approx(3.0));
}

TEST_CASE("matmul and transpose products") {
  DenseMatrix a(2, 3), b(2, 3);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      a(i, j) = static_cast<double>(i + j + 1);
      b(i, j) = static_cast<double>(2 * i + j);
    }
  const DenseMatrix atb = matmul_at_b(a, b);
  const DenseMatrix ref = matmul(a.transposed(), b);
  CHECK(atb.rows() == 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(atb(i, j) == doctest::Approx(ref(i, j)).epsilon(1e-15));
}

}  // TEST_SUITE
