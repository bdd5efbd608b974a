#include "podvms/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "podvms/errors.hpp"

namespace podvms {

double dot(const Vec& x, const Vec& y) {
  if (x.size() != y.size()) throw NumericalError("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

void axpy(double a, const Vec& x, Vec& y) {
  if (x.size() != y.size()) throw NumericalError("axpy: dimension mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

double norm2(const Vec& x) { return std::sqrt(dot(x, x)); }

double norm_inf(const Vec& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Vec DenseMatrix::apply(const Vec& x) const {
  if (x.size() != cols_) throw NumericalError("DenseMatrix::apply: dimension mismatch");
  Vec y(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* r = row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) s += r[j] * x[j];
    y[i] = s;
  }
  return y;
}

Vec DenseMatrix::apply_transpose(const Vec& x) const {
  if (x.size() != rows_) throw NumericalError("DenseMatrix::apply_transpose: dimension mismatch");
  Vec y(cols_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* r = row(i);
    const double xi = x[i];
    for (std::size_t j = 0; j < cols_; ++j) y[j] += r[j] * xi;
  }
  return y;
}

double DenseMatrix::quadratic(const Vec& x) const {
  if (x.size() != cols_ || rows_ != cols_) throw NumericalError("DenseMatrix::quadratic: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    const double* r = row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) s += r[j] * x[j];
    acc += x[i] * s;
  }
  return acc;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double DenseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double DenseMatrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw NumericalError("matmul: dimension mismatch");
  DenseMatrix c(a.rows(), b.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* bk = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

DenseMatrix matmul_at_b(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) throw NumericalError("matmul_at_b: dimension mismatch");
  DenseMatrix c(a.cols(), b.cols(), 0.0);
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* ak = a.row(k);
    const double* bk = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = ak[i];
      if (aki == 0.0) continue;
      double* ci = c.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aki * bk[j];
    }
  }
  return c;
}

LuSolver::LuSolver(DenseMatrix a) : lu_(std::move(a)) {
  if (lu_.rows() != lu_.cols()) throw NumericalError("LuSolver: matrix not square");
  const std::size_t n = lu_.rows();
  perm_.resize(n);
  for (std::size_t i = 0; i < n; ++i) perm_[i] = i;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double pmax = std::abs(lu_(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(lu_(i, k));
      if (v > pmax) {
        pmax = v;
        p = i;
      }
    }
    if (!(pmax > 0.0)) throw NumericalError("LuSolver: singular matrix at column " + std::to_string(k));
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
      std::swap(perm_[k], perm_[p]);
    }
    const double pivot = lu_(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double m = lu_(i, k) / pivot;
      lu_(i, k) = m;
      if (m == 0.0) continue;
      const double* rk = lu_.row(k);
      double* ri = lu_.row(i);
      for (std::size_t j = k + 1; j < n; ++j) ri[j] -= m * rk[j];
    }
  }
}

Vec LuSolver::solve(const Vec& b) const {
  const std::size_t n = lu_.rows();
  if (b.size() != n) throw NumericalError("LuSolver::solve: dimension mismatch");
  Vec y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[perm_[i]];
    const double* ri = lu_.row(i);
    for (std::size_t j = 0; j < i; ++j) s -= ri[j] * y[j];
    y[i] = s;
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    const double* ri = lu_.row(ii);
    for (std::size_t j = ii + 1; j < n; ++j) s -= ri[j] * y[j];
    y[ii] = s / ri[ii];
  }
  return y;
}

Vec lu_solve(DenseMatrix a, const Vec& b) { return LuSolver(std::move(a)).solve(b); }

BandCholesky::BandCholesky(std::size_t n, std::size_t bandwidth)
    : n_(n), bw_(bandwidth), band_(n * (bandwidth + 1), 0.0) {}

void BandCholesky::set(std::size_t i, std::size_t j, double v) {
  if (j > i || i - j > bw_ || i >= n_) throw NumericalError("BandCholesky::set: entry outside band");
  at(i, j) = v;
}

void BandCholesky::factor() {
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t jmin = (i > bw_) ? i - bw_ : 0;
    for (std::size_t j = jmin; j <= i; ++j) {
      double s = at(i, j);
      const std::size_t kmin = (j > bw_) ? std::max(jmin, j - bw_) : jmin;
      for (std::size_t k = kmin; k < j; ++k) s -= at(i, k) * at(j, k);
      if (j < i) {
        at(i, j) = s / at(j, j);
      } else {
        if (!(s > 0.0))
          throw NumericalError("BandCholesky: matrix not positive definite at row " + std::to_string(i));
        at(i, i) = std::sqrt(s);
      }
    }
  }
  factored_ = true;
}

void BandCholesky::solve_inplace(Vec& x) const {
  if (!factored_) throw NumericalError("BandCholesky::solve: factor() not called");
  if (x.size() != n_) throw NumericalError("BandCholesky::solve: dimension mismatch");
  // L y = x
  for (std::size_t i = 0; i < n_; ++i) {
    double s = x[i];
    const std::size_t jmin = (i > bw_) ? i - bw_ : 0;
    for (std::size_t j = jmin; j < i; ++j) s -= at(i, j) * x[j];
    x[i] = s / at(i, i);
  }
  // L^T z = y
  for (std::size_t ii = n_; ii-- > 0;) {
    double s = x[ii];
    const std::size_t kmax = std::min(n_ - 1, ii + bw_);
    for (std::size_t k = ii + 1; k <= kmax; ++k) s -= at(k, ii) * x[k];
    x[ii] = s / at(ii, ii);
  }
}

Vec BandCholesky::solve(Vec x) const {
  solve_inplace(x);
  return x;
}

}  // namespace podvms
