#pragma once

#include <cstddef>
#include <vector>

namespace podvms {

using Vec = std::vector<double>;

double dot(const Vec& x, const Vec& y);
void axpy(double a, const Vec& x, Vec& y);  // y += a*x
double norm2(const Vec& x);
double norm_inf(const Vec& x);

/// Dense row-major matrix. Small systems only (reduced operators, eigenproblems).
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static DenseMatrix identity(std::size_t n);

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  Vec apply(const Vec& x) const;            // A x
  Vec apply_transpose(const Vec& x) const;  // A^T x
  double quadratic(const Vec& x) const;     // x^T A x
  DenseMatrix transposed() const;
  double max_abs() const;
  double frobenius_norm() const;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  Vec data_;
};

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul_at_b(const DenseMatrix& a, const DenseMatrix& b);  // A^T B

/// Dense LU with partial pivoting. Throws NumericalError on (near-)singular input.
class LuSolver {
 public:
  explicit LuSolver(DenseMatrix a);
  Vec solve(const Vec& b) const;

 private:
  DenseMatrix lu_;
  std::vector<std::size_t> perm_;
};

Vec lu_solve(DenseMatrix a, const Vec& b);

/// Cholesky factorization of a symmetric positive definite band matrix,
/// lower-band row storage: row i holds entries (i, i-bw .. i).
/// Used for the discrete negative-norm Riesz solves, where the operator is a
/// fixed FE matrix with small bandwidth on a structured mesh.
class BandCholesky {
 public:
  BandCholesky(std::size_t n, std::size_t bandwidth);

  // Assemble entries (j <= i, i - j <= bandwidth), then factor once.
  void set(std::size_t i, std::size_t j, double v);
  void factor();
  void solve_inplace(Vec& x) const;
  Vec solve(Vec x) const;

  std::size_t size() const { return n_; }
  std::size_t bandwidth() const { return bw_; }

 private:
  double& at(std::size_t i, std::size_t j) { return band_[i * (bw_ + 1) + bw_ - (i - j)]; }
  double at(std::size_t i, std::size_t j) const { return band_[i * (bw_ + 1) + bw_ - (i - j)]; }

  std::size_t n_ = 0, bw_ = 0;
  Vec band_;
  bool factored_ = false;
};

}  // namespace podvms
