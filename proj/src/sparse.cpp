#include "podvms/sparse.hpp"

#include <algorithm>
#include <cmath>

#include "podvms/errors.hpp"

namespace podvms {

Vec CsrMatrix::apply(const Vec& x) const {
  Vec y(n_rows_, 0.0);
  apply_into(x, y);
  return y;
}

void CsrMatrix::apply_into(const Vec& x, Vec& y) const {
  if (x.size() != n_cols_ || y.size() != n_rows_) throw NumericalError("CsrMatrix::apply: dimension mismatch");
  for (std::size_t i = 0; i < n_rows_; ++i) {
    double s = 0.0;
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += vals_[k] * x[col_idx_[k]];
    y[i] = s;
  }
}

double CsrMatrix::quadratic_form(const Vec& u, const Vec& v) const {
  if (u.size() != n_rows_ || v.size() != n_cols_) throw NumericalError("CsrMatrix::quadratic_form: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < n_rows_; ++i) {
    double ri = 0.0;
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) ri += vals_[k] * v[col_idx_[k]];
    s += u[i] * ri;
  }
  return s;
}

double CsrMatrix::row_sum(std::size_t i) const {
  double s = 0.0;
  for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += vals_[k];
  return s;
}

double CsrMatrix::max_asymmetry() const {
  double m = 0.0;
  for (std::size_t i = 0; i < n_rows_; ++i) {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const std::size_t j = col_idx_[k];
      // binary search for (j, i)
      double aji = 0.0;
      const auto begin = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[j]);
      const auto end = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[j + 1]);
      const auto it = std::lower_bound(begin, end, i);
      if (it != end && *it == i) aji = vals_[static_cast<std::size_t>(it - col_idx_.begin())];
      m = std::max(m, std::abs(vals_[k] - aji));
    }
  }
  return m;
}

std::size_t CsrMatrix::bandwidth() const {
  std::size_t bw = 0;
  for (std::size_t i = 0; i < n_rows_; ++i) {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const std::size_t j = col_idx_[k];
      const std::size_t d = (i > j) ? i - j : j - i;
      bw = std::max(bw, d);
    }
  }
  return bw;
}

CsrMatrix CooBuilder::to_csr() {
  std::sort(trips_.begin(), trips_.end(), [](const Triplet& a, const Triplet& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  CsrMatrix m;
  m.n_rows_ = rows_;
  m.n_cols_ = cols_;
  m.row_ptr_.assign(rows_ + 1, 0);
  std::size_t k = 0;
  for (std::size_t i = 0; i < rows_; ++i) {
    m.row_ptr_[i] = m.col_idx_.size();
    while (k < trips_.size() && trips_[k].i == i) {
      const std::size_t j = trips_[k].j;
      double v = 0.0;
      while (k < trips_.size() && trips_[k].i == i && trips_[k].j == j) v += trips_[k++].v;
      m.col_idx_.push_back(j);
      m.vals_.push_back(v);
    }
  }
  m.row_ptr_[rows_] = m.col_idx_.size();
  return m;
}

CsrMatrix csr_add(const CsrMatrix& a, const CsrMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw NumericalError("csr_add: dimension mismatch");
  CsrMatrix m;
  m.n_rows_ = a.rows();
  m.n_cols_ = a.cols();
  m.row_ptr_.assign(a.rows() + 1, 0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    m.row_ptr_[i] = m.col_idx_.size();
    std::size_t ka = a.row_ptr_[i], kb = b.row_ptr_[i];
    const std::size_t ea = a.row_ptr_[i + 1], eb = b.row_ptr_[i + 1];
    while (ka < ea || kb < eb) {
      const std::size_t ja = (ka < ea) ? a.col_idx_[ka] : std::size_t(-1);
      const std::size_t jb = (kb < eb) ? b.col_idx_[kb] : std::size_t(-1);
      if (ja == jb) {
        m.col_idx_.push_back(ja);
        m.vals_.push_back(a.vals_[ka++] + b.vals_[kb++]);
      } else if (ja < jb) {
        m.col_idx_.push_back(ja);
        m.vals_.push_back(a.vals_[ka++]);
      } else {
        m.col_idx_.push_back(jb);
        m.vals_.push_back(b.vals_[kb++]);
      }
    }
  }
  m.row_ptr_[a.rows()] = m.col_idx_.size();
  return m;
}

}  // namespace podvms
