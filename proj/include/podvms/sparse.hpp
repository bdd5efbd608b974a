#pragma once

#include <cstddef>
#include <vector>

#include "podvms/linalg.hpp"

namespace podvms {

/// Compressed-row sparse matrix with sorted column indices per row.
/// Assembled once from accumulated (i, j, v) triplets; immutable afterwards.
class CsrMatrix {
 public:
  CsrMatrix() = default;

  Vec apply(const Vec& x) const;
  void apply_into(const Vec& x, Vec& y) const;
  double quadratic_form(const Vec& u, const Vec& v) const;  // u^T A v
  double row_sum(std::size_t i) const;

  std::size_t rows() const { return n_rows_; }
  std::size_t cols() const { return n_cols_; }
  std::size_t nnz() const { return vals_.size(); }

  const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
  const std::vector<std::size_t>& col_idx() const { return col_idx_; }
  const Vec& values() const { return vals_; }

  double max_asymmetry() const;  // max |A_ij - A_ji|, for structural checks
  std::size_t bandwidth() const;

  friend class CooBuilder;
  friend CsrMatrix csr_add(const CsrMatrix& a, const CsrMatrix& b);

 private:
  std::size_t n_rows_ = 0, n_cols_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> col_idx_;
  Vec vals_;
};

/// Triplet accumulator; duplicates are summed on conversion.
class CooBuilder {
 public:
  CooBuilder(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {}
  void add(std::size_t i, std::size_t j, double v) { trips_.push_back({i, j, v}); }
  CsrMatrix to_csr();

 private:
  struct Triplet {
    std::size_t i, j;
    double v;
  };
  std::size_t rows_, cols_;
  std::vector<Triplet> trips_;
};

CsrMatrix csr_add(const CsrMatrix& a, const CsrMatrix& b);

}  // namespace podvms
