#include "podvms/pod.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "podvms/errors.hpp"
#include "podvms/io_detail.hpp"

namespace podvms {

DenseMatrix correlation_matrix(const SnapshotSet& snaps) {
  if (snaps.count() == 0) throw ConfigError("correlation_matrix: empty snapshot set");
  const std::size_t m1 = snaps.count();
  const FeSpace& sp = *snaps.space;

  // K = U^T (M U) / (M+1), assembled from mass-weighted columns.
  std::vector<Vec> weighted(m1);
  for (std::size_t l = 0; l < m1; ++l) weighted[l] = sp.mass_apply(snaps.columns[l]);

  DenseMatrix k(m1, m1, 0.0);
  const double scale = 1.0 / static_cast<double>(m1);
  for (std::size_t i = 0; i < m1; ++i) {
    for (std::size_t j = i; j < m1; ++j) {
      const double v = scale * dot(snaps.columns[i], weighted[j]);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

namespace {

double offdiag_frobenius(const DenseMatrix& a) {
  double s = 0.0;
  for (std::size_t p = 0; p < a.rows(); ++p)
    for (std::size_t q = p + 1; q < a.cols(); ++q) s += 2.0 * a(p, q) * a(p, q);
  return std::sqrt(s);
}

// One cyclic sweep of Jacobi rotations over the strict upper triangle,
// accumulating the rotations into v.
void jacobi_sweep(DenseMatrix& a, DenseMatrix& v) {
  const std::size_t n = a.rows();
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = p + 1; q < n; ++q) {
      const double apq = a(p, q);
      if (apq == 0.0) continue;
      const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
      double t;
      if (std::abs(theta) > 1e154) {
        t = 0.5 / theta;  // avoids theta^2 overflow; exact limit of the stable formula
      } else {
        t = ((theta >= 0.0) ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
      }
      const double c = 1.0 / std::sqrt(t * t + 1.0);
      const double s = t * c;
      const double tau = s / (1.0 + c);
      const double h = t * apq;

      a(p, p) -= h;
      a(q, q) += h;
      a(p, q) = 0.0;
      a(q, p) = 0.0;
      auto rotate = [&](double& x, double& y) {
        const double g = x;
        x = g - s * (y + tau * g);
        y = y + s * (g - tau * y);
      };
      for (std::size_t i = 0; i < p; ++i) rotate(a(i, p), a(i, q));
      for (std::size_t i = p + 1; i < q; ++i) rotate(a(p, i), a(i, q));
      for (std::size_t i = q + 1; i < n; ++i) rotate(a(p, i), a(q, i));
      for (std::size_t i = 0; i < n; ++i) rotate(v(i, p), v(i, q));
    }
  }
  // restore symmetry of the explicitly stored lower triangle
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p + 1; q < n; ++q) a(q, p) = a(p, q);
}

}  // namespace

EigenDecomposition sym_eig_descending(const DenseMatrix& k) {
  if (k.rows() != k.cols()) throw NumericalError("sym_eig_descending: matrix not square");
  const std::size_t n = k.rows();
  DenseMatrix a = k;
  const double norm = a.frobenius_norm();
  double asym = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) asym = std::max(asym, std::abs(a(i, j) - a(j, i)));
  if (asym > 1e-12 * std::max(norm, 1e-300))
    throw NumericalError("sym_eig_descending: input matrix is not symmetric");

  DenseMatrix v = DenseMatrix::identity(n);
  constexpr int kMaxSweeps = 50;
  bool converged = (n < 2) || (offdiag_frobenius(a) <= 1e-13 * norm);
  for (int sweep = 0; !converged && sweep < kMaxSweeps; ++sweep) {
    jacobi_sweep(a, v);
    if (offdiag_frobenius(a) <= 1e-13 * norm) {
      jacobi_sweep(a, v);  // polish: drives scaled off-diagonals of tiny eigenvalues down
      converged = true;
    }
  }
  if (!converged)
    throw NumericalError("sym_eig_descending: Jacobi iteration did not converge within 50 sweeps");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  EigenDecomposition out;
  out.values.resize(n);
  out.vectors = DenseMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a(order[j], order[j]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
  }
  return out;
}

PodBasis build_basis(const SnapshotSet& snaps, const EigenDecomposition& eig, double rank_tol) {
  const std::size_t m1 = snaps.count();
  if (m1 == 0) throw ConfigError("build_basis: empty snapshot set");
  if (eig.values.size() != m1 || eig.vectors.rows() != m1)
    throw NumericalError("build_basis: eigen-decomposition size does not match snapshot count");
  if (!(rank_tol > 0.0) || rank_tol >= 1.0) throw ConfigError("build_basis: rank_tol must lie in (0, 1)");

  const double lambda1 = eig.values.empty() ? 0.0 : eig.values[0];
  if (!(lambda1 > 0.0)) throw NumericalError("build_basis: all eigenvalues are non-positive");
  std::size_t d = 0;
  while (d < m1 && eig.values[d] >= rank_tol * lambda1) ++d;
  if (d == 0) throw NumericalError("build_basis: all eigenvalues fall below the rank threshold");

  const FeSpace& sp = *snaps.space;
  PodBasis basis;
  basis.space = snaps.space;
  basis.modes.reserve(d);
  basis.eigenvalues.assign(eig.values.begin(), eig.values.begin() + static_cast<std::ptrdiff_t>(d));

  const std::size_t n = sp.n_dof();
  for (std::size_t j = 0; j < d; ++j) {
    Vec phi(n, 0.0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m1) * eig.values[j]);
    for (std::size_t l = 0; l < m1; ++l) {
      const double w = scale * eig.vectors(l, j);
      if (w != 0.0) axpy(w, snaps.columns[l], phi);
    }
    basis.modes.push_back(std::move(phi));
  }

  // Gram-Schmidt polish in the L2 inner product. The scaled eigenvector
  // combination is orthonormal only up to the eigensolver residual, which is
  // amplified for trailing eigenvalues; one MGS pass restores orthonormality
  // to rounding level while preserving the nested spans.
  std::vector<Vec> weighted(d);
  for (std::size_t j = 0; j < d; ++j) {
    Vec& phi = basis.modes[j];
    for (std::size_t i = 0; i < j; ++i) {
      const double proj = dot(weighted[i], phi);
      if (proj != 0.0) axpy(-proj, basis.modes[i], phi);
    }
    const double nrm = std::sqrt(sp.mass_inner(phi, phi));
    if (!(nrm > 0.0)) throw NumericalError("build_basis: mode " + std::to_string(j) + " collapsed to zero");
    for (double& x : phi) x /= nrm;
    weighted[j] = sp.mass_apply(phi);
  }

  // Deterministic sign: largest-magnitude coefficient positive.
  for (Vec& phi : basis.modes) {
    std::size_t imax = 0;
    for (std::size_t i = 1; i < phi.size(); ++i)
      if (std::abs(phi[i]) > std::abs(phi[imax])) imax = i;
    if (phi[imax] < 0.0)
      for (double& x : phi) x = -x;
  }

  basis.h1_norms_sq.resize(d);
  for (std::size_t j = 0; j < d; ++j) basis.h1_norms_sq[j] = sp.h1_inner(basis.modes[j], basis.modes[j]);
  return basis;
}

namespace {

// Shared driver for the truncation identities: the direct side projects every
// snapshot on the first r modes, forms the residual vector, and measures it by
// quadrature in the requested norm; the tail side sums the (optionally
// weighted) eigenvalues above r.
std::pair<double, double> truncation_check(const SnapshotSet& snaps, const PodBasis& basis, std::size_t r,
                                           bool full_h1) {
  if (r > basis.rank()) throw ConfigError("truncation_check: cutoff exceeds basis rank");
  const FeSpace& sp = *snaps.space;
  const std::size_t m1 = snaps.count();

  std::vector<Vec> weighted(r);
  for (std::size_t j = 0; j < r; ++j) weighted[j] = sp.mass_apply(basis.modes[j]);

  double direct = 0.0;
  for (std::size_t l = 0; l < m1; ++l) {
    Vec res = snaps.columns[l];
    for (std::size_t j = 0; j < r; ++j) {
      const double c = dot(weighted[j], snaps.columns[l]);
      if (c != 0.0) axpy(-c, basis.modes[j], res);
    }
    direct += full_h1 ? sp.h1_inner(res, res) : sp.mass_inner(res, res);
  }
  direct /= static_cast<double>(m1);

  double tail = 0.0;
  for (std::size_t j = basis.rank(); j-- > r;)
    tail += full_h1 ? basis.h1_norms_sq[j] * basis.eigenvalues[j] : basis.eigenvalues[j];
  return {direct, tail};
}

}  // namespace

std::pair<double, double> l2_truncation_check(const SnapshotSet& snaps, const PodBasis& basis, std::size_t r) {
  return truncation_check(snaps, basis, r, false);
}

std::pair<double, double> h1_truncation_check(const SnapshotSet& snaps, const PodBasis& basis, std::size_t r) {
  return truncation_check(snaps, basis, r, true);
}

DenseMatrix gram_h1_semi(const PodBasis& basis, std::size_t r) {
  if (r > basis.rank()) throw ConfigError("gram_h1_semi: cutoff exceeds basis rank");
  const FeSpace& sp = *basis.space;
  std::vector<Vec> sphi(r);
  for (std::size_t j = 0; j < r; ++j) sphi[j] = sp.stiffness_apply(basis.modes[j]);
  DenseMatrix g(r, r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) g(i, j) = dot(basis.modes[i], sphi[j]);
  // symmetrize rounding
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = i + 1; j < r; ++j) {
      const double v = 0.5 * (g(i, j) + g(j, i));
      g(i, j) = v;
      g(j, i) = v;
    }
  return g;
}

bool inverse_estimate_check(const PodBasis& basis, std::size_t r, const Vec& v_coeffs) {
  if (r == 0 || r > basis.rank()) throw ConfigError("inverse_estimate_check: invalid cutoff");
  if (v_coeffs.size() != r) throw ConfigError("inverse_estimate_check: coefficient length mismatch");
  const FeSpace& sp = *basis.space;

  Vec v(sp.n_dof(), 0.0);
  for (std::size_t j = 0; j < r; ++j)
    if (v_coeffs[j] != 0.0) axpy(v_coeffs[j], basis.modes[j], v);

  const double l2_sq = sp.mass_inner(v, v);
  const double h1_sq = sp.h1_inner(v, v);

  const DenseMatrix kr = gram_h1_semi(basis, r);
  const EigenDecomposition eig = sym_eig_descending(kr);
  const double s_norm = 1.0 + std::max(eig.values.empty() ? 0.0 : eig.values[0], 0.0);

  return h1_sq <= s_norm * l2_sq * (1.0 + 1e-10) + 1e-300;
}

void write_basis(const std::string& path, const PodBasis& basis, double snapshot_dt, double nu) {
  if (!basis.space) throw IoError("write_basis: basis has no space");
  io::Writer w(path);
  w.magic("PODBAS01");
  w.u64(static_cast<std::uint64_t>(basis.space->n_div()));
  w.u64(basis.space->n_dof());
  w.u64(basis.rank());
  w.f64(snapshot_dt);
  w.f64(nu);
  for (const Vec& phi : basis.modes) w.f64_block(phi);
  w.f64_block(basis.eigenvalues);
}

PodBasis read_basis(const std::string& path) {
  io::Reader r(path);
  r.expect_magic("PODBAS01");
  const auto n_div = r.u64();
  const auto n_dof = r.u64();
  const auto d = r.u64();
  (void)r.f64();  // snapshot spacing, informational
  (void)r.f64();  // viscosity, informational
  if (n_div < 2 || n_div > 100000) throw IoError(path + ": implausible n_div " + std::to_string(n_div));
  const std::uint64_t fine = 2 * n_div + 1;
  if (n_dof != 2 * fine * fine)
    throw IoError(path + ": n_dof " + std::to_string(n_dof) + " inconsistent with n_div " + std::to_string(n_div));
  if (d == 0) throw IoError(path + ": basis archive with zero modes");

  PodBasis basis;
  basis.space = build_space(static_cast<int>(n_div));
  basis.modes.reserve(d);
  for (std::uint64_t j = 0; j < d; ++j) basis.modes.push_back(r.f64_block(n_dof));
  basis.eigenvalues = r.f64_block(d);
  r.expect_eof();

  for (std::size_t j = 1; j < basis.eigenvalues.size(); ++j)
    if (basis.eigenvalues[j] > basis.eigenvalues[j - 1])
      throw IoError(path + ": eigenvalue block is not descending");

  basis.h1_norms_sq.resize(d);
  for (std::uint64_t j = 0; j < d; ++j)
    basis.h1_norms_sq[j] = basis.space->h1_inner(basis.modes[j], basis.modes[j]);
  return basis;
}

}  // namespace podvms
