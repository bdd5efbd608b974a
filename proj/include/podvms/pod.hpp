#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "podvms/fe_core.hpp"
#include "podvms/linalg.hpp"
#include "podvms/manufactured.hpp"

namespace podvms {

/// L2-orthonormal modes extracted from a snapshot set by the method of
/// snapshots, eigenvalue-descending, with the squared full H1 norm of each
/// mode kept alongside for the weighted truncation tails.
struct PodBasis {
  std::shared_ptr<const FeSpace> space;
  std::vector<Vec> modes;   // d coefficient vectors
  Vec eigenvalues;          // lambda_1 >= ... >= lambda_d > 0
  Vec h1_norms_sq;          // |phi_j|_L2^2 + |grad phi_j|^2 per mode

  std::size_t rank() const { return modes.size(); }
};

/// Snapshot correlation matrix K_kl = (u_l, u_k)_L2 / (M+1); symmetric PSD.
DenseMatrix correlation_matrix(const SnapshotSet& snaps);

struct EigenDecomposition {
  Vec values;           // descending
  DenseMatrix vectors;  // orthonormal columns, vectors(:, j) pairs values[j]
};

/// Full spectral decomposition of a symmetric matrix by cyclic Jacobi
/// rotations. Sweeps run until the off-diagonal Frobenius norm falls below
/// 1e-13 of the matrix norm (plus one polishing sweep, which keeps small
/// eigenvalues accurate relative to themselves); more than 50 sweeps is a
/// hard error.
EigenDecomposition sym_eig_descending(const DenseMatrix& k);

/// Modes from the eigen-decomposition of the correlation matrix:
/// phi_j = U z_j / sqrt((M+1) lambda_j), truncated at the numerical rank
/// d = #{lambda_j >= rank_tol * lambda_1}. A modified Gram-Schmidt pass in the
/// L2 inner product removes the residual non-orthogonality the scaling leaves
/// behind for trailing eigenvalues, and each mode's sign is fixed so its
/// largest-magnitude coefficient is positive.
PodBasis build_basis(const SnapshotSet& snaps, const EigenDecomposition& eig, double rank_tol = 1e-13);

/// Both sides of the L2 truncation identity at cutoff r: the directly
/// quadratured mean squared projection error, and the eigenvalue tail.
std::pair<double, double> l2_truncation_check(const SnapshotSet& snaps, const PodBasis& basis, std::size_t r);

/// Both sides of the H1 truncation identity: direct error in the full H1 norm
/// against the |phi_j|_1^2-weighted eigenvalue tail.
std::pair<double, double> h1_truncation_check(const SnapshotSet& snaps, const PodBasis& basis, std::size_t r);

/// Reduced H1-seminorm Gram matrix (grad phi_j, grad phi_i) of the first r modes.
DenseMatrix gram_h1_semi(const PodBasis& basis, std::size_t r);

/// Verifies |v|_H1 <= sqrt(|S_r|_2) |v|_L2 for v in the span of the first r
/// modes, S_r = I + grad-Gram (the reduced mass matrix is the identity).
bool inverse_estimate_check(const PodBasis& basis, std::size_t r, const Vec& v_coeffs);

// Basis archive ("PODBAS01"): same container as snapshots, modes column-major,
// followed by the eigenvalue block.
void write_basis(const std::string& path, const PodBasis& basis, double snapshot_dt, double nu);
PodBasis read_basis(const std::string& path);

}  // namespace podvms
