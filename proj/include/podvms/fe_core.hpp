#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "podvms/linalg.hpp"
#include "podvms/sparse.hpp"

namespace podvms {

/// Time-dependent analytic vector field f(x, y, t) -> (f0, f1).
using VectorField = std::function<std::array<double, 2>(double, double, double)>;

/// Structured triangulation of the unit square: n_div x n_div cells, each split
/// along the (0,0)-(1,1) cell diagonal into two counterclockwise triangles.
struct Mesh {
  int n_div = 0;
  std::vector<std::array<double, 2>> vertices;   // (n_div+1)^2 grid points
  std::vector<std::array<int, 3>> triangles;     // 2*n_div^2 vertex-index triples

  static Mesh unit_square(int n_div);
  double signed_area(int t) const;
};

/// 7-point degree-5 Gauss rule on the reference triangle.
/// Weights sum to one; integrals are weight * |triangle area|.
struct TriQuadrature {
  static constexpr int n_points = 7;
  std::array<std::array<double, 3>, n_points> bary;  // barycentric coordinates
  std::array<double, n_points> weight;

  static const TriQuadrature& rule();
};

/// Vector-valued quadratic Lagrange space on the structured mesh.
///
/// Scalar nodes live on the refined (2*n_div+1)^2 grid (vertices plus edge
/// midpoints). Degrees of freedom are blocked by component: dof i < scalar_dofs
/// is the x-component at node i, dof scalar_dofs + i the y-component. With this
/// layout mass and stiffness are two identical scalar diagonal blocks; both the
/// scalar blocks and the expanded n_dof x n_dof matrices are kept.
///
/// All members are immutable after construction; instances may be shared
/// read-only across threads.
class FeSpace {
 public:
  explicit FeSpace(int n_div);

  const Mesh& mesh() const { return mesh_; }
  int n_div() const { return mesh_.n_div; }
  double h() const { return 1.0 / mesh_.n_div; }
  std::size_t scalar_dofs() const { return scalar_dofs_; }
  std::size_t n_dof() const { return 2 * scalar_dofs_; }
  const std::vector<std::array<double, 2>>& dof_coords() const { return dof_coords_; }

  const CsrMatrix& mass() const { return mass_; }
  const CsrMatrix& stiffness() const { return stiffness_; }
  const CsrMatrix& scalar_mass() const { return scalar_mass_; }
  const CsrMatrix& scalar_stiffness() const { return scalar_stiffness_; }

  // Element access for quadrature loops.
  int n_triangles() const { return static_cast<int>(mesh_.triangles.size()); }
  const std::array<int, 6>& element_nodes(int t) const { return element_nodes_[t]; }
  int element_class(int t) const { return t & 1; }  // 0 = lower, 1 = upper
  std::array<double, 2> element_origin(int t) const;
  double element_area() const { return 0.5 * h() * h(); }

  // Reference basis values at quadrature points (class independent) and
  // physical gradients per element class.
  const std::array<std::array<double, 6>, TriQuadrature::n_points>& basis_values() const { return vals_; }
  const std::array<std::array<std::array<double, 2>, 6>, TriQuadrature::n_points>& basis_gradients(int cls) const {
    return grads_[cls];
  }
  // Quadrature-point offsets from the element origin, per class.
  const std::array<std::array<double, 2>, TriQuadrature::n_points>& qp_offsets(int cls) const {
    return qp_offset_[cls];
  }

  // Bulk coefficient-vector operations (x/y blocks handled internally).
  Vec mass_apply(const Vec& u) const;
  Vec stiffness_apply(const Vec& u) const;
  double mass_inner(const Vec& u, const Vec& v) const;
  double stiffness_inner(const Vec& u, const Vec& v) const;
  double h1_inner(const Vec& u, const Vec& v) const;  // mass + stiffness

 private:
  Mesh mesh_;
  std::size_t scalar_dofs_ = 0;
  std::vector<std::array<double, 2>> dof_coords_;
  std::vector<std::array<int, 6>> element_nodes_;
  CsrMatrix scalar_mass_, scalar_stiffness_;
  CsrMatrix mass_, stiffness_;
  std::array<std::array<double, 6>, TriQuadrature::n_points> vals_{};
  std::array<std::array<std::array<std::array<double, 2>, 6>, TriQuadrature::n_points>, 2> grads_{};
  std::array<std::array<std::array<double, 2>, TriQuadrature::n_points>, 2> qp_offset_{};
};

std::shared_ptr<const FeSpace> build_space(int n_div);

/// A velocity field as coefficients over an FeSpace.
struct FeFunction {
  explicit FeFunction(const FeSpace& s) : space(&s), coeffs(s.n_dof(), 0.0) {}
  FeFunction(const FeSpace& s, Vec c);

  const FeSpace* space;
  Vec coeffs;
};

double l2_inner(const FeFunction& u, const FeFunction& v);        // u^T M v
double h1_semi_inner(const FeFunction& u, const FeFunction& v);   // u^T S v

/// Skew-symmetrized convection form
///   b(u, v, w) = 1/2 [ ((u.grad) v, w) - ((u.grad) w, v) ],
/// evaluated by element quadrature (exact for quadratic velocity fields).
double trilinear(const FeFunction& u, const FeFunction& v, const FeFunction& w);

/// Load functional: entry i = integral of f(., t) . basis_i.
Vec load_vector(const FeSpace& space, const VectorField& f, double t);

/// Nodal interpolation of an analytic field at time t.
FeFunction interpolate(const FeSpace& space, const VectorField& f, double t);

/// Quadrature L2 distance between an FE coefficient vector and an analytic field.
double quadrature_l2_distance(const FeSpace& space, const Vec& coeffs, const VectorField& f, double t);

/// Riesz solver for the discrete dual norm
///   |F|_{-1,h}^2 = F^T (M + S)^{-1} F,
/// realized with a banded Cholesky factorization of the scalar block of M + S.
class DualNormSolver {
 public:
  explicit DualNormSolver(const FeSpace& space);
  double dual_norm_sq(const Vec& load) const;

 private:
  std::size_t scalar_dofs_;
  BandCholesky chol_;
};

}  // namespace podvms
