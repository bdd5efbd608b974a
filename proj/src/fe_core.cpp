#include "podvms/fe_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "podvms/errors.hpp"

namespace podvms {

namespace {

// P2 shape functions in barycentric form on the reference triangle
// (l1, l2, l3) with local node order [v1, v2, v3, m12, m23, m31].
void p2_values(double l1, double l2, double l3, double out[6]) {
  out[0] = l1 * (2.0 * l1 - 1.0);
  out[1] = l2 * (2.0 * l2 - 1.0);
  out[2] = l3 * (2.0 * l3 - 1.0);
  out[3] = 4.0 * l1 * l2;
  out[4] = 4.0 * l2 * l3;
  out[5] = 4.0 * l3 * l1;
}

// Gradients with respect to reference coordinates (xi, eta), where
// l1 = 1 - xi - eta, l2 = xi, l3 = eta.
void p2_ref_gradients(double l1, double l2, double l3, double out[6][2]) {
  out[0][0] = -(4.0 * l1 - 1.0);
  out[0][1] = -(4.0 * l1 - 1.0);
  out[1][0] = 4.0 * l2 - 1.0;
  out[1][1] = 0.0;
  out[2][0] = 0.0;
  out[2][1] = 4.0 * l3 - 1.0;
  out[3][0] = 4.0 * (l1 - l2);
  out[3][1] = -4.0 * l2;
  out[4][0] = 4.0 * l3;
  out[4][1] = 4.0 * l2;
  out[5][0] = -4.0 * l3;
  out[5][1] = 4.0 * (l1 - l3);
}

}  // namespace

Mesh Mesh::unit_square(int n_div) {
  if (n_div < 2) throw ConfigError("Mesh: n_div must be at least 2, got " + std::to_string(n_div));
  Mesh m;
  m.n_div = n_div;
  const int nv = n_div + 1;
  const double h = 1.0 / n_div;
  m.vertices.reserve(static_cast<std::size_t>(nv) * nv);
  for (int iy = 0; iy < nv; ++iy)
    for (int ix = 0; ix < nv; ++ix) m.vertices.push_back({ix * h, iy * h});

  m.triangles.reserve(2u * n_div * n_div);
  for (int cy = 0; cy < n_div; ++cy) {
    for (int cx = 0; cx < n_div; ++cx) {
      const int v00 = cy * nv + cx;
      const int v10 = v00 + 1;
      const int v01 = v00 + nv;
      const int v11 = v01 + 1;
      m.triangles.push_back({v00, v10, v11});  // lower
      m.triangles.push_back({v00, v11, v01});  // upper
    }
  }
  return m;
}

double Mesh::signed_area(int t) const {
  const auto& tri = triangles[t];
  const auto& a = vertices[tri[0]];
  const auto& b = vertices[tri[1]];
  const auto& c = vertices[tri[2]];
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

const TriQuadrature& TriQuadrature::rule() {
  static const TriQuadrature q = [] {
    TriQuadrature r;
    const double s15 = std::sqrt(15.0);
    const double w0 = 9.0 / 40.0;
    const double wa = (155.0 + s15) / 1200.0;
    const double wb = (155.0 - s15) / 1200.0;
    const double ba = (6.0 + s15) / 21.0;           // paired coordinate of the interior orbit
    const double bb = (6.0 - s15) / 21.0;           // paired coordinate of the near-vertex orbit
    const double aa = 1.0 - 2.0 * ba;
    const double ab = 1.0 - 2.0 * bb;
    r.bary[0] = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    r.weight[0] = w0;
    r.bary[1] = {aa, ba, ba};
    r.bary[2] = {ba, aa, ba};
    r.bary[3] = {ba, ba, aa};
    r.weight[1] = r.weight[2] = r.weight[3] = wa;
    r.bary[4] = {ab, bb, bb};
    r.bary[5] = {bb, ab, bb};
    r.bary[6] = {bb, bb, ab};
    r.weight[4] = r.weight[5] = r.weight[6] = wb;
    return r;
  }();
  return q;
}

FeSpace::FeSpace(int n_div) : mesh_(Mesh::unit_square(n_div)) {
  const int fine = 2 * n_div + 1;
  scalar_dofs_ = static_cast<std::size_t>(fine) * fine;
  const double hf = 0.5 * h();

  dof_coords_.reserve(2 * scalar_dofs_);
  for (int c = 0; c < 2; ++c)
    for (int fy = 0; fy < fine; ++fy)
      for (int fx = 0; fx < fine; ++fx) dof_coords_.push_back({fx * hf, fy * hf});

  // Scalar fine-grid node ids of the six P2 nodes per triangle.
  element_nodes_.resize(mesh_.triangles.size());
  auto fid = [fine](int fx, int fy) { return fy * fine + fx; };
  for (int cy = 0; cy < n_div; ++cy) {
    for (int cx = 0; cx < n_div; ++cx) {
      const int bx = 2 * cx, by = 2 * cy;
      const int t = 2 * (cy * n_div + cx);
      element_nodes_[t] = {fid(bx, by),     fid(bx + 2, by),     fid(bx + 2, by + 2),
                           fid(bx + 1, by), fid(bx + 2, by + 1), fid(bx + 1, by + 1)};
      element_nodes_[t + 1] = {fid(bx, by),         fid(bx + 2, by + 2), fid(bx, by + 2),
                               fid(bx + 1, by + 1), fid(bx + 1, by + 2), fid(bx, by + 1)};
    }
  }

  // Reference tables at the quadrature points. The two element classes share
  // basis values; gradients differ through the (constant) Jacobians
  //   lower: J = [[h, h], [0, h]]   =>  J^-T = (1/h) [[1, 0], [-1, 1]]
  //   upper: J = [[h, 0], [h, h]]   =>  J^-T = (1/h) [[1, -1], [0, 1]]
  const auto& quad = TriQuadrature::rule();
  const double inv_h = 1.0 / h();
  for (int q = 0; q < TriQuadrature::n_points; ++q) {
    const double l1 = quad.bary[q][0], l2 = quad.bary[q][1], l3 = quad.bary[q][2];
    double v[6], g[6][2];
    p2_values(l1, l2, l3, v);
    p2_ref_gradients(l1, l2, l3, g);
    for (int n = 0; n < 6; ++n) {
      vals_[q][n] = v[n];
      grads_[0][q][n][0] = inv_h * g[n][0];
      grads_[0][q][n][1] = inv_h * (g[n][1] - g[n][0]);
      grads_[1][q][n][0] = inv_h * (g[n][0] - g[n][1]);
      grads_[1][q][n][1] = inv_h * g[n][1];
    }
    // x = origin + J * (xi, eta)
    qp_offset_[0][q] = {h() * (l2 + l3), h() * l3};
    qp_offset_[1][q] = {h() * l2, h() * (l2 + l3)};
  }

  // Local P2 mass is class independent (equal areas, same reference values);
  // local stiffness depends on the class Jacobian.
  const double area = element_area();
  double mass_loc[6][6] = {};
  double stiff_loc[2][6][6] = {};
  for (int q = 0; q < TriQuadrature::n_points; ++q) {
    const double w = area * quad.weight[q];
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        mass_loc[i][j] += w * vals_[q][i] * vals_[q][j];
        for (int cls = 0; cls < 2; ++cls)
          stiff_loc[cls][i][j] += w * (grads_[cls][q][i][0] * grads_[cls][q][j][0] +
                                       grads_[cls][q][i][1] * grads_[cls][q][j][1]);
      }
    }
  }
  // Pin the local stiffness diagonal so constants are annihilated exactly
  // (the shape functions sum to one, so the true row sums are zero).
  for (int cls = 0; cls < 2; ++cls) {
    for (int i = 0; i < 6; ++i) {
      double off = 0.0;
      for (int j = 0; j < 6; ++j)
        if (j != i) off += stiff_loc[cls][i][j];
      stiff_loc[cls][i][i] = -off;
    }
  }

  CooBuilder mb(scalar_dofs_, scalar_dofs_), sb(scalar_dofs_, scalar_dofs_);
  for (int t = 0; t < n_triangles(); ++t) {
    const auto& nodes = element_nodes_[t];
    const int cls = element_class(t);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        mb.add(nodes[i], nodes[j], mass_loc[i][j]);
        sb.add(nodes[i], nodes[j], stiff_loc[cls][i][j]);
      }
    }
  }
  scalar_mass_ = mb.to_csr();
  scalar_stiffness_ = sb.to_csr();

  // Expanded two-component block-diagonal copies.
  auto expand = [this](const CsrMatrix& s) {
    CooBuilder b(n_dof(), n_dof());
    for (std::size_t i = 0; i < s.rows(); ++i)
      for (std::size_t k = s.row_ptr()[i]; k < s.row_ptr()[i + 1]; ++k) {
        b.add(i, s.col_idx()[k], s.values()[k]);
        b.add(scalar_dofs_ + i, scalar_dofs_ + s.col_idx()[k], s.values()[k]);
      }
    return b.to_csr();
  };
  mass_ = expand(scalar_mass_);
  stiffness_ = expand(scalar_stiffness_);
}

std::array<double, 2> FeSpace::element_origin(int t) const {
  const int cell = t / 2;
  const int cx = cell % mesh_.n_div;
  const int cy = cell / mesh_.n_div;
  return {cx * h(), cy * h()};
}

Vec FeSpace::mass_apply(const Vec& u) const { return mass_.apply(u); }
Vec FeSpace::stiffness_apply(const Vec& u) const { return stiffness_.apply(u); }

double FeSpace::mass_inner(const Vec& u, const Vec& v) const { return mass_.quadratic_form(u, v); }
double FeSpace::stiffness_inner(const Vec& u, const Vec& v) const { return stiffness_.quadratic_form(u, v); }
double FeSpace::h1_inner(const Vec& u, const Vec& v) const { return mass_inner(u, v) + stiffness_inner(u, v); }

std::shared_ptr<const FeSpace> build_space(int n_div) { return std::make_shared<const FeSpace>(n_div); }

FeFunction::FeFunction(const FeSpace& s, Vec c) : space(&s), coeffs(std::move(c)) {
  if (coeffs.size() != s.n_dof())
    throw NumericalError("FeFunction: coefficient vector length " + std::to_string(coeffs.size()) +
                         " does not match n_dof " + std::to_string(s.n_dof()));
}

namespace {
void require_same_space(const FeFunction& u, const FeFunction& v) {
  if (u.space != v.space || u.coeffs.size() != v.coeffs.size())
    throw NumericalError("FeFunction binary operation: functions live on different spaces");
}
}  // namespace

double l2_inner(const FeFunction& u, const FeFunction& v) {
  require_same_space(u, v);
  return u.space->mass_inner(u.coeffs, v.coeffs);
}

double h1_semi_inner(const FeFunction& u, const FeFunction& v) {
  require_same_space(u, v);
  return u.space->stiffness_inner(u.coeffs, v.coeffs);
}

double trilinear(const FeFunction& u, const FeFunction& v, const FeFunction& w) {
  require_same_space(u, v);
  require_same_space(u, w);
  const FeSpace& sp = *u.space;
  const auto& quad = TriQuadrature::rule();
  const std::size_t S = sp.scalar_dofs();
  const double area = sp.element_area();

  double conv_vw = 0.0;  // ((u.grad) v, w)
  double conv_wv = 0.0;  // ((u.grad) w, v)
  for (int t = 0; t < sp.n_triangles(); ++t) {
    const auto& nodes = sp.element_nodes(t);
    const int cls = sp.element_class(t);
    const auto& vals = sp.basis_values();
    const auto& grads = sp.basis_gradients(cls);
    for (int q = 0; q < TriQuadrature::n_points; ++q) {
      double uval[2] = {0, 0}, vval[2] = {0, 0}, wval[2] = {0, 0};
      double vgrad[2][2] = {{0, 0}, {0, 0}}, wgrad[2][2] = {{0, 0}, {0, 0}};
      for (int n = 0; n < 6; ++n) {
        const std::size_t k = nodes[n];
        const double bn = vals[q][n];
        const double gx = grads[q][n][0], gy = grads[q][n][1];
        for (int c = 0; c < 2; ++c) {
          const double uc = u.coeffs[c * S + k];
          const double vc = v.coeffs[c * S + k];
          const double wc = w.coeffs[c * S + k];
          uval[c] += bn * uc;
          vval[c] += bn * vc;
          wval[c] += bn * wc;
          vgrad[c][0] += gx * vc;
          vgrad[c][1] += gy * vc;
          wgrad[c][0] += gx * wc;
          wgrad[c][1] += gy * wc;
        }
      }
      const double wq = area * quad.weight[q];
      for (int c = 0; c < 2; ++c) {
        conv_vw += wq * (uval[0] * vgrad[c][0] + uval[1] * vgrad[c][1]) * wval[c];
        conv_wv += wq * (uval[0] * wgrad[c][0] + uval[1] * wgrad[c][1]) * vval[c];
      }
    }
  }
  return 0.5 * (conv_vw - conv_wv);
}

Vec load_vector(const FeSpace& space, const VectorField& f, double t) {
  const auto& quad = TriQuadrature::rule();
  const std::size_t S = space.scalar_dofs();
  const double area = space.element_area();
  Vec out(space.n_dof(), 0.0);
  for (int tri = 0; tri < space.n_triangles(); ++tri) {
    const auto& nodes = space.element_nodes(tri);
    const int cls = space.element_class(tri);
    const auto origin = space.element_origin(tri);
    const auto& offs = space.qp_offsets(cls);
    const auto& vals = space.basis_values();
    for (int q = 0; q < TriQuadrature::n_points; ++q) {
      const auto fv = f(origin[0] + offs[q][0], origin[1] + offs[q][1], t);
      const double w0 = area * quad.weight[q] * fv[0];
      const double w1 = area * quad.weight[q] * fv[1];
      for (int n = 0; n < 6; ++n) {
        out[nodes[n]] += w0 * vals[q][n];
        out[S + nodes[n]] += w1 * vals[q][n];
      }
    }
  }
  return out;
}

FeFunction interpolate(const FeSpace& space, const VectorField& f, double t) {
  FeFunction u(space);
  const std::size_t S = space.scalar_dofs();
  for (std::size_t k = 0; k < S; ++k) {
    const auto& xy = space.dof_coords()[k];
    const auto fv = f(xy[0], xy[1], t);
    u.coeffs[k] = fv[0];
    u.coeffs[S + k] = fv[1];
  }
  return u;
}

double quadrature_l2_distance(const FeSpace& space, const Vec& coeffs, const VectorField& f, double t) {
  if (coeffs.size() != space.n_dof()) throw NumericalError("quadrature_l2_distance: dimension mismatch");
  const auto& quad = TriQuadrature::rule();
  const std::size_t S = space.scalar_dofs();
  const double area = space.element_area();
  double acc = 0.0;
  for (int tri = 0; tri < space.n_triangles(); ++tri) {
    const auto& nodes = space.element_nodes(tri);
    const int cls = space.element_class(tri);
    const auto origin = space.element_origin(tri);
    const auto& offs = space.qp_offsets(cls);
    const auto& vals = space.basis_values();
    for (int q = 0; q < TriQuadrature::n_points; ++q) {
      double uh[2] = {0, 0};
      for (int n = 0; n < 6; ++n) {
        uh[0] += vals[q][n] * coeffs[nodes[n]];
        uh[1] += vals[q][n] * coeffs[S + nodes[n]];
      }
      const auto fv = f(origin[0] + offs[q][0], origin[1] + offs[q][1], t);
      const double d0 = uh[0] - fv[0];
      const double d1 = uh[1] - fv[1];
      acc += area * quad.weight[q] * (d0 * d0 + d1 * d1);
    }
  }
  return std::sqrt(acc);
}

namespace {
BandCholesky build_riesz_factor(const FeSpace& space) {
  const CsrMatrix a = csr_add(space.scalar_mass(), space.scalar_stiffness());
  BandCholesky chol(a.rows(), a.bandwidth());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k)
      if (a.col_idx()[k] <= i) chol.set(i, a.col_idx()[k], a.values()[k]);
  chol.factor();
  return chol;
}
}  // namespace

DualNormSolver::DualNormSolver(const FeSpace& space)
    : scalar_dofs_(space.scalar_dofs()), chol_(build_riesz_factor(space)) {}

double DualNormSolver::dual_norm_sq(const Vec& load) const {
  if (load.size() != 2 * scalar_dofs_) throw NumericalError("DualNormSolver: dimension mismatch");
  double acc = 0.0;
  Vec comp(scalar_dofs_);
  for (int c = 0; c < 2; ++c) {
    std::copy(load.begin() + c * scalar_dofs_, load.begin() + (c + 1) * scalar_dofs_, comp.begin());
    const Vec sol = chol_.solve(comp);
    acc += dot(comp, sol);
  }
  return acc;
}

}  // namespace podvms
