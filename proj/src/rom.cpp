#include "podvms/rom.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "podvms/errors.hpp"
#include "podvms/io_detail.hpp"

namespace podvms {

std::string to_string(ClosureVariant v) {
  switch (v) {
    case ClosureVariant::kGalerkin: return "galerkin";
    case ClosureVariant::kMixingLength: return "mixing_length";
    case ClosureVariant::kVms: return "vms";
  }
  return "?";
}

ClosureVariant closure_variant_from_string(const std::string& s) {
  if (s == "galerkin") return ClosureVariant::kGalerkin;
  if (s == "mixing_length") return ClosureVariant::kMixingLength;
  if (s == "vms") return ClosureVariant::kVms;
  throw ConfigError("unknown closure variant '" + s + "' (expected galerkin, mixing_length, or vms)");
}

void ClosureConfig::validate(std::size_t r) const {
  if (alpha < 0.0) throw ConfigError("closure: alpha must be non-negative");
  if (cutoff < 0 || static_cast<std::size_t>(cutoff) > r)
    throw ConfigError("closure: cutoff R = " + std::to_string(cutoff) + " outside [0, r = " + std::to_string(r) + "]");
}

ForcingSample ReducedModel::sample_forcing(double t) const {
  if (forcing) return forcing(t);
  return ForcingSample{Vec(r, 0.0), 0.0};
}

DenseMatrix reduce_gram(const PodBasis& basis, std::size_t r) { return gram_h1_semi(basis, r); }

std::vector<double> reduce_trilinear(const PodBasis& basis, std::size_t r) {
  if (r > basis.rank()) throw ConfigError("reduce_trilinear: r exceeds basis rank");
  const FeSpace& sp = *basis.space;
  const std::size_t S = sp.scalar_dofs();
  const auto& quad = TriQuadrature::rule();
  const double area = sp.element_area();

  std::vector<double> raw(r * r * r, 0.0);  // ((phi_i.grad) phi_j, phi_l)
  if (r == 0) return raw;

  // Blocked over elements so the per-point mode tables stay cache resident:
  // per batch, evaluate values and gradients of every mode at every quadrature
  // point (transposed layout, point index fastest), then accumulate the r^3
  // contractions against the whole batch at once.
  constexpr int kTriBatch = 16;
  constexpr int kQ = TriQuadrature::n_points;
  const int nb = kTriBatch * kQ;
  std::vector<double> vx(r * nb), vy(r * nb), g00(r * nb), g01(r * nb), g10(r * nb), g11(r * nb);
  std::vector<double> s0w(nb), s1w(nb), wq(nb);
  for (int b = 0; b < nb; ++b) wq[b] = area * quad.weight[b % kQ];

  const int n_tri = sp.n_triangles();
  for (int t0 = 0; t0 < n_tri; t0 += kTriBatch) {
    const int tcount = std::min(kTriBatch, n_tri - t0);
    const int bq = tcount * kQ;

    for (int tl = 0; tl < tcount; ++tl) {
      const int t = t0 + tl;
      const auto& nodes = sp.element_nodes(t);
      const int cls = sp.element_class(t);
      const auto& vals = sp.basis_values();
      const auto& grads = sp.basis_gradients(cls);
      for (std::size_t m = 0; m < r; ++m) {
        const double* phi = basis.modes[m].data();
        double cxs[6], cys[6];
        for (int n = 0; n < 6; ++n) {
          cxs[n] = phi[nodes[n]];
          cys[n] = phi[S + nodes[n]];
        }
        double* vxm = &vx[m * nb + tl * kQ];
        double* vym = &vy[m * nb + tl * kQ];
        double* g00m = &g00[m * nb + tl * kQ];
        double* g01m = &g01[m * nb + tl * kQ];
        double* g10m = &g10[m * nb + tl * kQ];
        double* g11m = &g11[m * nb + tl * kQ];
        for (int q = 0; q < kQ; ++q) {
          double sx = 0, sy = 0, d00 = 0, d01 = 0, d10 = 0, d11 = 0;
          for (int n = 0; n < 6; ++n) {
            sx += vals[q][n] * cxs[n];
            sy += vals[q][n] * cys[n];
            d00 += grads[q][n][0] * cxs[n];
            d01 += grads[q][n][1] * cxs[n];
            d10 += grads[q][n][0] * cys[n];
            d11 += grads[q][n][1] * cys[n];
          }
          vxm[q] = sx;
          vym[q] = sy;
          g00m[q] = d00;
          g01m[q] = d01;
          g10m[q] = d10;
          g11m[q] = d11;
        }
      }
    }

    for (std::size_t i = 0; i < r; ++i) {
      const double* vxi = &vx[i * nb];
      const double* vyi = &vy[i * nb];
      for (std::size_t j = 0; j < r; ++j) {
        const double* g00j = &g00[j * nb];
        const double* g01j = &g01[j * nb];
        const double* g10j = &g10[j * nb];
        const double* g11j = &g11[j * nb];
        for (int b = 0; b < bq; ++b) {
          s0w[b] = wq[b] * (vxi[b] * g00j[b] + vyi[b] * g01j[b]);
          s1w[b] = wq[b] * (vxi[b] * g10j[b] + vyi[b] * g11j[b]);
        }
        double* crow = &raw[(i * r + j) * r];
        for (std::size_t l = 0; l < r; ++l) {
          const double* vxl = &vx[l * nb];
          const double* vyl = &vy[l * nb];
          double acc = 0.0;
          for (int b = 0; b < bq; ++b) acc += s0w[b] * vxl[b] + s1w[b] * vyl[b];
          crow[l] += acc;
        }
      }
    }
  }

  // T[i][j][l] = (raw[i][j][l] - raw[i][l][j]) / 2: exact antisymmetry.
  std::vector<double> tensor(r * r * r);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      tensor[(i * r + j) * r + j] = 0.0;
      for (std::size_t l = j + 1; l < r; ++l) {
        const double v = 0.5 * (raw[(i * r + j) * r + l] - raw[(i * r + l) * r + j]);
        tensor[(i * r + j) * r + l] = v;
        tensor[(i * r + l) * r + j] = -v;
      }
    }
  }
  return tensor;
}

DenseMatrix vms_matrix(const DenseMatrix& gram_full, std::size_t cutoff) {
  if (gram_full.rows() != gram_full.cols()) throw NumericalError("vms_matrix: Gram matrix not square");
  const std::size_t r = gram_full.rows();
  if (cutoff > r) throw ConfigError("vms_matrix: cutoff R = " + std::to_string(cutoff) + " exceeds r = " + std::to_string(r));
  if (cutoff == 0) return gram_full;

  // Spectral decomposition of the leading block doubles as the conditioning
  // estimate and as a symmetric application of its inverse.
  DenseMatrix g(cutoff, cutoff);
  for (std::size_t i = 0; i < cutoff; ++i)
    for (std::size_t j = 0; j < cutoff; ++j) g(i, j) = gram_full(i, j);
  const EigenDecomposition eig = sym_eig_descending(g);
  const double lmax = eig.values.front();
  const double lmin = eig.values.back();
  if (!(lmin > 0.0) || lmax / lmin > 1e14)
    throw NumericalError("vms_matrix: gradient Gram block for cutoff R = " + std::to_string(cutoff) +
                         " is singular or too ill-conditioned (estimate " +
                         std::to_string(lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity()) + ")");

  // W = B Z Lambda^{-1/2}, D = K - W W^T with B the r x R coupling block.
  DenseMatrix w(r, cutoff, 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t k = 0; k < cutoff; ++k) {
      double s = 0.0;
      for (std::size_t b = 0; b < cutoff; ++b) s += gram_full(i, b) * eig.vectors(b, k);
      w(i, k) = s / std::sqrt(eig.values[k]);
    }
  }
  DenseMatrix d = gram_full;
  for (std::size_t i = 0; i < r; ++i) {
    const double* wi = w.row(i);
    for (std::size_t j = i; j < r; ++j) {
      const double* wj = w.row(j);
      double s = 0.0;
      for (std::size_t k = 0; k < cutoff; ++k) s += wi[k] * wj[k];
      d(i, j) -= s;
      if (j != i) d(j, i) = d(i, j);
    }
  }
  return d;
}

Vec initial_condition(const PodBasis& basis, std::size_t r, const FeFunction& u0) {
  if (r > basis.rank()) throw ConfigError("initial_condition: r exceeds basis rank");
  if (u0.space != basis.space.get()) throw NumericalError("initial_condition: u0 lives on a different space");
  const Vec weighted = basis.space->mass_apply(u0.coeffs);
  Vec a0(r);
  for (std::size_t j = 0; j < r; ++j) a0[j] = dot(basis.modes[j], weighted);
  return a0;
}

Vec project_forcing(const FeSpace& space, const VectorField& f, const PodBasis& basis, std::size_t r, double t) {
  if (r > basis.rank()) throw ConfigError("project_forcing: r exceeds basis rank");
  const Vec load = load_vector(space, f, t);
  Vec out(r);
  for (std::size_t j = 0; j < r; ++j) out[j] = dot(basis.modes[j], load);
  return out;
}

bool ForcingCache::lookup(double t, ForcingSample& out) const {
  const auto key = std::bit_cast<std::uint64_t>(t);
  std::lock_guard<std::mutex> lock(mutex_);
  const auto it = map_.find(key);
  if (it == map_.end()) return false;
  out = it->second;
  return true;
}

void ForcingCache::store(double t, ForcingSample sample) {
  const auto key = std::bit_cast<std::uint64_t>(t);
  std::lock_guard<std::mutex> lock(mutex_);
  map_.emplace(key, std::move(sample));
}

ForcingProvider::ForcingProvider(std::shared_ptr<const FeSpace> space, ManufacturedProblem problem,
                                 std::shared_ptr<const PodBasis> basis, std::size_t r,
                                 std::shared_ptr<const DualNormSolver> riesz, std::shared_ptr<ForcingCache> cache)
    : space_(std::move(space)), problem_(problem), basis_(std::move(basis)), r_(r),
      riesz_(std::move(riesz)), cache_(std::move(cache)) {
  if (!space_ || !basis_) throw ConfigError("ForcingProvider: null space or basis");
  if (r_ > basis_->rank()) throw ConfigError("ForcingProvider: r exceeds basis rank");
}

ForcingSample ForcingProvider::operator()(double t) const {
  ForcingSample sample;
  if (cache_ && cache_->lookup(t, sample)) return sample;

  const Vec load = load_vector(*space_, forcing_field(problem_), t);
  sample.reduced.resize(r_);
  for (std::size_t j = 0; j < r_; ++j) sample.reduced[j] = dot(basis_->modes[j], load);
  sample.dual_norm_sq = riesz_ ? riesz_->dual_norm_sq(load) : 0.0;

  if (cache_) cache_->store(t, sample);
  return sample;
}

ReducedOperators assemble_reduced_operators(const PodBasis& basis, std::size_t r) {
  ReducedOperators ops;
  ops.r = r;
  ops.gram_h1 = reduce_gram(basis, r);
  ops.convection = reduce_trilinear(basis, r);
  return ops;
}

ReducedModel build_reduced_model(std::shared_ptr<const PodBasis> basis, std::size_t r, ClosureConfig closure,
                                 const ManufacturedProblem& problem,
                                 std::shared_ptr<const DualNormSolver> riesz,
                                 std::shared_ptr<ForcingCache> cache,
                                 std::shared_ptr<const ReducedOperators> ops) {
  if (!basis) throw ConfigError("build_reduced_model: null basis");
  if (r == 0 || r > basis->rank())
    throw ConfigError("build_reduced_model: r = " + std::to_string(r) + " outside [1, rank = " +
                      std::to_string(basis->rank()) + "]");
  closure.validate(r);
  if (ops && ops->r != r) throw ConfigError("build_reduced_model: prebuilt operators have the wrong order");

  ReducedModel model;
  model.r = r;
  model.nu = problem.nu;
  model.closure = closure;
  model.basis = basis;
  if (ops) {
    model.gram_h1 = ops->gram_h1;
    model.convection = ops->convection;
  } else {
    model.gram_h1 = reduce_gram(*basis, r);
    model.convection = reduce_trilinear(*basis, r);
  }
  model.vms = vms_matrix(model.gram_h1, static_cast<std::size_t>(closure.effective_cutoff()));

  const FeFunction u0 = interpolate(*basis->space, velocity_field(problem), 0.0);
  model.a0 = initial_condition(*basis, r, u0);

  if (!riesz) riesz = std::make_shared<const DualNormSolver>(*basis->space);
  model.forcing = ForcingProvider(basis->space, problem, basis, r, std::move(riesz), std::move(cache));
  return model;
}

void write_reduced_model(const std::string& path, const ReducedModel& model) {
  io::Writer w(path);
  w.magic("PODROM01");
  w.u64(model.r);
  w.u64(static_cast<std::uint64_t>(model.closure.variant));
  w.u64(static_cast<std::uint64_t>(model.closure.cutoff));
  w.f64(model.closure.alpha);
  w.f64(model.nu);
  Vec flat(model.r * model.r);
  auto dump_matrix = [&](const DenseMatrix& m) {
    for (std::size_t i = 0; i < model.r; ++i)
      for (std::size_t j = 0; j < model.r; ++j) flat[i * model.r + j] = m(i, j);
    w.f64_block(flat);
  };
  dump_matrix(model.gram_h1);
  w.f64_block(model.convection);
  dump_matrix(model.vms);
  w.f64_block(model.a0);
}

ReducedModel read_reduced_model(const std::string& path) {
  io::Reader rd(path);
  rd.expect_magic("PODROM01");
  const auto r = rd.u64();
  if (r == 0 || r > 100000) throw IoError(path + ": implausible reduced order " + std::to_string(r));
  const auto variant = rd.u64();
  if (variant > 2) throw IoError(path + ": unknown closure variant tag " + std::to_string(variant));
  const auto cutoff = rd.u64();
  if (cutoff > r) throw IoError(path + ": cutoff exceeds reduced order");

  ReducedModel model;
  model.r = r;
  model.closure.variant = static_cast<ClosureVariant>(variant);
  model.closure.cutoff = static_cast<int>(cutoff);
  model.closure.alpha = rd.f64();
  model.nu = rd.f64();

  const Vec kflat = rd.f64_block(r * r);
  model.gram_h1 = DenseMatrix(r, r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) model.gram_h1(i, j) = kflat[i * r + j];
  model.convection = rd.f64_block(r * r * r);
  const Vec dflat = rd.f64_block(r * r);
  model.vms = DenseMatrix(r, r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) model.vms(i, j) = dflat[i * r + j];
  model.a0 = rd.f64_block(r);
  rd.expect_eof();
  return model;
}

}  // namespace podvms
