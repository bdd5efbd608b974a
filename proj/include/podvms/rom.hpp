#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "podvms/linalg.hpp"
#include "podvms/manufactured.hpp"
#include "podvms/pod.hpp"

namespace podvms {

enum class ClosureVariant { kGalerkin, kMixingLength, kVms };

std::string to_string(ClosureVariant v);
ClosureVariant closure_variant_from_string(const std::string& s);

/// Eddy-viscosity closure selection. Galerkin carries no closure term;
/// mixing-length damps all modes (cutoff pinned to 0); the projector variant
/// damps only the modes above the cutoff.
struct ClosureConfig {
  ClosureVariant variant = ClosureVariant::kVms;
  double alpha = 0.0;  // eddy-viscosity coefficient, >= 0
  int cutoff = 0;      // R, 0 <= R <= r

  void validate(std::size_t r) const;
  double effective_alpha() const { return variant == ClosureVariant::kGalerkin ? 0.0 : alpha; }
  int effective_cutoff() const { return variant == ClosureVariant::kMixingLength ? 0 : cutoff; }
};

/// Reduced forcing sample at one time: projected right-hand side plus the
/// squared discrete dual norm of the underlying load (for the energy-bound
/// monitor).
struct ForcingSample {
  Vec reduced;
  double dual_norm_sq = 0.0;
};

/// All time-independent data of the reduced system
///   da/dt + nu K a + N(a) + alpha D a = F(t),
/// where K is the gradient Gram matrix, N the quadratic convection term
/// N(a)_l = sum_ij a_i a_j T[i][j][l], and D the projector-complement matrix.
/// The reduced mass matrix is the identity (orthonormal modes) and is not
/// stored. The convection tensor is dense with layout T[(i*r + j)*r + l].
struct ReducedModel {
  std::size_t r = 0;
  double nu = 0.0;
  DenseMatrix gram_h1;           // K_r, symmetric PSD
  std::vector<double> convection;  // r^3 entries, antisymmetric in the last two slots
  DenseMatrix vms;               // D_R for the configured cutoff
  Vec a0;
  ClosureConfig closure;
  std::shared_ptr<const PodBasis> basis;  // optional for synthetic models
  std::function<ForcingSample(double)> forcing;  // empty means F = 0

  double tensor(std::size_t i, std::size_t j, std::size_t l) const { return convection[(i * r + j) * r + l]; }
  ForcingSample sample_forcing(double t) const;
};

DenseMatrix reduce_gram(const PodBasis& basis, std::size_t r);

/// Convection tensor T[i][j][l] = b(phi_i, phi_j, phi_l): a single blocked
/// sweep over elements accumulates the raw form ((phi_i.grad) phi_j, phi_l),
/// which is then antisymmetrized in the last two slots. The antisymmetrization
/// makes T[i][j][j] = 0 and T[i][j][l] = -T[i][l][j] hold exactly.
std::vector<double> reduce_trilinear(const PodBasis& basis, std::size_t r);

/// The closure-independent reduced operators; the tensor assembly dominates
/// model construction, so sweeps share one instance across runs.
struct ReducedOperators {
  std::size_t r = 0;
  DenseMatrix gram_h1;
  std::vector<double> convection;
};

ReducedOperators assemble_reduced_operators(const PodBasis& basis, std::size_t r);

/// Gradient-projector complement matrix D_R = K - B G^{-1} B^T (Schur
/// complement of the leading R x R block G of the full gradient Gram matrix).
/// Realizes the pairing of projected-away gradient components exactly, because
/// the projector is the L2 projection onto the span of the first R mode
/// gradients. The block inverse is applied through its spectral decomposition;
/// an ill-conditioned block (estimate above 1e14) is an error.
DenseMatrix vms_matrix(const DenseMatrix& gram_full, std::size_t cutoff);

/// Reduced coefficients of the L2 projection of u0.
Vec initial_condition(const PodBasis& basis, std::size_t r, const FeFunction& u0);

/// Projected forcing entry j = (f(., t), phi_j).
Vec project_forcing(const FeSpace& space, const VectorField& f, const PodBasis& basis, std::size_t r, double t);

/// Shared memo of forcing samples keyed by the bit pattern of t; concurrent
/// sweep runs over the same time grid assemble each load vector once.
class ForcingCache {
 public:
  bool lookup(double t, ForcingSample& out) const;
  void store(double t, ForcingSample sample);

 private:
  mutable std::mutex mutex_;
  std::unordered_map<std::uint64_t, ForcingSample> map_;
};

/// Evaluates the manufactured forcing against the basis: fresh FE load
/// assembly at each requested time, projection onto the modes, and the dual
/// norm through the Riesz solver.
class ForcingProvider {
 public:
  ForcingProvider(std::shared_ptr<const FeSpace> space, ManufacturedProblem problem,
                  std::shared_ptr<const PodBasis> basis, std::size_t r,
                  std::shared_ptr<const DualNormSolver> riesz, std::shared_ptr<ForcingCache> cache = nullptr);

  ForcingSample operator()(double t) const;

 private:
  std::shared_ptr<const FeSpace> space_;
  ManufacturedProblem problem_;
  std::shared_ptr<const PodBasis> basis_;
  std::size_t r_;
  std::shared_ptr<const DualNormSolver> riesz_;
  std::shared_ptr<ForcingCache> cache_;
};

/// Assembles the complete reduced model for the manufactured problem: reduced
/// operators at order r (reused from `ops` when supplied), closure matrix per
/// the configuration, projected initial condition from the t = 0 velocity,
/// and the forcing hook.
ReducedModel build_reduced_model(std::shared_ptr<const PodBasis> basis, std::size_t r, ClosureConfig closure,
                                 const ManufacturedProblem& problem,
                                 std::shared_ptr<const DualNormSolver> riesz = nullptr,
                                 std::shared_ptr<ForcingCache> cache = nullptr,
                                 std::shared_ptr<const ReducedOperators> ops = nullptr);

// Reduced-model archive ("PODROM01"): r, closure parameters, then K, T, D, a0
// as f64 blocks. The forcing hook is not serialized; loaded models carry F = 0.
void write_reduced_model(const std::string& path, const ReducedModel& model);
ReducedModel read_reduced_model(const std::string& path);

}  // namespace podvms
