#pragma once

#include <string>
#include <vector>

#include "podvms/linalg.hpp"
#include "podvms/rom.hpp"

namespace podvms {

/// Time series of reduced coefficients plus the running sums feeding the
/// discrete energy-bound monitor.
struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;          // states[k] = a at times[k]
  std::vector<int> newton_iters;    // per step
  double dt = 0.0;
  double grad_energy_sum = 0.0;     // sum_k a_{k+1}^T K a_{k+1}
  double dual_norm_sq_sum = 0.0;    // sum_k |f^{k+1}|_{-1,h}^2

  const Vec& final_state() const { return states.back(); }
};

/// Residual of the implicit step equation
///   g(a) = (a - a_prev)/dt + nu K a + N(a) + alpha D a - F.
Vec rom_residual(const ReducedModel& model, const Vec& a, const Vec& a_prev, double dt, const Vec& forcing);

/// Analytic Jacobian dg/da = (1/dt) I + nu K + alpha D + dN/da,
/// (dN/da)[l][m] = sum_j a_j (T[m][j][l] + T[j][m][l]).
DenseMatrix rom_jacobian(const ReducedModel& model, const Vec& a, double dt);

/// One backward-Euler step: Newton with the analytic Jacobian and a halving
/// line search, converged when the residual infinity norm drops below
/// 1e-12 (1 + |F|_inf) within 10 iterations. Non-convergence is an error
/// carrying the step index and final residual.
Vec step(const ReducedModel& model, const Vec& a_prev, double t_next, double dt,
         const Vec* initial_guess = nullptr, int* iters_out = nullptr, long step_index = -1);

/// Integrates from the model's initial condition to t_final. The step count
/// t_final/dt must be integral to 1e-9. Forcing is sampled fresh at each step
/// (through the model hook); monitor sums accumulate every step.
Trajectory simulate(const ReducedModel& model, double dt, double t_final);

struct StabilityReport {
  double lhs = 0.0;  // |a_M|^2 + nu dt sum |grad u_r|^2
  double rhs = 0.0;  // |a_0|^2 + (dt/nu) sum |f|_{-1,h}^2
  bool holds = false;
};

/// Discrete energy bound of the implicit scheme, with the forcing measured in
/// the computable discrete dual norm (Riesz solve against mass + stiffness).
StabilityReport stability_check(const Trajectory& traj, const ReducedModel& model, double nu);

/// CSV dump: header `step,time,a_1,...,a_r`, 17 significant digits.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

}  // namespace podvms
