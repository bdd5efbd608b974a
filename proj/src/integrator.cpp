#include "podvms/integrator.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "podvms/errors.hpp"

namespace podvms {

namespace {

// N(a)_l = sum_ij a_i a_j T[i][j][l], accumulated through the middle-index
// contraction Q[i][l] = sum_j a_j T[i][j][l] so the tensor streams once.
void convection_contract(const ReducedModel& model, const Vec& a, Vec& n_out, DenseMatrix* q_out) {
  const std::size_t r = model.r;
  DenseMatrix q(r, r, 0.0);
  const double* t = model.convection.data();
  for (std::size_t i = 0; i < r; ++i) {
    double* qi = q.row(i);
    for (std::size_t j = 0; j < r; ++j) {
      const double aj = a[j];
      const double* trow = t + (i * r + j) * r;
      if (aj == 0.0) continue;
      for (std::size_t l = 0; l < r; ++l) qi[l] += aj * trow[l];
    }
  }
  n_out.assign(r, 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    const double ai = a[i];
    if (ai == 0.0) continue;
    const double* qi = q.row(i);
    for (std::size_t l = 0; l < r; ++l) n_out[l] += ai * qi[l];
  }
  if (q_out) *q_out = std::move(q);
}

bool all_finite(const Vec& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

Vec rom_residual(const ReducedModel& model, const Vec& a, const Vec& a_prev, double dt, const Vec& forcing) {
  const std::size_t r = model.r;
  if (a.size() != r || a_prev.size() != r || forcing.size() != r)
    throw NumericalError("rom_residual: dimension mismatch");
  Vec n;
  convection_contract(model, a, n, nullptr);

  const Vec ka = model.gram_h1.apply(a);
  const double alpha = model.closure.effective_alpha();
  Vec g(r);
  if (alpha != 0.0) {
    const Vec da = model.vms.apply(a);
    for (std::size_t l = 0; l < r; ++l)
      g[l] = (a[l] - a_prev[l]) / dt + model.nu * ka[l] + n[l] + alpha * da[l] - forcing[l];
  } else {
    for (std::size_t l = 0; l < r; ++l)
      g[l] = (a[l] - a_prev[l]) / dt + model.nu * ka[l] + n[l] - forcing[l];
  }
  return g;
}

DenseMatrix rom_jacobian(const ReducedModel& model, const Vec& a, double dt) {
  const std::size_t r = model.r;
  if (a.size() != r) throw NumericalError("rom_jacobian: dimension mismatch");

  // Q1[m][l] = sum_j a_j T[m][j][l], Q2[m][l] = sum_j a_j T[j][m][l];
  // dN[l][m] = Q1[m][l] + Q2[m][l].
  DenseMatrix q1(r, r, 0.0), q2(r, r, 0.0);
  const double* t = model.convection.data();
  for (std::size_t m = 0; m < r; ++m) {
    double* q1m = q1.row(m);
    for (std::size_t j = 0; j < r; ++j) {
      const double aj = a[j];
      if (aj == 0.0) continue;
      const double* trow = t + (m * r + j) * r;
      for (std::size_t l = 0; l < r; ++l) q1m[l] += aj * trow[l];
    }
  }
  for (std::size_t j = 0; j < r; ++j) {
    const double aj = a[j];
    if (aj == 0.0) continue;
    for (std::size_t m = 0; m < r; ++m) {
      const double* trow = t + (j * r + m) * r;
      double* q2m = q2.row(m);
      for (std::size_t l = 0; l < r; ++l) q2m[l] += aj * trow[l];
    }
  }

  const double alpha = model.closure.effective_alpha();
  DenseMatrix jac(r, r);
  for (std::size_t l = 0; l < r; ++l) {
    double* jl = jac.row(l);
    for (std::size_t m = 0; m < r; ++m) {
      double v = model.nu * model.gram_h1(l, m) + q1(m, l) + q2(m, l);
      if (alpha != 0.0) v += alpha * model.vms(l, m);
      jl[m] = v;
    }
    jl[l] += 1.0 / dt;
  }
  return jac;
}

namespace {

Vec newton_solve(const ReducedModel& model, const Vec& a_prev, const Vec& forcing, double t_next, double dt,
                 const Vec* initial_guess, int* iters_out, long step_index) {
  if (!(dt > 0.0)) throw ConfigError("step: time step must be positive");
  const double tol = 1e-12 * (1.0 + norm_inf(forcing));

  auto fail = [&](double residual) {
    throw NumericalError("Newton did not converge at step " +
                         (step_index >= 0 ? std::to_string(step_index) : std::string("?")) +
                         " (t = " + std::to_string(t_next) + "), residual " + std::to_string(residual));
  };

  Vec a = initial_guess ? *initial_guess : a_prev;
  Vec g = rom_residual(model, a, a_prev, dt, forcing);
  if (!all_finite(g)) fail(std::nan(""));
  double gnorm = norm_inf(g);

  constexpr int kMaxIter = 10;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    if (gnorm <= tol) {
      if (iters_out) *iters_out = iter;
      return a;
    }
    const DenseMatrix jac = rom_jacobian(model, a, dt);
    Vec delta = LuSolver(jac).solve(g);
    for (double& x : delta) x = -x;

    // Damped update: halve until the residual decreases (up to 20 times).
    double lambda = 1.0;
    Vec a_trial(model.r);
    Vec g_trial;
    double gnorm_trial = 0.0;
    bool accepted = false;
    for (int halve = 0; halve <= 20; ++halve) {
      for (std::size_t i = 0; i < model.r; ++i) a_trial[i] = a[i] + lambda * delta[i];
      g_trial = rom_residual(model, a_trial, a_prev, dt, forcing);
      if (all_finite(g_trial)) {
        gnorm_trial = norm_inf(g_trial);
        if (gnorm_trial < gnorm || gnorm_trial <= tol) {
          accepted = true;
          break;
        }
      }
      lambda *= 0.5;
    }
    if (!accepted) fail(gnorm);
    a = a_trial;
    g = std::move(g_trial);
    gnorm = gnorm_trial;
  }
  if (gnorm <= tol) {
    if (iters_out) *iters_out = kMaxIter;
    return a;
  }
  fail(gnorm);
  return a;  // unreachable
}

}  // namespace

Vec step(const ReducedModel& model, const Vec& a_prev, double t_next, double dt,
         const Vec* initial_guess, int* iters_out, long step_index) {
  const ForcingSample fs = model.sample_forcing(t_next);
  return newton_solve(model, a_prev, fs.reduced, t_next, dt, initial_guess, iters_out, step_index);
}

Trajectory simulate(const ReducedModel& model, double dt, double t_final) {
  if (!(dt > 0.0) || !(t_final > 0.0)) throw ConfigError("simulate: dt and t_final must be positive");
  const double ratio = t_final / dt;
  const long n_steps = std::lround(ratio);
  if (n_steps < 1 || std::abs(ratio - static_cast<double>(n_steps)) > 1e-9)
    throw ConfigError("simulate: t_final/dt = " + std::to_string(ratio) + " is not an integer step count");

  Trajectory traj;
  traj.dt = dt;
  traj.times.reserve(n_steps + 1);
  traj.states.reserve(n_steps + 1);
  traj.newton_iters.reserve(n_steps);
  traj.times.push_back(0.0);
  traj.states.push_back(model.a0);

  for (long k = 0; k < n_steps; ++k) {
    const double t_next = static_cast<double>(k + 1) * dt;
    // Linear predictor from the two previous states cuts one Newton iteration.
    const Vec* guess = nullptr;
    Vec predictor;
    if (k >= 1) {
      predictor.resize(model.r);
      const Vec& am1 = traj.states[k - 1];
      const Vec& am0 = traj.states[k];
      for (std::size_t i = 0; i < model.r; ++i) predictor[i] = 2.0 * am0[i] - am1[i];
      guess = &predictor;
    }
    int iters = 0;
    const ForcingSample fs = model.sample_forcing(t_next);
    Vec a_next = newton_solve(model, traj.states.back(), fs.reduced, t_next, dt, guess, &iters, k);
    if (!all_finite(a_next)) throw NumericalError("simulate: non-finite state at step " + std::to_string(k));

    traj.grad_energy_sum += model.gram_h1.quadratic(a_next);
    traj.dual_norm_sq_sum += fs.dual_norm_sq;
    traj.newton_iters.push_back(iters);
    traj.times.push_back(t_next);
    traj.states.push_back(std::move(a_next));
  }
  return traj;
}

StabilityReport stability_check(const Trajectory& traj, const ReducedModel& model, double nu) {
  if (traj.states.empty()) throw ConfigError("stability_check: empty trajectory");
  if (!(nu > 0.0)) throw ConfigError("stability_check: viscosity must be positive");
  StabilityReport rep;
  const Vec& a0 = traj.states.front();
  const Vec& am = traj.states.back();
  double grad_sum = 0.0;
  for (std::size_t k = 1; k < traj.states.size(); ++k) grad_sum += model.gram_h1.quadratic(traj.states[k]);
  rep.lhs = dot(am, am) + nu * traj.dt * grad_sum;
  rep.rhs = dot(a0, a0) + (traj.dt / nu) * traj.dual_norm_sq_sum;
  rep.holds = rep.lhs <= rep.rhs * (1.0 + 1e-8);
  return rep;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  const std::size_t r = traj.states.empty() ? 0 : traj.states.front().size();
  out << "step,time";
  for (std::size_t j = 1; j <= r; ++j) out << ",a_" << j;
  out << "\n";
  char buf[64];
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    out << k;
    std::snprintf(buf, sizeof buf, "%.17g", traj.times[k]);
    out << ',' << buf;
    for (double v : traj.states[k]) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << ',' << buf;
    }
    out << "\n";
  }
  if (!out) throw IoError("write failure on '" + path + "'");
}

}  // namespace podvms
