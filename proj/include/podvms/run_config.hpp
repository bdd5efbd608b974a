#pragma once

#include <string>
#include <vector>

#include "podvms/rom.hpp"

namespace podvms {

/// Experiment configuration, parsed from flat `key = value` text (one pair per
/// line, `#` comments). Every key is optional; defaults reproduce the
/// benchmark operating point (h = 1/64, 101 snapshots, nu = 1e-3, r = 99,
/// R = 95, alpha = 1e-3, unit time horizon).
struct RunConfig {
  int n_div = 64;
  double snapshot_dt = 1e-2;  // spacing between recorded snapshots
  int n_snapshots = 100;      // number of intervals; columns = n_snapshots + 1
  double nu = 1e-3;
  int r = 99;
  int cutoff = 95;  // R
  double alpha = 1e-3;
  ClosureVariant variant = ClosureVariant::kVms;
  double dt = 5e-3;
  double t_final = 1.0;
  double rank_tol = 1e-13;

  std::vector<double> sweep_dt_set = {5e-3, 2.5e-3, 1.25e-3, 6.25e-4, 3.125e-4};
  std::vector<int> sweep_r_set = {6, 10, 16, 24, 34, 45, 56};
  double sweep_r_dt = 1e-4;

  std::string snapshots_path;
  std::string basis_path;
  std::string out_path;

  static RunConfig from_file(const std::string& path);
  static RunConfig from_string(const std::string& text);

  void validate() const;  // throws ConfigError
  ClosureConfig closure() const { return ClosureConfig{variant, alpha, cutoff}; }
  ManufacturedProblem problem() const { return ManufacturedProblem{nu, 500.0}; }
};

}  // namespace podvms
