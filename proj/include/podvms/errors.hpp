#pragma once

#include <stdexcept>
#include <string>

namespace podvms {

/// Invalid user-facing configuration (config file, CLI arguments, parameter ranges).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure: solver non-convergence, singular systems, broken invariants.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

/// File I/O and archive-format failures.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace podvms
