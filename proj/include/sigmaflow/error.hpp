#pragma once

#include <stdexcept>
#include <string>

namespace sigmaflow {

// Invalid argument in the mathematical sense: index out of range, wrong
// dimension, nonpositive eigenvalue, degenerate polytope.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Spectrum lies outside the validity region declared by an OperatorSpec.
class RegionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Numerical procedure failed: ill-conditioned interpolation, Newton
// stagnation, step-size floor reached.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// omega = G0 + D^2 phi lost positive definiteness at some grid node.
class DegenerateMetricError : public NumericError {
 public:
  DegenerateMetricError(const std::string& what, std::size_t node)
      : NumericError(what), node_(node) {}
  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

// Malformed or unknown configuration input (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sigmaflow
