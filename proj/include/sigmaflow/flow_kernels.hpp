#pragma once

// Per-node kernels of the torus flow. The OpenMP path writes per-node arrays
// and reduces with max/min only, so it agrees bitwise with the serial path.

#include <array>
#include <cstddef>
#include <vector>

#include "sigmaflow/periodic_grid.hpp"

namespace sigmaflow {

struct NodeFields {
  std::vector<double> F;          // F(alpha^{-1} omega) per node
  std::vector<double> det_omega;  // det omega per node
  double sup_F = 0.0;
  double inf_F = 0.0;
  // max over nodes of |dF/dlambda_i| / lambda_min(alpha): diffusion bound.
  double diffusion = 0.0;
  double min_omega_eig = 0.0;
  // Smallest node index where omega is not positive definite, or -1.
  std::ptrdiff_t bad_node = -1;
};

// Eigenvalues of alpha^{-1} omega for a 2x2 (or 1x1) pencil.
std::array<double, 2> pencil_eigenvalues(const Sym2& alpha, const Sym2& omega, std::size_t n);

// F and dF/dlambda for sigma weights w (w[k-1] = w_k) at n <= 2 eigenvalues.
double sigma_value(const std::vector<double>& w, const std::array<double, 2>& lam, std::size_t n);
std::array<double, 2> sigma_gradient(const std::vector<double>& w, const std::array<double, 2>& lam,
                                     std::size_t n);

// omega = G0 + t D^2_h phi. `w` are the effective operator weights.
void evaluate_nodes(const TorusProblem& prob, const std::vector<double>& w,
                    const std::vector<double>& phi, double t, NodeFields& out, Exec exec);

}  // namespace sigmaflow
