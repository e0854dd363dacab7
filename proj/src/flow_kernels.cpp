#include "sigmaflow/flow_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sigmaflow {

std::array<double, 2> pencil_eigenvalues(const Sym2& alpha, const Sym2& omega, std::size_t n) {
  if (n == 1) return {omega.xx / alpha.xx, 0.0};
  const double a = alpha.det(2);
  const double b = alpha.xx * omega.yy + alpha.yy * omega.xx - 2.0 * alpha.xy * omega.xy;
  const double c = omega.det(2);
  const double disc = std::max(0.0, b * b - 4.0 * a * c);
  const double l1 = (b + std::sqrt(disc)) / (2.0 * a);
  const double l2 = c / (a * l1);
  return {l2, l1};
}

double sigma_value(const std::vector<double>& w, const std::array<double, 2>& lam, std::size_t n) {
  if (n == 1) return w[0] / lam[0];
  const double x1 = 1.0 / lam[0], x2 = 1.0 / lam[1];
  return w[0] * (x1 + x2) + w[1] * x1 * x2;
}

std::array<double, 2> sigma_gradient(const std::vector<double>& w, const std::array<double, 2>& lam,
                                     std::size_t n) {
  if (n == 1) {
    const double x = 1.0 / lam[0];
    return {-w[0] * x * x, 0.0};
  }
  const double x1 = 1.0 / lam[0], x2 = 1.0 / lam[1];
  return {-x1 * x1 * (w[0] + w[1] * x2), -x2 * x2 * (w[0] + w[1] * x1)};
}

void evaluate_nodes(const TorusProblem& prob, const std::vector<double>& w,
                    const std::vector<double>& phi, double t, NodeFields& out, Exec exec) {
  const std::size_t n = prob.dim();
  const auto size = static_cast<std::ptrdiff_t>(prob.grid.size());
  out.F.assign(static_cast<std::size_t>(size), 0.0);
  out.det_omega.assign(static_cast<std::size_t>(size), 0.0);

  double sup_f = -std::numeric_limits<double>::infinity();
  double inf_f = std::numeric_limits<double>::infinity();
  double diffusion = 0.0;
  double min_eig = std::numeric_limits<double>::infinity();
  std::ptrdiff_t bad = std::numeric_limits<std::ptrdiff_t>::max();

#pragma omp parallel for schedule(static) if (exec == Exec::Parallel) \
    reduction(max : sup_f, diffusion) reduction(min : inf_f, min_eig, bad)
  for (std::ptrdiff_t k = 0; k < size; ++k) {
    const auto node = static_cast<std::size_t>(k);
    const Sym2 omega = prob.g0 + discrete_hessian(prob.grid, phi, node) * t;
    const double me = omega.min_eigenvalue(n);
    min_eig = std::min(min_eig, me);
    if (!omega.positive_definite(n) || !(me > 0.0)) {
      bad = std::min(bad, k);
      continue;
    }
    const Sym2& a = prob.alpha[node];
    const auto lam = pencil_eigenvalues(a, omega, n);
    const double f = sigma_value(w, lam, n);
    const auto g = sigma_gradient(w, lam, n);
    out.F[node] = f;
    out.det_omega[node] = omega.det(n);
    sup_f = std::max(sup_f, f);
    inf_f = std::min(inf_f, f);
    const double gmax = n == 1 ? std::abs(g[0]) : std::max(std::abs(g[0]), std::abs(g[1]));
    diffusion = std::max(diffusion, gmax / a.min_eigenvalue(n));
  }
  out.sup_F = sup_f;
  out.inf_F = inf_f;
  out.diffusion = diffusion;
  out.min_omega_eig = min_eig;
  out.bad_node = bad == std::numeric_limits<std::ptrdiff_t>::max() ? -1 : bad;
}

}  // namespace sigmaflow
