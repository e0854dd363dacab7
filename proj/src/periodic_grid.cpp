#include "sigmaflow/periodic_grid.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "sigmaflow/error.hpp"

namespace sigmaflow {

double Sym2::min_eigenvalue(std::size_t n) const {
  if (n == 1) return xx;
  const double m = 0.5 * (xx + yy);
  const double r = std::hypot(0.5 * (xx - yy), xy);
  return m - r;
}

PeriodicGrid::PeriodicGrid(std::size_t dim, std::size_t points_per_axis)
    : dim_(dim), n_(points_per_axis) {
  if (dim != 1 && dim != 2) throw DomainError("periodic grids support n = 1 or 2");
  if (points_per_axis < 4) throw DomainError("periodic grid needs at least 4 points per axis");
}

std::vector<double> PeriodicGrid::sample(const std::function<double(double, double)>& f) const {
  std::vector<double> v(size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = f(x(k), dim_ == 1 ? 0.0 : y(k));
  return v;
}

void TorusProblem::validate() const {
  const std::size_t n = dim();
  if (spec.dim() != n)
    throw DomainError("operator dimension " + std::to_string(spec.dim()) +
                      " does not match torus dimension " + std::to_string(n));
  if (!g0.positive_definite(n)) throw DomainError("G0 must be positive definite");
  if (alpha.size() != grid.size()) throw DomainError("alpha field size does not match the grid");
  for (std::size_t k = 0; k < alpha.size(); ++k)
    if (!alpha[k].positive_definite(n))
      throw DomainError("alpha is not positive definite at node " + std::to_string(k));
}

TorusProblem TorusProblem::constant(std::size_t dim, std::size_t points, Sym2 g0, Sym2 alpha,
                                    OperatorSpec spec) {
  TorusProblem p;
  p.grid = PeriodicGrid(dim, points);
  p.g0 = g0;
  p.alpha.assign(p.grid.size(), alpha);
  p.spec = std::move(spec);
  p.validate();
  return p;
}

Sym2 discrete_hessian(const PeriodicGrid& g, const std::vector<double>& phi, std::size_t node) {
  const std::size_t n = g.points();
  const double inv_h2 = 1.0 / (g.h() * g.h());
  const std::size_t i = node % n;
  const std::size_t ip = (i + 1) % n, im = (i + n - 1) % n;
  if (g.dim() == 1) return {(phi[ip] - 2.0 * phi[i] + phi[im]) * inv_h2, 0.0, 0.0};
  const std::size_t j = node / n;
  const std::size_t jp = (j + 1) % n, jm = (j + n - 1) % n;
  const double c = phi[g.index(i, j)];
  Sym2 d;
  d.xx = (phi[g.index(ip, j)] - 2.0 * c + phi[g.index(im, j)]) * inv_h2;
  d.yy = (phi[g.index(i, jp)] - 2.0 * c + phi[g.index(i, jm)]) * inv_h2;
  d.xy = (phi[g.index(ip, jp)] - phi[g.index(ip, jm)] - phi[g.index(im, jp)] + phi[g.index(im, jm)]) *
         (0.25 * inv_h2);
  return d;
}

double grid_mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void subtract_mean(std::vector<double>& v) {
  const double m = grid_mean(v);
  for (double& x : v) x -= m;
}

}  // namespace sigmaflow
