#include "sigmaflow/pde_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sigmaflow {

namespace {

struct Evaluated {
  double r;
  Sym2 k;
  bool ok;
};

Evaluated model_terms(const Sym2& g, double b, std::size_t n) {
  if (n == 1) return {(1.0 + b) * g.xx - 1.0, {1.0 + b, 0.0, 0.0}, true};
  const double r = g.xx + g.yy + b * g.det(2) - 1.0;
  return {r, {1.0 + b * g.yy, -b * g.xy, 1.0 + b * g.xx}, true};
}

Evaluated toric_terms(const Sym2& g, const Sym2& f, double d, double c, std::size_t n) {
  if (!g.positive_definite(n)) return {std::numeric_limits<double>::quiet_NaN(), {}, false};
  if (n == 1) {
    const double q = f.xx / g.xx;
    return {(1.0 + d) * q - c, {-(1.0 + d) * q / g.xx, 0.0, 0.0}, true};
  }
  const double dg = g.det(2);
  // G^{-1} = adj(G) / det G
  const double ixx = g.yy / dg, ixy = -g.xy / dg, iyy = g.xx / dg;
  // M = G^{-1} F
  const double mxx = ixx * f.xx + ixy * f.xy, mxy = ixx * f.xy + ixy * f.yy;
  const double myx = ixy * f.xx + iyy * f.xy, myy = ixy * f.xy + iyy * f.yy;
  const double ratio = f.det(2) / dg;
  const double r = mxx + myy + d * ratio - c;
  // -(G^{-1} F G^{-1}) - d ratio G^{-1}
  Sym2 k;
  k.xx = -(mxx * ixx + mxy * ixy) - d * ratio * ixx;
  k.xy = -(mxx * ixy + mxy * iyy) - d * ratio * ixy;
  k.yy = -(myx * ixy + myy * iyy) - d * ratio * iyy;
  return {r, k, true};
}

}  // namespace

void assemble_residual(const DirichletGrid& grid, const EquationTerms& terms,
                       const std::vector<double>& u, NodeResiduals& out, Exec exec) {
  const std::size_t n = grid.dim();
  const auto& interior = grid.interior();
  const auto count = static_cast<std::ptrdiff_t>(interior.size());
  out.residual.assign(interior.size(), 0.0);
  out.coeff.assign(interior.size(), Sym2{});
  double min_eig = std::numeric_limits<double>::infinity();
  double sup = 0.0;
  int undefined = 0;

#pragma omp parallel for schedule(static) if (exec == Exec::Parallel) \
    reduction(min : min_eig) reduction(max : sup, undefined)
  for (std::ptrdiff_t r = 0; r < count; ++r) {
    const std::size_t node = interior[static_cast<std::size_t>(r)];
    const Sym2 g = grid_hessian(grid, u, node);
    min_eig = std::min(min_eig, g.min_eigenvalue(n));
    const Evaluated e = terms.equation == Equation::Model
                            ? model_terms(g, terms.weight, n)
                            : toric_terms(g, (*terms.f_hessian)[node], terms.weight, terms.c, n);
    if (!e.ok) {
      undefined = 1;
      continue;
    }
    out.residual[static_cast<std::size_t>(r)] = e.r;
    out.coeff[static_cast<std::size_t>(r)] = e.k;
    sup = std::max(sup, std::abs(e.r));
  }
  out.min_eig = min_eig;
  out.defined = undefined == 0;
  out.sup_norm = out.defined ? sup : std::numeric_limits<double>::infinity();
}

Eigen::SparseMatrix<double> assemble_jacobian(const DirichletGrid& grid, const std::vector<Sym2>& coeff) {
  const auto& interior = grid.interior();
  const auto m = static_cast<Eigen::Index>(interior.size());
  const double inv_h2 = 1.0 / (grid.h() * grid.h());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(interior.size() * (grid.dim() == 2 ? 9 : 3));
  auto put = [&](Eigen::Index row, std::size_t node, double v) {
    const std::ptrdiff_t col = grid.unknown(node);
    if (col >= 0 && v != 0.0) trip.emplace_back(row, static_cast<Eigen::Index>(col), v);
  };
  for (Eigen::Index r = 0; r < m; ++r) {
    const std::size_t node = interior[static_cast<std::size_t>(r)];
    const Sym2& k = coeff[static_cast<std::size_t>(r)];
    double center = -2.0 * k.xx * inv_h2;
    put(r, grid.shift(node, 1), k.xx * inv_h2);
    put(r, grid.shift(node, -1), k.xx * inv_h2);
    if (grid.dim() == 2) {
      center += -2.0 * k.yy * inv_h2;
      put(r, grid.shift(node, 0, 1), k.yy * inv_h2);
      put(r, grid.shift(node, 0, -1), k.yy * inv_h2);
      const double mixed = 2.0 * k.xy * 0.25 * inv_h2;
      put(r, grid.shift(node, 1, 1), mixed);
      put(r, grid.shift(node, -1, -1), mixed);
      put(r, grid.shift(node, 1, -1), -mixed);
      put(r, grid.shift(node, -1, 1), -mixed);
    }
    put(r, node, center);
  }
  Eigen::SparseMatrix<double> j(m, m);
  j.setFromTriplets(trip.begin(), trip.end());
  return j;
}

}  // namespace sigmaflow
