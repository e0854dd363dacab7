#include "sigmaflow/dirichlet_grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sigmaflow/error.hpp"

namespace sigmaflow {

DirichletGrid::DirichletGrid(std::size_t dim, Domain dom, std::size_t points)
    : dim_(dim), m_(points), domain_(std::move(dom)) {
  if (dim != 1 && dim != 2) throw DomainError("Dirichlet grids support n = 1 or 2");
  if (points < 3) throw DomainError("Dirichlet grid needs at least 3 points per axis");
  const double steps = static_cast<double>(points - 1);
  if (const auto* box = std::get_if<domain::Box>(&domain_)) {
    if (box->lo.size() != dim || box->hi.size() != dim) throw DomainError("box bounds must have n entries");
    h_ = (box->hi[0] - box->lo[0]) / steps;
    for (std::size_t a = 0; a < dim; ++a) {
      if (!(box->hi[a] > box->lo[a])) throw DomainError("box needs lo < hi");
      if (std::abs((box->hi[a] - box->lo[a]) / steps - h_) > 1e-12 * h_)
        throw DomainError("box sides must be equal so that h is uniform");
    }
    origin_ = box->lo;
  } else {
    const auto& ball = std::get<domain::Ball>(domain_);
    if (ball.center.size() != dim || !(ball.radius > 0.0)) throw DomainError("ball needs n-dim center and r > 0");
    h_ = 2.0 * ball.radius / steps;
    origin_.resize(dim);
    for (std::size_t a = 0; a < dim; ++a) origin_[a] = ball.center[a] - ball.radius;
  }

  kind_.assign(size(), NodeKind::Outside);
  // Active nodes first, then the interior ones: all neighbors active.
  std::vector<char> act(size(), 0);
  for (std::size_t k = 0; k < size(); ++k) {
    if (const auto* ball = std::get_if<domain::Ball>(&domain_)) {
      double r2 = 0.0;
      for (std::size_t a = 0; a < dim; ++a) {
        const double d = coord(k, a) - ball->center[a];
        r2 += d * d;
      }
      act[k] = r2 <= ball->radius * ball->radius * (1.0 + 1e-12);
    } else {
      act[k] = 1;
    }
  }
  auto on_edge = [this](std::size_t k) {
    if (ix(k) == 0 || ix(k) + 1 == m_) return true;
    return dim_ == 2 && (iy(k) == 0 || iy(k) + 1 == m_);
  };
  unknown_.assign(size(), -1);
  for (std::size_t k = 0; k < size(); ++k) {
    if (!act[k]) continue;
    bool inner = !on_edge(k);
    if (inner) {
      const int span = dim_ == 2 ? 1 : 0;
      for (int dj = -span; dj <= span && inner; ++dj)
        for (int di = -1; di <= 1 && inner; ++di) inner = act[shift(k, di, dj)] != 0;
    }
    kind_[k] = inner ? NodeKind::Interior : NodeKind::Boundary;
    if (inner) {
      unknown_[k] = static_cast<std::ptrdiff_t>(interior_.size());
      interior_.push_back(k);
    } else {
      boundary_.push_back(k);
    }
  }
  if (interior_.empty()) throw DomainError("grid has no interior nodes");
}

double DirichletGrid::coord(std::size_t node, std::size_t axis) const {
  const std::size_t i = axis == 0 ? ix(node) : iy(node);
  return origin_[axis] + static_cast<double>(i) * h_;
}

std::size_t DirichletGrid::shift(std::size_t node, int di, int dj) const noexcept {
  const auto i = static_cast<std::ptrdiff_t>(ix(node)) + di;
  const auto j = static_cast<std::ptrdiff_t>(iy(node)) + dj;
  return static_cast<std::size_t>(j) * m_ + static_cast<std::size_t>(i);
}

std::vector<double> DirichletGrid::sample(const std::function<double(double, double)>& f) const {
  std::vector<double> v(size(), 0.0);
  for (std::size_t k = 0; k < size(); ++k)
    if (active(k)) v[k] = f(coord(k, 0), dim_ == 2 ? coord(k, 1) : 0.0);
  return v;
}

ConvexGridFunction make_grid_function(const DirichletGrid& grid, const std::vector<double>& values) {
  if (values.size() != grid.size()) throw DomainError("grid function size mismatch");
  ConvexGridFunction f{grid, values, std::vector<char>(grid.size(), 0)};
  for (std::size_t k = 0; k < grid.size(); ++k) f.valid[k] = grid.active(k);
  return f;
}

Sym2 grid_hessian(const DirichletGrid& g, const std::vector<double>& u, std::size_t node) {
  const double inv_h2 = 1.0 / (g.h() * g.h());
  const double c = u[node];
  Sym2 d;
  d.xx = (u[g.shift(node, 1)] - 2.0 * c + u[g.shift(node, -1)]) * inv_h2;
  if (g.dim() == 1) return d;
  d.yy = (u[g.shift(node, 0, 1)] - 2.0 * c + u[g.shift(node, 0, -1)]) * inv_h2;
  d.xy = (u[g.shift(node, 1, 1)] - u[g.shift(node, 1, -1)] - u[g.shift(node, -1, 1)] +
          u[g.shift(node, -1, -1)]) *
         (0.25 * inv_h2);
  return d;
}

std::array<double, 2> grid_gradient(const DirichletGrid& g, const std::vector<double>& u, std::size_t node) {
  const double inv_2h = 0.5 / g.h();
  std::array<double, 2> d{(u[g.shift(node, 1)] - u[g.shift(node, -1)]) * inv_2h, 0.0};
  if (g.dim() == 2) d[1] = (u[g.shift(node, 0, 1)] - u[g.shift(node, 0, -1)]) * inv_2h;
  return d;
}

double convexity_certificate(const DirichletGrid& g, const std::vector<double>& u) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t k : g.interior()) m = std::min(m, grid_hessian(g, u, k).min_eigenvalue(g.dim()));
  return m;
}

}  // namespace sigmaflow
