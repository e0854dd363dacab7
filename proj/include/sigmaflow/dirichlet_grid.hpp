#pragma once

// Grids on a box or a discrete ball in R^n, n in {1, 2}, with interior,
// Dirichlet boundary and outside nodes.

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

#include "sigmaflow/periodic_grid.hpp"

namespace sigmaflow {

namespace domain {
struct Box {
  std::vector<double> lo, hi;  // per axis; the grid uses the same h on every axis
};
struct Ball {
  std::vector<double> center;
  double radius = 1.0;
};
}  // namespace domain

using Domain = std::variant<domain::Box, domain::Ball>;

enum class NodeKind : unsigned char { Outside, Boundary, Interior };

class DirichletGrid {
 public:
  DirichletGrid() = default;
  // `points` nodes per axis across the bounding box, endpoints included.
  DirichletGrid(std::size_t dim, Domain domain, std::size_t points);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t points() const noexcept { return m_; }
  std::size_t size() const noexcept { return dim_ == 1 ? m_ : m_ * m_; }
  double h() const noexcept { return h_; }
  const Domain& domain() const noexcept { return domain_; }

  NodeKind kind(std::size_t node) const { return kind_[node]; }
  bool active(std::size_t node) const { return kind_[node] != NodeKind::Outside; }
  double coord(std::size_t node, std::size_t axis) const;
  std::size_t index(std::size_t i, std::size_t j = 0) const noexcept { return j * m_ + i; }
  std::size_t ix(std::size_t node) const noexcept { return node % m_; }
  std::size_t iy(std::size_t node) const noexcept { return node / m_; }
  // Neighbor offset (di, dj); valid for interior nodes with |di|, |dj| <= 1.
  std::size_t shift(std::size_t node, int di, int dj = 0) const noexcept;

  const std::vector<std::size_t>& interior() const noexcept { return interior_; }
  const std::vector<std::size_t>& boundary() const noexcept { return boundary_; }
  // Unknown index of an interior node, or -1.
  std::ptrdiff_t unknown(std::size_t node) const { return unknown_[node]; }

  std::vector<double> sample(const std::function<double(double, double)>& f) const;

 private:
  std::size_t dim_ = 1;
  std::size_t m_ = 0;
  double h_ = 0.0;
  std::vector<double> origin_;
  Domain domain_;
  std::vector<NodeKind> kind_;
  std::vector<std::size_t> interior_, boundary_;
  std::vector<std::ptrdiff_t> unknown_;
};

// Scalar field on the active nodes of a grid; `valid` marks nodes with a
// trustworthy value (all active nodes unless a transform trimmed them).
struct ConvexGridFunction {
  DirichletGrid grid;
  std::vector<double> values;
  std::vector<char> valid;

  double at(std::size_t node) const { return values[node]; }
};

ConvexGridFunction make_grid_function(const DirichletGrid& grid, const std::vector<double>& values);

// D^2_h u at an interior node (compact second differences, four-corner mixed).
Sym2 grid_hessian(const DirichletGrid& g, const std::vector<double>& u, std::size_t node);
// Central-difference gradient at an interior node.
std::array<double, 2> grid_gradient(const DirichletGrid& g, const std::vector<double>& u, std::size_t node);

// Minimum Hessian eigenvalue over interior nodes: the convexity certificate.
double convexity_certificate(const DirichletGrid& g, const std::vector<double>& u);

}  // namespace sigmaflow
