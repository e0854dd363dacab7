#pragma once

// Uniform periodic grids on [0,1)^n, n in {1, 2}, and the torus problem data
// living on them.

#include <cstddef>
#include <functional>
#include <vector>

#include "sigmaflow/operator_spec.hpp"

namespace sigmaflow {

// Symmetric 2x2 matrix; n = 1 problems use xx only.
struct Sym2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  double det(std::size_t n) const { return n == 1 ? xx : xx * yy - xy * xy; }
  double trace(std::size_t n) const { return n == 1 ? xx : xx + yy; }
  bool positive_definite(std::size_t n) const { return xx > 0.0 && det(n) > 0.0; }
  double min_eigenvalue(std::size_t n) const;
  Sym2 operator+(const Sym2& o) const { return {xx + o.xx, xy + o.xy, yy + o.yy}; }
  Sym2 operator*(double t) const { return {t * xx, t * xy, t * yy}; }
};

enum class Exec { Serial, Parallel };

class PeriodicGrid {
 public:
  PeriodicGrid() = default;
  PeriodicGrid(std::size_t dim, std::size_t points_per_axis);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t points() const noexcept { return n_; }
  std::size_t size() const noexcept { return dim_ == 1 ? n_ : n_ * n_; }
  double h() const noexcept { return 1.0 / static_cast<double>(n_); }
  double cell_volume() const noexcept { return dim_ == 1 ? h() : h() * h(); }
  std::size_t index(std::size_t i, std::size_t j = 0) const noexcept { return j * n_ + i; }
  // Node coordinates in [0, 1).
  double x(std::size_t node) const noexcept { return static_cast<double>(node % n_) * h(); }
  double y(std::size_t node) const noexcept { return static_cast<double>(node / n_) * h(); }

  std::vector<double> sample(const std::function<double(double, double)>& f) const;

 private:
  std::size_t dim_ = 1;
  std::size_t n_ = 0;
};

struct PotentialField {
  std::vector<double> phi;
  bool mean_zero = true;
};

struct TorusProblem {
  PeriodicGrid grid;
  Sym2 g0;
  std::vector<Sym2> alpha;  // one per node
  OperatorSpec spec;

  std::size_t dim() const noexcept { return grid.dim(); }
  // Positive G0 and alpha, operator dimension equal to the grid dimension.
  void validate() const;

  static TorusProblem constant(std::size_t dim, std::size_t points, Sym2 g0, Sym2 alpha,
                               OperatorSpec spec);
};

// Discrete Hessian D^2_h phi at one node: compact second differences and the
// four-corner mixed difference.
Sym2 discrete_hessian(const PeriodicGrid& g, const std::vector<double>& phi, std::size_t node);

double grid_mean(const std::vector<double>& v);
void subtract_mean(std::vector<double>& v);

}  // namespace sigmaflow
