#pragma once

// Nodewise residuals and linearization coefficients of the Dirichlet
// problems. The Jacobian row of an interior node is
//   K_xx D_xx + 2 K_xy D_xy + K_yy D_yy
// with K the coefficient returned here.

#include <cstddef>
#include <vector>

#include <Eigen/SparseCore>

#include "sigmaflow/dirichlet_grid.hpp"

namespace sigmaflow {

enum class Equation { Model, Toric };

struct EquationTerms {
  Equation equation = Equation::Model;
  double weight = 0.0;  // b (model) or d (toric)
  double c = 1.0;       // toric right-hand side
  const std::vector<Sym2>* f_hessian = nullptr;  // toric background, per node
};

struct NodeResiduals {
  std::vector<double> residual;  // per unknown
  std::vector<Sym2> coeff;       // per unknown
  double min_eig = 0.0;          // min Hessian eigenvalue over interior nodes
  double sup_norm = 0.0;
  bool defined = true;  // false when the toric residual meets a non-convex node
};

// Toric: tr(G^{-1} F) + d det F / det G - c. Model: tr G + b det G - 1.
void assemble_residual(const DirichletGrid& grid, const EquationTerms& terms,
                       const std::vector<double>& u, NodeResiduals& out, Exec exec);

Eigen::SparseMatrix<double> assemble_jacobian(const DirichletGrid& grid, const std::vector<Sym2>& coeff);

}  // namespace sigmaflow
