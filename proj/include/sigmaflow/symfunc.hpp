#pragma once

// Elementary symmetric functions and the derivative calculus of the inverse
// sigma_k operators F(A) = S_k(A^{-1}) at diagonal A.
//
// Indices are zero-based throughout.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sigmaflow {

struct OperatorSpec;

class Spectrum {
 public:
  Spectrum() = default;
  explicit Spectrum(std::vector<double> values);
  Spectrum(std::initializer_list<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }

  bool all_positive() const noexcept;
  double min() const;
  double max() const;
  Spectrum reciprocal() const;
  Spectrum scaled(double t) const;

 private:
  std::vector<double> values_;
};

// Distinct, sorted deletion indices. Construction rejects duplicates; use the
// raw-span overload of elem_sym_deleted for the "duplicates give zero" rule.
class DeletionIndexSet {
 public:
  DeletionIndexSet() = default;
  DeletionIndexSet(std::initializer_list<std::size_t> indices);
  explicit DeletionIndexSet(std::vector<std::size_t> indices);

  std::span<const std::size_t> indices() const noexcept { return indices_; }
  std::size_t size() const noexcept { return indices_.size(); }

 private:
  std::vector<std::size_t> indices_;
};

// S_k(lambda), with S_0 = 1 and S_{-1} = 0.
double elem_sym(int k, std::span<const double> lambda);
inline double elem_sym(int k, const Spectrum& s) { return elem_sym(k, s.values()); }

// S_{k;i_1..i_l}(lambda): S_k with the listed entries set to zero.
double elem_sym_deleted(int k, const DeletionIndexSet& del, std::span<const double> lambda);
inline double elem_sym_deleted(int k, const DeletionIndexSet& del, const Spectrum& s) {
  return elem_sym_deleted(k, del, s.values());
}
// Raw index list; returns 0 when indices repeat.
double elem_sym_deleted(int k, std::span<const std::size_t> raw, std::span<const double> lambda);

// Derivatives of F(A) = S_k(A^{-1}) with respect to the entries A_ij at the
// diagonal matrix diag(lambda). Only three entry patterns are nonzero:
//   (ii)(jj)            -> diag_diag(i, j)   (includes i == j)
//   (ij)(ji), i != j    -> swap(i, j)
struct SymDerivative {
  Eigen::MatrixXd gradient;   // diagonal only
  Eigen::MatrixXd diag_diag;  // d_ii d_jj F
  Eigen::MatrixXd swap;       // d_ij d_ji F, zero diagonal

  std::size_t dim() const { return static_cast<std::size_t>(gradient.rows()); }
  // d_ij d_rs F for any entry pair.
  double hessian(std::size_t i, std::size_t j, std::size_t r, std::size_t s) const;
};

Eigen::MatrixXd grad_inverse_sigma(int k, const Spectrum& lambda);
SymDerivative hessian_inverse_sigma(int k, const Spectrum& lambda);

// Derivatives of a weighted sum sum_k w_k S_k(A^{-1}); weights[k-1] is w_k.
SymDerivative inverse_sigma_derivatives(std::span<const double> weights, const Spectrum& lambda);

// M_ij = S_{m;i,j} + delta_ij S_{m;i}, the matrix whose nonnegativity drives
// the convexity of S_{n-m}(A^{-1}).
Eigen::MatrixXd deletion_matrix(int m, const Spectrum& lambda);

using ComplexMatrix = Eigen::MatrixXcd;

// sum_{pqrs} B_rs conj(B_qp) d_pq d_rs F + sum_ij |B_ij|^2 d_ii F / lambda_j at
// diag(lambda), F given by the effective sigma weights of `spec`. Throws
// RegionError when lambda is outside spec.region.
double convexity_form(const OperatorSpec& spec, const Spectrum& lambda, const ComplexMatrix& b);
// Same form for explicit weights, no region check.
double convexity_form(std::span<const double> weights, const Spectrum& lambda,
                      const ComplexMatrix& b);

}  // namespace sigmaflow
