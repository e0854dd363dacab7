#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "sigmaflow/error.hpp"
#include "sigmaflow/operator_spec.hpp"
#include "sigmaflow/random.hpp"
#include "sigmaflow/symfunc.hpp"

using namespace sigmaflow;

namespace {

// S_k((A)^{-1}) through the characteristic polynomial of the dense inverse.
double sk_of_inverse(int k, const Eigen::MatrixXd& a) {
  const Eigen::VectorXd ev = Eigen::EigenSolver<Eigen::MatrixXd>(a.inverse()).eigenvalues().real();
  std::vector<double> v(ev.data(), ev.data() + ev.size());
  return elem_sym(k, v);
}

Spectrum random_spectrum(Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.log_uniform(lo, hi);
  return Spectrum(v);
}

}  // namespace

TEST_CASE("elem_sym examples") {
  const std::vector<double> a{7, 3}, b{1, 2, 3}, c{1, 1, 1};
  CHECK(elem_sym(0, a) == 1.0);
  CHECK(elem_sym(-1, a) == 0.0);
  CHECK(elem_sym(2, b) == doctest::Approx(11.0));
  CHECK(elem_sym(3, c) == doctest::Approx(1.0));
  CHECK_THROWS_AS(elem_sym(3, a), DomainError);
  CHECK_THROWS_AS(elem_sym(-2, a), DomainError);
}

TEST_CASE("elem_sym matches subset enumeration for large n") {
  Rng rng(7);
  std::vector<double> v(14);
  for (auto& x : v) x = rng.uniform(0.5, 2.0);
  for (int k = 0; k <= 14; k += 3) {
    double brute = 0.0;
    for (unsigned mask = 0; mask < (1u << 14); ++mask) {
      if (__builtin_popcount(mask) != k) continue;
      double p = 1.0;
      for (int i = 0; i < 14; ++i)
        if (mask & (1u << i)) p *= v[i];
      brute += p;
    }
    CHECK(elem_sym(k, v) == doctest::Approx(brute).epsilon(1e-12));
  }
}

TEST_CASE("elem_sym_deleted examples") {
  const std::vector<double> l{1, 2, 3};
  CHECK(elem_sym_deleted(2, DeletionIndexSet{0}, l) == doctest::Approx(6.0));
  const std::vector<std::size_t> dup{0, 0};
  CHECK(elem_sym_deleted(2, dup, l) == 0.0);
  CHECK(elem_sym_deleted(-1, DeletionIndexSet{1}, l) == 0.0);
  CHECK_THROWS(DeletionIndexSet{1, 1});
  CHECK_THROWS_AS(elem_sym_deleted(1, DeletionIndexSet{5}, l), DomainError);
}

TEST_CASE("deletion identity S_k = S_{k;i} + lambda_i S_{k-1;i}") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 5;
    const Spectrum s = random_spectrum(rng, n, 0.1, 10.0);
    for (int k = 1; k <= static_cast<int>(n); ++k)
      for (std::size_t i = 0; i < n; ++i) {
        const DeletionIndexSet d{i};
        const double rhs = elem_sym_deleted(k, d, s) + s[i] * elem_sym_deleted(k - 1, d, s);
        CHECK(elem_sym(k, s) == doctest::Approx(rhs).epsilon(1e-12));
      }
  }
}

TEST_CASE("gradient examples") {
  const Eigen::MatrixXd g1 = grad_inverse_sigma(1, Spectrum{1, 1, 1});
  CHECK((g1 + Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-14);
  const Eigen::MatrixXd g2 = grad_inverse_sigma(2, Spectrum{2, 2});
  CHECK(g2(0, 0) == doctest::Approx(-0.125));
  CHECK(g2(1, 1) == doctest::Approx(-0.125));
  CHECK(g2(0, 1) == 0.0);
  CHECK_THROWS_AS(grad_inverse_sigma(1, Spectrum{1, -1}), DomainError);
}

TEST_CASE("hessian examples") {
  const SymDerivative h = hessian_inverse_sigma(1, Spectrum{1, 1});
  CHECK(h.hessian(0, 0, 0, 0) == doctest::Approx(2.0));
  // S_{2;1,2}(1,1,1) = 0; the finite-difference oracle agrees.
  const SymDerivative h3 = hessian_inverse_sigma(1, Spectrum{1, 1, 1});
  CHECK(h3.hessian(0, 0, 1, 1) == doctest::Approx(0.0));
  // Pattern (01)(02) is not of the allowed shapes.
  CHECK(h3.hessian(0, 1, 0, 2) == 0.0);
}

TEST_CASE("derivatives agree with finite differences of the dense operator") {
  Rng rng(3);
  const double step = 1e-5;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + trial % 3;
    const Spectrum s = random_spectrum(rng, n, 0.3, 3.0);
    const int k = 1 + trial % static_cast<int>(n);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i) a(i, i) = s[i];
    const Eigen::MatrixXd g = grad_inverse_sigma(k, s);
    const SymDerivative h = hessian_inverse_sigma(k, s);
    const double scale = std::abs(elem_sym(k, s.reciprocal()));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        Eigen::MatrixXd ap = a, am = a;
        ap(i, j) += step;
        am(i, j) -= step;
        const double fd = (sk_of_inverse(k, ap) - sk_of_inverse(k, am)) / (2 * step);
        CHECK(std::abs(fd - g(i, j)) <= 1e-6 * scale + 1e-9);
        // Second derivative along E_ij then E_ji.
        Eigen::MatrixXd e1 = Eigen::MatrixXd::Zero(n, n), e2 = e1;
        e1(i, j) = step;
        e2(j, i) = step;
        const double f2 = (sk_of_inverse(k, a + e1 + e2) - sk_of_inverse(k, a + e1 - e2) -
                           sk_of_inverse(k, a - e1 + e2) + sk_of_inverse(k, a - e1 - e2)) /
                          (4 * step * step);
        CHECK(std::abs(f2 - h.hessian(i, j, j, i)) <= 1e-4 * (scale + 1.0));
      }
  }
}

TEST_CASE("deletion matrix is positive semidefinite") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial % 5;
    const Spectrum s = random_spectrum(rng, n, 0.1, 10.0);
    for (int m = 0; m <= static_cast<int>(n) - 2; ++m) {
      const Eigen::MatrixXd mm = deletion_matrix(m, s);
      const double ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(mm).eigenvalues().minCoeff();
      CHECK(ev >= -1e-10 * (1.0 + mm.norm()));
    }
  }
}

TEST_CASE("convexity form examples and sign") {
  const OperatorSpec s1 = OperatorSpec::sigma({1.0, 0.0});
  ComplexMatrix b = ComplexMatrix::Zero(2, 2);
  CHECK(convexity_form(s1, Spectrum{1, 1}, b) == doctest::Approx(0.0));
  b(0, 0) = 1.0;
  CHECK(convexity_form(s1, Spectrum{1, 1}, b) == doctest::Approx(1.0));

  Rng rng(9);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + trial % 4;
    std::vector<double> w(n);
    for (auto& x : w) x = rng.unit();
    const Spectrum s = random_spectrum(rng, n, 0.1, 10.0);
    ComplexMatrix bm(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) bm(i, j) = {rng.normal(), rng.normal()};
    CHECK(convexity_form(w, s, bm) >= -1e-10);
  }
}

TEST_CASE("convexity form respects the operator region") {
  const OperatorSpec f = OperatorSpec::deflated(2, 0.25, region::EigenvalueFloor{1.0});
  ComplexMatrix b = ComplexMatrix::Identity(2, 2);
  CHECK_THROWS_AS(convexity_form(f, Spectrum{0.5, 2.0}, b), RegionError);
}
