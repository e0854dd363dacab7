#include "sigmaflow/symfunc.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <string>

#include "sigmaflow/error.hpp"
#include "sigmaflow/operator_spec.hpp"

namespace sigmaflow {

namespace {

constexpr std::size_t kEnumerationLimit = 12;

void require_positive(const Spectrum& lambda) {
  if (lambda.size() == 0) throw DomainError("empty spectrum");
  if (!lambda.all_positive())
    throw DomainError("inverse sigma derivatives need strictly positive eigenvalues");
}

double sum_over_subsets(int k, std::span<const double> lambda) {
  const auto n = static_cast<unsigned>(lambda.size());
  if (k == 0) return 1.0;
  double total = 0.0;
  // Gosper's hack: walk all n-bit masks with exactly k bits set.
  std::uint32_t mask = (1u << k) - 1u;
  const std::uint32_t limit = 1u << n;
  while (mask < limit) {
    double prod = 1.0;
    for (std::uint32_t m = mask; m != 0; m &= m - 1)
      prod *= lambda[static_cast<std::size_t>(std::countr_zero(m))];
    total += prod;
    const std::uint32_t low = mask & (~mask + 1u);
    const std::uint32_t ripple = mask + low;
    mask = (((ripple ^ mask) >> 2) / low) | ripple;
  }
  return total;
}

double product_recurrence(int k, std::span<const double> lambda) {
  std::vector<double> e(static_cast<std::size_t>(k) + 1, 0.0);
  e[0] = 1.0;
  for (double x : lambda) {
    for (int j = k; j >= 1; --j) e[j] += x * e[j - 1];
  }
  return e[static_cast<std::size_t>(k)];
}

}  // namespace

Spectrum::Spectrum(std::vector<double> values) : values_(std::move(values)) {}
Spectrum::Spectrum(std::initializer_list<double> values) : values_(values) {}

bool Spectrum::all_positive() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return x > 0.0; });
}

double Spectrum::min() const {
  if (values_.empty()) throw DomainError("empty spectrum");
  return *std::min_element(values_.begin(), values_.end());
}

double Spectrum::max() const {
  if (values_.empty()) throw DomainError("empty spectrum");
  return *std::max_element(values_.begin(), values_.end());
}

Spectrum Spectrum::reciprocal() const {
  std::vector<double> r(values_.size());
  std::transform(values_.begin(), values_.end(), r.begin(), [](double x) { return 1.0 / x; });
  return Spectrum(std::move(r));
}

Spectrum Spectrum::scaled(double t) const {
  std::vector<double> r(values_.size());
  std::transform(values_.begin(), values_.end(), r.begin(), [t](double x) { return t * x; });
  return Spectrum(std::move(r));
}

DeletionIndexSet::DeletionIndexSet(std::initializer_list<std::size_t> indices)
    : DeletionIndexSet(std::vector<std::size_t>(indices)) {}

DeletionIndexSet::DeletionIndexSet(std::vector<std::size_t> indices) : indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end())
    throw DomainError("deletion index set contains duplicates");
}

double elem_sym(int k, std::span<const double> lambda) {
  const int n = static_cast<int>(lambda.size());
  if (k < -1 || k > n)
    throw DomainError("elem_sym: degree " + std::to_string(k) + " outside [-1, " +
                      std::to_string(n) + "]");
  if (k == -1) return 0.0;
  if (lambda.size() <= kEnumerationLimit) return sum_over_subsets(k, lambda);
  return product_recurrence(k, lambda);
}

double elem_sym_deleted(int k, const DeletionIndexSet& del, std::span<const double> lambda) {
  return elem_sym_deleted(k, del.indices(), lambda);
}

double elem_sym_deleted(int k, std::span<const std::size_t> raw, std::span<const double> lambda) {
  for (std::size_t idx : raw) {
    if (idx >= lambda.size())
      throw DomainError("deletion index " + std::to_string(idx) + " out of range");
  }
  for (std::size_t a = 0; a < raw.size(); ++a)
    for (std::size_t b = a + 1; b < raw.size(); ++b)
      if (raw[a] == raw[b]) return 0.0;
  if (k == -1) return 0.0;
  std::vector<double> zeroed(lambda.begin(), lambda.end());
  for (std::size_t idx : raw) zeroed[idx] = 0.0;
  return elem_sym(k, zeroed);
}

double SymDerivative::hessian(std::size_t i, std::size_t j, std::size_t r, std::size_t s) const {
  if (i == j && r == s) return diag_diag(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r));
  if (i != j && r == j && s == i) return swap(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return 0.0;
}

Eigen::MatrixXd grad_inverse_sigma(int k, const Spectrum& lambda) {
  return hessian_inverse_sigma(k, lambda).gradient;
}

SymDerivative hessian_inverse_sigma(int k, const Spectrum& lambda) {
  require_positive(lambda);
  const auto n = static_cast<Eigen::Index>(lambda.size());
  if (k < 0 || k > n) throw DomainError("inverse sigma degree out of range");
  const auto vals = lambda.values();
  const int m = static_cast<int>(n) - k;
  const double sn = elem_sym(static_cast<int>(n), vals);

  SymDerivative d;
  d.gradient = Eigen::MatrixXd::Zero(n, n);
  d.diag_diag = Eigen::MatrixXd::Zero(n, n);
  d.swap = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const double li = vals[ui];
    const std::size_t del_i[] = {ui};
    const double s_i = elem_sym_deleted(m, del_i, vals);
    d.gradient(i, i) = -s_i / (li * sn);
    d.diag_diag(i, i) = 2.0 * s_i / (li * li * sn);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const auto uj = static_cast<std::size_t>(j);
      const double lj = vals[uj];
      const std::size_t del_ij[] = {ui, uj};
      d.diag_diag(i, j) = elem_sym_deleted(m, del_ij, vals) / (li * lj * sn);
      d.swap(i, j) = (s_i + li * elem_sym_deleted(m - 1, del_ij, vals)) / (li * lj * sn);
    }
  }
  return d;
}

SymDerivative inverse_sigma_derivatives(std::span<const double> weights, const Spectrum& lambda) {
  require_positive(lambda);
  const auto n = static_cast<Eigen::Index>(lambda.size());
  if (weights.size() != lambda.size()) throw DomainError("weight count must equal spectrum length");
  SymDerivative total;
  total.gradient = Eigen::MatrixXd::Zero(n, n);
  total.diag_diag = Eigen::MatrixXd::Zero(n, n);
  total.swap = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 1; k <= weights.size(); ++k) {
    const double w = weights[k - 1];
    if (w == 0.0) continue;
    const SymDerivative dk = hessian_inverse_sigma(static_cast<int>(k), lambda);
    total.gradient += w * dk.gradient;
    total.diag_diag += w * dk.diag_diag;
    total.swap += w * dk.swap;
  }
  return total;
}

Eigen::MatrixXd deletion_matrix(int m, const Spectrum& lambda) {
  const auto n = static_cast<Eigen::Index>(lambda.size());
  const auto vals = lambda.values();
  Eigen::MatrixXd mat(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const std::size_t del[] = {static_cast<std::size_t>(i), static_cast<std::size_t>(j)};
      double v = elem_sym_deleted(m, del, vals);
      if (i == j) v += elem_sym_deleted(m, std::span<const std::size_t>(del, 1), vals);
      mat(i, j) = v;
    }
  }
  return mat;
}

double convexity_form(std::span<const double> weights, const Spectrum& lambda,
                      const ComplexMatrix& b) {
  const auto n = static_cast<Eigen::Index>(lambda.size());
  if (b.rows() != n || b.cols() != n) throw DomainError("convexity_form: B must be n x n");
  const SymDerivative d = inverse_sigma_derivatives(weights, lambda);
  const auto vals = lambda.values();

  double hess = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      hess += (std::conj(b(i, i)) * b(j, j)).real() * d.diag_diag(i, j);
      if (i != j) hess += std::norm(b(i, j)) * d.swap(i, j);
    }
  }
  double first_order = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      first_order += std::norm(b(i, j)) * d.gradient(i, i) / vals[static_cast<std::size_t>(j)];
  return hess + first_order;
}

double convexity_form(const OperatorSpec& spec, const Spectrum& lambda, const ComplexMatrix& b) {
  spec.require_contains(lambda);
  const std::vector<double> w = spec.effective_weights();
  return convexity_form(std::span<const double>(w), lambda, b);
}

}  // namespace sigmaflow
