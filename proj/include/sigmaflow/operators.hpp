#pragma once

// Evaluation of sigma-type operators on spectra, the limiting operator F~,
// and Monte-Carlo verification of the structural conditions.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sigmaflow/operator_spec.hpp"
#include "sigmaflow/symfunc.hpp"

namespace sigmaflow {

// Eigenvalues of a symmetric matrix, ascending.
Spectrum spectrum_of(const Eigen::MatrixXd& symmetric);
// Eigenvalues of alpha^{-1} omega for symmetric positive definite alpha.
Spectrum relative_spectrum(const Eigen::MatrixXd& alpha, const Eigen::MatrixXd& omega);

// F(lambda) with region check.
double eval(const OperatorSpec& spec, const Spectrum& lambda);
// sum_k w_k S_k(1/lambda) without any checks; w[k-1] is w_k.
double eval_weights(std::span<const double> w, std::span<const double> lambda);

// max over (n-1)-subsets T of sum_{k<=n-1} (c_k + kappa [k=1]) S_k(1/mu_T).
double eval_tilde(const OperatorSpec& spec, const Spectrum& mu, std::size_t n);
double subsolution_margin(const OperatorSpec& spec, double c, const Spectrum& mu);

// Per-coordinate sampling box lo <= lambda_i <= hi.
struct SpectrumBox {
  double lo = 0.1;
  double hi = 10.0;
};

struct ConditionResult {
  bool pass = true;
  std::optional<Spectrum> witness;
  std::string detail;
};

struct StructuralReport {
  std::array<ConditionResult, 5> conditions;
  std::size_t samples = 0;
  // Condition (3): range of -sum lambda_k d_kk F / F and the implied constant C.
  double ratio_min = 0.0;
  double ratio_max = 0.0;
  double ratio_constant = 0.0;
  // Condition (4): min over samples of (-lambda_min d F) / max_i (-lambda_i d_ii F).
  double dominance_min = 0.0;
  double convexity_min = 0.0;
  std::string epsilon_rule;

  bool all_pass() const;
};

struct StructuralOptions {
  std::uint64_t seed = 20240601;
  bool parallel = true;
};

// Samples `sample_count` log-uniform spectra in the box plus its corners.
// Throws RegionError when the box is not inside spec.region.
StructuralReport check_structural(const OperatorSpec& spec, std::size_t sample_count,
                                  SpectrumBox box, StructuralOptions options = {});

// epsilon for F_eps = S_1 - eps S_n on the floor region lambda_i >= delta:
// delta^{n-1} / (2 max(1, n-1)), re-verified by seeded sampling.
double epsilon_budget(double delta, std::size_t n);
// Budget for the sublevel region S_1(A^{-1}) < q, which also keeps the
// condition (3) ratio above 1/2.
double epsilon_budget_sublevel(double q, std::size_t n);

}  // namespace sigmaflow
