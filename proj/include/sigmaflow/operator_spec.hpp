#pragma once

#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace sigmaflow {

class Spectrum;

namespace region {
struct AllPositive {};
// Eigenvalues bounded below: lambda_i > delta.
struct EigenvalueFloor {
  double delta;
};
// Sublevel set {S_1(A^{-1}) < Q}.
struct Sublevel {
  double q;
};
}  // namespace region

using Region = std::variant<region::AllPositive, region::EigenvalueFloor, region::Sublevel>;

// F(A) = sum_k c_k S_k(A^{-1}) + kappa S_1(A^{-1}) - epsilon S_n(A^{-1})
//        + ma_twist S_n(A^{-1}),  n = sigma_weights.size().
struct OperatorSpec {
  std::vector<double> sigma_weights;  // c_1 .. c_n
  double epsilon = 0.0;
  double kappa = 0.0;
  double ma_twist = 0.0;
  Region region = region::AllPositive{};

  std::size_t dim() const noexcept { return sigma_weights.size(); }

  // Combined coefficient of each S_k(A^{-1}), index k-1.
  std::vector<double> effective_weights() const;

  // Pure sigma combination: no deflation, so every effective weight is >= 0.
  bool is_pure() const noexcept { return epsilon == 0.0; }

  bool contains(const Spectrum& lambda) const;
  // Throws RegionError naming the violated bound.
  void require_contains(const Spectrum& lambda) const;

  // Nonnegative weights, n >= 1, and epsilon > 0 only on a restricted region.
  // Throws DomainError.
  void validate() const;

  static OperatorSpec sigma(std::vector<double> weights);
  static OperatorSpec j_operator(std::size_t n);
  static OperatorSpec deflated(std::size_t n, double epsilon, Region region);
};

std::string describe(const Region& r);

void to_json(nlohmann::json& j, const OperatorSpec& spec);
// Strict: unknown keys and negative weights raise ConfigError.
OperatorSpec operator_spec_from_json(const nlohmann::json& j);

}  // namespace sigmaflow
