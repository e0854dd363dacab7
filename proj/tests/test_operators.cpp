#include <doctest.h>

#include <cmath>
#include <vector>

#include "sigmaflow/error.hpp"
#include "sigmaflow/operators.hpp"
#include "sigmaflow/random.hpp"

using namespace sigmaflow;

TEST_CASE("eval examples") {
  CHECK(eval(OperatorSpec::sigma({1.0, 0.0}), Spectrum{2, 2}) == doctest::Approx(1.0));
  OperatorSpec j;
  j.sigma_weights = {1.0, 0.0};
  j.epsilon = 0.1;
  CHECK(eval(j, Spectrum{1, 1}) == doctest::Approx(1.9));
  CHECK(eval(OperatorSpec::sigma({0.0, 0.0, 1.0}), Spectrum{1, 2, 4}) == doctest::Approx(0.125));
}

TEST_CASE("eval rejects spectra outside the region") {
  const OperatorSpec f = OperatorSpec::deflated(2, 0.25, region::EigenvalueFloor{1.0});
  CHECK_THROWS_AS(eval(f, Spectrum{0.5, 3.0}), RegionError);
  CHECK_THROWS_AS(eval(OperatorSpec::sigma({1.0, 0.0}), Spectrum{1.0, 2.0, 3.0}), DomainError);
}

TEST_CASE("eval_tilde and subsolution_margin examples") {
  const OperatorSpec s3 = OperatorSpec::sigma({1.0, 0.0, 0.0});
  CHECK(eval_tilde(s3, Spectrum{1, 2, 4}, 3) == doctest::Approx(1.5));
  const OperatorSpec s2 = OperatorSpec::sigma({1.0, 0.0});
  CHECK(eval_tilde(s2, Spectrum{3, 5}, 2) == doctest::Approx(1.0 / 3));
  CHECK(eval_tilde(OperatorSpec::sigma({0.0, 1.0}), Spectrum{3, 5}, 2) == 0.0);
  CHECK(subsolution_margin(s2, 2.0, Spectrum{1, 1}) == doctest::Approx(1.0));
  CHECK(subsolution_margin(s3, 1.5, Spectrum{1, 2, 4}) == doctest::Approx(0.0));
  CHECK(subsolution_margin(s3, 1.4, Spectrum{1, 2, 4}) == doctest::Approx(-0.1));
  CHECK_THROWS_AS(eval_tilde(s3, Spectrum{1, 2}, 3), DomainError);
}

TEST_CASE("eval approaches eval_tilde as one eigenvalue grows") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 3;
    std::vector<double> w(n), lam(n - 1);
    for (auto& x : w) x = rng.unit();
    for (auto& x : lam) x = rng.log_uniform(0.5, 2.0);
    const OperatorSpec spec = OperatorSpec::sigma(w);
    std::vector<double> full = lam;
    full.push_back(1e6);
    // Tilde over the (n-1)-tuple itself: every other subset omits it.
    std::vector<double> mu = lam;
    mu.push_back(1e300);
    const double tilde = eval_tilde(spec, Spectrum(mu), n);
    const double f = eval(spec, Spectrum(full));
    CHECK(std::abs(f - tilde) <= 1e-4 * std::max(1e-12, std::abs(tilde)));
  }
}

TEST_CASE("homogeneity and monotonicity of pure operators") {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 5;
    const int k = 1 + trial % static_cast<int>(n);
    std::vector<double> w(n, 0.0), lam(n);
    w[k - 1] = 1.0;
    for (auto& x : lam) x = rng.log_uniform(0.1, 10.0);
    const OperatorSpec spec = OperatorSpec::sigma(w);
    const Spectrum s(lam);
    const double t = rng.uniform(0.5, 3.0);
    CHECK(eval(spec, s.scaled(t)) == doctest::Approx(std::pow(t, -k) * eval(spec, s)).epsilon(1e-12));
    std::vector<double> bigger = lam;
    bigger[trial % n] *= 1.5;
    CHECK(eval(spec, Spectrum(bigger)) <= eval(spec, s));
  }
}

TEST_CASE("structural conditions hold for pure operators") {
  for (std::size_t n = 2; n <= 4; ++n) {
    std::vector<double> w(n);
    for (std::size_t k = 0; k < n; ++k) w[k] = 1.0 / (1.0 + k);
    const StructuralReport r = check_structural(OperatorSpec::sigma(w), 300, SpectrumBox{});
    CHECK(r.all_pass());
    CHECK(r.ratio_min >= 1.0 - 1e-12);
    CHECK(r.ratio_max <= static_cast<double>(n) + 1e-12);
  }
}

TEST_CASE("deflated operator on the whole cone fails condition 1") {
  OperatorSpec f;
  f.sigma_weights = {1.0, 0.0};
  f.epsilon = 0.5;
  const StructuralReport r = check_structural(f, 300, SpectrumBox{0.1, 10.0});
  CHECK_FALSE(r.conditions[0].pass);
  REQUIRE(r.conditions[0].witness.has_value());
  CHECK(r.conditions[0].witness->min() < 1.0);
}

TEST_CASE("epsilon budget") {
  CHECK(epsilon_budget(1.0, 2) == doctest::Approx(0.5));
  CHECK(epsilon_budget(1e-8, 3) < 1e-15);
  CHECK_THROWS_AS(epsilon_budget(0.0, 2), DomainError);
  for (double delta : {0.5, 1.0, 2.0}) {
    for (std::size_t n = 2; n <= 4; ++n) {
      const double eps = epsilon_budget(delta, n);
      const OperatorSpec f = OperatorSpec::deflated(n, eps, region::EigenvalueFloor{delta});
      const StructuralReport r = check_structural(f, 300, SpectrumBox{delta, 100.0 * delta});
      CHECK(r.all_pass());
    }
  }
}

TEST_CASE("sampling outside the region is rejected") {
  const OperatorSpec f = OperatorSpec::deflated(2, 0.25, region::EigenvalueFloor{1.0});
  CHECK_THROWS_AS(check_structural(f, 10, SpectrumBox{0.1, 10.0}), RegionError);
}

TEST_CASE("serial and parallel structural sampling agree") {
  const OperatorSpec spec = OperatorSpec::sigma({0.3, 0.5, 1.0});
  const StructuralReport a = check_structural(spec, 400, SpectrumBox{}, {99, false});
  const StructuralReport b = check_structural(spec, 400, SpectrumBox{}, {99, true});
  CHECK(a.ratio_min == b.ratio_min);
  CHECK(a.ratio_max == b.ratio_max);
  CHECK(a.dominance_min == b.dominance_min);
  CHECK(a.convexity_min == b.convexity_min);
}

TEST_CASE("operator JSON is strict") {
  const nlohmann::json ok = {{"c", {1.0, 0.0}}};
  CHECK(operator_spec_from_json(ok).dim() == 2);
  CHECK_THROWS_AS(operator_spec_from_json({{"c", {1.0}}, {"colour", 1}}), ConfigError);
  CHECK_THROWS_AS(operator_spec_from_json({{"c", {-1.0, 0.0}}}), ConfigError);
  CHECK_THROWS_AS(operator_spec_from_json({{"c", {1.0, 0.0}}, {"epsilon", 0.1}}), ConfigError);
}
