#include "sigmaflow/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sigmaflow/error.hpp"
#include "sigmaflow/io.hpp"
#include "sigmaflow/random.hpp"

namespace sigmaflow {

namespace {

constexpr double kRelTol = 1e-12;
constexpr double kConvexTol = 1e-10;
constexpr double kLimitTol = 1e-4;
constexpr std::size_t kMaxCornerDim = 10;

struct Sample {
  Spectrum lambda;
  ComplexMatrix b;
};

struct SampleEval {
  double f = 0.0;
  double min_neg_lambda_grad = 0.0;  // min_i -lambda_i d_ii F
  double ratio = 0.0;
  double dominance_gap = 0.0;  // (-lambda_min d F) - max_i(-lambda_i d_ii F)
  double dominance = 0.0;
  double convexity = 0.0;
  double convexity_scale = 1.0;
  double limit_error = 0.0;
  bool limit_finite = true;
};

std::string spectrum_text(const Spectrum& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += io::format_double(s[i]);
  }
  return out + ")";
}

SampleEval evaluate_sample(std::span<const double> w, const Sample& s) {
  const std::size_t n = s.lambda.size();
  const auto lam = s.lambda.values();
  SampleEval e;
  e.f = eval_weights(w, lam);

  const SymDerivative d = inverse_sigma_derivatives(w, s.lambda);
  std::vector<double> neg(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    neg[i] = -lam[i] * d.gradient(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    sum += neg[i];
  }
  e.min_neg_lambda_grad = *std::min_element(neg.begin(), neg.end());
  e.ratio = sum / e.f;

  const std::size_t imin =
      static_cast<std::size_t>(std::min_element(lam.begin(), lam.end()) - lam.begin());
  const double top = *std::max_element(neg.begin(), neg.end());
  e.dominance_gap = neg[imin] - top;
  e.dominance = top > 0.0 ? neg[imin] / top : std::numeric_limits<double>::quiet_NaN();

  e.convexity = convexity_form(w, s.lambda, s.b);
  const double lmin = lam[imin];
  e.convexity_scale = std::max(1.0, std::abs(e.f) / (lmin * lmin));

  // Condition (5): push the last eigenvalue to infinity and compare with g(x', 0).
  std::vector<double> head(lam.begin(), lam.end() - 1);
  std::vector<double> x_head(head.size());
  std::transform(head.begin(), head.end(), x_head.begin(), [](double v) { return 1.0 / v; });
  double g0 = 0.0;
  for (std::size_t k = 1; k + 1 <= n; ++k) g0 += w[k - 1] * elem_sym(static_cast<int>(k), x_head);
  std::vector<double> pushed = head;
  pushed.push_back(0.0);
  for (double big : {1e2, 1e4, 1e6}) {
    pushed.back() = big;
    const double v = eval_weights(w, pushed);
    if (!std::isfinite(v)) e.limit_finite = false;
    e.limit_error = std::abs(v - g0) / std::max(1.0, std::abs(g0));
  }
  return e;
}

void fail(ConditionResult& c, const Spectrum& witness, std::string detail) {
  if (!c.pass) return;
  c.pass = false;
  c.witness = witness;
  c.detail = std::move(detail);
}

}  // namespace

Spectrum spectrum_of(const Eigen::MatrixXd& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetric, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("symmetric eigen-decomposition failed");
  const Eigen::VectorXd v = es.eigenvalues();
  return Spectrum(std::vector<double>(v.data(), v.data() + v.size()));
}

Spectrum relative_spectrum(const Eigen::MatrixXd& alpha, const Eigen::MatrixXd& omega) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(omega, alpha,
                                                                 Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw DomainError("alpha must be symmetric positive definite");
  const Eigen::VectorXd v = es.eigenvalues();
  return Spectrum(std::vector<double>(v.data(), v.data() + v.size()));
}

double eval_weights(std::span<const double> w, std::span<const double> lambda) {
  std::vector<double> x(lambda.size());
  std::transform(lambda.begin(), lambda.end(), x.begin(), [](double v) { return 1.0 / v; });
  double total = 0.0;
  for (std::size_t k = 1; k <= w.size(); ++k)
    if (w[k - 1] != 0.0) total += w[k - 1] * elem_sym(static_cast<int>(k), x);
  return total;
}

double eval(const OperatorSpec& spec, const Spectrum& lambda) {
  spec.require_contains(lambda);
  const std::vector<double> w = spec.effective_weights();
  return eval_weights(w, lambda.values());
}

double eval_tilde(const OperatorSpec& spec, const Spectrum& mu, std::size_t n) {
  if (mu.size() != n || spec.dim() != n)
    throw DomainError("eval_tilde: spectrum length must equal the ambient dimension");
  if (!mu.all_positive()) throw DomainError("eval_tilde: spectrum must be positive");
  std::vector<double> w(spec.sigma_weights.begin(), spec.sigma_weights.end());
  if (n == 1) return 0.0;
  w[0] += spec.kappa;
  w.pop_back();  // the S_n terms vanish as one eigenvalue goes to infinity

  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> subset(n - 1);
  for (std::size_t drop = 0; drop < n; ++drop) {
    std::size_t m = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (i != drop) subset[m++] = mu[i];
    best = std::max(best, eval_weights(w, subset));
  }
  return best;
}

double subsolution_margin(const OperatorSpec& spec, double c, const Spectrum& mu) {
  return c - eval_tilde(spec, mu, mu.size());
}

bool StructuralReport::all_pass() const {
  return std::all_of(conditions.begin(), conditions.end(),
                     [](const ConditionResult& c) { return c.pass; });
}

StructuralReport check_structural(const OperatorSpec& spec, std::size_t sample_count,
                                  SpectrumBox box, StructuralOptions options) {
  const std::size_t n = spec.dim();
  if (n == 0) throw DomainError("check_structural: empty operator");
  if (!(box.lo > 0.0) || !(box.hi >= box.lo))
    throw DomainError("check_structural: need 0 < lo <= hi");
  // The all-lo corner is the worst case for every supported region.
  spec.require_contains(Spectrum(std::vector<double>(n, box.lo)));
  spec.require_contains(Spectrum(std::vector<double>(n, box.hi)));

  Rng rng(options.seed);
  auto random_b = [&rng, n] {
    ComplexMatrix b(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < b.rows(); ++i)
      for (Eigen::Index j = 0; j < b.cols(); ++j) {
        const double re = rng.normal();
        b(i, j) = {re, rng.normal()};
      }
    return ComplexMatrix(b / b.norm());
  };

  std::vector<Sample> samples;
  if (n <= kMaxCornerDim) {
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      std::vector<double> v(n);
      for (std::size_t i = 0; i < n; ++i) v[i] = (mask >> i) & 1u ? box.hi : box.lo;
      samples.push_back({Spectrum(std::move(v)), random_b()});
    }
  }
  for (std::size_t s = 0; s < sample_count; ++s) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.log_uniform(box.lo, box.hi);
    samples.push_back({Spectrum(std::move(v)), random_b()});
  }

  const std::vector<double> w = spec.effective_weights();
  std::vector<SampleEval> evals(samples.size());
  const auto count = static_cast<std::ptrdiff_t>(samples.size());
#pragma omp parallel for schedule(static) if (options.parallel)
  for (std::ptrdiff_t i = 0; i < count; ++i)
    evals[static_cast<std::size_t>(i)] = evaluate_sample(w, samples[static_cast<std::size_t>(i)]);

  StructuralReport rep;
  rep.samples = samples.size();
  rep.ratio_min = std::numeric_limits<double>::infinity();
  rep.ratio_max = -std::numeric_limits<double>::infinity();
  rep.dominance_min = std::numeric_limits<double>::infinity();
  rep.convexity_min = std::numeric_limits<double>::infinity();
  rep.epsilon_rule = spec.epsilon > 0.0 ? "epsilon budget delta^(n-1)/(2 max(1,n-1)), sampled"
                                        : "not applicable";

  const bool sublevel_deflated =
      spec.epsilon > 0.0 && std::holds_alternative<region::Sublevel>(spec.region);
  const double dn = static_cast<double>(n);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const SampleEval& e = evals[i];
    const Spectrum& lam = samples[i].lambda;
    const std::string at = " at " + spectrum_text(lam);

    if (!(e.f > 0.0))
      fail(rep.conditions[0], lam, "F = " + io::format_double(e.f) + " <= 0" + at);
    else if (!(e.min_neg_lambda_grad > 0.0))
      fail(rep.conditions[0], lam, "some d_ii F >= 0" + at);

    rep.convexity_min = std::min(rep.convexity_min, e.convexity);
    if (e.convexity < -kConvexTol * e.convexity_scale)
      fail(rep.conditions[1], lam, "convexity form = " + io::format_double(e.convexity) + at);

    if (e.f > 0.0) {
      rep.ratio_min = std::min(rep.ratio_min, e.ratio);
      rep.ratio_max = std::max(rep.ratio_max, e.ratio);
    }
    if (spec.is_pure()) {
      if (!(e.ratio >= 1.0 - kRelTol && e.ratio <= dn * (1.0 + kRelTol)))
        fail(rep.conditions[2], lam, "ratio " + io::format_double(e.ratio) + " outside [1, n]" + at);
    } else if (sublevel_deflated) {
      if (!(e.ratio >= 0.5 - kRelTol && e.ratio <= dn * (1.0 + kRelTol)))
        fail(rep.conditions[2], lam,
             "ratio " + io::format_double(e.ratio) + " outside [1/2, n]" + at);
    } else if (!(e.ratio > 0.0) || !std::isfinite(e.ratio)) {
      fail(rep.conditions[2], lam, "ratio " + io::format_double(e.ratio) + " not positive" + at);
    }

    if (std::isfinite(e.dominance)) rep.dominance_min = std::min(rep.dominance_min, e.dominance);
    if (!(e.dominance_gap >= -kRelTol * std::max(1.0, std::abs(e.f))))
      fail(rep.conditions[3], lam, "smallest eigenvalue does not dominate" + at);

    if (!e.limit_finite || !(e.limit_error <= kLimitTol))
      fail(rep.conditions[4], lam,
           "limit error " + io::format_double(e.limit_error) + " as lambda_n -> inf" + at);
  }
  rep.ratio_constant = rep.ratio_min > 0.0 ? std::max(rep.ratio_max, 1.0 / rep.ratio_min)
                                           : std::numeric_limits<double>::infinity();
  if (rep.dominance_min == std::numeric_limits<double>::infinity()) rep.dominance_min = 0.0;
  return rep;
}

double epsilon_budget(double delta, std::size_t n) {
  if (!(delta > 0.0)) throw DomainError("epsilon_budget: delta must be positive");
  if (n == 0) throw DomainError("epsilon_budget: n must be positive");
  const double dn1 = static_cast<double>(n - 1);
  const double eps = std::pow(delta, dn1) / (2.0 * std::max(1.0, dn1));

  const OperatorSpec spec = OperatorSpec::deflated(n, eps, region::EigenvalueFloor{delta});
  StructuralOptions opt;
  opt.seed = 0x5eedull + n;
  opt.parallel = false;
  const StructuralReport rep = check_structural(spec, 256, {delta, 100.0 * delta}, opt);
  if (!rep.conditions[0].pass || !rep.conditions[1].pass)
    throw NumericError("epsilon_budget: sampled verification failed: " +
                       (rep.conditions[0].pass ? rep.conditions[1].detail
                                               : rep.conditions[0].detail));
  return eps;
}

double epsilon_budget_sublevel(double q, std::size_t n) {
  if (!(q > 0.0)) throw DomainError("epsilon_budget_sublevel: q must be positive");
  if (n == 0) throw DomainError("epsilon_budget_sublevel: n must be positive");
  const double dn = static_cast<double>(n);
  return std::min(epsilon_budget(1.0 / q, n), std::pow(q, -(dn - 1.0)) / (2.0 * dn));
}

}  // namespace sigmaflow
