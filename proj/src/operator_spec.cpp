#include "sigmaflow/operator_spec.hpp"

#include <cmath>
#include <cstdio>

#include "sigmaflow/error.hpp"
#include "sigmaflow/io.hpp"
#include "sigmaflow/symfunc.hpp"

namespace sigmaflow {

namespace {

struct RegionCheck {
  const Spectrum& lambda;
  std::string operator()(const region::AllPositive&) const {
    for (std::size_t i = 0; i < lambda.size(); ++i)
      if (!(lambda[i] > 0.0)) return "eigenvalue " + std::to_string(i) + " is not positive";
    return {};
  }
  std::string operator()(const region::EigenvalueFloor& r) const {
    for (std::size_t i = 0; i < lambda.size(); ++i)
      if (!(lambda[i] >= r.delta))
        return "eigenvalue " + std::to_string(i) + " = " + io::format_double(lambda[i]) +
               " below floor " + io::format_double(r.delta);
    return {};
  }
  std::string operator()(const region::Sublevel& r) const {
    std::string msg = (*this)(region::AllPositive{});
    if (!msg.empty()) return msg;
    const double s1 = elem_sym(1, lambda.reciprocal());
    if (!(s1 < r.q))
      return "S_1(A^-1) = " + io::format_double(s1) + " not below " + io::format_double(r.q);
    return {};
  }
};

}  // namespace

std::vector<double> OperatorSpec::effective_weights() const {
  std::vector<double> w = sigma_weights;
  if (w.empty()) return w;
  w.front() += kappa;
  w.back() += ma_twist - epsilon;
  return w;
}

bool OperatorSpec::contains(const Spectrum& lambda) const {
  if (lambda.size() != dim()) return false;
  return std::visit(RegionCheck{lambda}, region).empty();
}

void OperatorSpec::require_contains(const Spectrum& lambda) const {
  if (lambda.size() != dim())
    throw DomainError("spectrum length " + std::to_string(lambda.size()) +
                      " does not match operator dimension " + std::to_string(dim()));
  const std::string msg = std::visit(RegionCheck{lambda}, region);
  if (!msg.empty()) throw RegionError("spectrum outside " + describe(region) + ": " + msg);
}

void OperatorSpec::validate() const {
  if (sigma_weights.empty()) throw DomainError("key 'operator.c' needs at least one sigma weight");
  for (double c : sigma_weights)
    if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("key 'operator.c': sigma weights must be finite and >= 0");
  for (double x : {epsilon, kappa, ma_twist})
    if (!(x >= 0.0) || !std::isfinite(x))
      throw DomainError("keys 'operator.epsilon', 'operator.kappa', 'operator.d' must be finite and >= 0");
  if (epsilon > 0.0 && std::holds_alternative<region::AllPositive>(region))
    throw DomainError("key 'operator.epsilon' > 0 requires an eigenvalue-floor or sublevel region");
  if (const auto* f = std::get_if<region::EigenvalueFloor>(&region); f && !(f->delta > 0.0))
    throw DomainError("key 'operator.region.delta' must be positive");
  if (const auto* s = std::get_if<region::Sublevel>(&region); s && !(s->q > 0.0))
    throw DomainError("key 'operator.region.q' must be positive");
}

OperatorSpec OperatorSpec::sigma(std::vector<double> weights) {
  OperatorSpec s;
  s.sigma_weights = std::move(weights);
  return s;
}

OperatorSpec OperatorSpec::j_operator(std::size_t n) {
  std::vector<double> w(n, 0.0);
  if (n > 0) w[0] = 1.0;
  return sigma(std::move(w));
}

OperatorSpec OperatorSpec::deflated(std::size_t n, double epsilon, Region region) {
  OperatorSpec s = j_operator(n);
  s.epsilon = epsilon;
  s.region = region;
  return s;
}

std::string describe(const Region& r) {
  struct {
    std::string operator()(const region::AllPositive&) const { return "all-positive"; }
    std::string operator()(const region::EigenvalueFloor& f) const {
      return "eigenvalue-floor(" + io::format_double(f.delta) + ")";
    }
    std::string operator()(const region::Sublevel& s) const {
      return "sublevel(" + io::format_double(s.q) + ")";
    }
  } visitor;
  return std::visit(visitor, r);
}

void to_json(nlohmann::json& j, const OperatorSpec& spec) {
  nlohmann::json region_json;
  std::visit(
      [&region_json](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, region::AllPositive>) {
          region_json = {{"type", "all-positive"}};
        } else if constexpr (std::is_same_v<T, region::EigenvalueFloor>) {
          region_json = {{"type", "eigenvalue-floor"}, {"delta", r.delta}};
        } else {
          region_json = {{"type", "sublevel"}, {"q", r.q}};
        }
      },
      spec.region);
  j = {{"c", spec.sigma_weights},
       {"epsilon", spec.epsilon},
       {"kappa", spec.kappa},
       {"d", spec.ma_twist},
       {"region", region_json}};
}

OperatorSpec operator_spec_from_json(const nlohmann::json& j) {
  constexpr std::string_view ctx = "operator";
  io::require_keys(j, {"c", "epsilon", "kappa", "d", "region"}, ctx);
  OperatorSpec spec;
  spec.sigma_weights = io::get_vector(j, "c", ctx);
  spec.epsilon = io::get_number_or(j, "epsilon", 0.0, ctx);
  spec.kappa = io::get_number_or(j, "kappa", 0.0, ctx);
  spec.ma_twist = io::get_number_or(j, "d", 0.0, ctx);
  if (j.contains("region")) {
    const auto& r = j.at("region");
    constexpr std::string_view rctx = "operator.region";
    io::require_object(r, rctx);
    const std::string type = io::get_string(r, "type", rctx);
    if (type == "all-positive") {
      io::require_keys(r, {"type"}, rctx);
    } else if (type == "eigenvalue-floor") {
      io::require_keys(r, {"type", "delta"}, rctx);
      spec.region = region::EigenvalueFloor{io::get_number(r, "delta", rctx)};
    } else if (type == "sublevel") {
      io::require_keys(r, {"type", "q"}, rctx);
      spec.region = region::Sublevel{io::get_number(r, "q", rctx)};
    } else {
      throw ConfigError("unknown region type '" + type + "' in key 'operator.region.type'");
    }
  }
  try {
    spec.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid operator: ") + e.what());
  }
  return spec;
}

}  // namespace sigmaflow
