#include "sigmaflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "sigmaflow/error.hpp"
#include "sigmaflow/io.hpp"

namespace sigmaflow {

namespace {

void require_admissible(const NodeFields& f, const std::string& what) {
  if (f.bad_node >= 0)
    throw DegenerateMetricError(what + ": omega not positive definite at node " +
                                    std::to_string(f.bad_node),
                                static_cast<std::size_t>(f.bad_node));
}

double weighted_sum(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double path_integrand(const std::vector<double>& phi, const NodeFields& f, double c, double cell) {
  double s = 0.0;
  for (std::size_t k = 0; k < phi.size(); ++k) s += phi[k] * (f.F[k] - c) * f.det_omega[k];
  return s * cell;
}

// Simpson rule along s -> G0 + s D^2 phi. Fields at s = 0 and s = 1 may be
// supplied to avoid recomputation.
double j_path(const TorusProblem& prob, const std::vector<double>& w, const std::vector<double>& phi,
              double c, std::size_t nodes, Exec exec, const NodeFields* at0, const NodeFields* at1) {
  if (nodes < 3 || nodes % 2 == 0)
    throw DomainError("j_functional: path_steps must be odd and >= 3");
  const double hs = 1.0 / static_cast<double>(nodes - 1);
  const double cell = prob.grid.cell_volume();
  NodeFields scratch;
  double total = 0.0;
  for (std::size_t m = 0; m < nodes; ++m) {
    const double s = static_cast<double>(m) * hs;
    const NodeFields* f = nullptr;
    if (m == 0 && at0) {
      f = at0;
    } else if (m + 1 == nodes && at1) {
      f = at1;
    } else {
      evaluate_nodes(prob, w, phi, s, scratch, exec);
      if (scratch.bad_node >= 0)
        throw DegenerateMetricError("j_functional: path loses admissibility at t = " +
                                        io::format_double(s),
                                    static_cast<std::size_t>(scratch.bad_node));
      f = &scratch;
    }
    const double weight = (m == 0 || m + 1 == nodes) ? 1.0 : (m % 2 == 1 ? 4.0 : 2.0);
    total += weight * path_integrand(phi, *f, c, cell);
  }
  return total * hs / 3.0;
}

double residual_of(const NodeFields& f, double c) {
  double r = 0.0;
  for (double v : f.F) r = std::max(r, std::abs(v - c));
  return r;
}

double volume_of(const NodeFields& f, double cell) {
  double v = 0.0;
  for (double d : f.det_omega) v += d;
  return v * cell;
}

// Carries the fields at the current iterate and at phi = 0 between steps.
struct Integrator {
  const TorusProblem& prob;
  FlowOptions opt;
  std::vector<double> w;
  NodeFields at_zero;
  NodeFields current;
  std::size_t halvings = 0;

  Integrator(const TorusProblem& p, const FlowOptions& o) : prob(p), opt(o), w(p.spec.effective_weights()) {
    prob.validate();
    const std::vector<double> zero(prob.grid.size(), 0.0);
    evaluate_nodes(prob, w, zero, 0.0, at_zero, opt.exec);
    require_admissible(at_zero, "background");
  }

  double c_eps() const {
    return weighted_sum(at_zero.F, at_zero.det_omega) / volume_of(at_zero, 1.0);
  }

  double j_value(const std::vector<double>& phi, double c) const {
    return j_path(prob, w, phi, c, opt.path_steps, opt.exec, &at_zero, &current);
  }

  FlowState start(const PotentialField& phi0) {
    if (phi0.phi.size() != prob.grid.size()) throw DomainError("initial potential does not match the grid");
    FlowState s;
    s.phi = phi0;
    if (s.phi.mean_zero) subtract_mean(s.phi.phi);
    evaluate_nodes(prob, w, s.phi.phi, 1.0, current, opt.exec);
    require_admissible(current, "initial potential");
    s.c_eps = c_eps();
    s.sup_F = current.sup_F;
    s.residual = residual_of(current, s.c_eps);
    s.J_value = j_value(s.phi.phi, s.c_eps);
    s.volume = volume_of(current, prob.grid.cell_volume());
    return s;
  }

  // `current` must hold the fields of `s`.
  FlowState advance(const FlowState& s, double dt) {
    const std::size_t n = prob.dim();
    const double h = prob.grid.h();
    double dt_eff = dt;
    if (current.diffusion > 0.0)
      dt_eff = std::min(dt_eff, opt.cfl * h * h / (2.0 * static_cast<double>(n) * current.diffusion));
    NodeFields next;
    std::vector<double> phi1(s.phi.phi.size());
    for (;;) {
      for (std::size_t k = 0; k < phi1.size(); ++k)
        phi1[k] = s.phi.phi[k] + dt_eff * (s.c_eps - current.F[k]);
      if (s.phi.mean_zero) subtract_mean(phi1);
      evaluate_nodes(prob, w, phi1, 1.0, next, opt.exec);
      if (next.bad_node < 0) break;
      dt_eff *= 0.5;
      ++halvings;
      if (dt_eff < opt.dt_floor)
        throw DegenerateMetricError("step: admissibility lost above the dt floor at node " +
                                        std::to_string(next.bad_node),
                                    static_cast<std::size_t>(next.bad_node));
    }
    current = std::move(next);
    FlowState out = s;
    out.phi.phi = std::move(phi1);
    out.t = s.t + dt_eff;
    out.dt_used = dt_eff;
    out.sup_F = current.sup_F;
    out.residual = residual_of(current, s.c_eps);
    out.J_value = j_value(out.phi.phi, s.c_eps);
    out.volume = volume_of(current, prob.grid.cell_volume());
    return out;
  }
};

TorusProblem with_alpha(const TorusProblem& prob, std::vector<Sym2> alpha) {
  TorusProblem p = prob;
  p.alpha = std::move(alpha);
  return p;
}

}  // namespace

std::vector<Spectrum> assemble_A(const TorusProblem& prob, const PotentialField& phi) {
  prob.validate();
  if (phi.phi.size() != prob.grid.size()) throw DomainError("potential does not match the grid");
  const std::size_t n = prob.dim();
  std::vector<Spectrum> out;
  out.reserve(prob.grid.size());
  for (std::size_t k = 0; k < prob.grid.size(); ++k) {
    const Sym2 omega = prob.g0 + discrete_hessian(prob.grid, phi.phi, k);
    if (!omega.positive_definite(n))
      throw DegenerateMetricError("assemble_A: omega not positive definite at node " + std::to_string(k), k);
    const auto lam = pencil_eigenvalues(prob.alpha[k], omega, n);
    out.push_back(n == 1 ? Spectrum{lam[0]} : Spectrum{lam[0], lam[1]});
  }
  return out;
}

double normalizing_constant(const TorusProblem& prob, Exec exec) {
  FlowOptions o;
  o.exec = exec;
  return Integrator(prob, o).c_eps();
}

FlowState initial_state(const TorusProblem& prob, const PotentialField& phi0, const FlowOptions& options) {
  Integrator it(prob, options);
  return it.start(phi0);
}

FlowState step(const TorusProblem& prob, const FlowState& state, double dt, const FlowOptions& options) {
  if (!(dt > 0.0)) throw DomainError("step: dt must be positive");
  Integrator it(prob, options);
  evaluate_nodes(prob, it.w, state.phi.phi, 1.0, it.current, options.exec);
  require_admissible(it.current, "step");
  return it.advance(state, dt);
}

FlowResult run(const TorusProblem& prob, const PotentialField& phi0, double tol, double t_max,
               const FlowOptions& options) {
  Integrator it(prob, options);
  FlowResult r;
  FlowState s = it.start(phi0);
  r.trace.push_back({s.t, s.residual, s.sup_F, s.J_value, 0.0, s.volume});
  r.status = "timeout";
  try {
    while (s.residual >= tol && s.t < t_max && r.steps < options.max_steps) {
      const double dt = std::min(options.dt, t_max - s.t);
      FlowState next = it.advance(s, dt);
      r.max_sup_increase = std::max(r.max_sup_increase, next.sup_F - s.sup_F);
      r.max_J_increase = std::max(r.max_J_increase, next.J_value - s.J_value);
      s = std::move(next);
      ++r.steps;
      r.trace.push_back({s.t, s.residual, s.sup_F, s.J_value, s.dt_used, s.volume});
    }
    if (s.residual < tol) {
      r.converged = true;
      r.status = "converged";
    }
  } catch (const DegenerateMetricError&) {
    r.status = "degenerate";
  }
  r.dt_halvings = it.halvings;
  r.state = std::move(s);
  return r;
}

double j_functional(const TorusProblem& prob, const PotentialField& phi, std::size_t path_steps,
                    double c, Exec exec) {
  prob.validate();
  if (phi.phi.size() != prob.grid.size()) throw DomainError("potential does not match the grid");
  const std::vector<double> w = prob.spec.effective_weights();
  return j_path(prob, w, phi.phi, c, path_steps, exec, nullptr, nullptr);
}

double j_functional(const TorusProblem& prob, const PotentialField& phi, std::size_t path_steps,
                    Exec exec) {
  return j_functional(prob, phi, path_steps, normalizing_constant(prob, exec), exec);
}

BackgroundChange background_change_delta(const TorusProblem& prob, const PotentialField& psi,
                                         const PotentialField& phi, std::size_t path_steps) {
  prob.validate();
  const OperatorSpec& spec = prob.spec;
  const bool pure_s1 = spec.epsilon == 0.0 && spec.ma_twist == 0.0 &&
                       std::all_of(spec.sigma_weights.begin() + 1, spec.sigma_weights.end(),
                                   [](double c) { return c == 0.0; });
  if (!pure_s1) throw DomainError("background_change_delta: operator must be c_1 S_1(A^-1)");
  if (psi.phi.size() != prob.grid.size() || phi.phi.size() != prob.grid.size())
    throw DomainError("background_change_delta: field size mismatch");
  const std::size_t n = prob.dim();
  const double c1 = spec.sigma_weights[0] + spec.kappa;

  std::vector<Sym2> beta(prob.grid.size());
  for (std::size_t k = 0; k < beta.size(); ++k) {
    beta[k] = prob.alpha[k] + discrete_hessian(prob.grid, psi.phi, k);
    if (!beta[k].positive_definite(n))
      throw DomainError("background_change_delta: alpha + D^2 psi not positive at node " + std::to_string(k));
  }
  const TorusProblem prob_beta = with_alpha(prob, std::move(beta));

  BackgroundChange out;
  out.via_functionals =
      j_functional(prob_beta, phi, path_steps, Exec::Parallel) - j_functional(prob, phi, path_steps, Exec::Parallel);
  double sum = 0.0;
  for (std::size_t k = 0; k < prob.grid.size(); ++k) {
    const Sym2 w1 = prob.g0 + discrete_hessian(prob.grid, phi.phi, k);
    sum += psi.phi[k] * (w1.det(n) - prob.g0.det(n));
  }
  out.closed_form = c1 * sum * prob.grid.cell_volume();
  out.discrepancy = std::abs(out.via_functionals - out.closed_form);
  return out;
}

namespace {

Sym2 sym_from_json(const nlohmann::json& j, const std::string& key, std::size_t n, const std::string& ctx) {
  const Eigen::MatrixXd m = io::get_matrix(j, key, ctx);
  if (static_cast<std::size_t>(m.rows()) != n)
    throw ConfigError("key '" + ctx + "." + key + "' must be " + std::to_string(n) + "x" + std::to_string(n));
  if (n == 1) return {m(0, 0), 0.0, 0.0};
  if (std::abs(m(0, 1) - m(1, 0)) > 1e-14 * std::max(1.0, m.norm()))
    throw ConfigError("key '" + ctx + "." + key + "' must be symmetric");
  return {m(0, 0), m(0, 1), m(1, 1)};
}

double mode_value(const std::vector<double>& k, double x, double y) {
  double arg = k[0] * x + (k.size() > 1 ? k[1] * y : 0.0);
  return std::cos(2.0 * std::numbers::pi * arg);
}

}  // namespace

TorusProblem torus_problem_from_json(const nlohmann::json& j) {
  const std::string ctx = "problem";
  io::require_keys(j, {"n", "N", "G0", "alpha", "alpha_modulation", "operator"}, ctx);
  const long n = io::get_integer(j, "n", ctx);
  const long points = io::get_integer(j, "N", ctx);
  if (n != 1 && n != 2) throw ConfigError("key 'problem.n' must be 1 or 2");
  if (points < 4) throw ConfigError("key 'problem.N' must be >= 4");
  const auto dn = static_cast<std::size_t>(n);
  TorusProblem p;
  p.grid = PeriodicGrid(dn, static_cast<std::size_t>(points));
  p.g0 = sym_from_json(j, "G0", dn, ctx);
  const Sym2 a = sym_from_json(j, "alpha", dn, ctx);
  p.alpha.assign(p.grid.size(), a);
  if (j.contains("alpha_modulation")) {
    const std::string mctx = ctx + ".alpha_modulation";
    io::require_keys(j.at("alpha_modulation"), {"amplitude", "k"}, mctx);
    const double amp = io::get_number(j.at("alpha_modulation"), "amplitude", mctx);
    const std::vector<double> k = io::get_vector(j.at("alpha_modulation"), "k", mctx);
    if (k.size() != dn) throw ConfigError("key '" + mctx + ".k' must have n entries");
    double k2 = 0.0;
    for (double v : k) k2 += v * v;
    if (!(k2 > 0.0)) throw ConfigError("key '" + mctx + ".k' must be a nonzero wave vector");
    // alpha = alpha_0 + D^2_h psi keeps alpha closed; |D^2 psi| <= amplitude.
    const double scale = amp / (4.0 * std::numbers::pi * std::numbers::pi * k2);
    const std::vector<double> psi =
        p.grid.sample([&](double x, double y) { return scale * mode_value(k, x, y); });
    for (std::size_t node = 0; node < p.alpha.size(); ++node) p.alpha[node] = a + discrete_hessian(p.grid, psi, node);
  }
  if (!j.contains("operator")) throw ConfigError("missing key 'problem.operator'");
  p.spec = operator_spec_from_json(j.at("operator"));
  try {
    p.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid torus problem: ") + e.what());
  }
  return p;
}

PotentialField potential_from_modes(const PeriodicGrid& grid, const nlohmann::json& modes,
                                    const std::string& context) {
  if (!modes.is_array()) throw ConfigError("key '" + context + "' must be an array of modes");
  PotentialField f;
  f.phi.assign(grid.size(), 0.0);
  for (std::size_t m = 0; m < modes.size(); ++m) {
    const std::string ctx = context + "[" + std::to_string(m) + "]";
    io::require_keys(modes[m], {"amplitude", "k"}, ctx);
    const double amp = io::get_number(modes[m], "amplitude", ctx);
    const std::vector<double> k = io::get_vector(modes[m], "k", ctx);
    if (k.size() != grid.dim()) throw ConfigError("key '" + ctx + ".k' must have n entries");
    for (std::size_t node = 0; node < grid.size(); ++node)
      f.phi[node] += amp * mode_value(k, grid.x(node), grid.y(node));
  }
  subtract_mean(f.phi);
  return f;
}

void write_potential_csv(const std::filesystem::path& path, const TorusProblem& prob,
                         const PotentialField& phi) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  nlohmann::json spec;
  to_json(spec, prob.spec);
  out << "# n=" << prob.dim() << " N=" << prob.grid.points() << " G0=[" << io::format_double(prob.g0.xx)
      << "," << io::format_double(prob.g0.xy) << "," << io::format_double(prob.g0.yy) << "] spec="
      << spec.dump() << '\n';
  out << "x,y,phi\n";
  for (std::size_t k = 0; k < phi.phi.size(); ++k)
    out << io::format_double(prob.grid.x(k)) << ',' << io::format_double(prob.dim() == 1 ? 0.0 : prob.grid.y(k))
        << ',' << io::format_double(phi.phi[k]) << '\n';
}

std::string trace_csv(const FlowResult& r) {
  io::CsvWriter csv({"t", "residual", "sup_F", "J", "dt", "volume"});
  for (const TraceRow& row : r.trace) csv.add_numeric_row({row.t, row.residual, row.sup_F, row.J, row.dt, row.volume});
  return csv.str();
}

}  // namespace sigmaflow
