#include "sigmaflow/pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseLU>

#include "sigmaflow/error.hpp"
#include "sigmaflow/io.hpp"
#include "sigmaflow/random.hpp"
#include "sigmaflow/symfunc.hpp"

namespace sigmaflow {

namespace {

enum class Safeguard { None, KeepAbove, Strict };

std::vector<Sym2> background_hessians(const DirichletGrid& g, const std::vector<double>& f) {
  std::vector<Sym2> out(g.size());
  for (std::size_t k : g.interior()) out[k] = grid_hessian(g, f, k);
  return out;
}

SolveResult newton(const DirichletGrid& grid, const EquationTerms& terms, std::vector<double> u,
                   Safeguard guard, const NewtonOptions& opt) {
  SolveResult result;
  NodeResiduals res, trial_res;
  assemble_residual(grid, terms, u, res, opt.exec);
  result.log.push_back({0, res.sup_norm, 0.0, res.min_eig});
  auto finish = [&](std::string status) {
    result.status = std::move(status);
    result.converged = result.status == "converged";
    result.residual = res.sup_norm;
    result.min_eig = res.min_eig;
    result.solution = make_grid_function(grid, u);
    return result;
  };
  if (!res.defined || (guard == Safeguard::Strict && res.min_eig < opt.tau))
    return finish("non-convex-initial-guess");

  std::vector<double> trial(u.size());
  for (std::size_t it = 1;; ++it) {
    if (res.sup_norm < opt.tol) return finish("converged");
    if (it > opt.max_iter) return finish("max-iterations");
    const Eigen::SparseMatrix<double> jac = assemble_jacobian(grid, res.coeff);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(jac);
    if (lu.info() != Eigen::Success) return finish("singular-jacobian");
    const Eigen::VectorXd rhs =
        -Eigen::Map<const Eigen::VectorXd>(res.residual.data(), static_cast<Eigen::Index>(res.residual.size()));
    const Eigen::VectorXd delta = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !delta.allFinite()) return finish("singular-jacobian");

    const double floor = guard == Safeguard::Strict ? opt.tau : std::min(opt.tau, res.min_eig);
    double theta = 1.0;
    for (;;) {
      trial = u;
      for (std::size_t r = 0; r < grid.interior().size(); ++r)
        trial[grid.interior()[r]] += theta * delta(static_cast<Eigen::Index>(r));
      assemble_residual(grid, terms, trial, trial_res, opt.exec);
      const bool convex_ok = guard == Safeguard::None || (trial_res.defined && trial_res.min_eig >= floor);
      const bool decrease = trial_res.defined && trial_res.sup_norm < (1.0 - 1e-4 * theta) * res.sup_norm;
      if (convex_ok && decrease) break;
      if (!convex_ok) ++result.safeguard_rejections;
      theta *= 0.5;
      if (theta < opt.min_damping) return finish("stagnation");
    }
    u.swap(trial);
    std::swap(res, trial_res);
    result.iterations = it;
    result.log.push_back({it, res.sup_norm, theta, res.min_eig});
  }
}

void check_sizes(const DirichletProblem& p) {
  if (p.data.size() != p.grid.size()) throw DomainError("Dirichlet data does not match the grid");
  if (p.target == Equation::Toric && p.f_background.size() != p.grid.size())
    throw DomainError("background potential does not match the grid");
}

double model_residual_of(const ConvexGridFunction& u, double b) {
  EquationTerms t{Equation::Model, b, 1.0, nullptr};
  NodeResiduals r;
  assemble_residual(u.grid, t, u.values, r, Exec::Serial);
  return r.sup_norm;
}

}  // namespace

void DirichletProblem::validate(double tau) const {
  check_sizes(*this);
  if (!(weight >= 0.0)) throw DomainError("determinant weight must be >= 0");
  if (target == Equation::Toric) {
    if (!(c > 0.0)) throw DomainError("toric right-hand side c must be positive");
    const double m = convexity_certificate(grid, f_background);
    if (!(m >= tau))
      throw DomainError("background potential is not strictly convex (min Hessian eigenvalue " +
                        io::format_double(m) + ")");
  }
}

SolveResult solve_model_dirichlet(const DirichletProblem& prob, const NewtonOptions& options) {
  check_sizes(prob);
  if (prob.target != Equation::Model) throw DomainError("solve_model_dirichlet needs the model equation");
  if (!(prob.weight >= 0.0)) throw DomainError("model weight b must be >= 0");
  std::vector<double> u = prob.data;
  for (std::size_t k : prob.grid.interior()) u[k] = 0.0;
  // Poisson start: the b = 0 problem is linear, one Newton step solves it.
  NewtonOptions lin = options;
  lin.max_iter = 3;
  SolveResult poisson = newton(prob.grid, {Equation::Model, 0.0, 1.0, nullptr}, u, Safeguard::None, lin);
  if (prob.weight == 0.0) return poisson;
  return newton(prob.grid, {Equation::Model, prob.weight, 1.0, nullptr}, poisson.solution.values,
                Safeguard::KeepAbove, options);
}

SolveResult solve_toric_equation(const DirichletProblem& prob, const std::vector<double>& initial,
                                 const NewtonOptions& options) {
  if (prob.target != Equation::Toric) throw DomainError("solve_toric_equation needs the toric equation");
  prob.validate(options.tau);
  if (initial.size() != prob.grid.size()) throw DomainError("initial guess does not match the grid");
  std::vector<double> u = initial;
  for (std::size_t k : prob.grid.boundary()) u[k] = prob.data[k];
  const std::vector<Sym2> fh = background_hessians(prob.grid, prob.f_background);
  return newton(prob.grid, {Equation::Toric, prob.weight, prob.c, &fh}, std::move(u), Safeguard::Strict, options);
}

SolveResult solve_toric_equation(const DirichletProblem& prob, const NewtonOptions& options) {
  return solve_toric_equation(prob, prob.data, options);
}

SupersolutionReport supersolution_check(const ConvexGridFunction& h, double b) {
  const DirichletGrid& g = h.grid;
  const std::size_t n = g.dim();
  SupersolutionReport rep;
  rep.Lf.assign(g.size(), std::numeric_limits<double>::quiet_NaN());
  rep.max_Lf = -std::numeric_limits<double>::infinity();
  rep.model_residual = model_residual_of(h, b);
  rep.warning = !(rep.model_residual <= 1e-6);

  std::vector<double> f(g.size(), 0.0);
  for (std::size_t k : g.interior()) {
    const double det = grid_hessian(g, h.values, k).det(n);
    if (!(det > 0.0)) rep.warning = true;
    f[k] = std::pow(std::max(det, 0.0), 1.0 / static_cast<double>(n));
  }
  for (std::size_t k : g.interior()) {
    bool inner = true;
    const int span = n == 2 ? 1 : 0;
    for (int dj = -span; dj <= span && inner; ++dj)
      for (int di = -1; di <= 1 && inner; ++di) inner = g.kind(g.shift(k, di, dj)) == NodeKind::Interior;
    if (!inner) continue;
    const Sym2 hh = grid_hessian(g, h.values, k);
    const Sym2 ff = grid_hessian(g, f, k);
    const double lf = n == 1 ? (1.0 + b) * ff.xx
                             : ff.xx + ff.yy + b * (hh.yy * ff.xx - 2.0 * hh.xy * ff.xy + hh.xx * ff.yy);
    rep.Lf[k] = lf;
    rep.max_Lf = std::max(rep.max_Lf, lf);
    ++rep.nodes;
  }
  if (rep.nodes == 0) throw DomainError("supersolution_check: grid too small");
  return rep;
}

HessianBound hessian_bound_check(const ConvexGridFunction& u, double b) {
  HessianBound hb;
  const std::size_t n = u.grid.dim();
  hb.bound = std::sqrt(static_cast<double>(n));
  for (std::size_t k : u.grid.interior()) {
    const Sym2 d = grid_hessian(u.grid, u.values, k);
    const double fro = n == 1 ? std::abs(d.xx) : std::sqrt(d.xx * d.xx + 2.0 * d.xy * d.xy + d.yy * d.yy);
    hb.max_frobenius = std::max(hb.max_frobenius, fro);
  }
  hb.model_residual = model_residual_of(u, b);
  return hb;
}

std::vector<double> continuity_schedule(double d_start, double d_end, std::size_t stages) {
  if (!(d_start > 0.0) || !(d_end >= 0.0) || d_end > d_start)
    throw DomainError("continuity schedule needs d_start > 0 and 0 <= d_end <= d_start");
  if (stages < 2) throw DomainError("continuity schedule needs at least 2 stages");
  std::vector<double> d;
  const bool to_zero = d_end == 0.0;
  const double last = to_zero ? 1e-3 * d_start : d_end;
  const std::size_t geo = to_zero ? stages - 1 : stages;
  for (std::size_t i = 0; i < geo; ++i) {
    const double t = geo == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(geo - 1);
    d.push_back(d_start * std::pow(last / d_start, t));
  }
  if (!to_zero) d.back() = d_end;
  if (to_zero) d.push_back(0.0);
  return d;
}

ContinuityPath continuity_solve(const DirichletProblem& prob, double d_start, double d_end,
                                std::size_t stages, CNormalization norm, const NewtonOptions& options) {
  if (prob.target != Equation::Toric) throw DomainError("continuity_solve needs the toric equation");
  prob.validate(options.tau);
  ContinuityPath path;
  path.d_schedule = continuity_schedule(d_start, d_end, stages);

  double ratio = 0.0;
  if (norm == CNormalization::Recompute) {
    double num = 0.0, den = 0.0;
    for (std::size_t k : prob.grid.interior()) {
      num += grid_hessian(prob.grid, prob.f_background, k).det(prob.grid.dim());
      den += grid_hessian(prob.grid, prob.data, k).det(prob.grid.dim());
    }
    if (!(den > 0.0)) throw DomainError("continuity_solve: reference potential has no Monge-Ampere mass");
    ratio = num / den;
  }

  std::vector<double> guess = prob.data;
  path.smallest_d = std::numeric_limits<double>::infinity();
  path.solution = make_grid_function(prob.grid, prob.data);
  for (double d : path.d_schedule) {
    DirichletProblem stage = prob;
    stage.weight = d;
    stage.c = norm == CNormalization::Recompute ? prob.c + d * ratio : prob.c;
    const SolveResult r = solve_toric_equation(stage, guess, options);
    path.stages.push_back({d, stage.c, r.converged, r.iterations, r.residual, r.min_eig, r.status});
    if (!r.converged) {
      path.stall_d = d;
      return path;
    }
    guess = r.solution.values;
    path.solution = r.solution;
    path.smallest_d = d;
  }
  path.completed = true;
  return path;
}

BianGuanReport bian_guan_check(const Eigen::MatrixXd& b, double c, std::size_t samples, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(b.rows());
  if (n == 0 || b.cols() != b.rows()) throw DomainError("bian_guan_check: B must be square");
  if (!(c >= 0.0)) throw DomainError("bian_guan_check: c must be >= 0");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> bes(b);
  if (bes.eigenvalues().minCoeff() <= 0.0) throw DomainError("bian_guan_check: B must be positive definite");
  const Eigen::MatrixXd b_inv_half = bes.operatorInverseSqrt();
  const double det_b = bes.eigenvalues().prod();
  std::vector<double> w(n, 0.0);
  w[0] += 1.0;
  w[n - 1] += c / det_b;

  const auto ni = static_cast<Eigen::Index>(n);
  auto value = [&](const Eigen::MatrixXd& a) {
    const Eigen::MatrixXd inv = a.inverse();
    return (b * inv).trace() + c * inv.determinant();
  };
  Rng rng(seed);
  BianGuanReport rep;
  rep.min_form = std::numeric_limits<double>::infinity();
  rep.min_second_difference = std::numeric_limits<double>::infinity();
  bool ok = true;
  for (std::size_t s = 0; s < samples; ++s) {
    Eigen::MatrixXd g(ni, ni), h(ni, ni);
    for (Eigen::Index i = 0; i < ni; ++i)
      for (Eigen::Index j = 0; j < ni; ++j) {
        g(i, j) = rng.normal();
        h(i, j) = rng.normal();
      }
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    const Eigen::MatrixXd q = qr.householderQ();
    Eigen::VectorXd lam(ni);
    for (Eigen::Index i = 0; i < ni; ++i) lam(i) = rng.log_uniform(0.2, 5.0);
    const Eigen::MatrixXd a = q * lam.asDiagonal() * q.transpose();
    h = (0.5 * (h + h.transpose())).eval();
    h /= h.norm();

    // Congruence: tr(B A^{-1}) = S_1(At^{-1}), det(A^{-1}) = S_n(At^{-1}) / det B.
    const Eigen::MatrixXd at = b_inv_half * a * b_inv_half;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> aes(at);
    const Eigen::VectorXd mu = aes.eigenvalues();
    const Eigen::MatrixXd dir = aes.eigenvectors().transpose() * (b_inv_half * h * b_inv_half) * aes.eigenvectors();
    const Spectrum spec(std::vector<double>(mu.data(), mu.data() + mu.size()));
    const double form = convexity_form(std::span<const double>(w), spec, dir.cast<std::complex<double>>());
    rep.min_form = std::min(rep.min_form, form);

    const double t = 1e-3 * lam.minCoeff();
    const double f0 = value(a);
    const double second = (value(a + t * h) - 2.0 * f0 + value(a - t * h)) / (t * t);
    const double scale = std::max(1.0, std::abs(f0) / (lam.minCoeff() * lam.minCoeff()));
    rep.min_second_difference = std::min(rep.min_second_difference, second / scale);
    if (form < -1e-10 * scale || second < -1e-6 * scale) ok = false;
    ++rep.samples;
  }
  rep.pass = ok;
  return rep;
}

double model_radial_sigma(std::size_t n, double b) {
  if (n == 1) return 1.0 + b;
  if (n == 2) return 1.0 + std::sqrt(1.0 + b);
  throw DomainError("model_radial_sigma: n must be 1 or 2");
}

double NonradialModel::value(double x, double y) const {
  const double k = s * y * y / (2.0 * (1.0 + e * x)) + ((1.0 + b) / s) * (x * x / 2.0 + e * x * x * x / 6.0);
  return (k - 0.5 * (x * x + y * y)) / b;
}

Sym2 NonradialModel::hessian(double x, double y) const {
  const double u = 1.0 + e * x;
  const double kxx = s * y * y * e * e / (u * u * u) + ((1.0 + b) / s) * u;
  const double kxy = -s * y * e / (u * u);
  const double kyy = s / u;
  return {(kxx - 1.0) / b, kxy / b, (kyy - 1.0) / b};
}

ScalarField scalar_field_from_json(const nlohmann::json& j, std::size_t n, const std::string& ctx) {
  io::require_object(j, ctx);
  const std::string type = io::get_string(j, "type", ctx);
  if (type == "zero") {
    io::require_keys(j, {"type"}, ctx);
    return [](double, double) { return 0.0; };
  }
  if (type == "quadratic") {
    io::require_keys(j, {"type", "hessian", "constant"}, ctx);
    const Eigen::MatrixXd a = io::get_matrix(j, "hessian", ctx);
    if (static_cast<std::size_t>(a.rows()) != n) throw ConfigError("key '" + ctx + ".hessian' must be n x n");
    const double k = io::get_number_or(j, "constant", 0.0, ctx);
    if (n == 1) return [a, k](double x, double) { return 0.5 * a(0, 0) * x * x + k; };
    return [a, k](double x, double y) {
      return 0.5 * (a(0, 0) * x * x + (a(0, 1) + a(1, 0)) * x * y + a(1, 1) * y * y) + k;
    };
  }
  if (type == "power") {
    io::require_keys(j, {"type", "p", "scale"}, ctx);
    const double p = io::get_number(j, "p", ctx);
    const double s = io::get_number_or(j, "scale", 1.0, ctx);
    if (!(p > 1.0)) throw ConfigError("key '" + ctx + ".p' must exceed 1");
    return [p, s, n](double x, double y) {
      double v = std::pow(std::abs(x), p);
      if (n == 2) v += std::pow(std::abs(y), p);
      return s * v / p;
    };
  }
  if (type == "model-radial") {
    io::require_keys(j, {"type", "b", "radius"}, ctx);
    const double b = io::get_number(j, "b", ctx);
    const double r = io::get_number_or(j, "radius", 1.0, ctx);
    const double sigma = model_radial_sigma(n, b);
    return [sigma, r](double x, double y) { return (x * x + y * y - r * r) / (2.0 * sigma); };
  }
  if (type == "model-nonradial") {
    io::require_keys(j, {"type", "b", "s", "e"}, ctx);
    if (n != 2) throw ConfigError("key '" + ctx + "': model-nonradial needs n = 2");
    NonradialModel m;
    m.b = io::get_number(j, "b", ctx);
    m.s = io::get_number_or(j, "s", m.s, ctx);
    m.e = io::get_number_or(j, "e", m.e, ctx);
    return [m](double x, double y) { return m.value(x, y); };
  }
  throw ConfigError("unknown function type '" + type + "' in key '" + ctx + ".type'");
}

DirichletGrid dirichlet_grid_from_json(const nlohmann::json& j, const std::string& ctx) {
  const long n = io::get_integer(j, "n", ctx);
  if (n != 1 && n != 2) throw ConfigError("key '" + ctx + ".n' must be 1 or 2");
  const long points = io::get_integer(j, "points", ctx);
  if (points < 3) throw ConfigError("key '" + ctx + ".points' must be >= 3");
  const std::string dctx = ctx + ".domain";
  if (!j.contains("domain")) throw ConfigError("missing key '" + dctx + "'");
  const auto& d = j.at("domain");
  const std::string type = io::get_string(d, "type", dctx);
  Domain dom;
  if (type == "box") {
    io::require_keys(d, {"type", "lo", "hi"}, dctx);
    dom = domain::Box{io::get_vector(d, "lo", dctx), io::get_vector(d, "hi", dctx)};
  } else if (type == "ball") {
    io::require_keys(d, {"type", "center", "radius"}, dctx);
    dom = domain::Ball{io::get_vector(d, "center", dctx), io::get_number(d, "radius", dctx)};
  } else {
    throw ConfigError("unknown domain type '" + type + "' in key '" + dctx + ".type'");
  }
  try {
    return DirichletGrid(static_cast<std::size_t>(n), dom, static_cast<std::size_t>(points));
  } catch (const DomainError& e) {
    throw ConfigError("invalid grid '" + ctx + "': " + e.what());
  }
}

DirichletProblem dirichlet_problem_from_json(const nlohmann::json& j) {
  const std::string ctx = "problem";
  io::require_keys(j, {"n", "domain", "points", "equation", "b", "d", "c", "boundary", "background"}, ctx);
  DirichletProblem p;
  p.grid = dirichlet_grid_from_json(j, ctx);
  const std::size_t n = p.grid.dim();
  const std::string eq = io::get_string(j, "equation", ctx);
  if (!j.contains("boundary")) throw ConfigError("missing key 'problem.boundary'");
  p.data = p.grid.sample(scalar_field_from_json(j.at("boundary"), n, ctx + ".boundary"));
  if (eq == "model") {
    if (j.contains("d") || j.contains("c") || j.contains("background"))
      throw ConfigError("model problems take only 'b' (found toric keys in 'problem')");
    p.target = Equation::Model;
    p.weight = io::get_number(j, "b", ctx);
  } else if (eq == "toric") {
    if (j.contains("b")) throw ConfigError("unknown key 'problem.b' for a toric problem");
    p.target = Equation::Toric;
    p.weight = io::get_number_or(j, "d", 0.0, ctx);
    p.c = io::get_number(j, "c", ctx);
    if (!j.contains("background")) throw ConfigError("missing key 'problem.background'");
    p.f_background = p.grid.sample(scalar_field_from_json(j.at("background"), n, ctx + ".background"));
  } else {
    throw ConfigError("unknown equation '" + eq + "' in key 'problem.equation'");
  }
  try {
    p.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid Dirichlet problem: ") + e.what());
  }
  return p;
}

NewtonOptions newton_options_from_json(const nlohmann::json& j, const std::string& ctx) {
  io::require_keys(j, {"tol", "max_iter", "tau"}, ctx);
  NewtonOptions o;
  o.tol = io::get_number_or(j, "tol", o.tol, ctx);
  o.max_iter = static_cast<std::size_t>(io::get_integer_or(j, "max_iter", static_cast<long>(o.max_iter), ctx));
  o.tau = io::get_number_or(j, "tau", o.tau, ctx);
  return o;
}

nlohmann::json to_json(const SolveResult& r) {
  return {{"converged", r.converged}, {"status", r.status},   {"residual", r.residual},
          {"min_hessian_eig", r.min_eig}, {"iterations", r.iterations},
          {"safeguard_rejections", r.safeguard_rejections}};
}

std::string newton_log_csv(const SolveResult& r) {
  io::CsvWriter csv({"iter", "residual", "damping", "min_eig"});
  for (const NewtonLogRow& row : r.log)
    csv.add_row({std::to_string(row.iter), io::format_double(row.residual), io::format_double(row.damping),
                 io::format_double(row.min_eig)});
  return csv.str();
}

std::string grid_function_csv(const ConvexGridFunction& f) {
  io::CsvWriter csv({"x", "y", "value", "kind"});
  for (std::size_t k = 0; k < f.grid.size(); ++k) {
    if (!f.grid.active(k) || !f.valid[k]) continue;
    const char* kind = f.grid.kind(k) == NodeKind::Interior ? "interior" : "boundary";
    csv.add_row({io::format_double(f.grid.coord(k, 0)),
                 io::format_double(f.grid.dim() == 2 ? f.grid.coord(k, 1) : 0.0), io::format_double(f.values[k]),
                 kind});
  }
  return csv.str();
}

}  // namespace sigmaflow
