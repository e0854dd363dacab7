#pragma once

// Damped Newton solvers for the reduced convex Dirichlet problems, the
// continuity path in d, and the property checks run on their solutions.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "sigmaflow/dirichlet_grid.hpp"
#include "sigmaflow/pde_kernels.hpp"

namespace sigmaflow {

struct DirichletProblem {
  DirichletGrid grid;
  Equation target = Equation::Model;
  double weight = 1.0;  // b for the model equation, d for the toric one
  double c = 1.0;       // toric right-hand side
  // Dirichlet values on boundary nodes; on interior nodes the toric initial guess.
  std::vector<double> data;
  std::vector<double> f_background;  // toric only: potential of alpha

  // f_background strictly convex (toric), sizes consistent, weight >= 0.
  void validate(double tau = 1e-8) const;
};

struct NewtonOptions {
  double tol = 1e-10;
  std::size_t max_iter = 60;
  double tau = 1e-8;  // convexity floor
  double min_damping = 0x1.0p-20;
  Exec exec = Exec::Parallel;
};

struct NewtonLogRow {
  std::size_t iter;
  double residual, damping, min_eig;
};

struct SolveResult {
  ConvexGridFunction solution;
  bool converged = false;
  std::string status;  // converged | stagnation | singular-jacobian | non-convex-initial-guess | max-iterations
  double residual = 0.0;
  double min_eig = 0.0;
  std::size_t iterations = 0;
  std::size_t safeguard_rejections = 0;
  std::vector<NewtonLogRow> log;
};

// Delta h + b det D^2 h = 1, Newton from the Poisson solution.
SolveResult solve_model_dirichlet(const DirichletProblem& prob, const NewtonOptions& options = {});
// tr((D^2 g)^{-1} D^2 f) + d det D^2 f / det D^2 g = c, Newton from prob.data.
SolveResult solve_toric_equation(const DirichletProblem& prob, const NewtonOptions& options = {});
SolveResult solve_toric_equation(const DirichletProblem& prob, const std::vector<double>& initial,
                                 const NewtonOptions& options);

struct SupersolutionReport {
  std::vector<double> Lf;  // per node, NaN where not evaluated
  double max_Lf = 0.0;
  std::size_t nodes = 0;
  double model_residual = 0.0;
  bool warning = false;  // input is not a solution, or det D^2 h <= 0 somewhere
};
// f = det(D^2 h)^{1/n}; Lf = Delta f + b tr(adj(D^2 h) D^2 f) one cell in from the boundary.
SupersolutionReport supersolution_check(const ConvexGridFunction& h, double b);

struct HessianBound {
  double max_frobenius = 0.0;
  double bound = 0.0;  // sqrt(n)
  double model_residual = 0.0;
};
HessianBound hessian_bound_check(const ConvexGridFunction& u, double b);

enum class CNormalization { Fixed, Recompute };

struct ContinuityStage {
  double d = 0.0;
  double c = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  double residual = 0.0;
  double min_eig = 0.0;
  std::string status;
};

struct ContinuityPath {
  std::vector<double> d_schedule;
  std::vector<ContinuityStage> stages;
  bool completed = false;
  double smallest_d = 0.0;
  std::optional<double> stall_d;
  ConvexGridFunction solution;  // last converged stage
};

// Geometric schedule d_start -> d_end; with d_end = 0 the geometric part ends
// at 1e-3 d_start and a final d = 0 stage is appended.
std::vector<double> continuity_schedule(double d_start, double d_end, std::size_t stages);

// Fixed: every stage uses prob.c. Recompute: c_d = prob.c + d sum det D^2 f / sum det D^2 g_ref,
// g_ref = prob.data.
ContinuityPath continuity_solve(const DirichletProblem& prob, double d_start, double d_end,
                                std::size_t stages, CNormalization norm = CNormalization::Fixed,
                                const NewtonOptions& options = {});

struct BianGuanReport {
  double min_form = 0.0;              // convexity form after congruence
  double min_second_difference = 0.0;  // direct check, scaled
  std::size_t samples = 0;
  bool pass = false;
};
// Convexity of A -> tr(B A^{-1}) + c det(A^{-1}) on positive matrices, B > 0.
BianGuanReport bian_guan_check(const Eigen::MatrixXd& b, double c, std::size_t samples,
                               std::uint64_t seed);

// Closed-form model solutions used as boundary data and oracles.
// Radial: (|x|^2 - r^2) / (2 sigma), sigma = 1 + b (n = 1) or 1 + sqrt(1 + b) (n = 2).
double model_radial_sigma(std::size_t n, double b);
// Non-radial 2D solution h = (k - |x|^2/2) / b with
// k = s y^2 / (2 (1 + e x)) + ((1 + b)/s)(x^2/2 + e x^3/6), det D^2 k = 1 + b.
struct NonradialModel {
  double b = 1.0, s = 1.3, e = 0.1;
  double value(double x, double y) const;
  Sym2 hessian(double x, double y) const;
};

using ScalarField = std::function<double(double, double)>;
// {"type": "zero" | "quadratic" | "power" | "model-radial" | "model-nonradial", ...}
ScalarField scalar_field_from_json(const nlohmann::json& j, std::size_t n, const std::string& context);
DirichletGrid dirichlet_grid_from_json(const nlohmann::json& j, const std::string& context);
// {"n", "domain", "points", "equation", "b" | "d", "c", "boundary", "background"}
DirichletProblem dirichlet_problem_from_json(const nlohmann::json& j);
NewtonOptions newton_options_from_json(const nlohmann::json& j, const std::string& context);

nlohmann::json to_json(const SolveResult& r);
std::string newton_log_csv(const SolveResult& r);
std::string grid_function_csv(const ConvexGridFunction& f);

}  // namespace sigmaflow
