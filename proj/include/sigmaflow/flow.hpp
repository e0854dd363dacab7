#pragma once

// Forward-Euler integration of d phi/dt = c - F(alpha^{-1}(G0 + D^2 phi)) on
// periodic grids, the J functional along linear paths, and the
// change-of-background identity.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sigmaflow/flow_kernels.hpp"
#include "sigmaflow/periodic_grid.hpp"
#include "sigmaflow/symfunc.hpp"

namespace sigmaflow {

struct FlowOptions {
  double dt = 1e-2;     // requested step, capped by the stability bound
  double cfl = 0.45;    // dt <= cfl h^2 / (2 n D)
  double dt_floor = 1e-14;
  std::size_t path_steps = 3;  // Simpson nodes for J tracking; exact for n <= 2
  std::size_t max_steps = 50'000'000;
  Exec exec = Exec::Parallel;
};

struct FlowState {
  double t = 0.0;
  PotentialField phi;
  double c_eps = 0.0;
  double sup_F = 0.0;
  double J_value = 0.0;
  double residual = 0.0;  // max |F(A_t) - c_eps|
  double dt_used = 0.0;
  double volume = 0.0;  // sum det(omega) h^n
};

struct TraceRow {
  double t, residual, sup_F, J, dt, volume;
};

struct FlowResult {
  FlowState state;
  std::vector<TraceRow> trace;
  bool converged = false;
  std::string status;  // converged | timeout | degenerate
  std::size_t steps = 0;
  std::size_t dt_halvings = 0;
  double max_sup_increase = 0.0;  // largest per-step increase of sup F
  double max_J_increase = 0.0;
};

// Spectrum of alpha^{-1}(G0 + D^2_h phi) per node; throws DegenerateMetricError.
std::vector<Spectrum> assemble_A(const TorusProblem& prob, const PotentialField& phi);

// sum F det(omega) / sum det(omega) at phi = 0.
double normalizing_constant(const TorusProblem& prob, Exec exec = Exec::Parallel);

FlowState initial_state(const TorusProblem& prob, const PotentialField& phi0,
                        const FlowOptions& options = {});
// One accepted step of size <= dt; halves on admissibility loss.
FlowState step(const TorusProblem& prob, const FlowState& state, double dt,
               const FlowOptions& options = {});
FlowResult run(const TorusProblem& prob, const PotentialField& phi0, double tol, double t_max,
               const FlowOptions& options = {});

// int_0^1 sum phi (F(A_s) - c) det(omega_s) h^n ds along omega_s = G0 + s D^2 phi,
// Simpson rule with `path_steps` nodes (odd, >= 3).
double j_functional(const TorusProblem& prob, const PotentialField& phi, std::size_t path_steps,
                    Exec exec = Exec::Parallel);
double j_functional(const TorusProblem& prob, const PotentialField& phi, std::size_t path_steps,
                    double c, Exec exec);

struct BackgroundChange {
  double via_functionals = 0.0;  // J_beta(phi) - J_alpha(phi), beta = alpha + D^2 psi
  double closed_form = 0.0;      // c_1 sum psi (det omega_1 - det omega_0) h^n
  double discrepancy = 0.0;  // |via_functionals - closed_form|
};
// Requires the operator to be c_1 S_1(A^{-1}).
BackgroundChange background_change_delta(const TorusProblem& prob, const PotentialField& psi,
                                         const PotentialField& phi, std::size_t path_steps);

// Config loaders. Problem: {"n", "N", "G0", "alpha", "alpha_modulation", "operator"}.
TorusProblem torus_problem_from_json(const nlohmann::json& j);
// Array of {"amplitude": a, "k": [..]} cosine modes, mean removed.
PotentialField potential_from_modes(const PeriodicGrid& grid, const nlohmann::json& modes,
                                    const std::string& context);
void write_potential_csv(const std::filesystem::path& path, const TorusProblem& prob,
                         const PotentialField& phi);
std::string trace_csv(const FlowResult& r);

}  // namespace sigmaflow
