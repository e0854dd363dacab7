#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "sigmaflow/error.hpp"
#include "sigmaflow/flow.hpp"
#include "sigmaflow/operators.hpp"
#include "sigmaflow/random.hpp"

using namespace sigmaflow;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

PotentialField cosine(const PeriodicGrid& g, double amp, int kx, int ky = 0) {
  PotentialField f{g.sample([&](double x, double y) { return amp * std::cos(kTwoPi * (kx * x + ky * y)); }),
                   true};
  subtract_mean(f.phi);
  return f;
}

PotentialField zero(const PeriodicGrid& g) { return {std::vector<double>(g.size(), 0.0), true}; }

double sup_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("assemble_A examples") {
  const TorusProblem same = TorusProblem::constant(2, 8, {1.3, 0.2, 0.9}, {1.3, 0.2, 0.9}, OperatorSpec::j_operator(2));
  for (const Spectrum& s : assemble_A(same, zero(same.grid))) {
    CHECK(s[0] == doctest::Approx(1.0));
    CHECK(s[1] == doctest::Approx(1.0));
  }
  const TorusProblem one = TorusProblem::constant(1, 8, {3.0, 0, 0}, {2.0, 0, 0}, OperatorSpec::j_operator(1));
  CHECK(assemble_A(one, zero(one.grid))[3][0] == doctest::Approx(1.5));
  const TorusProblem diag = TorusProblem::constant(2, 8, {2.0, 0, 3.0}, {1.0, 0, 1.0}, OperatorSpec::j_operator(2));
  const Spectrum s = assemble_A(diag, zero(diag.grid))[5];
  CHECK(std::min(s[0], s[1]) == doctest::Approx(2.0));
  CHECK(std::max(s[0], s[1]) == doctest::Approx(3.0));
}

TEST_CASE("degenerate metric is reported with its node") {
  const TorusProblem p = TorusProblem::constant(1, 16, {1.0, 0, 0}, {1.0, 0, 0}, OperatorSpec::j_operator(1));
  const PotentialField bad = cosine(p.grid, 0.1, 1);  // phi'' reaches -3.9
  try {
    assemble_A(p, bad);
    FAIL("expected DegenerateMetricError");
  } catch (const DegenerateMetricError& e) {
    CHECK(e.node() == 0);
  }
}

TEST_CASE("normalizing constant examples") {
  const TorusProblem one = TorusProblem::constant(1, 16, {1.6, 0, 0}, {0.4, 0, 0}, OperatorSpec::j_operator(1));
  CHECK(normalizing_constant(one) == doctest::Approx(0.25));
  // Unit volumes: c_eps = c - eps.
  const OperatorSpec f = OperatorSpec::deflated(2, 0.3, region::EigenvalueFloor{0.5});
  const TorusProblem defl = TorusProblem::constant(2, 16, {1.0, 0, 1.0}, {1.0, 0, 1.0}, f);
  CHECK(normalizing_constant(defl) == doctest::Approx(2.0 - 0.3));
  const TorusProblem ma = TorusProblem::constant(2, 16, {2.0, 0.5, 1.0}, {1.0, 0.1, 0.8}, OperatorSpec::sigma({0.0, 1.0}));
  CHECK(normalizing_constant(ma) == doctest::Approx((0.8 - 0.01) / (2.0 - 0.25)));
}

// Volume and mass are class data: sum det(omega) and sum F det(omega) change
// with phi only through the O(h^2) defect of the discrete Hessian.
TEST_CASE("class data are independent of the potential up to O(h^2)") {
  std::vector<double> vol_defect, c_defect;
  for (std::size_t pts : {32, 64}) {
    const TorusProblem p =
        TorusProblem::constant(2, pts, {1.5, 0.2, 1.0}, {1.0, 0.1, 0.8}, OperatorSpec::j_operator(2));
    const std::vector<double> w = p.spec.effective_weights();
    NodeFields at0, at1;
    evaluate_nodes(p, w, zero(p.grid).phi, 1.0, at0, Exec::Serial);
    PotentialField phi = cosine(p.grid, 0.004, 1, 2);
    const PotentialField extra = cosine(p.grid, 0.003, 2, -1);
    for (std::size_t i = 0; i < phi.phi.size(); ++i) phi.phi[i] += extra.phi[i];
    evaluate_nodes(p, w, phi.phi, 1.0, at1, Exec::Serial);
    double vol0 = 0, vol1 = 0, mass0 = 0, mass1 = 0;
    for (std::size_t i = 0; i < p.grid.size(); ++i) {
      vol0 += at0.det_omega[i];
      vol1 += at1.det_omega[i];
      mass0 += at0.F[i] * at0.det_omega[i];
      mass1 += at1.F[i] * at1.det_omega[i];
    }
    vol_defect.push_back(std::abs(vol1 / vol0 - 1.0));
    c_defect.push_back(std::abs(mass1 / vol1 - mass0 / vol0));
  }
  CHECK(vol_defect[0] < 1e-2);
  CHECK(vol_defect[0] / vol_defect[1] == doctest::Approx(4.0).epsilon(0.2));
  CHECK(c_defect[0] < 1e-2);
  CHECK(c_defect[0] / c_defect[1] == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("one-dimensional volume is conserved exactly") {
  const TorusProblem p = TorusProblem::constant(1, 64, {3.0, 0, 0}, {2.0, 0, 0}, OperatorSpec::j_operator(1));
  NodeFields at1;
  evaluate_nodes(p, p.spec.effective_weights(), cosine(p.grid, 0.05, 1).phi, 1.0, at1, Exec::Serial);
  double vol = 0;
  for (double v : at1.det_omega) vol += v;
  CHECK(vol == doctest::Approx(3.0 * 64).epsilon(1e-13));
}

TEST_CASE("step is the identity at a solution") {
  const TorusProblem p = TorusProblem::constant(2, 16, {2.0, 0, 3.0}, {1.0, 0, 1.0}, OperatorSpec::j_operator(2));
  const FlowState s0 = initial_state(p, zero(p.grid));
  CHECK(s0.residual < 1e-14);
  const FlowState s1 = step(p, s0, 1e-3);
  CHECK(sup_abs(s1.phi.phi) < 1e-15);
  const FlowResult r = run(p, zero(p.grid), 1e-5, 1.0);
  CHECK(r.converged);
  CHECK(r.state.t == 0.0);
}

TEST_CASE("one-dimensional flow converges to the constant solution") {
  const TorusProblem p = TorusProblem::constant(1, 64, {3.0, 0, 0}, {2.0, 0, 0}, OperatorSpec::j_operator(1));
  const FlowResult r = run(p, cosine(p.grid, 0.05, 1), 1e-5, 50.0);
  REQUIRE(r.converged);
  CHECK(r.state.residual < 1e-5);
  CHECK(sup_abs(r.state.phi.phi) < 1e-5);
  CHECK(r.max_sup_increase <= 1e-8);
  CHECK(r.max_J_increase <= 1e-8);
  for (std::size_t i = 1; i < r.trace.size(); ++i) {
    CHECK(r.trace[i].J <= r.trace[i - 1].J + 1e-8);
    CHECK(r.trace[i].volume == doctest::Approx(r.trace[0].volume).epsilon(1e-12));
  }
}

TEST_CASE("two-dimensional flow converges") {
  const TorusProblem p = TorusProblem::constant(2, 24, {2.0, 0, 3.0}, {1.0, 0, 1.0}, OperatorSpec::j_operator(2));
  const FlowResult r = run(p, cosine(p.grid, 0.004, 1, 1), 1e-5, 50.0);
  REQUIRE(r.converged);
  CHECK(r.state.c_eps == doctest::Approx(0.5 + 1.0 / 3.0));
  CHECK(sup_abs(r.state.phi.phi) < 1e-4);
  CHECK(r.max_sup_increase <= 1e-8);
  CHECK(r.max_J_increase <= 1e-8);
}

TEST_CASE("serial and parallel runs agree bitwise") {
  const TorusProblem p = TorusProblem::constant(2, 16, {1.5, 0.2, 1.0}, {1.0, 0.1, 0.8}, OperatorSpec::j_operator(2));
  FlowOptions serial;
  serial.exec = Exec::Serial;
  FlowOptions parallel;
  const FlowResult a = run(p, cosine(p.grid, 0.003, 1, 2), 1e-6, 5.0, serial);
  const FlowResult b = run(p, cosine(p.grid, 0.003, 1, 2), 1e-6, 5.0, parallel);
  CHECK(a.steps == b.steps);
  CHECK(a.state.phi.phi == b.state.phi.phi);
  CHECK(a.state.J_value == b.state.J_value);
}

TEST_CASE("J functional") {
  const TorusProblem p = TorusProblem::constant(2, 16, {1.5, 0.2, 1.0}, {1.0, 0.1, 0.8}, OperatorSpec::j_operator(2));
  CHECK(j_functional(p, zero(p.grid), 3) == 0.0);
  const PotentialField phi = cosine(p.grid, 0.004, 1, 2);
  const double j3 = j_functional(p, phi, 3);
  CHECK(j3 > 0.0);
  CHECK(j_functional(p, phi, 65) == doctest::Approx(j3).epsilon(1e-10));
  CHECK_THROWS_AS(j_functional(p, phi, 4), DomainError);
}

TEST_CASE("change of background") {
  const TorusProblem p = TorusProblem::constant(2, 32, {1.0, 0, 1.0}, {1.0, 0, 1.0}, OperatorSpec::j_operator(2));
  const PotentialField phi = cosine(p.grid, 0.003, 1, 1);
  CHECK(std::abs(background_change_delta(p, zero(p.grid), phi, 3).discrepancy) <= 1e-15);
  // |J_beta - J_alpha| stays bounded along t phi.
  const PotentialField psi = cosine(p.grid, 0.002, 0, 1);
  double biggest = 0.0;
  for (double t : {0.25, 0.5, 1.0, 2.0}) {
    PotentialField tp = phi;
    for (double& v : tp.phi) v *= t;
    const BackgroundChange d = background_change_delta(p, psi, tp, 5);
    CHECK(d.discrepancy < 1e-12);
    biggest = std::max(biggest, std::abs(d.via_functionals));
  }
  CHECK(biggest < 1e-3);
}

TEST_CASE("closed alpha modulation keeps the flow solvable") {
  const nlohmann::json j = {{"n", 2},
                            {"N", 24},
                            {"G0", {{1.5, 0.2}, {0.2, 1.0}}},
                            {"alpha", {{1.0, 0.1}, {0.1, 0.8}}},
                            {"alpha_modulation", {{"amplitude", 0.2}, {"k", {1, 0}}}},
                            {"operator", {{"c", {1.0, 0.5}}}}};
  const TorusProblem p = torus_problem_from_json(j);
  const FlowResult r = run(p, zero(p.grid), 1e-5, 50.0);
  CHECK(r.converged);
  CHECK(r.max_sup_increase <= 1e-8);
}

TEST_CASE("torus problem JSON is strict") {
  CHECK_THROWS_AS(torus_problem_from_json({{"n", 1}, {"N", 8}, {"G0", 1.0}, {"alpha", 1.0},
                                           {"operator", {{"c", {1.0}}}}, {"extra", 0}}),
                  ConfigError);
  CHECK_THROWS_AS(torus_problem_from_json({{"n", 1}, {"N", 8}, {"G0", -1.0}, {"alpha", 1.0},
                                           {"operator", {{"c", {1.0}}}}}),
                  ConfigError);
}
