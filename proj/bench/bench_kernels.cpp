// Serial reference vs OpenMP for the data-parallel kernels.
// Arg 0 selects Exec::Serial, 1 Exec::Parallel.

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "sigmaflow/flow_kernels.hpp"
#include "sigmaflow/legendre.hpp"
#include "sigmaflow/operators.hpp"
#include "sigmaflow/pde.hpp"

using namespace sigmaflow;

namespace {

Exec exec_of(const benchmark::State& s) { return s.range(0) ? Exec::Parallel : Exec::Serial; }

void label(benchmark::State& s) { s.SetLabel(s.range(0) ? "openmp" : "serial"); }

void BM_FlowNodes(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(1));
  const TorusProblem p = TorusProblem::constant(2, n, {1.5, 0.2, 1.0}, {1.0, 0.1, 0.8}, OperatorSpec::sigma({1.0, 0.5}));
  const std::vector<double> phi = p.grid.sample(
      [](double x, double y) { return 0.004 * std::cos(2.0 * std::numbers::pi * (x + 2.0 * y)); });
  const std::vector<double> w = p.spec.effective_weights();
  NodeFields out;
  for (auto _ : state) {
    evaluate_nodes(p, w, phi, 1.0, out, exec_of(state));
    benchmark::DoNotOptimize(out.sup_F);
  }
  label(state);
}

void BM_ModelResidual(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(1));
  const DirichletGrid g(2, domain::Box{{-1.0, -1.0}, {1.0, 1.0}}, n);
  const NonradialModel m;
  const std::vector<double> u = g.sample([&m](double x, double y) { return m.value(x, y); });
  EquationTerms terms;
  terms.weight = m.b;
  NodeResiduals out;
  for (auto _ : state) {
    assemble_residual(g, terms, u, out, exec_of(state));
    benchmark::DoNotOptimize(out.sup_norm);
  }
  label(state);
}

void BM_Legendre(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(1));
  const DirichletGrid g(2, domain::Box{{-1.0, -1.0}, {1.0, 1.0}}, n);
  const ConvexGridFunction src = make_grid_function(
      g, g.sample([](double x, double y) { return x * x * x * x / 4.0 + 0.5 * (x * x + y * y); }));
  LegendreOptions opt;
  opt.exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(legendre_transform(src, opt).values.data());
  label(state);
}

void BM_Structural(benchmark::State& state) {
  const OperatorSpec spec = OperatorSpec::sigma({0.3, 0.5, 1.0});
  StructuralOptions opt;
  opt.parallel = state.range(0) != 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(check_structural(spec, static_cast<std::size_t>(state.range(1)), SpectrumBox{}, opt).ratio_min);
  label(state);
}

}  // namespace

BENCHMARK(BM_FlowNodes)->ArgsProduct({{0, 1}, {64, 256}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_ModelResidual)->ArgsProduct({{0, 1}, {65, 257}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Legendre)->ArgsProduct({{0, 1}, {33, 65}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Structural)->ArgsProduct({{0, 1}, {1000}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
