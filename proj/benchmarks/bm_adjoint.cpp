#include <benchmark/benchmark.h>

#include "adjqoc/adjoint.hpp"
#include "adjqoc/trust_region.hpp"
#include "adjqoc/workbench/synthetic.hpp"

namespace {

using namespace adjqoc;

struct Fixture {
  QuantumSystem sys;
  MaximalModel model;
  ParameterVector theta;

  Fixture(Eigen::Index n, std::size_t steps)
      : sys(workbench::to_quantum_system(workbench::generate_synthetic(n, 1, 7), 1e6, steps, 0.1)),
        model(1, steps, 0.1),
        theta(workbench::draw_initial_theta(static_cast<Eigen::Index>(steps), 8)) {}
};

void BM_Cost(benchmark::State& state) {
  const Fixture f(state.range(0), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_cost(f.sys, f.model, f.theta));
}

void BM_FirstOrderPass(benchmark::State& state) {
  const Fixture f(state.range(0), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(first_order_pass(f.sys, f.model, f.theta));
}

void BM_SecondOrderPass(benchmark::State& state) {
  const Fixture f(state.range(0), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(second_order_pass(f.sys, f.model, f.theta));
}

void BM_Subproblem(benchmark::State& state) {
  const Fixture f(4, static_cast<std::size_t>(state.range(0)));
  const SecondOrderResult r = second_order_pass(f.sys, f.model, f.theta);
  const auto solver = state.range(1) == 0 ? SubproblemSolver::kExact : SubproblemSolver::kSteihaug;
  for (auto _ : state) {
    benchmark::DoNotOptimize(trust_region_subproblem(r.hess, r.grad, 1.0, solver));
  }
}

}  // namespace

BENCHMARK(BM_Cost)->ArgsProduct({{4, 16}, {64, 256}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_FirstOrderPass)->ArgsProduct({{4, 16}, {64, 256, 1024}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SecondOrderPass)->ArgsProduct({{4, 16}, {64, 256}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Subproblem)->ArgsProduct({{64, 200}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
