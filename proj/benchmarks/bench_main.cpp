#include <benchmark/benchmark.h>

#include "bcm/agent_model.hpp"
#include "bcm/initial_conditions.hpp"
#include "bcm/kinetic_solver.hpp"

namespace {

// One full derivative sweep at I cells.
void BM_CellRates(benchmark::State& state) {
  const auto cells = static_cast<std::size_t>(state.range(0));
  const auto f = bcm::beta_density(2.0, 3.0, cells);
  const bcm::DerivativeOperator op(cells, bcm::ModelParams(0.25, 0.5));
  for (auto _ : state) benchmark::DoNotOptimize(op.cell_rates(f));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CellRates)->RangeMultiplier(2)->Range(16, 512)->Complexity();

void BM_EulerStep(benchmark::State& state) {
  const auto cells = static_cast<std::size_t>(state.range(0));
  bcm::SolverConfig cfg;
  cfg.params = bcm::ModelParams(0.3, 0.5);
  cfg.cell_count = cells;
  cfg.dt = 0.05;
  cfg.horizon = 1.0;
  const bcm::KineticSolver solver(cfg);
  const auto f = bcm::PiecewiseConstantDensity::uniform(cells);
  for (auto _ : state) benchmark::DoNotOptimize(solver.step(f));
}
BENCHMARK(BM_EulerStep)->Arg(50)->Arg(100)->Arg(200);

void BM_AgentStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  bcm::Rng rng(7);
  const auto init = bcm::InitialCondition::parse("uniform");
  bcm::OpinionState s(init.sample(n, rng), 11);
  const bcm::ModelParams p(0.3, 0.5);
  const bool aux = state.range(1) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(aux ? bcm::step_auxiliary(s, p) : bcm::step_discrete(s, p));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_AgentStep)->ArgsProduct({{100, 10000}, {0, 1}});

}  // namespace

BENCHMARK_MAIN();
