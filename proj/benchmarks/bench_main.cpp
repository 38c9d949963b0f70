#include <cmath>
#include <numbers>

#include <benchmark/benchmark.h>

#include "mesocloud/assembly.hpp"
#include "mesocloud/field.hpp"
#include "mesocloud/geometry.hpp"
#include "mesocloud/kernels.hpp"
#include "mesocloud/oracle.hpp"

namespace {

using namespace mesocloud;

Problem grid_problem(int m) {
  return Problem{make_grid_cloud({m, Vec3(3, 0, 0), 1.0 / std::sqrt(3.0), std::numbers::pi / 25.0}),
                 DomainSpec::ball(7.0), SourceSpec{2.0, 6.0}};
}

void BM_KernelFrakT(benchmark::State& state) {
  const DomainSpec ball = DomainSpec::ball(7.0);
  const Vec3 x(1.0, 0.5, -0.3), y(-0.8, 1.1, 0.4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernel_frakT(x, y, ball));
  }
}
BENCHMARK(BM_KernelFrakT);

void BM_Assemble(benchmark::State& state) {
  const Problem p = grid_problem(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(assemble(p));
  }
  state.counters["N"] = double(p.cloud.size());
}
BENCHMARK(BM_Assemble)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_SolveDirect(benchmark::State& state) {
  const InteractionSystem sys = assemble(grid_problem(static_cast<int>(state.range(0))));
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_direct(sys));
  }
}
BENCHMARK(BM_SolveDirect)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_SolveFixedPoint(benchmark::State& state) {
  const InteractionSystem sys = assemble(grid_problem(static_cast<int>(state.range(0))));
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_fixed_point(sys, 1e-12, 1000));
  }
}
BENCHMARK(BM_SolveFixedPoint)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_FieldLine(benchmark::State& state) {
  const Problem p = grid_problem(static_cast<int>(state.range(0)));
  const DipoleSolution sol = solve_direct(assemble(p));
  const double y = -1.0 / (2.0 * std::sqrt(3.0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_line(Vec3(2, y, y), Vec3(4, y, y), 1000, p, sol));
  }
}
BENCHMARK(BM_FieldLine)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_ReferenceTwoVoids(benchmark::State& state) {
  const Problem p{Cloud({Void(Vec3(3, 0, 0), 0.4), Void(Vec3(3, 1.2, 0), 0.4)}), DomainSpec::free_space(),
                  SourceSpec{1.0, 6.0}};
  MfsConfig cfg;
  cfg.sources_per_void = static_cast<std::size_t>(state.range(0));
  cfg.source_depth = 0.3;
  cfg.max_residual = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_reference(p, cfg));
  }
}
BENCHMARK(BM_ReferenceTwoVoids)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
