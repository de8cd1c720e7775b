#include <map>
#include <string>

#include <benchmark/benchmark.h>

#include "reachsdp/certify.h"
#include "reachsdp/geometry.h"
#include "reachsdp/problem_file.h"
#include "reachsdp/relaxation.h"

namespace reachsdp {
namespace {

const ReachProblem& Fixture(const std::string& name) {
  static std::map<std::string, ReachProblem> cache;
  auto it = cache.find(name);
  if (it == cache.end()) {
    it = cache.emplace(name, LoadProblem(std::string(REACHSDP_FIXTURE_DIR) + "/" + name + ".problem")
                                 .problem).first;
  }
  return it->second;
}

void BM_Compose(benchmark::State& state) {
  const ReachProblem& p = Fixture("toy");
  const MonomialBasis basis(2, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(PushforwardTable(p.system.components(), basis));
  }
}
BENCHMARK(BM_Compose)->Arg(4)->Arg(8);

void BM_MomentVector(benchmark::State& state) {
  const auto g = DomainGeometry::MakeEllipsoid(Eigen::Vector2d(0.1, 1.25),
                                               Eigen::Vector2d(0.08, 0.33).asDiagonal());
  for (auto _ : state) benchmark::DoNotOptimize(MomentVector(g, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_MomentVector)->Arg(8)->Arg(16);

void BM_AssembleDual(benchmark::State& state) {
  const ReachProblem& p = Fixture("toy");
  for (auto _ : state) benchmark::DoNotOptimize(AssembleDual(p, static_cast<int>(state.range(0))));
}
BENCHMARK(BM_AssembleDual)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_SolveDual(benchmark::State& state, const char* name) {
  const ReachProblem& p = Fixture(name);
  SolverOptions opts;
  opts.threads = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(SolveDual(p, static_cast<int>(state.range(0)), InteriorPointSolver(), opts));
  }
}
BENCHMARK_CAPTURE(BM_SolveDual, toy, "toy")->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_SolveDual, julia, "julia")->Arg(2)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
  const ReachProblem& p = Fixture("fitzhugh_nagumo");
  const auto init = SampleSet(p.init, *p.init_geometry, 1000, 1);
  for (auto _ : state) benchmark::DoNotOptimize(Simulate(p.system, init, 7));
}
BENCHMARK(BM_Simulate);

}  // namespace
}  // namespace reachsdp

BENCHMARK_MAIN();
