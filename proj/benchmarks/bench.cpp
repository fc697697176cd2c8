#include <benchmark/benchmark.h>

#include "mdlvq/distortion.hpp"
#include "mdlvq/oracle.hpp"

using namespace mdlvq;

namespace {

void BM_NearestPoint(benchmark::State& state) {
  Lattice a2 = Lattice::a2();
  std::uint64_t s = 1;
  for (auto _ : state) {
    s = s * 6364136223846793005ull + 1;
    DVec x{(double)(s >> 40) / 1e5, (double)((s >> 20) & 0xfffff) / 1e4};
    benchmark::DoNotOptimize(a2.nearest(x));
  }
}
BENCHMARK(BM_NearestPoint);

void BM_GreedyAssign(benchmark::State& state) {
  const i64 n = state.range(0);
  std::pair<i64, i64> params;
  switch (n) {
    case 31: params = {5, -1}; break;
    case 91: params = {9, -1}; break;
    case 301: params = {20, 11}; break;
    default: params = {5, -1};
  }
  auto s = construct_a2(params.first, params.second);
  for (auto _ : state) benchmark::DoNotOptimize(greedy_assign(s, 2));
  state.SetLabel("N=" + std::to_string(s.index_n));
}
BENCHMARK(BM_GreedyAssign)->Arg(31)->Arg(91)->Arg(301);

void BM_LocalAdjustK3(benchmark::State& state) {
  auto s = construct_a2(5, -1);
  auto g = greedy_assign(s, 3);
  Frac zeta = zetas_exact(Frac(1, 10), 3).zeta;
  for (auto _ : state) benchmark::DoNotOptimize(local_adjust(g, zeta));
}
BENCHMARK(BM_LocalAdjustK3);

void BM_OracleMatching(benchmark::State& state) {
  auto s = construct_a2(5, -1);
  for (auto _ : state) benchmark::DoNotOptimize(bruteforce_assign(s, 2, Frac(1, 10)));
}
BENCHMARK(BM_OracleMatching);

void BM_EncodePoint(benchmark::State& state) {
  auto s = construct_a2(5, -1);
  auto asg = greedy_assign(s, 2);
  i64 i = 0;
  for (auto _ : state) {
    ++i;
    IVec lam{(i * 37) % 101 - 50, (i * 61) % 101 - 50};
    benchmark::DoNotOptimize(asg.encode_point(lam));
  }
}
BENCHMARK(BM_EncodePoint);

void BM_SimulateBatch(benchmark::State& state) {
  auto s = construct_a2(5, -1);
  auto asg = greedy_assign(s, 2);
  SimConfig cfg;
  cfg.trials = 50000;
  cfg.seed = 3;
  cfg.source = SourceModel::uniform_box(60.0);
  cfg.p = Frac(1, 10);
  cfg.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(asg, cfg));
  state.SetItemsProcessed(state.iterations() * cfg.trials);
}
BENCHMARK(BM_SimulateBatch);

}  // namespace

BENCHMARK_MAIN();
