#include "dista/experiments.hpp"

#include <benchmark/benchmark.h>

using namespace dista;

namespace {

Instance reference_instance(std::size_t nodes, std::size_t m) {
  TrialConfig c;
  c.nodes = nodes;
  c.m = m;
  return generate_instance(c);
}

void BM_SoftThreshold(benchmark::State& state) {
  const Vector x = Vector::Random(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(soft_threshold(x, 0.1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SoftThreshold)->Arg(150)->Arg(1500)->Arg(15000);

void BM_OperatorNorm(benchmark::State& state) {
  const auto A = generate_sensing(1, static_cast<std::size_t>(state.range(0)), 150, 1)[0].A;
  for (auto _ : state) benchmark::DoNotOptimize(operator_norm(A));
}
BENCHMARK(BM_OperatorNorm)->Arg(4)->Arg(10)->Arg(40);

void BM_DistaGamma(benchmark::State& state) {
  const auto nodes = static_cast<std::size_t>(state.range(0));
  const auto inst = reference_instance(nodes, 10);
  const auto P = build_complete(nodes);
  const auto p = DistaParams::uniform(0.5, 1e-4, 0.02, nodes);
  Matrix X = Matrix::Zero(150, static_cast<Eigen::Index>(nodes));
  for (auto _ : state) {
    X = dista_gamma(X, inst.sensors, P, p);
    benchmark::DoNotOptimize(X.data());
  }
}
BENCHMARK(BM_DistaGamma)->Arg(2)->Arg(10)->Arg(50);

void BM_DistaRun(benchmark::State& state) {
  const auto inst = reference_instance(10, 10);
  const auto P = build_complete(10);
  const auto p = DistaParams::uniform(0.5, 1e-4, 0.02, 10);
  for (auto _ : state) benchmark::DoNotOptimize(dista_run(inst.sensors, P, p).iterations);
}
BENCHMARK(BM_DistaRun)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace

BENCHMARK_MAIN();
