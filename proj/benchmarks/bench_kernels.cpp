// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "psstl/distill.hpp"
#include "psstl/global_graph.hpp"
#include "psstl/matrix.hpp"
#include "psstl/rng.hpp"
#include "psstl/student.hpp"
#include "psstl/synth.hpp"

namespace {

using namespace psstl;

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(r, c);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, 64, 1), b = random_matrix(64, 64, 2);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * 64 * 64));
}
BENCHMARK(BM_Matmul)->Arg(200)->Arg(800);

// Shared by the graph benchmarks: the default benchmark-sized corpus.
const Dataset& corpus() {
  static const Dataset ds = generate_synthetic(SynthParams{});
  return ds;
}

void BM_GlobalGraph(benchmark::State& state) {
  const Matrix e = build_engagement_matrix(corpus());
  for (auto _ : state) benchmark::DoNotOptimize(build_global_graph(e));
}
BENCHMARK(BM_GlobalGraph);

void BM_EdgeRetention(benchmark::State& state) {
  const Matrix a = build_global_graph(build_engagement_matrix(corpus()));
  const auto degrees = node_degrees(a);
  Rng rng(3);
  const EdgeRefiner refiner(64, rng);
  for (auto _ : state) benchmark::DoNotOptimize(edge_retention(a, degrees, refiner));
}
BENCHMARK(BM_EdgeRetention);

void BM_GcnNormalize(benchmark::State& state) {
  const Matrix a = build_global_graph(build_engagement_matrix(corpus()));
  for (auto _ : state) benchmark::DoNotOptimize(gcn_normalize(a));
}
BENCHMARK(BM_GcnNormalize);

void BM_StudentForward(benchmark::State& state) {
  const Dataset& ds = corpus();
  const Matrix a_news = build_global_graph(build_engagement_matrix(ds));
  const StudentInputs in = make_student_inputs(ds, a_news);
  Rng rng(4);
  const StudentModel model(ds.feature_dim, 64, StudentOptions{}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(in));
}
BENCHMARK(BM_StudentForward);

void BM_TarLoss(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix hs = random_matrix(n, 64, 5), ht = random_matrix(n, 64, 6);
  for (auto _ : state) benchmark::DoNotOptimize(tar_loss(hs, ht));
}
BENCHMARK(BM_TarLoss)->Arg(140);

}  // namespace

BENCHMARK_MAIN();
