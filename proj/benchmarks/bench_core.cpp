// Microbenchmarks for the training-path hot spots: latent-Q recomputation,
// batch scoring, the full forward/backward step, and metric computation.
#include <benchmark/benchmark.h>

#include "cleki/diagnosis.hpp"
#include "cleki/evaluation.hpp"
#include "cleki/synthetic.hpp"
#include "cleki/training.hpp"

using namespace cleki;

namespace {

struct BenchFixture {
  Dataset data;
  ConceptGraph graph;
  GraphContext ctx;
  ModelConfig config;
  ModelParams params;
  std::vector<ResponseLog> batch;

  explicit BenchFixture(int k_concepts) {
    auto truth = gen_world(256, 128, k_concepts, 17, 0.1, 0.1);
    data = make_dataset(truth, gen_responses(truth, 16, 17));
    graph = truth.graph;
    ctx = GraphContext::build(graph);
    config.dim = 16;
    config.heads = 4;
    config.top_p = std::min(8, k_concepts - 1);
    params = init_params(config, data.n_students, data.n_exercises, data.n_concepts, 17);
    batch.assign(data.logs.begin(), data.logs.begin() + 256);
  }
};

}  // namespace

static void BM_LatentRecompute(benchmark::State& state) {
  BenchFixture f(static_cast<int>(state.range(0)));
  LatentOptions opts;
  opts.top_p = f.config.top_p;
  for (auto _ : state) {
    auto latent = compute_latent(f.params, f.ctx.nbrs, f.ctx.mask, opts);
    benchmark::DoNotOptimize(latent.sim_renorm.data());
  }
}
BENCHMARK(BM_LatentRecompute)->Arg(20)->Arg(123);

static void BM_BatchForward(benchmark::State& state) {
  BenchFixture f(20);
  LatentOptions opts;
  opts.top_p = f.config.top_p;
  const auto latent = compute_latent(f.params, f.ctx.nbrs, f.ctx.mask, opts);
  for (auto _ : state) {
    const double loss = batch_pass(f.params, f.ctx, f.data.q, latent, f.batch, f.config, nullptr);
    benchmark::DoNotOptimize(loss);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(f.batch.size()));
}
BENCHMARK(BM_BatchForward);

static void BM_BatchForwardBackward(benchmark::State& state) {
  BenchFixture f(20);
  LatentOptions opts;
  opts.top_p = f.config.top_p;
  const auto latent = compute_latent(f.params, f.ctx.nbrs, f.ctx.mask, opts);
  for (auto _ : state) {
    Gradients grads = Gradients::zeros_like(f.params);
    const double loss = batch_pass(f.params, f.ctx, f.data.q, latent, f.batch, f.config, &grads);
    benchmark::DoNotOptimize(loss);
    benchmark::DoNotOptimize(grads.d_w1.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(f.batch.size()));
}
BENCHMARK(BM_BatchForwardBackward);

static void BM_ComputeMetrics(benchmark::State& state) {
  Rng rng(5);
  const int n = static_cast<int>(state.range(0));
  std::vector<double> preds(n), labels(n);
  for (int i = 0; i < n; ++i) {
    preds[i] = rng.uniform();
    labels[i] = static_cast<double>(rng.uniform_int(2));
  }
  for (auto _ : state) {
    auto m = compute_metrics(preds, labels);
    benchmark::DoNotOptimize(m.auc);
  }
}
BENCHMARK(BM_ComputeMetrics)->Arg(1000)->Arg(100000);

BENCHMARK_MAIN();
