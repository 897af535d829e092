// Serial reference kernels against their OpenMP versions. Thread count for the
// parallel runs follows OMP_NUM_THREADS.

#include <random>

#include <benchmark/benchmark.h>

#include "psim/kernels.hpp"
#include "psim/trainer.hpp"
#include "test_support.hpp"

namespace {

using psim::RowMatrixXd;
using psim::kernels::Execution;

struct Inputs {
  RowMatrixXd targets;
  std::vector<double> weights;
  Eigen::MatrixXd covariance;
  Eigen::VectorXd x;
};

Inputs make_inputs(int rows, int dim) {
  std::mt19937_64 rng(17);
  Inputs in;
  in.targets = psim::testing::random_matrix(rng, rows, dim);
  in.weights = psim::testing::random_weights(rng, rows, 0.0);
  const RowMatrixXd a = psim::testing::random_matrix(rng, dim, dim);
  in.covariance = a.transpose() * a;
  in.x = psim::testing::random_vector(rng, dim);
  return in;
}

template <Execution exec>
void BM_WeightedMoments(benchmark::State& state) {
  const auto in = make_inputs(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(psim::kernels::weighted_moments(in.targets, in.weights, exec));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <Execution exec>
void BM_BilinearScores(benchmark::State& state) {
  const auto in = make_inputs(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(psim::kernels::bilinear_scores(in.targets, in.covariance, in.x, exec));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_TrainEpoch(benchmark::State& state) {
  const auto corpus = psim::testing::two_topic_corpus(500, 100, 200, 5);
  psim::TrainConfig config;
  config.dim = 50;
  config.window = 5;
  config.epochs = 1;
  config.min_count = 1;
  config.threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(psim::train(corpus, config));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(corpus.token_count()));
}

void shapes(benchmark::internal::Benchmark* b) {
  for (int rows : {10000, 100000}) b->Args({rows, 100});
  b->Unit(benchmark::kMillisecond);
}

}  // namespace

BENCHMARK_TEMPLATE(BM_WeightedMoments, Execution::kSerial)->Apply(shapes);
BENCHMARK_TEMPLATE(BM_WeightedMoments, Execution::kParallel)->Apply(shapes);
BENCHMARK_TEMPLATE(BM_BilinearScores, Execution::kSerial)->Apply(shapes);
BENCHMARK_TEMPLATE(BM_BilinearScores, Execution::kParallel)->Apply(shapes);
BENCHMARK(BM_TrainEpoch)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
