#include <benchmark/benchmark.h>

#include "fmpp/generator.hpp"
#include "fmpp/softmax_solver.hpp"

using namespace fmpp;

namespace {

TrainingMatrix make_matrix(int sequences, int profile_dim) {
  GeneratorSpec spec{.space = MarkerSpace::from_cardinalities({20, 8, 4}, profile_dim),
                     .kernel = {KernelForm::HP, 1.0},
                     .active_fraction = 0.2,
                     .magnitude = 1.0,
                     .sequences = sequences,
                     .min_length = 5,
                     .max_length = 20,
                     .seed = 7};
  return build_training_matrix(generate(spec).dataset, spec.kernel);
}

void BM_LossAndGradient(benchmark::State& state) {
  const auto tm = make_matrix(static_cast<int>(state.range(0)), 10);
  const Eigen::MatrixXd theta = Eigen::MatrixXd::Constant(tm.param_rows(), tm.feature_dim(), 0.01);
  Eigen::MatrixXd grad;
  for (auto _ : state) {
    benchmark::DoNotOptimize(loss_and_gradient(theta, tm, &grad));
  }
  state.SetItemsProcessed(state.iterations() * tm.rows());
}
BENCHMARK(BM_LossAndGradient)->Arg(100)->Arg(1000)->Arg(5000)->Unit(benchmark::kMicrosecond);

void BM_SparseGroupProx(benchmark::State& state) {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(state.range(0), state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(prox_sparse_group(x, 0.1, 0.2));
  }
}
BENCHMARK(BM_SparseGroupProx)->Arg(32)->Arg(256);

void BM_SoftmaxFit(benchmark::State& state) {
  const auto tm = make_matrix(static_cast<int>(state.range(0)), 5);
  SoftmaxFitConfig cfg;
  cfg.regularization = RegularizationSpec{10.0, 0.5};
  for (auto _ : state) {
    benchmark::DoNotOptimize(softmax_fit(tm, cfg).theta.data());
  }
}
BENCHMARK(BM_SoftmaxFit)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_AdmmFit(benchmark::State& state) {
  const auto tm = make_matrix(static_cast<int>(state.range(0)), 5);
  const AdmmConfig cfg{.penalty = 10.0, .inner = {.tolerance = 1e-4, .max_iterations = 500}, .tolerance = 1e-3, .max_outer = 2000};
  for (auto _ : state) {
    benchmark::DoNotOptimize(admm_fit(tm, RegularizationSpec{10.0, 0.5}, cfg).theta.data());
  }
}
BENCHMARK(BM_AdmmFit)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
