#include <benchmark/benchmark.h>

#include "penlab/dantzig.hpp"
#include "penlab/model_selection.hpp"
#include "penlab/numerics.hpp"
#include "penlab/scenarios.hpp"
#include "penlab/screening.hpp"
#include "penlab/solvers.hpp"

namespace {

using namespace penlab;

SimulatedDataset scenario_data(Scenario name, int n, double rho = 0.0) {
  return generate({name, n, rho}, RngStream(1, 0));
}

void BM_MvnSample(benchmark::State& state) {
  const Eigen::MatrixXd sigma =
      build_covariance(CovarianceSpec::toeplitz(static_cast<int>(state.range(0)), 0.9));
  RngStream rng(2, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mvn_sample(300, sigma, rng));
  }
}
BENCHMARK(BM_MvnSample)->Arg(100);

void BM_CholeskyToeplitz(benchmark::State& state) {
  const Eigen::MatrixXd sigma =
      build_covariance(CovarianceSpec::toeplitz(static_cast<int>(state.range(0)), 0.9));
  for (auto _ : state) {
    benchmark::DoNotOptimize(cholesky_lower(sigma));
  }
}
BENCHMARK(BM_CholeskyToeplitz)->Arg(100)->Arg(300);

void BM_LassoPath(benchmark::State& state) {
  const SimulatedDataset data = scenario_data(Scenario::kInd, static_cast<int>(state.range(0)));
  const LambdaGrid grid = lambda_grid(data.x, data.y);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lasso_path(data.x, data.y, grid.values));
  }
}
BENCHMARK(BM_LassoPath)->Arg(300)->Arg(50);

void BM_ScadPath(benchmark::State& state) {
  const SimulatedDataset data = scenario_data(Scenario::kInd, static_cast<int>(state.range(0)));
  const LambdaGrid grid = lambda_grid(data.x, data.y);
  for (auto _ : state) {
    benchmark::DoNotOptimize(scad_path(data.x, data.y, grid.values));
  }
}
BENCHMARK(BM_ScadPath)->Arg(300);

void BM_DantzigCold(benchmark::State& state) {
  const SimulatedDataset data =
      scenario_data(Scenario::kRcToepS, static_cast<int>(state.range(0)), 0.9);
  const LambdaGrid grid = lambda_grid(data.x, data.y);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dantzig_select(data.x, data.y, grid.values[50]));
  }
}
BENCHMARK(BM_DantzigCold)->Arg(300);

void BM_DantzigWarmPath(benchmark::State& state) {
  const SimulatedDataset data =
      scenario_data(Scenario::kRcToepS, static_cast<int>(state.range(0)), 0.9);
  const LambdaGrid grid = lambda_grid(data.x, data.y);
  for (auto _ : state) {
    DantzigPathSolver solver(data.x, data.y);
    benchmark::DoNotOptimize(solver.path(grid.values));
  }
}
BENCHMARK(BM_DantzigWarmPath)->Arg(300);

void BM_Dcor(benchmark::State& state) {
  const SimulatedDataset data = scenario_data(Scenario::kInd, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(dcor(data.y, data.x.col(0)));
  }
}
BENCHMARK(BM_Dcor)->Arg(100)->Arg(300);

void BM_KfoldCvLasso(benchmark::State& state) {
  const SimulatedDataset data = scenario_data(Scenario::kInd, static_cast<int>(state.range(0)));
  const LambdaGrid grid = lambda_grid(data.x, data.y);
  const PathSolver solver = [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                               const std::vector<double>& g) { return lasso_path(x, y, g); };
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        kfold_cv(data.x, data.y, solver, grid.values, 10, RngStream(3, 0)));
  }
}
BENCHMARK(BM_KfoldCvLasso)->Arg(300);

}  // namespace

BENCHMARK_MAIN();
