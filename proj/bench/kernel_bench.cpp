// Serial reference kernels against their OpenMP versions on report-sized
// inputs (64x64x128 cubes, ROI of a few hundred pixels). Pass
// --benchmark_filter to pick kernels; the worker count comes from
// PLUME_BENCH_WORKERS (default: all cores).

#include "plume/core/random.hpp"
#include "plume/kernels/kernels.hpp"

#include <benchmark/benchmark.h>

#include <cstdlib>
#include <numeric>
#include <random>

using namespace plume;

namespace {

constexpr int kSide = 64;
constexpr int kBands = 128;

RowMatrix random_matrix(int rows, int cols, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> n(5.0, 1.0);
  return RowMatrix::NullaryExpr(rows, cols, [&] { return n(rng); });
}

RadianceCube random_cube(std::uint64_t seed) {
  RadianceCube cube(kSide, kSide, SpectralGrid::lwir(kBands));
  Rng rng(seed);
  std::normal_distribution<double> n(5.0, 1.0);
  for (double& v : cube.data()) v = n(rng);
  return cube;
}

std::vector<int> all_rows(int n) {
  std::vector<int> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

template <auto Kernel>
void BM_Moments(benchmark::State& state) {
  const auto cube = random_cube(1);
  const auto rows = all_rows(cube.pixel_count());
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(cube.pixels(), rows));
}

template <auto Kernel>
void BM_AceScores(benchmark::State& state) {
  const auto cube = random_cube(2);
  const Eigen::VectorXd mu = Eigen::VectorXd::Constant(kBands, 5.0);
  const Eigen::MatrixXd w = Eigen::MatrixXd::Identity(kBands, kBands);
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(kBands, 0.0, 1.0);
  std::vector<double> out(static_cast<std::size_t>(cube.pixel_count()));
  for (auto _ : state) {
    Kernel(cube.pixels(), mu, w, t, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <auto Kernel>
void BM_SpectralGradient(benchmark::State& state) {
  const auto cube = random_cube(3);
  std::vector<double> out(static_cast<std::size_t>(cube.pixel_count()));
  for (auto _ : state) {
    Kernel(cube, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <auto Kernel>
void BM_PairwiseDistances(benchmark::State& state) {
  const auto a = random_matrix(400, kBands, 4), b = random_matrix(600, kBands, 5);
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(kernels::view(a), kernels::view(b)));
}

template <auto Kernel>
void BM_NearestCenter(benchmark::State& state) {
  const auto points = random_matrix(kSide * kSide, kBands, 6);
  const auto centers = random_matrix(static_cast<int>(state.range(0)), kBands, 7);
  std::vector<int> assignment(static_cast<std::size_t>(points.rows()));
  std::vector<double> dist(assignment.size());
  for (auto _ : state) {
    Kernel(kernels::view(points), centers, assignment, dist);
    benchmark::DoNotOptimize(assignment.data());
  }
}

void BM_KnnExhaustive(benchmark::State& state) {
  const auto refs = random_matrix(3500, kBands, 8), queries = random_matrix(300, kBands, 9);
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::knn_exhaustive_serial(kernels::view(refs), kernels::view(queries), k));
}

void BM_KnnSearch(benchmark::State& state) {
  const auto refs = random_matrix(3500, kBands, 8), queries = random_matrix(300, kBands, 9);
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::knn_search(kernels::view(refs), kernels::view(queries), k));
}

}  // namespace

BENCHMARK(BM_Moments<kernels::moments_serial>)->Name("moments/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Moments<kernels::moments>)->Name("moments/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AceScores<kernels::ace_scores_serial>)->Name("ace_scores/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AceScores<kernels::ace_scores>)->Name("ace_scores/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SpectralGradient<kernels::spectral_gradient_serial>)
    ->Name("spectral_gradient/serial")
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SpectralGradient<kernels::spectral_gradient>)->Name("spectral_gradient/omp")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PairwiseDistances<kernels::pairwise_distances_serial>)
    ->Name("pairwise_distances/serial")
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PairwiseDistances<kernels::pairwise_distances>)
    ->Name("pairwise_distances/omp")
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NearestCenter<kernels::nearest_center_serial>)
    ->Name("nearest_center/serial")
    ->Arg(8)
    ->Arg(64)
    ->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NearestCenter<kernels::nearest_center>)->Name("nearest_center/omp")->Arg(8)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KnnExhaustive)->Name("knn/exhaustive_serial")->Arg(1)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KnnSearch)->Name("knn/search_omp")->Arg(1)->Arg(32)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  const char* env = std::getenv("PLUME_BENCH_WORKERS");
  kernels::set_worker_count(env ? std::atoi(env) : 0);
  benchmark::AddCustomContext("workers", std::to_string(kernels::worker_count()));
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
