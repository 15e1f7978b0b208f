#include <numeric>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "songoku/kernels.hpp"
#include "songoku/rng.hpp"

namespace {

using songoku::Matrix;

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  songoku::Rng rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = n(rng);
  return m;
}

template <void (*Gram)(const Matrix&, Matrix&)>
void BM_gram(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const Matrix m = random_matrix(k, 1024, 1);
  Matrix g(k, k);
  for (auto _ : state) {
    Gram(m, g);
    benchmark::DoNotOptimize(g.data().data());
  }
  state.SetItemsProcessed(state.iterations() * k * (k + 1) / 2 * 1024);
}

template <void (*Project)(const Matrix&, const Matrix&, Matrix&)>
void BM_project(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const Matrix m = random_matrix(k, 1024, 2);
  const Matrix p = random_matrix(1024, 64, 3);
  Matrix out(k, 64);
  for (auto _ : state) {
    Project(m, p, out);
    benchmark::DoNotOptimize(out.data().data());
  }
}

template <void (*Ema)(Matrix&, const Matrix&, std::span<const std::size_t>, double)>
void BM_ema(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  Matrix ema = random_matrix(k, 1024, 4);
  const Matrix g = random_matrix(k, 1024, 5);
  std::vector<std::size_t> rows(k);
  std::iota(rows.begin(), rows.end(), 0);
  for (auto _ : state) {
    Ema(ema, g, rows, 0.9);
    benchmark::DoNotOptimize(ema.data().data());
  }
}

template <void (*Sum)(const Matrix&, std::span<const std::size_t>, std::span<double>)>
void BM_sum_rows(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  const Matrix m = random_matrix(k, 1024, 6);
  std::vector<std::size_t> rows(k);
  std::iota(rows.begin(), rows.end(), 0);
  std::vector<double> out(1024);
  for (auto _ : state) {
    Sum(m, rows, out);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

namespace k = songoku::kernels;

BENCHMARK(BM_gram<k::gram_serial>)->Name("gram/serial")->Arg(8)->Arg(40)->Arg(128);
BENCHMARK(BM_gram<k::gram_omp>)->Name("gram/omp")->Arg(8)->Arg(40)->Arg(128);
BENCHMARK(BM_project<k::project_serial>)->Name("project/serial")->Arg(8)->Arg(40)->Arg(128);
BENCHMARK(BM_project<k::project_omp>)->Name("project/omp")->Arg(8)->Arg(40)->Arg(128);
BENCHMARK(BM_ema<k::ema_rows_serial>)->Name("ema_rows/serial")->Arg(8)->Arg(40)->Arg(128);
BENCHMARK(BM_ema<k::ema_rows_omp>)->Name("ema_rows/omp")->Arg(8)->Arg(40)->Arg(128);
BENCHMARK(BM_sum_rows<k::sum_rows_serial>)->Name("sum_rows/serial")->Arg(8)->Arg(40)->Arg(128);
BENCHMARK(BM_sum_rows<k::sum_rows_omp>)->Name("sum_rows/omp")->Arg(8)->Arg(40)->Arg(128);

BENCHMARK_MAIN();
