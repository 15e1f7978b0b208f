#pragma once

// Wall-clock harness. Gradients are generated once per task count and the
// same float tensor is replayed, in the same order, to every method.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace songoku {

enum class BenchMethod { kUniform, kSongoku, kSongokuProject, kSongokuScale };

std::string to_string(BenchMethod m);
BenchMethod parse_bench_method(const std::string& name);

struct BenchConfig {
  std::vector<std::size_t> tasks{3, 6, 16, 40};
  std::vector<std::size_t> periods{4, 32, 256};
  std::size_t dim = 1024;
  std::size_t steps = 900;
  std::size_t repeats = 10;
  std::uint64_t seed = 0;
  double tau_star = 0.5;
  double beta = 0.9;
  std::vector<BenchMethod> methods{BenchMethod::kUniform, BenchMethod::kSongoku,
                                   BenchMethod::kSongokuProject, BenchMethod::kSongokuScale};

  void validate() const;
};

struct BenchRow {
  BenchMethod method = BenchMethod::kUniform;
  std::size_t tasks = 0;
  std::size_t period = 0;  // 0 for methods without a refresh
  double mean_seconds = 0.0;
  double std_seconds = 0.0;
  std::vector<double> samples;
  std::uint64_t multiply_adds = 0;  // per repeat
  std::uint64_t checksum = 0;       // of the gradient tensor consumed
  double sink = 0.0;
};

struct BenchResult {
  std::vector<BenchRow> rows;

  const BenchRow* find(BenchMethod m, std::size_t tasks, std::size_t period) const;
  /// True when every row of a task count consumed the same tensor.
  bool fair() const;
};

/// Pre-generated steps x K x d gradients drawn from a two-group planted suite.
struct GradientTensor {
  std::size_t steps = 0;
  std::size_t tasks = 0;
  std::size_t dim = 0;
  std::vector<float> data;

  const float* at(std::size_t step, std::size_t task) const {
    return data.data() + (step * tasks + task) * dim;
  }
};

GradientTensor make_gradient_tensor(std::size_t steps, std::size_t tasks, std::size_t dim,
                                    std::uint64_t seed);

/// 64-bit FNV-1a over the tensor bytes.
std::uint64_t tensor_checksum(const GradientTensor& t);

/// One timed pass; returns seconds and accumulates the sink.
double time_method(BenchMethod method, const GradientTensor& grads, std::size_t period,
                   double tau_star, double beta, std::uint64_t seed, double& sink,
                   std::uint64_t* multiply_adds = nullptr);

BenchResult run_bench(const BenchConfig& cfg);

void write_bench_csv(std::ostream& out, const BenchResult& res);

struct BenchTrends {
  bool songoku_increasing_in_k = false;
  double uniform_ratio = 0.0;  // max / min mean time across K
  bool songoku_nonincreasing_in_r = false;
  std::size_t trend_k = 0;
  std::size_t trend_r = 0;
};

/// Shape checks at the fixed R (for the K sweep) and fixed K (for the R sweep).
BenchTrends bench_trends(const BenchResult& res, std::size_t fixed_r, std::size_t fixed_k);

}  // namespace songoku
