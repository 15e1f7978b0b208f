#pragma once

// Cheaper routes to the conflict graph: random projection, Frequent
// Directions, sampled pairs with refinement, and incremental Gram updates.
// Each route is checked against the dense O(K^2 d) build.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "songoku/conflict_graph.hpp"
#include "songoku/grad_stats.hpp"
#include "songoku/kernels.hpp"
#include "songoku/matrix.hpp"

namespace songoku {

enum class SketchMode { kDense, kJl, kFd, kEdgeSample, kIncremental };

std::string to_string(SketchMode mode);
SketchMode parse_sketch_mode(const std::string& name);

struct SketchConfig {
  SketchMode mode = SketchMode::kDense;
  std::size_t jl_dim = 0;         // 0: derive ceil(eps^-2 ln K), capped at d
  std::size_t fd_rows = 8;
  double epsilon = 0.15;
  double margin = 0.3;            // gamma, the refinement band for edge sampling
  std::size_t pair_budget = 0;    // 0: all pairs
  double first_pass_factor = 2.0; // first pass samples factor * K ln K pairs
  double change_threshold = 0.05; // relative row drift that marks a row changed
  std::size_t rebuild_every = 16; // forced full Gram rebuild period
  std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Johnson-Lindenstrauss projection

/// d x r matrix of N(0, 1/r) entries.
Matrix gaussian_projection(std::size_t d, std::size_t r, std::uint64_t seed);

/// Target dimension ceil(eps^-2 ln K).
std::size_t jl_dimension(double epsilon, std::size_t tasks);

/// M R with a seeded Gaussian R. Throws if r > d. With identity set, R is the
/// d x d identity (r must equal d).
Matrix jl_project(const Matrix& m, std::size_t r, std::uint64_t seed, bool identity = false,
                  FlopCounter* flops = nullptr);

// ---------------------------------------------------------------------------
// Frequent Directions

/// Deterministic row-space sketch with ell target rows, held in a 2*ell row
/// buffer. Insert fills a zero row; when the buffer is full it is rotated by
/// an SVD and every squared singular value is shrunk by the ell-th one, so at
/// most ell - 1 rows survive. One SVD per ell inserts keeps the cost O(d ell)
/// per row.
class FrequentDirections {
 public:
  FrequentDirections(std::size_t rows, std::size_t dim);

  void insert(std::span<const double> row, FlopCounter* flops = nullptr);

  const Matrix& sketch() const { return sketch_; }
  std::size_t rows() const { return ell_; }
  std::size_t dim() const { return sketch_.cols(); }
  /// Total shrinkage. Bounds ||A^T A - B^T B||_2 for the streamed A.
  double shrinkage() const { return shrinkage_; }
  /// Squared Frobenius norm of everything streamed so far.
  double streamed_frobenius_sq() const { return frobenius_sq_; }
  std::size_t streamed() const { return streamed_; }

  /// Orthonormal basis (as rows) of the sketch's nonzero row space.
  Matrix row_basis() const;

 private:
  void shrink(FlopCounter* flops);

  Matrix sketch_;
  std::size_t ell_;
  std::size_t next_zero_ = 0;
  double shrinkage_ = 0.0;
  double frobenius_sq_ = 0.0;
  std::size_t streamed_ = 0;
};

/// Single streaming step, value-style.
FrequentDirections fd_update(FrequentDirections sketch, std::span<const double> row);

/// Gram of the rows of M projected onto the sketch row space, K x K.
Matrix fd_projected_gram(const FrequentDirections& fd, const Matrix& m,
                         FlopCounter* flops = nullptr);

/// Worst-case cosine error after projection, 2q / (1 - q) with
/// q = shrinkage / min_i ||m_i||^2. Infinite when q >= 1.
double fd_cosine_error_bound(double shrinkage, double min_row_norm_sq);

// ---------------------------------------------------------------------------
// Edge sampling with refinement

struct EdgeSampleResult {
  ConflictGraph graph;
  std::vector<Edge> uncertified;
  std::size_t first_pass_pairs = 0;
  std::size_t certification_pairs = 0;
  std::size_t refined_pairs = 0;
  std::size_t evaluated_pairs() const {
    return first_pass_pairs + certification_pairs + refined_pairs;
  }
  bool certified() const { return uncertified.empty(); }
};

/// rho_of(i, j) returns the exact interference of an included pair.
using PairOracle = std::function<double(std::size_t, std::size_t)>;

/// Samples O(K log K) pairs, groups tasks joined by confidently compatible
/// sampled pairs (rho <= tau - margin), and classifies each block of pairs
/// between two groups from its sampled values. Blocks whose samples straddle
/// or approach the threshold, or that have no sample, are evaluated exactly.
/// Pairs the budget cannot cover are listed as uncertified.
EdgeSampleResult edge_sample_graph(const PairOracle& rho_of, const std::vector<bool>& included,
                                   double tau, double margin, std::size_t budget,
                                   std::uint64_t seed, double first_pass_factor = 2.0);

// ---------------------------------------------------------------------------
// Incremental Gram

struct GramCache {
  Matrix gram;
  std::vector<double> row_norms;
  std::vector<std::uint64_t> row_version;
  Matrix snapshot;  // rows the cache was computed from

  bool empty() const { return gram.rows() == 0; }
};

GramCache full_gram(const Matrix& m, std::span<const std::uint64_t> versions,
                    FlopCounter* flops = nullptr);

/// Rows whose relative drift from the cached snapshot exceeds the threshold.
std::vector<std::size_t> detect_changed_rows(const GramCache& cache, const Matrix& m,
                                             double threshold);

struct IncrementalOutcome {
  GramCache cache;
  bool full_rebuild = false;
};

/// Recompute rows/columns `changed` of the cache. Every row not listed must
/// still carry its cached version; otherwise the cache is rebuilt in full.
IncrementalOutcome incremental_gram(const GramCache& cache, const Matrix& m,
                                    std::span<const std::uint64_t> versions,
                                    std::span<const std::size_t> changed,
                                    FlopCounter* flops = nullptr);

// ---------------------------------------------------------------------------
// Graph construction through a chosen route

struct GraphBuild {
  ConflictGraph graph;
  bool degenerate = false;
  bool full_rebuild = false;
  std::size_t changed_rows = 0;
  std::vector<Edge> uncertified;
  double fd_bound = 0.0;
};

/// Stateful builder; the incremental route keeps its cache across refreshes.
class GraphBuilder {
 public:
  explicit GraphBuilder(SketchConfig cfg) : cfg_(cfg) {}

  GraphBuild build(const GradStats& stats, double tau, std::uint64_t round);

  const SketchConfig& config() const { return cfg_; }
  const FlopCounter& flops() const { return flops_; }

 private:
  SketchConfig cfg_;
  FlopCounter flops_;
  GramCache cache_;
  std::size_t since_rebuild_ = 0;
};

}  // namespace songoku
