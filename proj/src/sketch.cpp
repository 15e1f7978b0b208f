#include "songoku/sketch.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "songoku/rng.hpp"

namespace songoku {

std::string to_string(SketchMode mode) {
  switch (mode) {
    case SketchMode::kDense: return "dense";
    case SketchMode::kJl: return "jl";
    case SketchMode::kFd: return "fd";
    case SketchMode::kEdgeSample: return "edge_sample";
    case SketchMode::kIncremental: return "incremental";
  }
  return "dense";
}

SketchMode parse_sketch_mode(const std::string& name) {
  if (name == "dense") return SketchMode::kDense;
  if (name == "jl") return SketchMode::kJl;
  if (name == "fd") return SketchMode::kFd;
  if (name == "edge_sample") return SketchMode::kEdgeSample;
  if (name == "incremental") return SketchMode::kIncremental;
  throw std::invalid_argument("unknown sketch mode '" + name +
                              "' (expected dense, jl, fd, edge_sample or incremental)");
}

// ---------------------------------------------------------------------------

Matrix gaussian_projection(std::size_t d, std::size_t r, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(r)));
  Matrix p(d, r);
  for (double& v : p.data()) v = normal(rng);
  return p;
}

std::size_t jl_dimension(double epsilon, std::size_t tasks) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("jl_dimension: epsilon must be positive");
  const double k = static_cast<double>(std::max<std::size_t>(tasks, 2));
  return static_cast<std::size_t>(std::ceil(std::log(k) / (epsilon * epsilon)));
}

Matrix jl_project(const Matrix& m, std::size_t r, std::uint64_t seed, bool identity,
                  FlopCounter* flops) {
  const std::size_t d = m.cols();
  if (r == 0) throw std::invalid_argument("jl_project: target dimension must be >= 1");
  if (r > d) {
    throw std::invalid_argument("jl_project: target dimension " + std::to_string(r) +
                                " exceeds input dimension " + std::to_string(d));
  }
  if (identity) {
    if (r != d) throw std::invalid_argument("jl_project: identity mode needs r == d");
    return m;
  }
  const Matrix p = gaussian_projection(d, r, seed);
  Matrix out;
  kernels::project(m, p, out);
  if (flops) flops->add(static_cast<std::uint64_t>(m.rows()) * d * r);
  return out;
}

// ---------------------------------------------------------------------------

FrequentDirections::FrequentDirections(std::size_t rows, std::size_t dim)
    : sketch_(2 * rows, dim), ell_(rows) {
  if (rows < 2) throw std::invalid_argument("Frequent Directions needs at least 2 sketch rows");
  if (dim == 0) throw std::invalid_argument("Frequent Directions needs a positive dimension");
}

void FrequentDirections::insert(std::span<const double> row, FlopCounter* flops) {
  if (row.size() != dim()) throw DimensionMismatch(row.size(), dim());
  sketch_.set_row(next_zero_++, row);
  frobenius_sq_ += kernels::squared_norm(row);
  ++streamed_;
  if (next_zero_ >= sketch_.rows()) shrink(flops);
}

void FrequentDirections::shrink(FlopCounter* flops) {
  const std::size_t l = sketch_.rows(), d = dim();
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> b(
      sketch_.data().data(), static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(d));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const Eigen::MatrixXd& v = svd.matrixV();
  const auto p = static_cast<std::size_t>(s.size());
  // Shrink by the ell-th squared singular value; at most ell - 1 rows survive.
  const double delta =
      p >= ell_ ? s(static_cast<Eigen::Index>(ell_ - 1)) * s(static_cast<Eigen::Index>(ell_ - 1))
                : 0.0;
  shrinkage_ += delta;

  Matrix next(l, d);
  std::size_t nonzero = 0;
  for (std::size_t r = 0; r < p; ++r) {
    const double sr = s(static_cast<Eigen::Index>(r));
    const double shrunk = sr * sr - delta;
    if (shrunk <= 0.0) break;
    const double scale = std::sqrt(shrunk);
    for (std::size_t c = 0; c < d; ++c) {
      next(r, c) = scale * v(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r));
    }
    ++nonzero;
  }
  sketch_ = std::move(next);
  next_zero_ = nonzero;
  if (flops) flops->add(static_cast<std::uint64_t>(d) * l * l);
}

Matrix FrequentDirections::row_basis() const {
  if (next_zero_ == 0) return Matrix(0, dim());
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> b(
      sketch_.data().data(), static_cast<Eigen::Index>(next_zero_),
      static_cast<Eigen::Index>(dim()));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double cutoff = s.size() > 0 ? s(0) * 1e-12 : 0.0;
  std::size_t rank = 0;
  while (rank < static_cast<std::size_t>(s.size()) && s(static_cast<Eigen::Index>(rank)) > cutoff) {
    ++rank;
  }
  Matrix basis(rank, dim());
  for (std::size_t r = 0; r < rank; ++r)
    for (std::size_t c = 0; c < dim(); ++c)
      basis(r, c) = svd.matrixV()(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r));
  return basis;
}

FrequentDirections fd_update(FrequentDirections sketch, std::span<const double> row) {
  sketch.insert(row);
  return sketch;
}

Matrix fd_projected_gram(const FrequentDirections& fd, const Matrix& m, FlopCounter* flops) {
  const Matrix basis = fd.row_basis();
  const std::size_t k = m.rows(), p = basis.rows();
  Matrix basis_t(m.cols(), p);
  for (std::size_t r = 0; r < p; ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) basis_t(c, r) = basis(r, c);
  Matrix coords;
  if (p == 0) {
    coords = Matrix(k, 0);
  } else {
    kernels::project(m, basis_t, coords);
  }
  Matrix gram;
  kernels::gram(coords, gram);
  if (flops) {
    flops->add(static_cast<std::uint64_t>(k) * m.cols() * p);
    flops->add_dots(static_cast<std::uint64_t>(k) * (k + 1) / 2, p);
  }
  return gram;
}

double fd_cosine_error_bound(double shrinkage, double min_row_norm_sq) {
  if (!(min_row_norm_sq > 0.0)) return std::numeric_limits<double>::infinity();
  const double q = shrinkage / min_row_norm_sq;
  if (q >= 1.0) return std::numeric_limits<double>::infinity();
  return 2.0 * q / (1.0 - q);
}

// ---------------------------------------------------------------------------

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

struct BlockStats {
  std::size_t samples = 0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    ++samples;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
};

}  // namespace

EdgeSampleResult edge_sample_graph(const PairOracle& rho_of, const std::vector<bool>& included,
                                   double tau, double margin, std::size_t budget,
                                   std::uint64_t seed, double first_pass_factor) {
  const std::size_t k = included.size();
  EdgeSampleResult out;
  out.graph = ConflictGraph(k, tau);

  std::vector<std::size_t> verts;
  for (std::size_t i = 0; i < k; ++i)
    if (included[i]) verts.push_back(i);
  const std::size_t n = verts.size();
  std::vector<Edge> pairs;
  pairs.reserve(n * (n > 0 ? n - 1 : 0) / 2);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) pairs.emplace_back(verts[a], verts[b]);
  const std::size_t total = pairs.size();
  if (total == 0) return out;
  if (budget == 0) budget = total;
  if (budget < n) {
    throw std::invalid_argument("edge sampling budget " + std::to_string(budget) +
                                " is below the task count " + std::to_string(n));
  }

  constexpr double kUnknown = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> value(total, kUnknown);
  std::size_t spent = 0;
  auto evaluate = [&](std::size_t p) {
    value[p] = rho_of(pairs[p].first, pairs[p].second);
    ++spent;
  };

  const double nn = static_cast<double>(n);
  const auto first = std::min<std::size_t>(
      {budget, total,
       static_cast<std::size_t>(std::ceil(first_pass_factor * nn * std::log(std::max(nn, 2.0))))});

  if (first >= total) {
    for (std::size_t p = 0; p < total; ++p) evaluate(p);
    out.first_pass_pairs = total;
  } else {
    std::vector<std::size_t> idx(total);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    for (std::size_t q = 0; q < first; ++q) {
      std::uniform_int_distribution<std::size_t> pick(q, total - 1);
      std::swap(idx[q], idx[pick(rng)]);
    }
    std::sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(first));
    for (std::size_t q = 0; q < first; ++q) evaluate(idx[q]);
    out.first_pass_pairs = first;
  }

  // Group tasks linked by confidently compatible sampled pairs.
  DisjointSets sets(k);
  for (std::size_t p = 0; p < total; ++p) {
    if (!std::isnan(value[p]) && value[p] <= tau - margin) sets.unite(pairs[p].first, pairs[p].second);
  }
  std::vector<std::size_t> comp(k, 0);
  std::size_t groups = 0;
  {
    std::vector<std::size_t> label(k, static_cast<std::size_t>(-1));
    for (std::size_t v : verts) {
      const std::size_t root = sets.find(v);
      if (label[root] == static_cast<std::size_t>(-1)) label[root] = groups++;
      comp[v] = label[root];
    }
  }
  auto block_of = [&](std::size_t p) {
    std::size_t a = comp[pairs[p].first], b = comp[pairs[p].second];
    if (a > b) std::swap(a, b);
    return a * groups + b;
  };

  std::vector<std::vector<std::size_t>> members(groups * groups);
  std::vector<BlockStats> stats(groups * groups);
  for (std::size_t p = 0; p < total; ++p) {
    const std::size_t blk = block_of(p);
    members[blk].push_back(p);
    if (!std::isnan(value[p])) stats[blk].add(value[p]);
  }

  // Blocks with no sample get one representative pair.
  for (std::size_t blk = 0; blk < members.size(); ++blk) {
    if (members[blk].empty() || stats[blk].samples > 0) continue;
    if (spent >= budget) continue;
    const std::size_t p = members[blk].front();
    evaluate(p);
    stats[blk].add(value[p]);
    ++out.certification_pairs;
  }

  std::vector<char> edge(total, 0);
  for (std::size_t blk = 0; blk < members.size(); ++blk) {
    if (members[blk].empty()) continue;
    const BlockStats& s = stats[blk];
    const bool all_clear = s.samples > 0 && s.hi <= tau - margin;
    const bool all_conflict = s.samples > 0 && s.lo >= tau + margin;
    for (std::size_t p : members[blk]) {
      if (std::isnan(value[p]) && !all_clear && !all_conflict) {
        if (spent < budget) {
          evaluate(p);
          ++out.refined_pairs;
        } else {
          out.uncertified.push_back(pairs[p]);
        }
      }
      if (!std::isnan(value[p])) {
        edge[p] = value[p] > tau ? 1 : 0;
      } else {
        edge[p] = all_conflict ? 1 : 0;
      }
    }
  }

  for (std::size_t p = 0; p < total; ++p)
    if (edge[p]) out.graph.add_edge(pairs[p].first, pairs[p].second);
  return out;
}

// ---------------------------------------------------------------------------

GramCache full_gram(const Matrix& m, std::span<const std::uint64_t> versions, FlopCounter* flops) {
  GramCache cache;
  kernels::gram(m, cache.gram);
  cache.row_norms.resize(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) cache.row_norms[i] = std::sqrt(cache.gram(i, i));
  cache.row_version.assign(versions.begin(), versions.end());
  cache.snapshot = m;
  if (flops) flops->add_dots(static_cast<std::uint64_t>(m.rows()) * (m.rows() + 1) / 2, m.cols());
  return cache;
}

std::vector<std::size_t> detect_changed_rows(const GramCache& cache, const Matrix& m,
                                             double threshold) {
  std::vector<std::size_t> changed;
  if (cache.snapshot.rows() != m.rows() || cache.snapshot.cols() != m.cols()) {
    changed.resize(m.rows());
    std::iota(changed.begin(), changed.end(), 0);
    return changed;
  }
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto now = m.row(i);
    const auto then = cache.snapshot.row(i);
    double drift = 0.0;
    for (std::size_t c = 0; c < now.size(); ++c) drift += (now[c] - then[c]) * (now[c] - then[c]);
    drift = std::sqrt(drift);
    const double base = kernels::norm(now);
    const bool moved = base > 0.0 ? drift / base > threshold : drift > 0.0;
    if (moved) changed.push_back(i);
  }
  return changed;
}

IncrementalOutcome incremental_gram(const GramCache& cache, const Matrix& m,
                                    std::span<const std::uint64_t> versions,
                                    std::span<const std::size_t> changed, FlopCounter* flops) {
  const std::size_t k = m.rows();
  bool stale = cache.empty() || cache.gram.rows() != k || cache.snapshot.cols() != m.cols() ||
               versions.size() != k;
  std::vector<char> is_changed(k, 0);
  if (!stale) {
    for (std::size_t r : changed) {
      if (r >= k) throw std::out_of_range("changed row " + std::to_string(r) + " out of range");
      is_changed[r] = 1;
    }
    for (std::size_t i = 0; i < k && !stale; ++i)
      if (!is_changed[i] && versions[i] != cache.row_version[i]) stale = true;
  }
  if (stale) return {full_gram(m, versions, flops), true};

  IncrementalOutcome out{cache, false};
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < k; ++i)
    if (is_changed[i]) rows.push_back(i);
  if (rows.empty()) return out;
  for (std::size_t r : rows) out.cache.snapshot.set_row(r, m.row(r));
  kernels::gram_rows(out.cache.snapshot, rows, out.cache.gram);
  for (std::size_t r : rows) {
    out.cache.row_norms[r] = std::sqrt(out.cache.gram(r, r));
    out.cache.row_version[r] = versions[r];
  }
  if (flops) flops->add_dots(static_cast<std::uint64_t>(rows.size()) * k, m.cols());
  return out;
}

// ---------------------------------------------------------------------------

GraphBuild GraphBuilder::build(const GradStats& stats, double tau, std::uint64_t round) {
  GraphBuild out;
  const std::size_t k = stats.tasks();
  const auto included = stats.included_mask();
  if (stats.included_count() < 2) {
    out.degenerate = true;
    out.graph = ConflictGraph(k, tau);
    return out;
  }
  const Matrix& m = stats.ema();
  const std::uint64_t round_seed = derive_seed(cfg_.seed, round);

  switch (cfg_.mode) {
    case SketchMode::kDense: {
      Matrix gram;
      kernels::gram(m, gram);
      flops_.add_dots(static_cast<std::uint64_t>(k) * (k + 1) / 2, m.cols());
      out.graph = build_graph(interference_from_gram(gram, included), tau);
      break;
    }
    case SketchMode::kJl: {
      const std::size_t r =
          cfg_.jl_dim > 0 ? cfg_.jl_dim : std::min(jl_dimension(cfg_.epsilon, k), m.cols());
      const Matrix sketched = jl_project(m, r, round_seed, false, &flops_);
      Matrix gram;
      kernels::gram(sketched, gram);
      flops_.add_dots(static_cast<std::uint64_t>(k) * (k + 1) / 2, r);
      out.graph = build_graph(interference_from_gram(gram, included), tau);
      break;
    }
    case SketchMode::kFd: {
      FrequentDirections fd(cfg_.fd_rows, m.cols());
      double min_norm_sq = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < k; ++i) {
        if (!included[i]) continue;
        fd.insert(m.row(i), &flops_);
        min_norm_sq = std::min(min_norm_sq, stats.row_norm(i) * stats.row_norm(i));
      }
      const Matrix gram = fd_projected_gram(fd, m, &flops_);
      out.fd_bound = fd_cosine_error_bound(fd.shrinkage(), min_norm_sq);
      out.graph = build_graph(interference_from_gram(gram, included), tau);
      break;
    }
    case SketchMode::kEdgeSample: {
      flops_.add(static_cast<std::uint64_t>(k) * m.cols());  // row norms
      auto rho_of = [&](std::size_t i, std::size_t j) {
        flops_.add_dots(1, m.cols());
        const double denom = stats.row_norm(i) * stats.row_norm(j);
        if (!(denom > 0.0)) return 0.0;
        return -std::clamp(kernels::dot(m.row(i), m.row(j)) / denom, -1.0, 1.0);
      };
      auto res = edge_sample_graph(rho_of, included, tau, cfg_.margin, cfg_.pair_budget,
                                   round_seed, cfg_.first_pass_factor);
      out.graph = std::move(res.graph);
      out.uncertified = std::move(res.uncertified);
      break;
    }
    case SketchMode::kIncremental: {
      const bool force = cache_.empty() || since_rebuild_ >= cfg_.rebuild_every;
      if (force) {
        cache_ = full_gram(m, stats.versions(), &flops_);
        since_rebuild_ = 0;
        out.full_rebuild = true;
        out.changed_rows = k;
      } else {
        const auto changed = detect_changed_rows(cache_, m, cfg_.change_threshold);
        std::vector<std::uint64_t> versions = cache_.row_version;
        for (std::size_t r : changed) versions[r] = stats.version(r);
        auto res = incremental_gram(cache_, m, versions, changed, &flops_);
        cache_ = std::move(res.cache);
        out.full_rebuild = res.full_rebuild;
        out.changed_rows = changed.size();
        ++since_rebuild_;
      }
      out.graph = build_graph(interference_from_gram(cache_.gram, included), tau);
      break;
    }
  }
  return out;
}

}  // namespace songoku
