#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace lgs {

using RowMatrixf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct KMeansResult {
  RowMatrixf centroids;                  // k x d
  std::vector<std::uint32_t> assignment;  // row -> centroid
  int iterations = 0;
};

namespace kmeans_detail {

inline bool row_less(const RowMatrixf& x, Eigen::Index a, Eigen::Index b) {
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (x(a, j) < x(b, j)) return true;
    if (x(b, j) < x(a, j)) return false;
  }
  return false;
}

inline bool row_equal(const RowMatrixf& x, Eigen::Index a, Eigen::Index b) { return x.row(a) == x.row(b); }

// Nearest centroid per row; ties go to the lower index.
inline void assign(const RowMatrixf& x, const RowMatrixf& c, std::vector<std::uint32_t>& out) {
  const Eigen::Index n = x.rows(), k = c.rows();
  const Eigen::VectorXf c2 = c.rowwise().squaredNorm();
  constexpr Eigen::Index kBlock = 512;
  out.resize(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
  for (Eigen::Index b = 0; b < n; b += kBlock) {
    const Eigen::Index rows = std::min(kBlock, n - b);
    const Eigen::MatrixXf d = (-2.0f * (x.middleRows(b, rows) * c.transpose())).rowwise() + c2.transpose();
    for (Eigen::Index i = 0; i < rows; ++i) {
      Eigen::Index best = 0;
      float bv = d(i, 0);
      for (Eigen::Index j = 1; j < k; ++j)
        if (d(i, j) < bv) bv = d(i, j), best = j;
      out[static_cast<std::size_t>(b + i)] = static_cast<std::uint32_t>(best);
    }
  }
}

}  // namespace kmeans_detail

/// k-means++ seeding followed by Lloyd iterations until no centroid moves by
/// more than `tolerance` or `max_iterations` is reached. When the rows hold at
/// most k distinct vectors the result is exact: one centroid per distinct row,
/// in lexicographic order.
inline KMeansResult kmeans(const RowMatrixf& x, int k, std::uint64_t seed, int max_iterations = 10,
                           double tolerance = 1e-6) {
  if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
  const Eigen::Index n = x.rows(), d = x.cols();
  KMeansResult r;
  if (n == 0) {
    r.centroids.resize(0, d);
    return r;
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return kmeans_detail::row_less(x, a, b); });
  std::size_t distinct = 1;
  for (std::size_t i = 1; i < order.size(); ++i) distinct += !kmeans_detail::row_equal(x, order[i - 1], order[i]);
  if (distinct <= static_cast<std::size_t>(k)) {
    r.centroids.resize(static_cast<Eigen::Index>(distinct), d);
    r.assignment.resize(static_cast<std::size_t>(n));
    Eigen::Index c = -1;
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (i == 0 || !kmeans_detail::row_equal(x, order[i - 1], order[i])) r.centroids.row(++c) = x.row(order[i]);
      r.assignment[static_cast<std::size_t>(order[i])] = static_cast<std::uint32_t>(c);
    }
    return r;
  }

  std::mt19937_64 rng(seed);
  r.centroids.resize(k, d);
  r.centroids.row(0) = x.row(static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n)));
  std::vector<double> dist(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  for (int c = 1; c < k; ++c) {
    double total = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      auto& di = dist[static_cast<std::size_t>(i)];
      di = std::min(di, static_cast<double>((x.row(i) - r.centroids.row(c - 1)).squaredNorm()));
      total += di;
    }
    double target = std::uniform_real_distribution<double>(0.0, total)(rng);
    Eigen::Index pick = n - 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      target -= dist[static_cast<std::size_t>(i)];
      if (target < 0 && dist[static_cast<std::size_t>(i)] > 0) {
        pick = i;
        break;
      }
    }
    r.centroids.row(c) = x.row(pick);
  }

  Eigen::MatrixXd sums(k, d);
  std::vector<std::size_t> counts(static_cast<std::size_t>(k));
  for (r.iterations = 0; r.iterations < max_iterations;) {
    kmeans_detail::assign(x, r.centroids, r.assignment);
    ++r.iterations;
    sums.setZero();
    std::fill(counts.begin(), counts.end(), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto a = r.assignment[static_cast<std::size_t>(i)];
      sums.row(a) += x.row(i).cast<double>();
      ++counts[a];
    }
    double moved = 0;
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] == 0) continue;
      const Eigen::RowVectorXf next = (sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)])).cast<float>();
      moved = std::max(moved, static_cast<double>((next - r.centroids.row(c)).norm()));
      r.centroids.row(c) = next;
    }
    if (moved < tolerance) break;
  }
  kmeans_detail::assign(x, r.centroids, r.assignment);
  return r;
}

}  // namespace lgs
