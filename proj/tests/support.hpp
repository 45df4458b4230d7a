#pragma once

// Independent oracles shared by the test binaries. Nothing here calls the
// library code it is used to check.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <utility>
#include <vector>

#include "pwclust/partition.hpp"
#include "pwclust/rng.hpp"
#include "pwclust/types.hpp"

namespace testing {

using pwclust::PointMatrix;

inline PointMatrix random_cloud(std::size_t n, int dim, pwclust::Rng& rng) {
  PointMatrix p(static_cast<Eigen::Index>(n), dim);
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (int j = 0; j < dim; ++j) p(i, j) = rng.uniform();
  return p;
}

/// Clumpy cloud: a few random centers with points scattered around them.
inline PointMatrix clumpy_cloud(std::size_t n, int dim, pwclust::Rng& rng) {
  const std::size_t centers = 1 + rng.index(6);
  PointMatrix c = random_cloud(centers, dim, rng);
  PointMatrix p(static_cast<Eigen::Index>(n), dim);
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const auto k = static_cast<Eigen::Index>(rng.index(centers));
    const double s = 0.01 + 0.1 * rng.uniform();
    for (int j = 0; j < dim; ++j) {
      double x = c(k, j) + s * (rng.uniform() - 0.5);
      if (x < 0.0) x = -x;
      if (x > 1.0) x = 2.0 - x;
      p(i, j) = x;
    }
  }
  return p;
}

inline double dist(const PointMatrix& p, Eigen::Index i, Eigen::Index j) {
  return (p.row(i) - p.row(j)).norm();
}

/// All j != i with |x_i - x_j| <= r, by scanning.
inline std::vector<std::size_t> brute_range(const PointMatrix& p, std::size_t i, double r) {
  std::vector<std::size_t> out;
  for (Eigen::Index j = 0; j < p.rows(); ++j)
    if (static_cast<std::size_t>(j) != i && dist(p, static_cast<Eigen::Index>(i), j) <= r)
      out.push_back(static_cast<std::size_t>(j));
  return out;
}

/// ell nearest neighbors by full sort on (distance, index).
inline std::vector<std::pair<std::size_t, double>> brute_knn(const PointMatrix& p, std::size_t i, std::size_t ell) {
  std::vector<std::pair<double, std::size_t>> all;
  for (Eigen::Index j = 0; j < p.rows(); ++j)
    if (static_cast<std::size_t>(j) != i) all.emplace_back(dist(p, static_cast<Eigen::Index>(i), j), j);
  std::sort(all.begin(), all.end());
  std::vector<std::pair<std::size_t, double>> out;
  for (std::size_t t = 0; t < ell; ++t) out.emplace_back(all[t].second, all[t].first);
  return out;
}

/// Component id per vertex by breadth-first search over an adjacency list.
inline std::vector<int> bfs_components(const std::vector<std::vector<std::size_t>>& adj) {
  std::vector<int> comp(adj.size(), -1);
  int next = 0;
  for (std::size_t s = 0; s < adj.size(); ++s) {
    if (comp[s] >= 0) continue;
    std::queue<std::size_t> q;
    q.push(s);
    comp[s] = next;
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop();
      for (std::size_t v : adj[u])
        if (comp[v] < 0) {
          comp[v] = next;
          q.push(v);
        }
    }
    ++next;
  }
  return comp;
}

/// Components of the graph { |x_i - x_j| <= r } by BFS on brute-force neighbors.
inline std::vector<int> threshold_components(const PointMatrix& p, double r) {
  std::vector<std::vector<std::size_t>> adj(static_cast<std::size_t>(p.rows()));
  for (std::size_t i = 0; i < adj.size(); ++i) adj[i] = brute_range(p, i, r);
  return bfs_components(adj);
}

/// Set-partition equality of two labelings (labels compared only for co-membership).
inline bool same_grouping(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [it1, new1] = ab.emplace(a[i], b[i]);
    auto [it2, new2] = ba.emplace(b[i], a[i]);
    if (it1->second != b[i] || it2->second != a[i]) return false;
  }
  return true;
}

/// Descending eigenvalues of a dense symmetric matrix.
inline Eigen::VectorXd dense_eigenvalues_desc(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  return es.eigenvalues().reverse();
}

/// Dense D^-1/2 W D^-1/2.
inline Eigen::MatrixXd dense_normalized(const Eigen::MatrixXd& w) {
  const Eigen::VectorXd d = w.rowwise().sum();
  Eigen::MatrixXd z = w;
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j) z(i, j) = w(i, j) / std::sqrt(d[i] * d[j]);
  return z;
}

}  // namespace testing
