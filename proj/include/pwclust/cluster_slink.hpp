#pragma once

#include <tuple>
#include <vector>

#include "pwclust/partition.hpp"
#include "pwclust/types.hpp"

namespace pwclust {

/// One agglomeration step. Leaves are 0..N-1; the cluster created at step s
/// gets id N + s.
struct Merge {
  std::size_t a = 0;
  std::size_t b = 0;
  double distance = 0.0;
  std::size_t size = 0;
};

struct Dendrogram {
  std::size_t n = 0;
  std::vector<Merge> merges;
  /// Minimum spanning tree edges (i, j, distance) in merge order.
  std::vector<std::tuple<std::size_t, std::size_t, double>> tree;

  /// Partition obtained by performing every merge at distance <= eps.
  Partition cut(double eps) const;
};

struct LinkageResult {
  Partition partition;
  Dendrogram dendrogram;
};

/// Full single-linkage dendrogram from a Prim minimum spanning tree (O(N^2)).
/// Merges are ordered by distance, ties by the lexicographically smallest
/// (point, point) pair of the tree edge.
Dendrogram single_linkage_tree(const PointMatrix& points);

/// Single linkage stopped once the closest pair of clusters is farther than
/// eps. With `singletons_as_outliers`, clusters of size one get label 0.
LinkageResult single_linkage(const PointMatrix& points, double eps, bool singletons_as_outliers = false);

}  // namespace pwclust
