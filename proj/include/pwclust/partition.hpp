#pragma once

#include <cstddef>
#include <vector>

namespace pwclust {

/// Cluster labels in canonical form: 0 marks an outlier, nonzero labels are
/// 1..n_clusters numbered by smallest member index.
struct Partition {
  std::vector<int> labels;
  int n_clusters = 0;

  std::size_t size() const { return labels.size(); }
  std::size_t outliers() const;
};

/// Canonical relabeling of arbitrary group ids; negative ids become outliers (0).
Partition canonicalize(const std::vector<long long>& groups);
Partition canonicalize(const std::vector<int>& groups);

/// Same set partition, with outlier sets required to coincide exactly.
bool same_partition(const Partition& a, const Partition& b);

/// Every cluster of `fine` lies inside one cluster of `coarse` (outliers ignored).
bool coarsens(const Partition& fine, const Partition& coarse);

/// Relabels clusters of size one as outliers.
Partition singletons_as_outliers(const Partition& p);

/// Disjoint sets with union by rank and path compression.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n);
  std::size_t find(std::size_t x);
  bool unite(std::size_t a, std::size_t b);

 private:
  std::vector<std::size_t> parent_;
  std::vector<unsigned char> rank_;
};

}  // namespace pwclust
