#include "pwclust/cluster_cc.hpp"

#include "pwclust/error.hpp"

namespace pwclust {

Partition extract_components(const AffinityMatrix& w) {
  const std::size_t n = w.size();
  UnionFind uf(n);
  for (Eigen::Index i = 0; i < w.w.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(w.w, i); it; ++it)
      if (it.col() > i && it.value() > 0.0) uf.unite(static_cast<std::size_t>(i), static_cast<std::size_t>(it.col()));
  std::vector<long long> root(n);
  for (std::size_t i = 0; i < n; ++i) root[i] = static_cast<long long>(uf.find(i));
  return canonicalize(root);
}

Partition cluster_cc(const PointMatrix& points, const Kernel& kernel, double eps) {
  if (!kernel.compact())
    fail(ErrorKind::InvalidArgument, "cluster_cc requires a compactly supported kernel, got " + kernel.describe());
  return extract_components(build_affinity(points, kernel, eps));
}

Partition cluster_cc(const PointMatrix& points, const Kernel& kernel, const LocalScales& scales) {
  if (!kernel.compact())
    fail(ErrorKind::InvalidArgument, "cluster_cc requires a compactly supported kernel, got " + kernel.describe());
  return extract_components(build_affinity_local(points, kernel, scales));
}

}  // namespace pwclust
