#include "pwclust/cluster_slink.hpp"

#include <algorithm>
#include <limits>

#include "pwclust/error.hpp"

namespace pwclust {

Dendrogram single_linkage_tree(const PointMatrix& points) {
  const auto n = static_cast<std::size_t>(points.rows());
  require(n >= 1, "single_linkage: need at least one point");
  Dendrogram dg;
  dg.n = n;

  // Prim over the complete graph.
  std::vector<char> in_tree(n, 0);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> from(n, 0);
  std::size_t current = 0;
  in_tree[0] = 1;
  for (std::size_t step = 1; step < n; ++step) {
    const auto xc = row_span(points, static_cast<Eigen::Index>(current));
    std::size_t next = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      const double d = euclidean(xc, row_span(points, static_cast<Eigen::Index>(j)));
      if (d < best[j] || (d == best[j] && current < from[j])) {
        best[j] = d;
        from[j] = current;
      }
      if (next == n || best[j] < best[next]) next = j;
    }
    in_tree[next] = 1;
    dg.tree.emplace_back(std::min(next, from[next]), std::max(next, from[next]), best[next]);
    current = next;
  }
  std::sort(dg.tree.begin(), dg.tree.end(), [](const auto& x, const auto& y) {
    if (std::get<2>(x) != std::get<2>(y)) return std::get<2>(x) < std::get<2>(y);
    return std::make_pair(std::get<0>(x), std::get<1>(x)) < std::make_pair(std::get<0>(y), std::get<1>(y));
  });

  UnionFind uf(n);
  std::vector<std::size_t> cluster_id(n), cluster_size(n, 1);
  for (std::size_t i = 0; i < n; ++i) cluster_id[i] = i;
  for (const auto& [i, j, d] : dg.tree) {
    const std::size_t ri = uf.find(i), rj = uf.find(j);
    Merge m;
    m.a = std::min(cluster_id[ri], cluster_id[rj]);
    m.b = std::max(cluster_id[ri], cluster_id[rj]);
    m.distance = d;
    m.size = cluster_size[ri] + cluster_size[rj];
    uf.unite(ri, rj);
    const std::size_t root = uf.find(ri);
    cluster_id[root] = n + dg.merges.size();
    cluster_size[root] = m.size;
    dg.merges.push_back(m);
  }
  return dg;
}

Partition Dendrogram::cut(double eps) const {
  UnionFind uf(n);
  for (const auto& [i, j, d] : tree) {
    if (d > eps) break;
    uf.unite(i, j);
  }
  std::vector<long long> root(n);
  for (std::size_t i = 0; i < n; ++i) root[i] = static_cast<long long>(uf.find(i));
  return canonicalize(root);
}

LinkageResult single_linkage(const PointMatrix& points, double eps, bool singletons) {
  require(eps > 0.0, "single_linkage: eps must be positive");
  LinkageResult r;
  r.dendrogram = single_linkage_tree(points);
  r.partition = r.dendrogram.cut(eps);
  if (singletons) r.partition = singletons_as_outliers(r.partition);
  return r;
}

}  // namespace pwclust
