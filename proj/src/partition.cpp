#include "pwclust/partition.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "pwclust/error.hpp"

namespace pwclust {

std::size_t Partition::outliers() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 0));
}

Partition canonicalize(const std::vector<long long>& groups) {
  Partition p;
  p.labels.resize(groups.size());
  std::unordered_map<long long, int> ids;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (groups[i] < 0) {
      p.labels[i] = 0;
      continue;
    }
    auto [it, fresh] = ids.try_emplace(groups[i], p.n_clusters + 1);
    if (fresh) ++p.n_clusters;
    p.labels[i] = it->second;
  }
  return p;
}

Partition canonicalize(const std::vector<int>& groups) {
  return canonicalize(std::vector<long long>(groups.begin(), groups.end()));
}

bool same_partition(const Partition& a, const Partition& b) {
  if (a.size() != b.size()) return false;
  // Canonical forms of equal partitions are identical; recompute to accept raw inputs.
  std::vector<long long> ga(a.labels.begin(), a.labels.end()), gb(b.labels.begin(), b.labels.end());
  for (auto& v : ga) v = v == 0 ? -1 : v;
  for (auto& v : gb) v = v == 0 ? -1 : v;
  return canonicalize(ga).labels == canonicalize(gb).labels;
}

bool coarsens(const Partition& fine, const Partition& coarse) {
  require(fine.size() == coarse.size(), "coarsens: partitions differ in size");
  std::unordered_map<int, int> image;
  for (std::size_t i = 0; i < fine.size(); ++i) {
    if (fine.labels[i] == 0) continue;
    auto [it, fresh] = image.try_emplace(fine.labels[i], coarse.labels[i]);
    if (!fresh && it->second != coarse.labels[i]) return false;
  }
  return true;
}

Partition singletons_as_outliers(const Partition& p) {
  std::vector<std::size_t> count(static_cast<std::size_t>(p.n_clusters) + 1, 0);
  for (int l : p.labels) ++count[static_cast<std::size_t>(l)];
  std::vector<long long> g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const int l = p.labels[i];
    g[i] = (l == 0 || count[static_cast<std::size_t>(l)] == 1) ? -1 : l;
  }
  return canonicalize(g);
}

UnionFind::UnionFind(std::size_t n) : parent_(n), rank_(n, 0) {
  std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t UnionFind::find(std::size_t x) {
  std::size_t root = x;
  while (parent_[root] != root) root = parent_[root];
  while (parent_[x] != root) {
    const std::size_t next = parent_[x];
    parent_[x] = root;
    x = next;
  }
  return root;
}

bool UnionFind::unite(std::size_t a, std::size_t b) {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  if (rank_[a] < rank_[b]) std::swap(a, b);
  parent_[b] = a;
  if (rank_[a] == rank_[b]) ++rank_[a];
  return true;
}

}  // namespace pwclust
