#pragma once

#include <Eigen/SparseCore>
#include <cstddef>
#include <string>
#include <vector>

#include "pwclust/types.hpp"

namespace pwclust {

enum class KernelKind { Indicator, Gaussian, Table };

/// Nonincreasing profile phi on [0, inf) with phi(0) = 1.
///
/// Table kernels interpolate linearly between samples (s_0 = 0 < s_1 < ...)
/// and vanish beyond the last sample, so they are compactly supported.
class Kernel {
 public:
  static Kernel indicator(double omega = 1.0);
  static Kernel gaussian();
  static Kernel table(std::vector<double> s, std::vector<double> phi);
  /// "indicator", "indicator:0.5", "gaussian", "table:s0:p0,s1:p1,..."
  static Kernel parse(const std::string& text);

  KernelKind kind() const { return kind_; }
  double omega() const { return omega_; }
  bool compact() const { return kind_ != KernelKind::Gaussian; }

  double operator()(double s) const;

  /// Weight for a pair at distance `dist` under scale `scale`. Indicator
  /// kernels compare dist <= omega * scale directly, so an Indicator(1)
  /// graph and a linkage cut at the same scale use the same comparison.
  double weight(double dist, double scale) const;

  /// Smallest s beyond which phi(s) < cutoff (the support edge for compact kernels).
  double reach(double cutoff) const;

  std::string describe() const;

 private:
  KernelKind kind_ = KernelKind::Indicator;
  double omega_ = 1.0;
  std::vector<double> s_, phi_;
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Sparse symmetric affinity with zero diagonal. Both triangles are stored.
struct AffinityMatrix {
  SparseMatrix w;
  /// Entries below this value were dropped (0 for compact kernels).
  double cutoff = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(w.rows()); }
  /// Number of undirected edges.
  std::size_t edges() const { return static_cast<std::size_t>(w.nonZeros()) / 2; }

  /// Builds from undirected (i, j, w) triples, each pair listed once with i != j.
  static AffinityMatrix from_edges(std::size_t n, const std::vector<Eigen::Triplet<double>>& edges,
                                   double cutoff = 0.0);
};

inline constexpr double kDefaultCutoff = 1e-12;
/// Below this size, or for D above kGridMaxDim, the index scans every point.
inline constexpr std::size_t kGridMinPoints = 512;
inline constexpr int kGridMaxDim = 6;

struct Neighbor {
  std::size_t index;
  double dist;
};

/// Uniform-grid index over a point cloud, or an exhaustive scan.
///
/// Cells are addressed by a packed integer key and stored sorted, so memory is
/// proportional to N rather than to the number of cells.
class NeighborIndex {
 public:
  /// `cell` is the grid side; values <= 0 or small/high-dimensional clouds
  /// select the exhaustive scan.
  NeighborIndex(const PointMatrix& points, double cell);

  bool exhaustive() const { return exhaustive_; }
  double cell() const { return cell_; }

  /// { j != i : |x_i - x_j| <= r }, sorted by index.
  std::vector<std::size_t> range(std::size_t i, double r) const;
  /// Same, with distances.
  std::vector<Neighbor> range_with_dist(std::size_t i, double r) const;

  /// The ell nearest other points, sorted by (distance, index).
  std::vector<Neighbor> nearest(std::size_t i, std::size_t ell) const;

 private:
  using Coord = std::vector<long long>;
  Coord cell_of(std::size_t i) const;
  std::uint64_t pack(const Coord& c) const;
  bool in_grid(const Coord& c) const;
  template <class F>
  void visit_cell(const Coord& c, F&& f) const;

  const PointMatrix& pts_;
  bool exhaustive_ = true;
  double cell_ = 0.0;
  int dim_ = 0;
  int bits_ = 0;
  Vec lo_;
  std::vector<long long> extent_;
  std::vector<std::pair<std::uint64_t, std::size_t>> sorted_;  // (cell key, point)
};

/// ell-nearest-neighbor lists for every point.
std::vector<std::vector<Neighbor>> knn(const PointMatrix& points, std::size_t ell);

struct LocalScales {
  std::vector<double> scales;
  std::size_t ell = 0;
};

/// scales[i] = distance from x_i to its ell-th nearest neighbor. Zero scales
/// (duplicated points) raise Degenerate with the offending indices.
LocalScales local_scales(const PointMatrix& points, std::size_t ell);

/// W_ij = phi(|x_i - x_j| / eps). Non-compact kernels drop entries below `cutoff`.
AffinityMatrix build_affinity(const PointMatrix& points, const Kernel& kernel, double eps,
                              double cutoff = kDefaultCutoff);

/// W_ij = phi(|x_i - x_j| / sqrt(eps_i eps_j)).
AffinityMatrix build_affinity_local(const PointMatrix& points, const Kernel& kernel,
                                    const LocalScales& scales, double cutoff = kDefaultCutoff);

/// Unit-weight graph with an edge iff each endpoint is among the other's ell nearest neighbors.
AffinityMatrix mutual_knn(const PointMatrix& points, std::size_t ell);

/// D_i = sum_j W_ij.
Vec degrees(const AffinityMatrix& w);

/// Principal submatrix on `keep` (sorted indices), renumbered 0..|keep|-1.
AffinityMatrix induced_subgraph(const AffinityMatrix& w, const std::vector<std::size_t>& keep);

}  // namespace pwclust
