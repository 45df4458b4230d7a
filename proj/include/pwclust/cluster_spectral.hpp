#pragma once

#include <string>
#include <vector>

#include "pwclust/eigensolver.hpp"
#include "pwclust/nngraph.hpp"
#include "pwclust/partition.hpp"

namespace pwclust {

/// Z = D^-1/2 W D^-1/2 with the sparsity pattern of W. A zero-degree vertex
/// raises Degenerate naming the vertex.
SparseMatrix normalized_affinity(const AffinityMatrix& w);

/// K largest eigenpairs of Z (descending), dense up to 512 nodes and iterative above.
EigenResult top_eigenvectors(const SparseMatrix& z, std::size_t k, const EigenOptions& options = {});

/// Rows scaled to unit norm. Rows with norm below 1e-12 raise Degenerate listing them.
Eigen::MatrixXd row_normalize(const Eigen::MatrixXd& u);

struct KMeansResult {
  Partition partition;
  /// One unit centroid per row, in selection order.
  Eigen::MatrixXd centroids;
  int iterations = 0;
};

/// K-means on unit rows with the near-orthogonal initialization: the first
/// centroid is row 0, each further centroid is the row whose largest |cosine|
/// to the chosen ones is smallest (ties by index). Points go to the centroid
/// of largest |cosine| (ties by centroid index). With max_iterations > 1 the
/// centroids are recomputed as normalized means until assignments settle.
KMeansResult orthogonal_init_kmeans(const Eigen::MatrixXd& v, std::size_t k, int max_iterations = 1);

struct EigengapEstimate {
  std::size_t k = 1;
  /// Top k_max + 1 eigenvalues of Z.
  Vec eigenvalues;
  /// gaps[k-1] = lambda_k - lambda_{k+1} for k = 1..k_max.
  std::vector<double> gaps;
};

/// argmax over 1 <= k <= k_max of lambda_k - lambda_{k+1}; ties go to the smallest k.
EigengapEstimate estimate_k(const SparseMatrix& z, std::size_t k_max, const EigenOptions& options = {});
/// Same rule applied to precomputed descending eigenvalues (at least k_max + 1 of them).
EigengapEstimate estimate_k_from(const Vec& eigenvalues, std::size_t k_max);

struct SpectralOptions {
  /// Number of clusters; 0 selects it with estimate_k over 1..k_max.
  std::size_t k = 0;
  std::size_t k_max = 10;
  int kmeans_iterations = 1;
  EigenOptions eigen;
};

struct SpectralResult {
  Partition partition;
  std::size_t k = 0;
  /// Top max(k, k_max) + 1 eigenvalues when available.
  Vec eigenvalues;
  std::vector<double> gaps;
  Eigen::MatrixXd u;
  Eigen::MatrixXd v;
  /// Unit representatives r_k: normalized mean of the V rows of each predicted cluster.
  Eigen::MatrixXd representatives;
  double max_residual = 0.0;
  std::string method;
};

SpectralResult spectral_cluster(const AffinityMatrix& w, const SpectralOptions& options);
SpectralResult spectral_cluster(const PointMatrix& points, const Kernel& kernel, double eps,
                                const SpectralOptions& options);
SpectralResult spectral_cluster(const PointMatrix& points, const Kernel& kernel, const LocalScales& scales,
                                const SpectralOptions& options);

struct NjwDiagnostics {
  double zeta = 0.0;
  double nu1 = 0.0;
  double nu2 = 0.0;
  double theta = 1.0;
  double bound = 0.0;
  double lhs = 0.0;
  std::size_t k = 0;
  std::size_t n = 0;
  /// 1 - lambda_2 of each normalized within-cluster block.
  std::vector<double> block_gaps;
  Vec eigenvalues;
};

/// Perturbation quantities of the NJW analysis measured against ground-truth
/// labels 1..K (no outliers). Each within-cluster block must be connected.
NjwDiagnostics njw_diagnostics(const AffinityMatrix& w, const std::vector<int>& labels,
                               const EigenOptions& options = {});

}  // namespace pwclust
