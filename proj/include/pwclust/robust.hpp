#pragma once

#include <vector>

#include "pwclust/cluster_spectral.hpp"
#include "pwclust/geometry.hpp"
#include "pwclust/nngraph.hpp"
#include "pwclust/partition.hpp"

namespace pwclust {

/// Degree threshold omega_N N eps^D + ln N. A threshold of 0 disables the filter.
struct RobustParams {
  double omega_n = 1.0;
  double eps = 0.0;
  double threshold = 0.0;

  /// omega_n <= 0 selects the default sqrt(ln N).
  static RobustParams make(std::size_t n, int dim, double eps, double omega_n = 0.0);
  static RobustParams disabled();
  bool enabled() const { return threshold > 0.0; }
};

double default_omega(std::size_t n);

struct FilterResult {
  std::vector<std::size_t> kept;
  std::vector<std::size_t> discarded;
  Vec degrees;
  double threshold = 0.0;
};

/// Discards exactly { i : D_i <= threshold }; both sets in index order.
FilterResult degree_filter(const AffinityMatrix& w, const RobustParams& params);

/// Components of the kept subgraph of a prebuilt W; discarded points get label 0.
Partition components_robust(const AffinityMatrix& w, const RobustParams& params, FilterResult* report = nullptr);

/// Maps a partition of the kept points back to the full cloud (others become 0).
Partition lift_partition(std::size_t n, const std::vector<std::size_t>& kept, const Partition& sub);

/// Component clustering after the degree filter; discarded points get label 0.
Partition cluster_cc_robust(const PointMatrix& points, const Kernel& kernel, double eps, const RobustParams& params,
                            FilterResult* report = nullptr);

struct RobustSpectralResult {
  SpectralResult spectral;  // on the kept points
  Partition partition;      // full cloud, 0 = discarded
  FilterResult filter;
};

/// Spectral clustering of the points that survive the filter.
RobustSpectralResult spectral_cluster_robust(const AffinityMatrix& w, const RobustParams& params,
                                             const SpectralOptions& options);
RobustSpectralResult spectral_cluster_robust(const PointMatrix& points, const Kernel& kernel, double eps,
                                             const RobustParams& params, const SpectralOptions& options);
RobustSpectralResult spectral_cluster_robust(const PointMatrix& points, const Kernel& kernel,
                                             const LocalScales& scales, const RobustParams& params,
                                             const SpectralOptions& options);

struct DegreeConditionReport {
  /// N_k gamma(S_k, tau, eps) / gamma(S_k, tau), per cluster.
  std::vector<double> left;
  /// omega_N N eps^D + ln N.
  double right = 0.0;
  double margin = 4.0;
  std::vector<bool> satisfied;
};

/// Compares each cluster's expected within-cluster degree scale with the
/// threshold: satisfied iff left >= margin * right.
DegreeConditionReport degree_condition(const SceneSpec& scene, double eps, const RobustParams& params,
                                       double margin = 4.0);

/// Scale maximizing min_k left_k / right of degree_condition, searched on a log
/// grid of 400 points over [1e-4, 1]. omega_n <= 0 selects the default.
double robust_scale(const SceneSpec& scene, double omega_n = 0.0);

}  // namespace pwclust
