#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pwclust/geometry.hpp"
#include "pwclust/nngraph.hpp"
#include "pwclust/partition.hpp"

namespace pwclust {

struct ScoreReport {
  bool exact_match = false;
  double error_rate = 0.0;
  std::size_t k_true = 0;
  std::size_t k_pred = 0;
  /// Counts with rows = true labels 0..K and columns = predicted labels 0..K_hat
  /// (after canonicalization); row/column 0 hold outliers.
  Eigen::MatrixXi confusion;
  /// Predicted cluster matched to each true cluster (index k-1), 0 if unmatched.
  std::vector<int> matching;
  /// Present when either labeling contains outliers. An empty denominator counts as 1.
  std::optional<double> outlier_precision;
  std::optional<double> outlier_recall;
};

/// Scores a prediction under the best one-to-one matching of nonzero labels;
/// label 0 only matches 0. Exhaustive matching when max(K, K_hat) <= 8,
/// Hungarian assignment above.
ScoreReport match_accuracy(const std::vector<int>& pred, const std::vector<int>& truth);

/// Optimal assignment maximizing total weight of a rectangular matrix.
/// Returns, for each row, the matched column or -1.
std::vector<int> max_weight_assignment(const Eigen::MatrixXd& weight);

struct ThresholdEntry {
  double branch1 = 0.0;  // (tau v diam) (ln N_k / N_k)^(1/d); 0 for d = 0
  double branch2 = 0.0;  // (tau v diam)^(d/D) tau^(1 - d/D) (ln N_k / N_k)^(1/D)
  double value = 0.0;    // max of the branches
};

struct ThresholdReport {
  std::vector<ThresholdEntry> clusters;
  double max = 0.0;
};

/// Scale above which connected components are expected to separate the clusters.
ThresholdReport epsilon_threshold(const SceneSpec& scene);

struct SamplingEntry {
  double n_k = 0.0;
  /// (N^(d/D) v N tau^(D-d)) ln N.
  double required = 0.0;
  bool satisfied = false;
};

std::vector<SamplingEntry> sampling_condition(const SceneSpec& scene);

struct CheegerResult {
  double h = 0.0;
  bool connected = true;
  /// Minimizing subset as a bitmask over vertices.
  std::uint32_t subset = 0;
};

/// min over nonempty I with |I| <= N/2 of cut(I) / vol(I) by enumerating all
/// subsets (N <= 20). Disconnected graphs report h = 0.
CheegerResult cheeger_bruteforce(const AffinityMatrix& w);

}  // namespace pwclust
