#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pwclust/cluster_slink.hpp"
#include "pwclust/cluster_spectral.hpp"
#include "pwclust/eval.hpp"
#include "pwclust/geometry.hpp"
#include "pwclust/robust.hpp"

namespace pwclust {

enum class Algorithm { CC, Spectral, Slink };
enum class ScaleMode { Fixed, Local, Auto };

const char* to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& name);

/// One clustering run: algorithm, kernel, scale and optional outlier filtering.
struct PipelineConfig {
  Algorithm algorithm = Algorithm::CC;
  Kernel kernel = Kernel::indicator();
  ScaleMode scale = ScaleMode::Auto;
  double eps = 0.0;
  std::size_t ell = 0;
  /// Auto scale: eps = auto_factor * max epsilon_threshold of the scene.
  double auto_factor = 2.0;
  /// Spectral only; 0 estimates K from the eigengap over 1..k_max.
  std::size_t k = 0;
  std::size_t k_max = 10;
  int kmeans_iterations = 1;
  /// Degree filter (cc, spectral) or singleton relabeling (slink).
  bool robust = false;
  /// <= 0 selects sqrt(ln N).
  double robust_omega = 0.0;
  EigenOptions eigen;
};

struct PipelineResult {
  Partition partition;
  /// Scale used; for local scaling the median of the local scales.
  double eps = 0.0;
  std::optional<LocalScales> scales;
  std::optional<SpectralResult> spectral;
  std::optional<FilterResult> filter;
  std::optional<Dendrogram> dendrogram;
  std::size_t edges = 0;
  /// Wall-clock milliseconds per stage.
  std::map<std::string, double> timings_ms;
};

/// Runs the configured pipeline. Auto scaling needs the generating scene.
PipelineResult run_pipeline(const PointMatrix& points, const PipelineConfig& config,
                            const SceneSpec* scene = nullptr);

/// Moves the second cluster of a two-cluster scene along `axis` (default: the
/// line through the two bounding-box centers) until its surface is exactly
/// `delta` from the first, and sets the declared delta. The result is validated.
SceneSpec with_separation(const SceneSpec& scene, double delta, const Vec& axis = {});

struct SweepRow {
  double delta = 0.0;
  std::uint64_t seed = 0;
  bool exact = false;
  double error_rate = 0.0;
  double runtime_ms = 0.0;
};

struct SweepSummary {
  double delta = 0.0;
  double recovery_rate = 0.0;
  double mean_error_rate = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // grid order, then trial order
  std::vector<SweepSummary> summary;
};

/// For each delta, instantiates the two-cluster scene and runs the pipeline
/// over `trials` seeds (scene.seed + t). Cells may run in parallel; the table
/// is assembled in grid order.
SweepResult separation_sweep(const SceneSpec& scene, const std::vector<double>& deltas, const PipelineConfig& config,
                             std::size_t trials, const Vec& axis = {});

}  // namespace pwclust
