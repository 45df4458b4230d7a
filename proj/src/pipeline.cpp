#include "pwclust/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "pwclust/cluster_cc.hpp"
#include "pwclust/error.hpp"
#include "pwclust/parallel.hpp"

namespace pwclust {

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::CC: return "cc";
    case Algorithm::Spectral: return "spectral";
    case Algorithm::Slink: return "slink";
  }
  return "?";
}

Algorithm algorithm_from_string(const std::string& name) {
  for (auto a : {Algorithm::CC, Algorithm::Spectral, Algorithm::Slink})
    if (name == to_string(a)) return a;
  fail(ErrorKind::InvalidArgument, "unknown algorithm '" + name + "' (expected cc, spectral or slink)");
}

namespace {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

PipelineResult run_pipeline(const PointMatrix& points, const PipelineConfig& config, const SceneSpec* scene) {
  const auto n = static_cast<std::size_t>(points.rows());
  require(n >= 2, "run_pipeline: need at least two points");
  PipelineResult r;
  const Stopwatch total;

  switch (config.scale) {
    case ScaleMode::Fixed:
      require(config.eps > 0.0, "run_pipeline: fixed scale needs eps > 0");
      r.eps = config.eps;
      break;
    case ScaleMode::Auto: {
      require(scene != nullptr, "run_pipeline: auto scale needs the generating scene");
      r.eps = config.auto_factor * epsilon_threshold(*scene).max;
      if (!(r.eps > 0.0)) fail(ErrorKind::Degenerate, "run_pipeline: the scene's epsilon threshold is zero");
      break;
    }
    case ScaleMode::Local: {
      require(config.algorithm != Algorithm::Slink, "run_pipeline: single linkage takes a fixed scale");
      const Stopwatch t;
      r.scales = local_scales(points, config.ell);
      r.timings_ms["scales"] = t.ms();
      r.eps = median(r.scales->scales);
      break;
    }
  }

  if (config.algorithm == Algorithm::Slink) {
    const Stopwatch t;
    LinkageResult lr = single_linkage(points, r.eps, config.robust);
    r.timings_ms["linkage"] = t.ms();
    r.partition = std::move(lr.partition);
    r.dendrogram = std::move(lr.dendrogram);
    r.timings_ms["total"] = total.ms();
    return r;
  }

  if (config.algorithm == Algorithm::CC && !config.kernel.compact())
    fail(ErrorKind::InvalidArgument, "cluster_cc requires a compactly supported kernel, got " +
                                         config.kernel.describe());

  Stopwatch t;
  const AffinityMatrix w = r.scales ? build_affinity_local(points, config.kernel, *r.scales)
                                    : build_affinity(points, config.kernel, r.eps);
  r.timings_ms["affinity"] = t.ms();
  r.edges = w.edges();
  const RobustParams params = config.robust
                                  ? RobustParams::make(n, static_cast<int>(points.cols()), r.eps, config.robust_omega)
                                  : RobustParams::disabled();

  t = Stopwatch();
  if (config.algorithm == Algorithm::CC) {
    FilterResult f;
    r.partition = components_robust(w, params, &f);
    if (config.robust) r.filter = std::move(f);
    r.timings_ms["components"] = t.ms();
  } else {
    SpectralOptions so;
    so.k = config.k;
    so.k_max = config.k_max;
    so.kmeans_iterations = config.kmeans_iterations;
    so.eigen = config.eigen;
    if (config.robust) {
      RobustSpectralResult rs = spectral_cluster_robust(w, params, so);
      r.partition = std::move(rs.partition);
      r.spectral = std::move(rs.spectral);
      r.filter = std::move(rs.filter);
    } else {
      r.spectral = spectral_cluster(w, so);
      r.partition = r.spectral->partition;
    }
    r.timings_ms["spectral"] = t.ms();
  }
  r.timings_ms["total"] = total.ms();
  return r;
}

SceneSpec with_separation(const SceneSpec& scene, double delta, const Vec& axis_in) {
  require(scene.clusters.size() == 2, "separation sweep: the template scene must have exactly two clusters");
  require(delta > 0.0 && std::isfinite(delta), "separation sweep: delta must be positive (the model needs delta > 2 tau)");
  const Surface& s1 = scene.clusters[0].surface;
  const Surface& s2 = scene.clusters[1].surface;
  Vec axis = axis_in;
  if (axis.size() == 0) {
    const Box b1 = s1.bounding_box(), b2 = s2.bounding_box();
    axis = 0.5 * ((b2.lo + b2.hi) - (b1.lo + b1.hi));
  }
  require(axis.size() == scene.ambient_dim, "separation sweep: axis dimension mismatch");
  require(axis.norm() > 0.0, "separation sweep: cannot infer a translation axis (coincident centers)");
  axis.normalize();

  const double tol = surface_distance_tolerance(s1, s2);
  double shift = 0.0;
  double sep = surface_distance(s1, s2);
  for (int it = 0; it < 60 && std::abs(sep - delta) > 1e-12; ++it) {
    shift += delta - sep;
    sep = surface_distance(s1, s2.translated(shift * axis));
  }
  if (std::abs(sep - delta) > 1e-9 + tol)
    fail(ErrorKind::SceneValidation, "separation sweep: could not place the clusters at delta = " + std::to_string(delta));

  SceneSpec out = scene;
  out.clusters[1].surface = s2.translated(shift * axis);
  out.delta = delta;
  validate_scene(out);
  return out;
}

SweepResult separation_sweep(const SceneSpec& scene, const std::vector<double>& deltas, const PipelineConfig& config,
                             std::size_t trials, const Vec& axis) {
  require(!deltas.empty(), "separation sweep: empty delta grid");
  require(trials >= 1, "separation sweep: need at least one trial");
  std::vector<SceneSpec> scenes;
  for (double d : deltas) scenes.push_back(with_separation(scene, d, axis));

  SweepResult res;
  res.rows.resize(deltas.size() * trials);
  parallel_for(res.rows.size(), [&](std::size_t cell) {
    const std::size_t g = cell / trials, t = cell % trials;
    SceneSpec s = scenes[g];
    s.seed = scene.seed + t;
    const Stopwatch sw;
    const PointCloud cloud = generate(s);
    const PipelineResult pr = run_pipeline(cloud.points, config, &s);
    const ScoreReport score = match_accuracy(pr.partition.labels, cloud.labels);
    SweepRow& row = res.rows[cell];
    row.delta = deltas[g];
    row.seed = s.seed;
    row.exact = score.exact_match;
    row.error_rate = score.error_rate;
    row.runtime_ms = sw.ms();
  });
  for (std::size_t g = 0; g < deltas.size(); ++g) {
    SweepSummary sum;
    sum.delta = deltas[g];
    for (std::size_t t = 0; t < trials; ++t) {
      const SweepRow& row = res.rows[g * trials + t];
      sum.recovery_rate += row.exact ? 1.0 : 0.0;
      sum.mean_error_rate += row.error_rate;
    }
    sum.recovery_rate /= static_cast<double>(trials);
    sum.mean_error_rate /= static_cast<double>(trials);
    res.summary.push_back(sum);
  }
  return res;
}

}  // namespace pwclust
