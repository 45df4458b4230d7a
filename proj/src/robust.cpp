#include "pwclust/robust.hpp"

#include <algorithm>
#include <cmath>

#include "pwclust/cluster_cc.hpp"
#include "pwclust/error.hpp"

namespace pwclust {

double default_omega(std::size_t n) { return std::sqrt(std::log(static_cast<double>(n))); }

RobustParams RobustParams::make(std::size_t n, int dim, double eps, double omega_n) {
  require(n >= 2, "RobustParams: need N >= 2");
  require(eps > 0.0, "RobustParams: eps must be positive");
  RobustParams p;
  p.omega_n = omega_n > 0.0 ? omega_n : default_omega(n);
  p.eps = eps;
  const double nd = static_cast<double>(n);
  p.threshold = p.omega_n * nd * std::pow(eps, dim) + std::log(nd);
  return p;
}

RobustParams RobustParams::disabled() { return RobustParams{}; }

FilterResult degree_filter(const AffinityMatrix& w, const RobustParams& params) {
  FilterResult f;
  f.degrees = degrees(w);
  f.threshold = params.threshold;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (params.enabled() && f.degrees[static_cast<Eigen::Index>(i)] <= params.threshold)
      f.discarded.push_back(i);
    else
      f.kept.push_back(i);
  }
  return f;
}

Partition lift_partition(std::size_t n, const std::vector<std::size_t>& kept, const Partition& sub) {
  std::vector<long long> g(n, -1);
  for (std::size_t k = 0; k < kept.size(); ++k)
    g[kept[k]] = sub.labels[k] == 0 ? -1 : sub.labels[k];
  return canonicalize(g);
}

Partition components_robust(const AffinityMatrix& w, const RobustParams& params, FilterResult* report) {
  FilterResult f = degree_filter(w, params);
  const Partition sub = extract_components(induced_subgraph(w, f.kept));
  Partition out = lift_partition(w.size(), f.kept, sub);
  if (report) *report = std::move(f);
  return out;
}

Partition cluster_cc_robust(const PointMatrix& points, const Kernel& kernel, double eps, const RobustParams& params,
                            FilterResult* report) {
  if (!kernel.compact())
    fail(ErrorKind::InvalidArgument, "cluster_cc requires a compactly supported kernel, got " + kernel.describe());
  return components_robust(build_affinity(points, kernel, eps), params, report);
}

RobustSpectralResult spectral_cluster_robust(const AffinityMatrix& w, const RobustParams& params,
                                             const SpectralOptions& options) {
  RobustSpectralResult r;
  r.filter = degree_filter(w, params);
  if (r.filter.kept.empty()) fail(ErrorKind::Degenerate, "spectral_cluster_robust: every point was discarded");
  r.spectral = spectral_cluster(induced_subgraph(w, r.filter.kept), options);
  r.partition = lift_partition(w.size(), r.filter.kept, r.spectral.partition);
  return r;
}

RobustSpectralResult spectral_cluster_robust(const PointMatrix& points, const Kernel& kernel, double eps,
                                             const RobustParams& params, const SpectralOptions& options) {
  return spectral_cluster_robust(build_affinity(points, kernel, eps), params, options);
}

RobustSpectralResult spectral_cluster_robust(const PointMatrix& points, const Kernel& kernel,
                                             const LocalScales& scales, const RobustParams& params,
                                             const SpectralOptions& options) {
  return spectral_cluster_robust(build_affinity_local(points, kernel, scales), params, options);
}

DegreeConditionReport degree_condition(const SceneSpec& scene, double eps, const RobustParams& params, double margin) {
  require(eps > 0.0, "degree_condition: eps must be positive");
  DegreeConditionReport r;
  r.margin = margin;
  const double n = static_cast<double>(scene.total_points());
  r.right = params.omega_n * n * std::pow(eps, scene.ambient_dim) + std::log(n);
  const int dim = scene.ambient_dim;
  for (const auto& c : scene.clusters) {
    const int d = c.surface.intrinsic_dim();
    const double diam = c.surface.diameter();
    // gamma(S, tau, eps) / gamma(S, tau), written so that tau = 0 has its limiting value.
    const double te = std::min(c.tau, eps);
    const double normal_part = c.tau > eps ? std::pow(eps / c.tau, dim - d) : 1.0;
    const double span_num = std::max(te, std::min(diam, eps));
    const double span_den = std::max(c.tau, diam);
    const double tangent_part = d == 0 ? 1.0 : std::pow(span_num / span_den, d);
    const double left = static_cast<double>(c.n_points) * normal_part * tangent_part;
    r.left.push_back(left);
    r.satisfied.push_back(left >= margin * r.right);
  }
  return r;
}

double robust_scale(const SceneSpec& scene, double omega_n) {
  require(!scene.clusters.empty(), "robust_scale: scene has no clusters");
  const std::size_t n = scene.total_points();
  RobustParams params;
  params.omega_n = omega_n > 0.0 ? omega_n : default_omega(n);
  constexpr int kGrid = 400;
  double best_eps = 0.0, best = -1.0;
  for (int i = 0; i < kGrid; ++i) {
    const double eps = std::pow(10.0, -4.0 + 4.0 * i / (kGrid - 1));
    const DegreeConditionReport r = degree_condition(scene, eps, params);
    const double worst = *std::min_element(r.left.begin(), r.left.end()) / r.right;
    if (worst > best) {
      best = worst;
      best_eps = eps;
    }
  }
  return best_eps;
}

}  // namespace pwclust
