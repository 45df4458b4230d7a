#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "pwclust/rng.hpp"
#include "pwclust/types.hpp"

namespace pwclust {

enum class SurfaceKind { Point, Segment, Polyline, CircleArc, AffinePatch, Sphere };

const char* to_string(SurfaceKind kind);
SurfaceKind surface_kind_from_string(const std::string& name);

struct Box {
  Vec lo;
  Vec hi;
  bool empty() const { return (hi.array() < lo.array()).any(); }
};

/// Parametric surface in [0,1]^D with closed-form distance.
///
/// CircleArc lives in the plane spanned by the orthonormal pair (u, v) through
/// `center`, covering angles [angle0, angle1]. AffinePatch is
/// origin + sum_i t_i basis_i with t_i in [0, extents_i] and an orthonormal basis.
class Surface {
 public:
  static Surface point(Vec p);
  static Surface segment(Vec a, Vec b);
  static Surface polyline(std::vector<Vec> vertices);
  /// u and v default to the first two coordinate axes.
  static Surface circle_arc(Vec center, double radius, double angle0, double angle1, Vec u = {},
                            Vec v = {});
  static Surface affine_patch(Vec origin, std::vector<Vec> basis, std::vector<double> extents);
  /// The (D-1)-sphere; requires D >= 2.
  static Surface sphere(Vec center, double radius);

  SurfaceKind kind() const { return kind_; }
  int intrinsic_dim() const { return intrinsic_dim_; }
  int ambient_dim() const { return static_cast<int>(ambient_dim_); }

  double diameter() const;
  /// d-dimensional volume; 1 for a Point (counting measure).
  double intrinsic_volume() const;
  /// Axis-aligned box containing the surface.
  Box bounding_box() const;

  /// min over y in S of |x - y|, exact.
  double distance(std::span<const double> x) const;
  double distance(const Vec& x) const { return distance(std::span<const double>(x.data(), x.size())); }
  /// max over y in S of |x - y|, exact.
  double max_distance(std::span<const double> x) const;

  /// A point drawn from the normalized intrinsic (arc-length / area) measure.
  Vec sample(Rng& rng) const;

  /// Endpoints, corners or other extremal points used when probing volume growth.
  std::vector<Vec> landmarks() const;

  /// Throws SceneValidation if the surface leaves [0,1]^D, is disconnected,
  /// has zero diameter (non-Point) or has malformed parameters.
  void validate() const;

  // Parameter access (serialization).
  const std::vector<Vec>& points() const { return pts_; }
  double radius() const { return radius_; }
  double angle0() const { return angle0_; }
  double angle1() const { return angle1_; }
  const std::vector<double>& extents() const { return extents_; }
  /// CircleArc: {u, v}. AffinePatch: basis vectors.
  const std::vector<Vec>& directions() const { return dirs_; }

  /// Copy translated by `offset`.
  Surface translated(const Vec& offset) const;

 private:
  Surface() = default;
  void check_dim(std::size_t n) const;
  double arc_angle_of(std::span<const double> x, double& rho, double& perp2) const;
  Vec arc_point(double theta) const;

  SurfaceKind kind_ = SurfaceKind::Point;
  int intrinsic_dim_ = 0;
  std::size_t ambient_dim_ = 0;
  std::vector<Vec> pts_;    // point / endpoints / vertices / center / origin
  std::vector<Vec> dirs_;   // arc plane or patch basis
  std::vector<double> extents_;
  double radius_ = 0.0;
  double angle0_ = 0.0;
  double angle1_ = 0.0;

  friend double surface_distance(const Surface& a, const Surface& b);
};

struct ClusterSpec {
  Surface surface;
  std::size_t n_points = 1;
  double tau = 0.0;
  double density_ratio = 1.0;
};

struct SceneSpec {
  int ambient_dim = 2;
  std::vector<ClusterSpec> clusters;
  std::size_t n_outliers = 0;
  double delta = 0.0;
  std::uint64_t seed = 0;

  std::size_t total_points() const;
};

/// Points with ground truth: label 0 = outlier, k >= 1 = cluster k.
struct PointCloud {
  PointMatrix points;
  std::vector<int> labels;

  std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
};

/// Acceptance-rate floor for rejection sampling, enforced after a warm-up.
inline constexpr double kMinAcceptanceRate = 1e-4;
inline constexpr std::size_t kRejectionWarmup = 20000;

double distance_to_surface(const Surface& surface, std::span<const double> x);

/// n_points draws from the uniform measure on B(S, tau) intersected with [0,1]^D
/// (rejection from the bounding box). tau = 0 samples the surface itself.
PointMatrix sample_cluster(const ClusterSpec& spec, Rng& rng);

/// n_outliers draws, uniform on [0,1]^D minus the delta-neighborhoods of all surfaces.
PointMatrix sample_outliers(const SceneSpec& scene, Rng& rng);

/// Generates the full cloud: clusters in order, then outliers. Cluster k uses
/// substream k+1 and the outlier pool substream 0, so streams are independent.
PointCloud generate(const SceneSpec& scene);

/// Relative resolution used when a pair has no closed-form distance.
inline constexpr double kSeparationGrid = 1e-3;

/// Surface-to-surface distance. Exact for pairs involving Point or Sphere and
/// for flat pairs (Segment, Polyline, AffinePatch); pairs with a CircleArc use
/// a parameter grid at kSeparationGrid * diam refined by golden-section search.
double surface_distance(const Surface& a, const Surface& b);

/// Numeric accuracy guaranteed by surface_distance for this pair.
double surface_distance_tolerance(const Surface& a, const Surface& b);

/// min over k != l of dist(S_k, S_l); +infinity when K < 2.
double min_separation(const SceneSpec& scene);

/// Checks every surface, tau >= 0, n_points >= 1, delta > 2 max tau (K >= 2) and
/// min_separation >= delta - tolerance. Throws SceneValidation with the measured
/// separation on failure.
void validate_scene(const SceneSpec& scene);

/// gamma(S, tau, eps) = (tau ^ eps)^(D-d) ((tau ^ eps) v (diam ^ eps))^d, where
/// ^ is min and v is max. eps = +infinity gives gamma(S, tau).
double gamma_volume(int d, int D, double tau, double eps, double diam);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct VolumeReport {
  bool pass = true;
  /// max over probes of max(r, 1/r), r = vol_d(B(x,eps) ∩ S) / (omega_d eps^d).
  double worst_ratio = 1.0;
  double min_ratio = 1.0;
  double max_ratio = 1.0;
  std::size_t probes = 0;
};

/// Monte-Carlo check of kappa^-1 <= vol_d(B(x,eps) ∩ S) / (omega_d eps^d) <= kappa over
/// landmarks and sampled x on S and a log grid eps in [1e-2 diam, diam]. Each
/// estimate is accepted against kappa * (1 + 3 * relative standard error).
/// omega_d is the volume of the unit d-ball, so interior points of flat
/// pieces score 1. Points pass vacuously.
VolumeReport verify_volume_condition(const Surface& surface, double kappa, std::size_t n_mc,
                                     Rng& rng);

/// Monte-Carlo estimate of vol_D(B(S,tau) ∩ B(x,eps)), with B(S,tau) clipped to [0,1]^D.
double estimate_tube_ball_volume(const Surface& surface, double tau, const Vec& x, double eps,
                                 std::size_t n_samples, Rng& rng);

/// Volume of the unit ball in R^d.
double unit_ball_volume(int d);

/// K parallel segments of the given length in D = 2, along direction (cos a, sin a)
/// with consecutive surfaces `spacing` apart, centered in the unit square.
SceneSpec parallel_segments_scene(std::size_t k, double length, double spacing, double tau,
                                  std::vector<std::size_t> n_points, double angle,
                                  std::size_t n_outliers, double delta, std::uint64_t seed);

}  // namespace pwclust
