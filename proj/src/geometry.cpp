#include "pwclust/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "pwclust/error.hpp"
#include "pwclust/parallel.hpp"

namespace pwclust {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kContainTol = 1e-12;
constexpr double kOrthoTol = 1e-9;

Eigen::Map<const Vec> as_vec(std::span<const double> x) {
  return Eigen::Map<const Vec>(x.data(), static_cast<Eigen::Index>(x.size()));
}

double segment_distance(const Vec& a, const Vec& b, std::span<const double> xs) {
  const auto x = as_vec(xs);
  const Vec ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (x - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (x - (a + t * ab)).norm();
}

// Wrap t into [0, 2pi).
double wrap(double t) {
  t = std::fmod(t, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  return t;
}

std::string vec_str(const Vec& v) {
  std::ostringstream os;
  os << "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ")";
  return os.str();
}

// A flat piece {origin + G z : z in [0,1]^m}.
struct FlatPiece {
  Vec origin;
  Eigen::MatrixXd gen;
};

std::vector<FlatPiece> flat_pieces(const Surface& s) {
  std::vector<FlatPiece> out;
  const auto& p = s.points();
  switch (s.kind()) {
    case SurfaceKind::Point:
      out.push_back({p[0], Eigen::MatrixXd(p[0].size(), 0)});
      break;
    case SurfaceKind::Segment:
    case SurfaceKind::Polyline:
      for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        Eigen::MatrixXd g(p[i].size(), 1);
        g.col(0) = p[i + 1] - p[i];
        out.push_back({p[i], g});
      }
      break;
    case SurfaceKind::AffinePatch: {
      const auto& basis = s.directions();
      Eigen::MatrixXd g(p[0].size(), static_cast<Eigen::Index>(basis.size()));
      for (std::size_t i = 0; i < basis.size(); ++i)
        g.col(static_cast<Eigen::Index>(i)) = basis[i] * s.extents()[i];
      out.push_back({p[0], g});
      break;
    }
    default:
      break;
  }
  return out;
}

// min over z in [0,1]^m of |c + M z|, by enumerating every face of the box and
// solving the unconstrained least-squares problem restricted to it. The minimum
// of a convex quadratic over a box is attained at the restricted minimizer of
// some face, so the enumeration is exact.
double box_least_distance(const Vec& c, const Eigen::MatrixXd& m) {
  const int n = static_cast<int>(m.cols());
  require(n <= 14, "surface_distance: flat pair has too many parameters");
  std::size_t faces = 1;
  for (int i = 0; i < n; ++i) faces *= 3;
  double best = kInfinity;
  std::vector<int> state(n);
  Vec z(n);
  for (std::size_t f = 0; f < faces; ++f) {
    std::size_t code = f;
    std::vector<int> free_idx;
    Vec fixed = c;
    for (int i = 0; i < n; ++i) {
      state[i] = static_cast<int>(code % 3);
      code /= 3;
      if (state[i] == 0) {
        free_idx.push_back(i);
      } else {
        z[i] = state[i] == 1 ? 0.0 : 1.0;
        fixed += m.col(i) * z[i];
      }
    }
    if (!free_idx.empty()) {
      Eigen::MatrixXd mf(m.rows(), static_cast<Eigen::Index>(free_idx.size()));
      for (std::size_t j = 0; j < free_idx.size(); ++j)
        mf.col(static_cast<Eigen::Index>(j)) = m.col(free_idx[j]);
      const Vec zf = mf.completeOrthogonalDecomposition().solve(-fixed);
      for (std::size_t j = 0; j < free_idx.size(); ++j)
        z[free_idx[j]] = std::clamp(zf[static_cast<Eigen::Index>(j)], 0.0, 1.0);
    }
    best = std::min(best, (c + m * z).norm());
  }
  return best;
}

double golden_min(const std::function<double(double)>& f, double lo, double hi, int iters) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = f(x1), f2 = f(x2);
  double best = std::min(f1, f2);
  for (int i = 0; i < iters; ++i) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = f(x2);
    }
    best = std::min({best, f1, f2});
  }
  return best;
}

bool is_flat(SurfaceKind k) {
  return k == SurfaceKind::Segment || k == SurfaceKind::Polyline || k == SurfaceKind::AffinePatch;
}

}  // namespace

const char* to_string(SurfaceKind kind) {
  switch (kind) {
    case SurfaceKind::Point: return "Point";
    case SurfaceKind::Segment: return "Segment";
    case SurfaceKind::Polyline: return "Polyline";
    case SurfaceKind::CircleArc: return "CircleArc";
    case SurfaceKind::AffinePatch: return "AffinePatch";
    case SurfaceKind::Sphere: return "Sphere";
  }
  return "?";
}

SurfaceKind surface_kind_from_string(const std::string& name) {
  for (auto k : {SurfaceKind::Point, SurfaceKind::Segment, SurfaceKind::Polyline,
                 SurfaceKind::CircleArc, SurfaceKind::AffinePatch, SurfaceKind::Sphere})
    if (name == to_string(k)) return k;
  fail(ErrorKind::Schema, "unknown surface kind '" + name + "'");
}

// ---------------------------------------------------------------------------
// Construction

Surface Surface::point(Vec p) {
  Surface s;
  s.kind_ = SurfaceKind::Point;
  s.intrinsic_dim_ = 0;
  s.ambient_dim_ = static_cast<std::size_t>(p.size());
  s.pts_ = {std::move(p)};
  return s;
}

Surface Surface::segment(Vec a, Vec b) {
  require(a.size() == b.size(), "segment: endpoint dimensions differ");
  Surface s;
  s.kind_ = SurfaceKind::Segment;
  s.intrinsic_dim_ = 1;
  s.ambient_dim_ = static_cast<std::size_t>(a.size());
  s.pts_ = {std::move(a), std::move(b)};
  return s;
}

Surface Surface::polyline(std::vector<Vec> vertices) {
  require(vertices.size() >= 2, "polyline: needs at least two vertices");
  for (const auto& v : vertices) require(v.size() == vertices[0].size(), "polyline: vertex dimensions differ");
  Surface s;
  s.kind_ = SurfaceKind::Polyline;
  s.intrinsic_dim_ = 1;
  s.ambient_dim_ = static_cast<std::size_t>(vertices[0].size());
  s.pts_ = std::move(vertices);
  return s;
}

Surface Surface::circle_arc(Vec center, double radius, double angle0, double angle1, Vec u, Vec v) {
  const auto dim = center.size();
  require(dim >= 2, "circle_arc: needs D >= 2");
  if (u.size() == 0) u = Vec::Unit(dim, 0);
  if (v.size() == 0) v = Vec::Unit(dim, 1);
  require(u.size() == dim && v.size() == dim, "circle_arc: plane vector dimensions differ");
  Surface s;
  s.kind_ = SurfaceKind::CircleArc;
  s.intrinsic_dim_ = 1;
  s.ambient_dim_ = static_cast<std::size_t>(dim);
  s.pts_ = {std::move(center)};
  s.dirs_ = {std::move(u), std::move(v)};
  s.radius_ = radius;
  s.angle0_ = angle0;
  s.angle1_ = angle1;
  return s;
}

Surface Surface::affine_patch(Vec origin, std::vector<Vec> basis, std::vector<double> extents) {
  require(!basis.empty(), "affine_patch: needs at least one basis vector");
  require(basis.size() == extents.size(), "affine_patch: basis/extents size mismatch");
  for (const auto& b : basis) require(b.size() == origin.size(), "affine_patch: basis dimension differs");
  Surface s;
  s.kind_ = SurfaceKind::AffinePatch;
  s.intrinsic_dim_ = static_cast<int>(basis.size());
  s.ambient_dim_ = static_cast<std::size_t>(origin.size());
  s.pts_ = {std::move(origin)};
  s.dirs_ = std::move(basis);
  s.extents_ = std::move(extents);
  return s;
}

Surface Surface::sphere(Vec center, double radius) {
  require(center.size() >= 2, "sphere: needs D >= 2");
  Surface s;
  s.kind_ = SurfaceKind::Sphere;
  s.ambient_dim_ = static_cast<std::size_t>(center.size());
  s.intrinsic_dim_ = static_cast<int>(s.ambient_dim_) - 1;
  s.pts_ = {std::move(center)};
  s.radius_ = radius;
  return s;
}

Surface Surface::translated(const Vec& offset) const {
  require(static_cast<std::size_t>(offset.size()) == ambient_dim_, "translated: dimension mismatch");
  Surface s = *this;
  for (auto& p : s.pts_) p += offset;
  return s;
}

void Surface::check_dim(std::size_t n) const {
  if (n != ambient_dim_) {
    fail(ErrorKind::InvalidArgument, "point dimension " + std::to_string(n) +
                                         " does not match surface dimension " +
                                         std::to_string(ambient_dim_));
  }
}

// ---------------------------------------------------------------------------
// Intrinsic quantities

double Surface::diameter() const {
  switch (kind_) {
    case SurfaceKind::Point: return 0.0;
    case SurfaceKind::Segment: return (pts_[1] - pts_[0]).norm();
    case SurfaceKind::Polyline: {
      double d = 0.0;
      for (std::size_t i = 0; i < pts_.size(); ++i)
        for (std::size_t j = i + 1; j < pts_.size(); ++j) d = std::max(d, (pts_[i] - pts_[j]).norm());
      return d;
    }
    case SurfaceKind::CircleArc: {
      const double span = angle1_ - angle0_;
      return span >= std::numbers::pi ? 2.0 * radius_ : 2.0 * radius_ * std::sin(span / 2.0);
    }
    case SurfaceKind::AffinePatch: {
      double s = 0.0;
      for (double e : extents_) s += e * e;
      return std::sqrt(s);
    }
    case SurfaceKind::Sphere: return 2.0 * radius_;
  }
  return 0.0;
}

double unit_ball_volume(int d) {
  return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

double Surface::intrinsic_volume() const {
  switch (kind_) {
    case SurfaceKind::Point: return 1.0;
    case SurfaceKind::Segment: return (pts_[1] - pts_[0]).norm();
    case SurfaceKind::Polyline: {
      double len = 0.0;
      for (std::size_t i = 0; i + 1 < pts_.size(); ++i) len += (pts_[i + 1] - pts_[i]).norm();
      return len;
    }
    case SurfaceKind::CircleArc: return radius_ * (angle1_ - angle0_);
    case SurfaceKind::AffinePatch: {
      double v = 1.0;
      for (double e : extents_) v *= e;
      return v;
    }
    case SurfaceKind::Sphere: {
      // Area of the (D-1)-sphere: D * omega_D * R^(D-1).
      const int dim = static_cast<int>(ambient_dim_);
      return dim * unit_ball_volume(dim) * std::pow(radius_, dim - 1);
    }
  }
  return 0.0;
}

Vec Surface::arc_point(double theta) const {
  return pts_[0] + radius_ * (std::cos(theta) * dirs_[0] + std::sin(theta) * dirs_[1]);
}

Box Surface::bounding_box() const {
  const auto dim = static_cast<Eigen::Index>(ambient_dim_);
  Box box{Vec::Constant(dim, kInfinity), Vec::Constant(dim, -kInfinity)};
  auto add = [&box](const Vec& p) {
    box.lo = box.lo.cwiseMin(p);
    box.hi = box.hi.cwiseMax(p);
  };
  switch (kind_) {
    case SurfaceKind::Point:
    case SurfaceKind::Segment:
    case SurfaceKind::Polyline:
      for (const auto& p : pts_) add(p);
      break;
    case SurfaceKind::CircleArc: {
      add(arc_point(angle0_));
      add(arc_point(angle1_));
      // Coordinate j is c_j + R A_j cos(theta - beta_j); extremes at beta_j and beta_j + pi.
      for (Eigen::Index j = 0; j < dim; ++j) {
        const double beta = std::atan2(dirs_[1][j], dirs_[0][j]);
        for (double t : {beta, beta + std::numbers::pi}) {
          if (wrap(t - angle0_) <= angle1_ - angle0_) add(arc_point(angle0_ + wrap(t - angle0_)));
        }
      }
      break;
    }
    case SurfaceKind::AffinePatch: {
      const std::size_t d = dirs_.size();
      for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
        Vec p = pts_[0];
        for (std::size_t i = 0; i < d; ++i)
          if (mask & (std::size_t{1} << i)) p += extents_[i] * dirs_[i];
        add(p);
      }
      break;
    }
    case SurfaceKind::Sphere:
      box.lo = pts_[0].array() - radius_;
      box.hi = pts_[0].array() + radius_;
      break;
  }
  return box;
}

void Surface::validate() const {
  auto bad = [this](const std::string& msg) {
    fail(ErrorKind::SceneValidation, std::string(to_string(kind_)) + ": " + msg);
  };
  for (const auto& p : pts_)
    if (static_cast<std::size_t>(p.size()) != ambient_dim_ || !p.allFinite()) bad("malformed point parameter");
  switch (kind_) {
    case SurfaceKind::Point:
      break;
    case SurfaceKind::Segment:
      if (diameter() <= 0.0) bad("zero-length segment");
      break;
    case SurfaceKind::Polyline:
      for (std::size_t i = 0; i + 1 < pts_.size(); ++i)
        if ((pts_[i + 1] - pts_[i]).norm() <= 0.0) bad("repeated consecutive vertex");
      break;
    case SurfaceKind::CircleArc: {
      if (!(radius_ > 0.0) || !std::isfinite(radius_)) bad("radius must be positive");
      const double span = angle1_ - angle0_;
      if (!(span > 0.0) || span > kTwoPi + 1e-12) bad("angle range must satisfy 0 < angle1 - angle0 <= 2 pi");
      const auto& u = dirs_[0];
      const auto& v = dirs_[1];
      if (std::abs(u.norm() - 1.0) > kOrthoTol || std::abs(v.norm() - 1.0) > kOrthoTol ||
          std::abs(u.dot(v)) > kOrthoTol)
        bad("plane vectors u, v must be orthonormal");
      break;
    }
    case SurfaceKind::AffinePatch: {
      if (dirs_.size() > ambient_dim_) bad("more basis vectors than ambient dimensions");
      for (std::size_t i = 0; i < dirs_.size(); ++i) {
        if (!(extents_[i] > 0.0)) bad("extents must be positive");
        for (std::size_t j = 0; j < dirs_.size(); ++j) {
          const double g = dirs_[i].dot(dirs_[j]);
          if (std::abs(g - (i == j ? 1.0 : 0.0)) > kOrthoTol) bad("basis must be orthonormal");
        }
      }
      break;
    }
    case SurfaceKind::Sphere:
      if (!(radius_ > 0.0) || !std::isfinite(radius_)) bad("radius must be positive");
      break;
  }
  const Box box = bounding_box();
  if ((box.lo.array() < -kContainTol).any() || (box.hi.array() > 1.0 + kContainTol).any())
    bad("surface leaves the unit hypercube (bounding box " + vec_str(box.lo) + " - " + vec_str(box.hi) + ")");
}

// ---------------------------------------------------------------------------
// Distances

double Surface::arc_angle_of(std::span<const double> xs, double& rho, double& perp2) const {
  const Vec w = as_vec(xs) - pts_[0];
  const double a = w.dot(dirs_[0]);
  const double b = w.dot(dirs_[1]);
  rho = std::hypot(a, b);
  perp2 = std::max(0.0, w.squaredNorm() - a * a - b * b);
  return std::atan2(b, a);
}

double Surface::distance(std::span<const double> xs) const {
  check_dim(xs.size());
  const auto x = as_vec(xs);
  switch (kind_) {
    case SurfaceKind::Point:
      return (x - pts_[0]).norm();
    case SurfaceKind::Segment:
      return segment_distance(pts_[0], pts_[1], xs);
    case SurfaceKind::Polyline: {
      double d = kInfinity;
      for (std::size_t i = 0; i + 1 < pts_.size(); ++i) d = std::min(d, segment_distance(pts_[i], pts_[i + 1], xs));
      return d;
    }
    case SurfaceKind::CircleArc: {
      double rho = 0.0, perp2 = 0.0;
      const double phi = arc_angle_of(xs, rho, perp2);
      if (rho == 0.0) return std::sqrt(perp2 + radius_ * radius_);
      if (wrap(phi - angle0_) <= angle1_ - angle0_) return std::sqrt(perp2 + (rho - radius_) * (rho - radius_));
      return std::min((x - arc_point(angle0_)).norm(), (x - arc_point(angle1_)).norm());
    }
    case SurfaceKind::AffinePatch: {
      const Vec w = x - pts_[0];
      Vec y = pts_[0];
      for (std::size_t i = 0; i < dirs_.size(); ++i)
        y += std::clamp(w.dot(dirs_[i]), 0.0, extents_[i]) * dirs_[i];
      return (x - y).norm();
    }
    case SurfaceKind::Sphere:
      return std::abs((x - pts_[0]).norm() - radius_);
  }
  return kInfinity;
}

double Surface::max_distance(std::span<const double> xs) const {
  check_dim(xs.size());
  const auto x = as_vec(xs);
  switch (kind_) {
    case SurfaceKind::Point:
    case SurfaceKind::Segment:
    case SurfaceKind::Polyline: {
      double d = 0.0;
      for (const auto& p : pts_) d = std::max(d, (x - p).norm());
      return d;
    }
    case SurfaceKind::CircleArc: {
      double rho = 0.0, perp2 = 0.0;
      const double phi = arc_angle_of(xs, rho, perp2);
      if (rho == 0.0) return std::sqrt(perp2 + radius_ * radius_);
      if (wrap(phi + std::numbers::pi - angle0_) <= angle1_ - angle0_)
        return std::sqrt(perp2 + (rho + radius_) * (rho + radius_));
      return std::max((x - arc_point(angle0_)).norm(), (x - arc_point(angle1_)).norm());
    }
    case SurfaceKind::AffinePatch: {
      double d = 0.0;
      const std::size_t k = dirs_.size();
      for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
        Vec p = pts_[0];
        for (std::size_t i = 0; i < k; ++i)
          if (mask & (std::size_t{1} << i)) p += extents_[i] * dirs_[i];
        d = std::max(d, (x - p).norm());
      }
      return d;
    }
    case SurfaceKind::Sphere:
      return (x - pts_[0]).norm() + radius_;
  }
  return 0.0;
}

double distance_to_surface(const Surface& surface, std::span<const double> x) { return surface.distance(x); }

// ---------------------------------------------------------------------------
// Sampling

Vec Surface::sample(Rng& rng) const {
  const auto dim = static_cast<Eigen::Index>(ambient_dim_);
  switch (kind_) {
    case SurfaceKind::Point:
      return pts_[0];
    case SurfaceKind::Segment:
      return pts_[0] + rng.uniform() * (pts_[1] - pts_[0]);
    case SurfaceKind::Polyline: {
      const double total = intrinsic_volume();
      double t = rng.uniform() * total;
      for (std::size_t i = 0; i + 1 < pts_.size(); ++i) {
        const double len = (pts_[i + 1] - pts_[i]).norm();
        if (t <= len || i + 2 == pts_.size()) {
          const double f = std::clamp(t / len, 0.0, 1.0);
          return pts_[i] + f * (pts_[i + 1] - pts_[i]);
        }
        t -= len;
      }
      return pts_.back();
    }
    case SurfaceKind::CircleArc:
      return arc_point(angle0_ + rng.uniform() * (angle1_ - angle0_));
    case SurfaceKind::AffinePatch: {
      Vec p = pts_[0];
      for (std::size_t i = 0; i < dirs_.size(); ++i) p += rng.uniform() * extents_[i] * dirs_[i];
      return p;
    }
    case SurfaceKind::Sphere: {
      Vec g(dim);
      double n = 0.0;
      do {
        for (Eigen::Index j = 0; j < dim; ++j) g[j] = rng.normal();
        n = g.norm();
      } while (n == 0.0);
      return pts_[0] + (radius_ / n) * g;
    }
  }
  return pts_[0];
}

std::vector<Vec> Surface::landmarks() const {
  std::vector<Vec> out;
  switch (kind_) {
    case SurfaceKind::Point:
      out.push_back(pts_[0]);
      break;
    case SurfaceKind::Segment:
      out = {pts_[0], pts_[1], 0.5 * (pts_[0] + pts_[1])};
      break;
    case SurfaceKind::Polyline:
      out = pts_;
      break;
    case SurfaceKind::CircleArc:
      out = {arc_point(angle0_), arc_point(angle1_), arc_point(0.5 * (angle0_ + angle1_))};
      break;
    case SurfaceKind::AffinePatch: {
      const std::size_t k = std::min<std::size_t>(dirs_.size(), 4);
      for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
        Vec p = pts_[0];
        for (std::size_t i = 0; i < k; ++i)
          if (mask & (std::size_t{1} << i)) p += extents_[i] * dirs_[i];
        out.push_back(p);
      }
      Vec c = pts_[0];
      for (std::size_t i = 0; i < dirs_.size(); ++i) c += 0.5 * extents_[i] * dirs_[i];
      out.push_back(c);
      break;
    }
    case SurfaceKind::Sphere:
      out.push_back(pts_[0] + radius_ * Vec::Unit(static_cast<Eigen::Index>(ambient_dim_), 0));
      break;
  }
  return out;
}

namespace {

// Rejection sampler with the acceptance-rate floor.
class Rejector {
 public:
  explicit Rejector(std::string what) : what_(std::move(what)) {}
  void record(bool accepted) {
    ++draws_;
    if (accepted) ++accepted_;
    if (draws_ >= kRejectionWarmup &&
        static_cast<double>(accepted_) < kMinAcceptanceRate * static_cast<double>(draws_)) {
      std::ostringstream os;
      os << what_ << ": rejection acceptance rate " << static_cast<double>(accepted_) / draws_
         << " after " << draws_ << " draws is below the floor " << kMinAcceptanceRate
         << " (degenerate scene)";
      fail(ErrorKind::Degenerate, os.str());
    }
  }

 private:
  std::string what_;
  std::size_t draws_ = 0;
  std::size_t accepted_ = 0;
};

}  // namespace

PointMatrix sample_cluster(const ClusterSpec& spec, Rng& rng) {
  const Surface& s = spec.surface;
  require(spec.n_points >= 1, "sample_cluster: n_points must be >= 1");
  require(spec.tau >= 0.0, "sample_cluster: tau must be >= 0");
  const auto dim = static_cast<Eigen::Index>(s.ambient_dim());
  const auto n = static_cast<Eigen::Index>(spec.n_points);
  PointMatrix out(n, dim);
  if (spec.tau == 0.0) {
    for (Eigen::Index i = 0; i < n; ++i) out.row(i) = s.sample(rng).transpose();
    return out;
  }
  Box box = s.bounding_box();
  box.lo = (box.lo.array() - spec.tau).cwiseMax(0.0);
  box.hi = (box.hi.array() + spec.tau).cwiseMin(1.0);
  if (box.empty()) fail(ErrorKind::Degenerate, "sample_cluster: tube does not meet the unit hypercube");
  Rejector rej(std::string("sample_cluster(") + to_string(s.kind()) + ")");
  Vec x(dim);
  for (Eigen::Index i = 0; i < n;) {
    for (Eigen::Index j = 0; j < dim; ++j) x[j] = rng.uniform(box.lo[j], box.hi[j]);
    const bool ok = s.distance(x) <= spec.tau;
    rej.record(ok);
    if (ok) out.row(i++) = x.transpose();
  }
  return out;
}

PointMatrix sample_outliers(const SceneSpec& scene, Rng& rng) {
  const auto dim = static_cast<Eigen::Index>(scene.ambient_dim);
  const auto n = static_cast<Eigen::Index>(scene.n_outliers);
  PointMatrix out(n, dim);
  Rejector rej("sample_outliers");
  Vec x(dim);
  for (Eigen::Index i = 0; i < n;) {
    for (Eigen::Index j = 0; j < dim; ++j) x[j] = rng.uniform();
    bool ok = true;
    for (const auto& c : scene.clusters) {
      if (c.surface.distance(x) <= scene.delta) {
        ok = false;
        break;
      }
    }
    rej.record(ok);
    if (ok) out.row(i++) = x.transpose();
  }
  return out;
}

std::size_t SceneSpec::total_points() const {
  std::size_t n = n_outliers;
  for (const auto& c : clusters) n += c.n_points;
  return n;
}

PointCloud generate(const SceneSpec& scene) {
  const std::size_t k = scene.clusters.size();
  std::vector<PointMatrix> parts(k + 1);
  parallel_for(k + 1, [&](std::size_t i) {
    Rng rng = Rng::substream(scene.seed, i == k ? 0 : i + 1);
    parts[i] = i == k ? sample_outliers(scene, rng) : sample_cluster(scene.clusters[i], rng);
  });
  PointCloud cloud;
  cloud.points.resize(static_cast<Eigen::Index>(scene.total_points()), scene.ambient_dim);
  cloud.labels.reserve(scene.total_points());
  Eigen::Index row = 0;
  for (std::size_t i = 0; i <= k; ++i) {
    const auto& p = parts[i];
    if (p.rows() > 0) cloud.points.middleRows(row, p.rows()) = p;
    row += p.rows();
    cloud.labels.insert(cloud.labels.end(), static_cast<std::size_t>(p.rows()),
                        i == k ? 0 : static_cast<int>(i + 1));
  }
  return cloud;
}

// ---------------------------------------------------------------------------
// Separation

namespace {

double arc_pair_distance(const Surface& arc, const Surface& other) {
  const double diam = std::max(arc.diameter(), 1e-300);
  const double span = arc.angle1() - arc.angle0();
  const double step_len = kSeparationGrid * diam;
  const auto steps = static_cast<std::size_t>(std::ceil(span * arc.radius() / step_len));
  const std::size_t n = std::max<std::size_t>(steps, 16);
  const auto& u = arc.directions()[0];
  const auto& v = arc.directions()[1];
  const Vec& c = arc.points()[0];
  auto f = [&](double theta) {
    const Vec p = c + arc.radius() * (std::cos(theta) * u + std::sin(theta) * v);
    return other.distance(p);
  };
  const double h = span / static_cast<double>(n);
  double best = kInfinity;
  std::size_t best_i = 0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double val = f(arc.angle0() + h * static_cast<double>(i));
    if (val < best) {
      best = val;
      best_i = i;
    }
  }
  const double lo = arc.angle0() + h * static_cast<double>(best_i == 0 ? 0 : best_i - 1);
  const double hi = arc.angle0() + h * static_cast<double>(std::min(best_i + 1, n));
  return std::min(best, golden_min(f, lo, hi, 80));
}

}  // namespace

double surface_distance(const Surface& a, const Surface& b) {
  require(a.ambient_dim() == b.ambient_dim(), "surface_distance: dimension mismatch");
  if (a.kind() == SurfaceKind::Point) return b.distance(a.points()[0]);
  if (b.kind() == SurfaceKind::Point) return a.distance(b.points()[0]);
  if (a.kind() == SurfaceKind::Sphere || b.kind() == SurfaceKind::Sphere) {
    const Surface& sph = a.kind() == SurfaceKind::Sphere ? a : b;
    const Surface& other = a.kind() == SurfaceKind::Sphere ? b : a;
    // |y - c| ranges over [lo, hi] on the connected set `other`.
    const Vec& c = sph.points()[0];
    const double lo = other.distance(c);
    const double hi = other.max_distance(std::span<const double>(c.data(), c.size()));
    const double r = sph.radius();
    if (lo <= r && r <= hi) return 0.0;
    return std::min(std::abs(lo - r), std::abs(hi - r));
  }
  if (is_flat(a.kind()) && is_flat(b.kind())) {
    double best = kInfinity;
    for (const auto& pa : flat_pieces(a)) {
      for (const auto& pb : flat_pieces(b)) {
        Eigen::MatrixXd m(pa.gen.rows(), pa.gen.cols() + pb.gen.cols());
        m << pa.gen, -pb.gen;
        best = std::min(best, box_least_distance(pa.origin - pb.origin, m));
      }
    }
    return best;
  }
  if (a.kind() == SurfaceKind::CircleArc) return arc_pair_distance(a, b);
  return arc_pair_distance(b, a);
}

double surface_distance_tolerance(const Surface& a, const Surface& b) {
  const bool arc_free = a.kind() != SurfaceKind::CircleArc && b.kind() != SurfaceKind::CircleArc;
  const bool closed = a.kind() == SurfaceKind::Point || b.kind() == SurfaceKind::Point ||
                      a.kind() == SurfaceKind::Sphere || b.kind() == SurfaceKind::Sphere;
  if (arc_free || closed) return 1e-12;
  const Surface& arc = a.kind() == SurfaceKind::CircleArc ? a : b;
  return kSeparationGrid * arc.diameter();
}

double min_separation(const SceneSpec& scene) {
  double best = kInfinity;
  const auto& c = scene.clusters;
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j)
      best = std::min(best, surface_distance(c[i].surface, c[j].surface));
  return best;
}

void validate_scene(const SceneSpec& scene) {
  if (scene.ambient_dim < 1) fail(ErrorKind::SceneValidation, "ambient_dim must be >= 1");
  if (!(scene.delta >= 0.0)) fail(ErrorKind::SceneValidation, "delta must be >= 0");
  double max_tau = 0.0;
  for (std::size_t k = 0; k < scene.clusters.size(); ++k) {
    const auto& c = scene.clusters[k];
    const std::string tag = "cluster " + std::to_string(k + 1) + ": ";
    if (c.surface.ambient_dim() != scene.ambient_dim)
      fail(ErrorKind::SceneValidation, tag + "surface dimension differs from ambient_dim");
    try {
      c.surface.validate();
    } catch (const Error& e) {
      fail(ErrorKind::SceneValidation, tag + e.what());
    }
    if (c.n_points < 1) fail(ErrorKind::SceneValidation, tag + "n_points must be >= 1");
    if (!(c.tau >= 0.0)) fail(ErrorKind::SceneValidation, tag + "tau must be >= 0");
    if (!(c.density_ratio >= 1.0)) fail(ErrorKind::SceneValidation, tag + "density_ratio must be >= 1");
    max_tau = std::max(max_tau, c.tau);
  }
  const auto& c = scene.clusters;
  if (c.size() >= 2) {
    if (!(scene.delta > 2.0 * max_tau)) {
      std::ostringstream os;
      os << "delta " << scene.delta << " must exceed 2 * max tau = " << 2.0 * max_tau;
      fail(ErrorKind::SceneValidation, os.str());
    }
    for (std::size_t i = 0; i < c.size(); ++i) {
      for (std::size_t j = i + 1; j < c.size(); ++j) {
        const double d = surface_distance(c[i].surface, c[j].surface);
        const double tol = surface_distance_tolerance(c[i].surface, c[j].surface);
        if (d + tol < scene.delta) {
          std::ostringstream os;
          os.precision(12);
          os << "declared delta " << scene.delta << " exceeds measured min_separation " << d
             << " (clusters " << i + 1 << " and " << j + 1 << ")";
          fail(ErrorKind::SceneValidation, os.str());
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Volumes

double gamma_volume(int d, int D, double tau, double eps, double diam) {
  require(d >= 0 && D >= 1, "gamma_volume: dimensions must satisfy 0 <= d and D >= 1");
  require(d <= D, "gamma_volume: intrinsic dimension exceeds ambient dimension");
  require(tau >= 0.0 && eps >= 0.0 && diam >= 0.0, "gamma_volume: lengths must be nonnegative");
  const double te = std::min(tau, eps);
  const double span = std::max(te, std::min(diam, eps));
  return std::pow(te, D - d) * std::pow(span, d);
}

VolumeReport verify_volume_condition(const Surface& surface, double kappa, std::size_t n_mc, Rng& rng) {
  require(kappa >= 1.0, "verify_volume_condition: kappa must be >= 1");
  require(n_mc >= 1000, "verify_volume_condition: n_mc must be >= 1000");
  VolumeReport rep;
  const int d = surface.intrinsic_dim();
  if (d == 0) return rep;  // counting measure: vacuous

  const double diam = surface.diameter();
  const double total = surface.intrinsic_volume();
  const double omega = unit_ball_volume(d);
  std::vector<Vec> samples;
  samples.reserve(n_mc);
  for (std::size_t i = 0; i < n_mc; ++i) samples.push_back(surface.sample(rng));

  std::vector<Vec> probes = surface.landmarks();
  for (int i = 0; i < 6; ++i) probes.push_back(surface.sample(rng));

  constexpr int kGrid = 12;
  rep.min_ratio = kInfinity;
  rep.max_ratio = 0.0;
  rep.worst_ratio = 1.0;
  std::vector<double> dist(n_mc);
  for (const Vec& x : probes) {
    for (std::size_t i = 0; i < n_mc; ++i) dist[i] = (samples[i] - x).norm();
    for (int g = 0; g < kGrid; ++g) {
      const double eps = diam * std::pow(10.0, -2.0 + 2.0 * g / (kGrid - 1));
      const auto hits = static_cast<double>(std::count_if(dist.begin(), dist.end(), [eps](double t) { return t <= eps; }));
      const double p = hits / static_cast<double>(n_mc);
      const double ratio = p * total / (omega * std::pow(eps, d));
      const double se = hits > 0 ? std::sqrt((1.0 - p) / hits) : kInfinity;
      const double k_eff = kappa * (1.0 + 3.0 * se);
      ++rep.probes;
      rep.min_ratio = std::min(rep.min_ratio, ratio);
      rep.max_ratio = std::max(rep.max_ratio, ratio);
      rep.worst_ratio = std::max(rep.worst_ratio, ratio > 0.0 ? std::max(ratio, 1.0 / ratio) : kInfinity);
      if (!(ratio >= 1.0 / k_eff && ratio <= k_eff)) rep.pass = false;
    }
  }
  return rep;
}

double estimate_tube_ball_volume(const Surface& surface, double tau, const Vec& x, double eps,
                                 std::size_t n_samples, Rng& rng) {
  require(eps > 0.0 && n_samples > 0, "estimate_tube_ball_volume: eps and n_samples must be positive");
  const auto dim = x.size();
  Vec y(dim);
  std::size_t hits = 0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    for (Eigen::Index j = 0; j < dim; ++j) y[j] = x[j] + rng.uniform(-eps, eps);
    if ((y - x).norm() > eps) continue;
    if ((y.array() < 0.0).any() || (y.array() > 1.0).any()) continue;
    if (surface.distance(y) <= tau) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n_samples) * std::pow(2.0 * eps, static_cast<double>(dim));
}

SceneSpec parallel_segments_scene(std::size_t k, double length, double spacing, double tau,
                                  std::vector<std::size_t> n_points, double angle,
                                  std::size_t n_outliers, double delta, std::uint64_t seed) {
  require(k >= 1, "parallel_segments_scene: k must be >= 1");
  require(n_points.size() == 1 || n_points.size() == k, "parallel_segments_scene: n_points size");
  SceneSpec scene;
  scene.ambient_dim = 2;
  scene.n_outliers = n_outliers;
  scene.delta = delta;
  scene.seed = seed;
  const Vec dir = Eigen::Vector2d(std::cos(angle), std::sin(angle));
  const Vec normal = Eigen::Vector2d(-std::sin(angle), std::cos(angle));
  for (std::size_t j = 0; j < k; ++j) {
    const double off = (static_cast<double>(j) - (static_cast<double>(k) - 1.0) / 2.0) * spacing;
    const Vec center = Eigen::Vector2d(0.5, 0.5) + off * normal;
    ClusterSpec c{Surface::segment(center - 0.5 * length * dir, center + 0.5 * length * dir),
                  n_points.size() == 1 ? n_points[0] : n_points[j], tau, 1.0};
    scene.clusters.push_back(std::move(c));
  }
  return scene;
}

}  // namespace pwclust
