#include "pwclust/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pwclust/error.hpp"
#include "pwclust/version.hpp"

namespace pwclust {

namespace {

const Json& field(const Json& obj, const char* name, const std::string& where) {
  if (!obj.is_object()) fail(ErrorKind::Schema, where + ": expected an object");
  const auto it = obj.find(name);
  if (it == obj.end()) fail(ErrorKind::Schema, where + ": missing field '" + name + "'");
  return *it;
}

double number(const Json& obj, const char* name, const std::string& where) {
  const Json& v = field(obj, name, where);
  if (!v.is_number()) fail(ErrorKind::Schema, where + ": field '" + name + "' must be a number");
  return v.get<double>();
}

std::uint64_t count(const Json& obj, const char* name, const std::string& where) {
  const Json& v = field(obj, name, where);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    fail(ErrorKind::Schema, where + ": field '" + name + "' must be a nonnegative integer");
  return v.get<std::uint64_t>();
}

Vec vec(const Json& v, const std::string& where) {
  if (!v.is_array()) fail(ErrorKind::Schema, where + ": expected an array of numbers");
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) fail(ErrorKind::Schema, where + ": expected an array of numbers");
    out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
  }
  return out;
}

Vec vec_field(const Json& obj, const char* name, const std::string& where) {
  return vec(field(obj, name, where), where + "." + name);
}

Json to_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

Surface surface_from_json(const Json& j, const std::string& where) {
  const Json& kind_v = field(j, "kind", where);
  if (!kind_v.is_string()) fail(ErrorKind::Schema, where + ": field 'kind' must be a string");
  SurfaceKind kind;
  try {
    kind = surface_kind_from_string(kind_v.get<std::string>());
  } catch (const Error& e) {
    fail(ErrorKind::Schema, where + ": " + e.what());
  }
  try {
    switch (kind) {
      case SurfaceKind::Point:
        return Surface::point(vec_field(j, "p", where));
      case SurfaceKind::Segment:
        return Surface::segment(vec_field(j, "a", where), vec_field(j, "b", where));
      case SurfaceKind::Polyline: {
        const Json& vs = field(j, "vertices", where);
        if (!vs.is_array()) fail(ErrorKind::Schema, where + ": 'vertices' must be an array");
        std::vector<Vec> pts;
        for (const auto& v : vs) pts.push_back(vec(v, where + ".vertices"));
        return Surface::polyline(std::move(pts));
      }
      case SurfaceKind::CircleArc: {
        Vec u, v;
        if (j.contains("u")) u = vec_field(j, "u", where);
        if (j.contains("v")) v = vec_field(j, "v", where);
        return Surface::circle_arc(vec_field(j, "center", where), number(j, "radius", where),
                                   number(j, "angle0", where), number(j, "angle1", where), u, v);
      }
      case SurfaceKind::AffinePatch: {
        const Json& bs = field(j, "basis", where);
        if (!bs.is_array()) fail(ErrorKind::Schema, where + ": 'basis' must be an array");
        std::vector<Vec> basis;
        for (const auto& b : bs) basis.push_back(vec(b, where + ".basis"));
        const Vec ext = vec_field(j, "extents", where);
        return Surface::affine_patch(vec_field(j, "origin", where), std::move(basis),
                                     std::vector<double>(ext.data(), ext.data() + ext.size()));
      }
      case SurfaceKind::Sphere:
        return Surface::sphere(vec_field(j, "center", where), number(j, "radius", where));
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Schema) throw;
    fail(ErrorKind::Schema, where + ": " + e.what());
  }
  fail(ErrorKind::Schema, where + ": unsupported surface");
}

Json surface_to_json(const Surface& s) {
  Json j;
  j["kind"] = to_string(s.kind());
  const auto& p = s.points();
  switch (s.kind()) {
    case SurfaceKind::Point: j["p"] = to_json(p[0]); break;
    case SurfaceKind::Segment:
      j["a"] = to_json(p[0]);
      j["b"] = to_json(p[1]);
      break;
    case SurfaceKind::Polyline: {
      Json vs = Json::array();
      for (const auto& v : p) vs.push_back(to_json(v));
      j["vertices"] = vs;
      break;
    }
    case SurfaceKind::CircleArc:
      j["center"] = to_json(p[0]);
      j["radius"] = s.radius();
      j["angle0"] = s.angle0();
      j["angle1"] = s.angle1();
      j["u"] = to_json(s.directions()[0]);
      j["v"] = to_json(s.directions()[1]);
      break;
    case SurfaceKind::AffinePatch: {
      j["origin"] = to_json(p[0]);
      Json bs = Json::array();
      for (const auto& b : s.directions()) bs.push_back(to_json(b));
      j["basis"] = bs;
      j["extents"] = s.extents();
      break;
    }
    case SurfaceKind::Sphere:
      j["center"] = to_json(p[0]);
      j["radius"] = s.radius();
      break;
  }
  return j;
}

SceneSpec scene_from_json(const Json& j) {
  const std::string where = "scene";
  const Json& schema = field(j, "schema", where);
  if (!schema.is_number_integer() || schema.get<int>() != kSchemaVersion)
    fail(ErrorKind::Schema, "scene: unsupported schema version " + schema.dump() + " (expected " +
                                std::to_string(kSchemaVersion) + ")");
  SceneSpec s;
  s.ambient_dim = static_cast<int>(count(j, "ambient_dim", where));
  s.n_outliers = j.contains("n_outliers") ? count(j, "n_outliers", where) : 0;
  s.delta = j.contains("delta") ? number(j, "delta", where) : 0.0;
  s.seed = j.contains("seed") ? count(j, "seed", where) : 0;
  const Json& cs = field(j, "clusters", where);
  if (!cs.is_array()) fail(ErrorKind::Schema, "scene: 'clusters' must be an array");
  for (std::size_t k = 0; k < cs.size(); ++k) {
    const std::string cw = "scene.clusters[" + std::to_string(k) + "]";
    ClusterSpec c{surface_from_json(field(cs[k], "surface", cw), cw + ".surface"),
                  count(cs[k], "n_points", cw), cs[k].contains("tau") ? number(cs[k], "tau", cw) : 0.0,
                  cs[k].contains("density_ratio") ? number(cs[k], "density_ratio", cw) : 1.0};
    s.clusters.push_back(std::move(c));
  }
  return s;
}

Json scene_to_json(const SceneSpec& scene) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["ambient_dim"] = scene.ambient_dim;
  j["seed"] = scene.seed;
  j["delta"] = scene.delta;
  j["n_outliers"] = scene.n_outliers;
  Json cs = Json::array();
  for (const auto& c : scene.clusters) {
    Json cj;
    cj["surface"] = surface_to_json(c.surface);
    cj["n_points"] = c.n_points;
    cj["tau"] = c.tau;
    cj["density_ratio"] = c.density_ratio;
    cs.push_back(cj);
  }
  j["clusters"] = cs;
  return j;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) fail(ErrorKind::Io, "write to '" + path + "' failed");
}

SceneSpec load_scene(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    fail(ErrorKind::Schema, "scene '" + path + "': " + e.what());
  }
  return scene_from_json(j);
}

void save_scene(const std::string& path, const SceneSpec& scene) { write_json(path, scene_to_json(scene)); }

void write_json(const std::string& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

std::string format17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double sig12(double x) {
  if (!std::isfinite(x)) return x;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

void write_cloud_csv(std::ostream& out, const PointCloud& cloud) {
  for (int j = 0; j < cloud.dim(); ++j) out << "x" << j << ",";
  out << "label\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (int j = 0; j < cloud.dim(); ++j) out << format17(cloud.points(static_cast<Eigen::Index>(i), j)) << ",";
    out << (cloud.labels.empty() ? 0 : cloud.labels[i]) << "\n";
  }
}

void write_cloud_csv(const std::string& path, const PointCloud& cloud) {
  auto out = open_out(path);
  write_cloud_csv(out, cloud);
  if (!out) fail(ErrorKind::Io, "write to '" + path + "' failed");
}

PointCloud read_cloud_csv(const std::string& path) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Schema, "cloud '" + path + "': empty file");
  std::vector<std::string> header;
  {
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
  }
  const bool labeled = !header.empty() && header.back() == "label";
  const std::size_t dim = header.size() - (labeled ? 1 : 0);
  for (std::size_t j = 0; j < dim; ++j)
    if (header[j] != "x" + std::to_string(j))
      fail(ErrorKind::Schema, "cloud '" + path + "': expected column 'x" + std::to_string(j) + "'");
  if (dim == 0) fail(ErrorKind::Schema, "cloud '" + path + "': no coordinate columns");
  std::vector<double> coords;
  std::vector<int> labels;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++row;
    std::stringstream ls(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ls, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) fail(ErrorKind::Schema, "cloud '" + path + "': bad number on row " + std::to_string(row));
      if (col < dim)
        coords.push_back(v);
      else if (labeled && col == dim)
        labels.push_back(static_cast<int>(v));
      ++col;
    }
    if (col != header.size())
      fail(ErrorKind::Schema, "cloud '" + path + "': row " + std::to_string(row) + " has the wrong column count");
  }
  PointCloud c;
  c.points = Eigen::Map<PointMatrix>(coords.data(), static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(dim));
  c.labels = std::move(labels);
  return c;
}

void write_labels_csv(const std::string& path, const Partition& p) {
  std::ostringstream os;
  os << "label\n";
  for (int l : p.labels) os << l << "\n";
  write_text(path, os.str());
}

void write_affinity_coo(std::ostream& out, const AffinityMatrix& w) {
  for (Eigen::Index i = 0; i < w.w.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(w.w, i); it; ++it)
      if (it.col() > i) out << i << " " << it.col() << " " << format17(it.value()) << "\n";
}

void write_dendrogram_csv(const std::string& path, const Dendrogram& d) {
  std::ostringstream os;
  os << "step,cluster_a,cluster_b,distance\n";
  for (std::size_t s = 0; s < d.merges.size(); ++s)
    os << s << "," << d.merges[s].a << "," << d.merges[s].b << "," << format17(d.merges[s].distance) << "\n";
  write_text(path, os.str());
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t scene_hash(const SceneSpec& scene) { return fnv1a64(scene_to_json(scene).dump()); }

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace pwclust
