#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "json.hpp"
#include "pwclust/cluster_slink.hpp"
#include "pwclust/geometry.hpp"
#include "pwclust/nngraph.hpp"
#include "pwclust/partition.hpp"

namespace pwclust {

using Json = nlohmann::ordered_json;

/// Scene files are JSON objects mirroring SceneSpec, with `schema: 1`.
/// Surfaces: {"kind": "Segment", "a": [...], "b": [...]}, Point {p},
/// Polyline {vertices}, CircleArc {center, radius, angle0, angle1, u?, v?},
/// AffinePatch {origin, basis, extents}, Sphere {center, radius}.
SceneSpec scene_from_json(const Json& j);
Json scene_to_json(const SceneSpec& scene);
Json surface_to_json(const Surface& s);
Surface surface_from_json(const Json& j, const std::string& where);

SceneSpec load_scene(const std::string& path);
void save_scene(const std::string& path, const SceneSpec& scene);

/// CSV with header x0,...,x{D-1},label and 17 significant digits.
void write_cloud_csv(std::ostream& out, const PointCloud& cloud);
void write_cloud_csv(const std::string& path, const PointCloud& cloud);
/// Reads a cloud CSV; the label column is optional (labels left empty when absent).
PointCloud read_cloud_csv(const std::string& path);

/// Single `label` column aligned with the cloud rows.
void write_labels_csv(const std::string& path, const Partition& p);
/// `i j w` lines, 0-based, i < j.
void write_affinity_coo(std::ostream& out, const AffinityMatrix& w);
/// `step,cluster_a,cluster_b,distance`.
void write_dendrogram_csv(const std::string& path, const Dendrogram& d);

/// Value rounded to 12 significant digits (report convention).
double sig12(double x);
std::string format17(double x);

std::uint64_t fnv1a64(const std::string& bytes);
/// FNV-1a of the canonical JSON dump of the scene.
std::uint64_t scene_hash(const SceneSpec& scene);
std::string hex64(std::uint64_t v);

void write_json(const std::string& path, const Json& j);
std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

}  // namespace pwclust
