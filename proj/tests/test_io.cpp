#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "pwclust/error.hpp"
#include "pwclust/io.hpp"
#include "pwclust/version.hpp"

using namespace pwclust;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "pwclust_test_io";
  fs::create_directories(dir);
  return dir / name;
}

SceneSpec mixed_scene() {
  SceneSpec s;
  s.ambient_dim = 3;
  s.seed = 77;
  s.delta = 0.05;
  s.n_outliers = 30;
  s.clusters.push_back({Surface::point(Vec{{0.1, 0.1, 0.1}}), 40, 0.02, 1.0});
  s.clusters.push_back({Surface::polyline({Vec{{0.3, 0.3, 0.3}}, Vec{{0.5, 0.3, 0.3}}, Vec{{0.5, 0.5, 0.3}}}), 50, 0.01, 1.0});
  s.clusters.push_back(
      {Surface::circle_arc(Vec{{0.5, 0.5, 0.7}}, 0.2, 0.0, 3.0, Vec{{1, 0, 0}}, Vec{{0, 1, 0}}), 60, 0.0, 1.0});
  s.clusters.push_back({Surface::affine_patch(Vec{{0.75, 0.1, 0.1}}, {Vec{{0, 1, 0}}, Vec{{0, 0, 1}}}, {0.3, 0.3}), 70, 0.01, 1.0});
  s.clusters.push_back({Surface::sphere(Vec{{0.8, 0.8, 0.8}}, 0.1), 80, 0.0, 1.0});
  s.clusters.push_back({Surface::segment(Vec{{0.1, 0.9, 0.1}}, Vec{{0.3, 0.9, 0.1}}), 20, 0.0, 1.0});
  return s;
}

}  // namespace

TEST_CASE("scene round trip") {
  const SceneSpec s = mixed_scene();
  const Json j = scene_to_json(s);
  CHECK(j["schema"] == kSchemaVersion);
  const SceneSpec back = scene_from_json(j);
  CHECK(scene_to_json(back).dump() == j.dump());
  CHECK(scene_hash(back) == scene_hash(s));
  const PointCloud a = generate(s), b = generate(back);
  CHECK(a.points == b.points);

  const fs::path p = scratch("scene.json");
  save_scene(p.string(), s);
  CHECK(scene_to_json(load_scene(p.string())).dump() == j.dump());
}

TEST_CASE("schema errors name the problem") {
  Json j = scene_to_json(mixed_scene());
  auto schema_error = [](const Json& bad) -> std::string {
    try {
      scene_from_json(bad);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Schema);
      return e.what();
    }
    FAIL("expected a schema error");
    return "";
  };
  Json a = j;
  a.erase("ambient_dim");
  CHECK(schema_error(a).find("ambient_dim") != std::string::npos);
  Json b = j;
  b["schema"] = 2;
  CHECK(schema_error(b).find("schema") != std::string::npos);
  Json c = j;
  c["clusters"][1]["surface"].erase("vertices");
  CHECK(schema_error(c).find("clusters[1].surface") != std::string::npos);
  Json d = j;
  d["clusters"][0]["surface"]["kind"] = "Torus";
  CHECK(schema_error(d).find("Torus") != std::string::npos);
  Json e = j;
  e["clusters"][0]["n_points"] = -3;
  CHECK(schema_error(e).find("n_points") != std::string::npos);

  const fs::path p = scratch("broken.json");
  write_text(p.string(), "{ \"schema\": 1, ");
  CHECK_THROWS_AS(load_scene(p.string()), Error);
  try {
    load_scene((scratch("") / "missing.json").string());
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::Io);
  }
}

TEST_CASE("cloud CSV round trip is exact") {
  const PointCloud c = generate(mixed_scene());
  const fs::path p = scratch("cloud.csv");
  write_cloud_csv(p.string(), c);
  const PointCloud back = read_cloud_csv(p.string());
  CHECK(back.points == c.points);
  CHECK(back.labels == c.labels);
  const std::string first = read_text(p.string());
  write_cloud_csv(p.string(), generate(mixed_scene()));
  CHECK(read_text(p.string()) == first);
  CHECK(first.substr(0, first.find('\n')) == "x0,x1,x2,label");

  write_text(p.string(), "x0,x1\n0.5,0.25\n0.125,1\n");
  const PointCloud unlabeled = read_cloud_csv(p.string());
  CHECK(unlabeled.points.rows() == 2);
  CHECK(unlabeled.labels.empty());
  write_text(p.string(), "x0,x1\n0.5\n");
  CHECK_THROWS_AS(read_cloud_csv(p.string()), Error);
  write_text(p.string(), "a,b\n0.5,0.5\n");
  CHECK_THROWS_AS(read_cloud_csv(p.string()), Error);
}

TEST_CASE("formatting helpers") {
  CHECK(sig12(0.1234567890123456) == 0.123456789012);
  CHECK(sig12(123456789012345.0) == 123456789012000.0);
  CHECK(format17(0.1) == "0.10000000000000001");
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(hex64(255) == "00000000000000ff");

  Dendrogram d;
  d.n = 3;
  d.merges = {{0, 1, 0.25, 2}, {2, 3, 0.5, 3}};
  const fs::path p = scratch("dendrogram.csv");
  write_dendrogram_csv(p.string(), d);
  CHECK(read_text(p.string()) == "step,cluster_a,cluster_b,distance\n0,0,1,0.25\n1,2,3,0.5\n");
}
