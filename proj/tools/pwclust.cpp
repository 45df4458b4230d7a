// pwclust: generate scenes, cluster point clouds, run separation / scale sweeps.
//
// Exit codes: 0 ok, 2 usage or invalid argument, 3 schema, 4 scene validation,
// 5 degenerate data, 6 convergence failure, 7 i/o.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pwclust/error.hpp"
#include "pwclust/io.hpp"
#include "pwclust/parallel.hpp"
#include "pwclust/pipeline.hpp"
#include "pwclust/version.hpp"

namespace fs = std::filesystem;
using namespace pwclust;

namespace {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return 2;
    case ErrorKind::Schema: return 3;
    case ErrorKind::SceneValidation: return 4;
    case ErrorKind::Degenerate: return 5;
    case ErrorKind::Convergence: return 6;
    case ErrorKind::Io: return 7;
  }
  return 1;
}

struct Options {
  std::string scene;
  std::string cloud;
  std::string out;
  std::string algo = "cc";
  std::string kernel = "indicator";
  std::string k = "auto";
  double eps = 0.0;
  std::size_t ell = 0;
  bool auto_eps = false;
  double auto_factor = 2.0;
  std::size_t k_max = 10;
  int kmeans_iterations = 1;
  bool robust = false;
  double robust_omega = 0.0;
  std::optional<std::uint64_t> seed;
  bool export_affinity = false;
  std::vector<double> deltas;
  std::vector<double> eps_grid;
  std::size_t trials = 10;
};

Json rounded(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(sig12(x));
  return a;
}

Json rounded(const Vec& v) { return rounded(std::vector<double>(v.data(), v.data() + v.size())); }

std::vector<std::string> g_outputs;
std::vector<std::string> g_volatile;

void record(const fs::path& p) { g_outputs.push_back(p.string()); }

void write_manifest(const fs::path& path, const std::string& command, const Json& config) {
  Json m;
  m["tool"] = "pwclust";
  m["version"] = kVersion;
  m["schema"] = kSchemaVersion;
  m["command"] = command;
  m["config"] = config;
  Json outs = Json::array();
  for (const auto& o : g_outputs) {
    Json e;
    e["file"] = fs::path(o).filename().string();
    e["fnv1a64"] = hex64(fnv1a64(read_text(o)));
    outs.push_back(e);
  }
  m["outputs"] = outs;
  Json vol = Json::array();
  for (const auto& o : g_volatile) vol.push_back(fs::path(o).filename().string());
  m["wall_clock_outputs"] = vol;
  write_json(path.string(), m);
}

SceneSpec load_scene_with_seed(const Options& o) {
  SceneSpec s = load_scene(o.scene);
  if (o.seed) s.seed = *o.seed;
  return s;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create directory '" + dir + "': " + ec.message());
}

PipelineConfig pipeline_config(const Options& o, bool have_scene) {
  PipelineConfig c;
  c.algorithm = algorithm_from_string(o.algo);
  c.kernel = Kernel::parse(o.kernel);
  if (o.eps > 0.0) {
    c.scale = ScaleMode::Fixed;
    c.eps = o.eps;
  } else if (o.ell > 0) {
    c.scale = ScaleMode::Local;
    c.ell = o.ell;
  } else {
    if (!have_scene) fail(ErrorKind::InvalidArgument, "automatic scale needs --scene; pass --eps or --ell");
    c.scale = ScaleMode::Auto;
    c.auto_factor = o.auto_factor;
  }
  if (o.k == "auto") {
    c.k = 0;
  } else {
    try {
      const long long k = std::stoll(o.k);
      if (k < 1) throw std::invalid_argument("k");
      c.k = static_cast<std::size_t>(k);
    } catch (const std::exception&) {
      fail(ErrorKind::InvalidArgument, "--k must be a positive integer or 'auto', got '" + o.k + "'");
    }
  }
  c.k_max = o.k_max;
  c.kmeans_iterations = o.kmeans_iterations;
  c.robust = o.robust || o.robust_omega > 0.0;
  c.robust_omega = o.robust_omega;
  return c;
}

Json config_json(const Options& o, const PipelineConfig& c) {
  Json j;
  if (!o.scene.empty()) j["scene"] = o.scene;
  if (!o.cloud.empty()) j["cloud"] = o.cloud;
  j["algorithm"] = to_string(c.algorithm);
  j["kernel"] = c.kernel.describe();
  switch (c.scale) {
    case ScaleMode::Fixed: j["scale"] = {{"mode", "fixed"}, {"eps", c.eps}}; break;
    case ScaleMode::Local: j["scale"] = {{"mode", "local"}, {"ell", c.ell}}; break;
    case ScaleMode::Auto: j["scale"] = {{"mode", "auto"}, {"factor", c.auto_factor}}; break;
  }
  j["k"] = o.k;
  j["k_max"] = c.k_max;
  j["kmeans_iterations"] = c.kmeans_iterations;
  j["robust"] = c.robust;
  if (c.robust) j["robust_omega"] = c.robust_omega > 0.0 ? Json(c.robust_omega) : Json("default");
  if (o.seed) j["seed"] = *o.seed;
  return j;
}

Json score_json(const ScoreReport& s) {
  Json j;
  j["exact_match"] = s.exact_match;
  j["error_rate"] = sig12(s.error_rate);
  j["k_true"] = s.k_true;
  j["k_pred"] = s.k_pred;
  Json conf = Json::array();
  for (Eigen::Index r = 0; r < s.confusion.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < s.confusion.cols(); ++c) row.push_back(s.confusion(r, c));
    conf.push_back(row);
  }
  j["confusion"] = conf;
  j["matching"] = s.matching;
  if (s.outlier_precision) j["outlier_precision"] = sig12(*s.outlier_precision);
  if (s.outlier_recall) j["outlier_recall"] = sig12(*s.outlier_recall);
  return j;
}

int cmd_generate(const Options& o) {
  const SceneSpec scene = load_scene_with_seed(o);
  validate_scene(scene);
  const PointCloud cloud = generate(scene);
  const fs::path out(o.out);
  if (out.has_parent_path()) ensure_dir(out.parent_path().string());
  write_cloud_csv(out.string(), cloud);
  record(out);

  Json prov;
  prov["scene_hash"] = hex64(scene_hash(scene));
  prov["seed"] = scene.seed;
  prov["version"] = kVersion;
  prov["schema"] = kSchemaVersion;
  prov["n_points"] = cloud.size();
  prov["ambient_dim"] = scene.ambient_dim;
  prov["min_separation"] = sig12(min_separation(scene));
  const fs::path side = out.string() + ".provenance.json";
  write_json(side.string(), prov);
  record(side);

  Json cfg;
  cfg["scene"] = o.scene;
  cfg["seed"] = scene.seed;
  write_manifest(out.string() + ".manifest.json", "generate", cfg);
  std::cout << "wrote " << cloud.size() << " points to " << out.string() << "\n";
  return 0;
}

int cmd_cluster(const Options& o) {
  if (o.scene.empty() && o.cloud.empty()) fail(ErrorKind::InvalidArgument, "cluster needs --scene or --cloud");
  std::optional<SceneSpec> scene;
  if (!o.scene.empty()) {
    scene = load_scene_with_seed(o);
    validate_scene(*scene);
  }
  const PipelineConfig cfg = pipeline_config(o, scene.has_value());
  const PointCloud cloud = o.cloud.empty() ? generate(*scene) : read_cloud_csv(o.cloud);
  if (scene && !o.cloud.empty() && cloud.dim() != scene->ambient_dim)
    fail(ErrorKind::InvalidArgument, "cloud dimension does not match the scene");

  const PipelineResult r = run_pipeline(cloud.points, cfg, scene ? &*scene : nullptr);

  ensure_dir(o.out);
  const fs::path dir(o.out);
  write_labels_csv((dir / "labels.csv").string(), r.partition);
  record(dir / "labels.csv");

  Json rep;
  rep["version"] = kVersion;
  rep["config"] = config_json(o, cfg);
  rep["n"] = cloud.size();
  rep["dim"] = cloud.dim();
  if (scene) {
    rep["scene_hash"] = hex64(scene_hash(*scene));
    rep["seed"] = scene->seed;
    const ThresholdReport th = epsilon_threshold(*scene);
    Json tj = Json::array();
    for (const auto& e : th.clusters)
      tj.push_back({{"branch1", sig12(e.branch1)}, {"branch2", sig12(e.branch2)}, {"value", sig12(e.value)}});
    rep["epsilon_threshold"] = {{"clusters", tj}, {"max", sig12(th.max)}};
  }
  rep["eps"] = sig12(r.eps);
  if (r.scales) rep["local_scales"] = {{"ell", r.scales->ell}, {"median", sig12(r.eps)}};
  if (cfg.algorithm != Algorithm::Slink) rep["edges"] = r.edges;
  rep["clusters"] = r.partition.n_clusters;
  rep["outliers"] = r.partition.outliers();
  if (r.spectral) {
    const SpectralResult& s = *r.spectral;
    rep["spectral"] = {{"k", s.k},
                       {"k_source", cfg.k == 0 ? "eigengap" : "fixed"},
                       {"eigenvalues", rounded(s.eigenvalues)},
                       {"gaps", rounded(s.gaps)},
                       {"max_residual", sig12(s.max_residual)},
                       {"method", s.method}};
  }
  if (r.filter) {
    const FilterResult& f = *r.filter;
    rep["filter"] = {{"threshold", sig12(f.threshold)},
                     {"kept", f.kept.size()},
                     {"discarded", f.discarded.size()},
                     {"discarded_indices", f.discarded}};
  }
  if (r.dendrogram) {
    write_dendrogram_csv((dir / "dendrogram.csv").string(), *r.dendrogram);
    record(dir / "dendrogram.csv");
    rep["dendrogram"] = "dendrogram.csv";
  }
  if (!cloud.labels.empty()) rep["score"] = score_json(match_accuracy(r.partition.labels, cloud.labels));
  rep["timings"] = "timings.json";
  write_json((dir / "report.json").string(), rep);
  record(dir / "report.json");

  if (o.export_affinity && cfg.algorithm != Algorithm::Slink) {
    const AffinityMatrix w = r.scales ? build_affinity_local(cloud.points, cfg.kernel, *r.scales)
                                      : build_affinity(cloud.points, cfg.kernel, r.eps);
    std::ostringstream os;
    write_affinity_coo(os, w);
    write_text((dir / "affinity.coo").string(), os.str());
    record(dir / "affinity.coo");
  }

  Json tj;
  for (const auto& [stage, ms] : r.timings_ms) tj[stage] = sig12(ms);
  write_json((dir / "timings.json").string(), tj);
  g_volatile.push_back((dir / "timings.json").string());

  write_manifest(dir / "manifest.json", "cluster", config_json(o, cfg));
  std::cout << r.partition.n_clusters << " clusters, " << r.partition.outliers() << " outliers";
  if (rep.contains("score"))
    std::cout << ", exact_match=" << (rep["score"]["exact_match"].get<bool>() ? "true" : "false")
              << " error_rate=" << rep["score"]["error_rate"].get<double>();
  std::cout << "\n";
  return 0;
}

int cmd_sweep(const Options& o) {
  const SceneSpec scene = load_scene_with_seed(o);
  const bool by_delta = !o.deltas.empty();
  if (by_delta == !o.eps_grid.empty())
    fail(ErrorKind::InvalidArgument, "sweep needs exactly one of --deltas or --eps-grid");
  PipelineConfig cfg = pipeline_config(o, true);
  ensure_dir(o.out);
  const fs::path dir(o.out);

  std::ostringstream csv;
  Json summary = Json::array();
  if (by_delta) {
    const SweepResult res = separation_sweep(scene, o.deltas, cfg, o.trials);
    csv << "delta,seed,exact,error_rate,runtime_ms\n";
    for (const auto& row : res.rows)
      csv << format17(row.delta) << "," << row.seed << "," << (row.exact ? 1 : 0) << "," << format17(row.error_rate)
          << "," << sig12(row.runtime_ms) << "\n";
    for (const auto& s : res.summary)
      summary.push_back({{"delta", sig12(s.delta)},
                         {"recovery_rate", sig12(s.recovery_rate)},
                         {"mean_error_rate", sig12(s.mean_error_rate)}});
  } else {
    validate_scene(scene);
    for (double e : o.eps_grid) require(e > 0.0, "--eps-grid values must be positive");
    cfg.scale = ScaleMode::Fixed;
    const std::size_t cells = o.eps_grid.size() * o.trials;
    std::vector<SweepRow> rows(cells);
    parallel_for(cells, [&](std::size_t cell) {
      const std::size_t g = cell / o.trials, t = cell % o.trials;
      SceneSpec s = scene;
      s.seed = scene.seed + t;
      PipelineConfig c = cfg;
      c.eps = o.eps_grid[g];
      const auto start = std::chrono::steady_clock::now();
      const PointCloud cloud = generate(s);
      const PipelineResult pr = run_pipeline(cloud.points, c, &s);
      const ScoreReport sc = match_accuracy(pr.partition.labels, cloud.labels);
      rows[cell] = {c.eps, s.seed, sc.exact_match, sc.error_rate,
                    std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count()};
    });
    csv << "eps,seed,exact,error_rate,runtime_ms\n";
    for (const auto& row : rows)
      csv << format17(row.delta) << "," << row.seed << "," << (row.exact ? 1 : 0) << "," << format17(row.error_rate)
          << "," << sig12(row.runtime_ms) << "\n";
    for (std::size_t g = 0; g < o.eps_grid.size(); ++g) {
      double rate = 0.0, err = 0.0;
      for (std::size_t t = 0; t < o.trials; ++t) {
        rate += rows[g * o.trials + t].exact ? 1.0 : 0.0;
        err += rows[g * o.trials + t].error_rate;
      }
      summary.push_back({{"eps", sig12(o.eps_grid[g])},
                         {"recovery_rate", sig12(rate / static_cast<double>(o.trials))},
                         {"mean_error_rate", sig12(err / static_cast<double>(o.trials))}});
    }
  }
  write_text((dir / "sweep.csv").string(), csv.str());
  g_volatile.push_back((dir / "sweep.csv").string());
  Json sj;
  sj["version"] = kVersion;
  sj["config"] = config_json(o, cfg);
  sj["trials"] = o.trials;
  sj["summary"] = summary;
  write_json((dir / "summary.json").string(), sj);
  record(dir / "summary.json");
  write_manifest(dir / "manifest.json", "sweep", sj["config"]);
  std::cout << summary.dump() << "\n";
  return 0;
}

void add_run_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--algo", o.algo, "cc, spectral or slink")->capture_default_str();
  cmd->add_option("--kernel", o.kernel, "indicator[:omega], gaussian, or table:s0:p0,s1:p1,...")
      ->capture_default_str();
  auto* eps = cmd->add_option("--eps", o.eps, "fixed scale");
  auto* ell = cmd->add_option("--ell", o.ell, "local scaling with the ell-th nearest neighbor");
  auto* aut = cmd->add_flag("--auto-eps", o.auto_eps, "eps = factor x epsilon threshold of the scene (default)");
  eps->excludes(ell)->excludes(aut);
  ell->excludes(aut);
  cmd->add_option("--auto-factor", o.auto_factor, "multiplier for --auto-eps")->capture_default_str();
  cmd->add_option("--k", o.k, "number of clusters for spectral, or 'auto'")->capture_default_str();
  cmd->add_option("--k-max", o.k_max, "largest K considered by the eigengap rule")->capture_default_str();
  cmd->add_option("--kmeans-iterations", o.kmeans_iterations, "Lloyd iterations after the orthogonal initialization")
      ->capture_default_str();
  cmd->add_flag("--robust", o.robust, "discard low-degree points before clustering");
  cmd->add_option("--robust-omega", o.robust_omega, "degree threshold factor (implies --robust; default sqrt(ln N))");
  cmd->add_option("--seed", o.seed, "override the scene seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pwclust: clustering of points sampled near smooth surfaces"};
  app.set_version_flag("--version", std::string("pwclust ") + kVersion + " (scene schema " +
                                        std::to_string(kSchemaVersion) + ")");
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("generate", "sample a point cloud from a scene file");
  gen->add_option("--scene", o.scene, "scene JSON")->required();
  gen->add_option("--out", o.out, "output CSV")->required();
  gen->add_option("--seed", o.seed, "override the scene seed");

  auto* clu = app.add_subcommand("cluster", "cluster a generated scene or a cloud CSV");
  clu->add_option("--scene", o.scene, "scene JSON (generates the cloud unless --cloud is given)");
  clu->add_option("--cloud", o.cloud, "cloud CSV (x0..,label)");
  clu->add_option("--out", o.out, "output directory")->required();
  clu->add_flag("--export-affinity", o.export_affinity, "also write affinity.coo");
  add_run_flags(clu, o);

  auto* swp = app.add_subcommand("sweep", "recovery rate over a separation or scale grid");
  swp->add_option("--scene", o.scene, "two-cluster scene JSON")->required();
  swp->add_option("--out", o.out, "output directory")->required();
  swp->add_option("--deltas", o.deltas, "separation grid, comma separated")->delimiter(',');
  swp->add_option("--eps-grid", o.eps_grid, "scale grid, comma separated")->delimiter(',');
  swp->add_option("--trials", o.trials, "seeds per grid value")->capture_default_str();
  add_run_flags(swp, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*gen) return cmd_generate(o);
    if (*clu) return cmd_cluster(o);
    return cmd_sweep(o);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
