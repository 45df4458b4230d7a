#include <cmath>

#include "doctest.h"
#include "pwclust/cluster_cc.hpp"
#include "pwclust/cluster_spectral.hpp"
#include "pwclust/error.hpp"
#include "pwclust/eval.hpp"
#include "pwclust/geometry.hpp"
#include "support.hpp"

using namespace pwclust;

namespace {

AffinityMatrix from_dense(const Eigen::MatrixXd& m) {
  std::vector<Eigen::Triplet<double>> e;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i + 1; j < m.cols(); ++j)
      if (m(i, j) != 0.0) e.emplace_back(static_cast<int>(i), static_cast<int>(j), m(i, j));
  return AffinityMatrix::from_edges(static_cast<std::size_t>(m.rows()), e);
}

/// Random connected weighted graph: a random spanning tree plus extra edges.
Eigen::MatrixXd random_connected(std::size_t n, double extra, Rng& rng) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 1; i < n; ++i) {
    const auto j = static_cast<Eigen::Index>(rng.index(i));
    m(static_cast<Eigen::Index>(i), j) = m(j, static_cast<Eigen::Index>(i)) = 0.1 + rng.uniform();
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (rng.uniform() < extra)
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 0.1 + rng.uniform();
  return m;
}

/// Block-diagonal W with the given connected block sizes.
Eigen::MatrixXd block_diagonal(const std::vector<std::size_t>& sizes, Rng& rng) {
  std::size_t n = 0;
  for (auto s : sizes) n += s;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::Index off = 0;
  for (auto s : sizes) {
    const auto b = static_cast<Eigen::Index>(s);
    m.block(off, off, b, b) = random_connected(s, 0.3, rng);
    off += b;
  }
  return m;
}

Eigen::MatrixXd two_blocks() {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 4);
  m(0, 1) = m(1, 0) = m(2, 3) = m(3, 2) = 1.0;
  return m;
}

}  // namespace

TEST_CASE("normalized_affinity examples") {
  Eigen::MatrixXd two = Eigen::MatrixXd::Zero(2, 2);
  two(0, 1) = two(1, 0) = 1.0;
  CHECK(Eigen::MatrixXd(normalized_affinity(from_dense(two))) == two);
  Eigen::MatrixXd tri = Eigen::MatrixXd::Ones(3, 3) - Eigen::MatrixXd::Identity(3, 3);
  const Eigen::MatrixXd zt = Eigen::MatrixXd(normalized_affinity(from_dense(tri)));
  CHECK((zt - 0.5 * tri).cwiseAbs().maxCoeff() < 1e-15);

  Rng rng(2);
  const Eigen::MatrixXd w = random_connected(30, 0.2, rng);
  const Eigen::MatrixXd z = Eigen::MatrixXd(normalized_affinity(from_dense(w)));
  CHECK(Eigen::MatrixXd(normalized_affinity(from_dense(4.0 * w))) == z);
  CHECK((Eigen::MatrixXd(normalized_affinity(from_dense(3.7 * w))) - z).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((z - testing::dense_normalized(w)).cwiseAbs().maxCoeff() < 1e-15);

  Eigen::MatrixXd iso = Eigen::MatrixXd::Zero(3, 3);
  iso(0, 2) = iso(2, 0) = 1.0;
  try {
    normalized_affinity(from_dense(iso));
    FAIL("expected a degenerate error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Degenerate);
    CHECK(e.indices() == std::vector<std::size_t>{1});
  }
}

TEST_CASE("top_eigenvectors on two 2-node blocks") {
  const SparseMatrix z = normalized_affinity(from_dense(two_blocks()));
  const EigenResult all = top_eigenvectors(z, 4);
  CHECK((all.values - Vec{{1.0, 1.0, -1.0, -1.0}}).cwiseAbs().maxCoeff() < 1e-12);
  const EigenResult top = top_eigenvectors(z, 2);
  // Projector onto the top-2 space equals the projector onto the normalized block indicators.
  Eigen::MatrixXd ind = Eigen::MatrixXd::Zero(4, 2);
  ind(0, 0) = ind(1, 0) = ind(2, 1) = ind(3, 1) = 1.0 / std::sqrt(2.0);
  const Eigen::MatrixXd p1 = top.vectors * top.vectors.transpose();
  const Eigen::MatrixXd p2 = ind * ind.transpose();
  CHECK((p1 - p2).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(top_eigenvectors(z, 0), Error);
  CHECK_THROWS_AS(top_eigenvectors(z, 5), Error);
}

TEST_CASE("eigensolver matches the dense solver") {
  Rng rng(7);
  auto check = [](const SparseMatrix& z, std::size_t k, const EigenOptions& opts) {
    const Eigen::MatrixXd zd(z);
    const Vec want = testing::dense_eigenvalues_desc(zd);
    const EigenResult got = top_eigenvectors(z, k, opts);
    REQUIRE(got.values.size() == static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) CHECK(std::abs(got.values[static_cast<Eigen::Index>(i)] - want[static_cast<Eigen::Index>(i)]) < 1e-8);
    const Eigen::MatrixXd gram = got.vectors.transpose() * got.vectors;
    CHECK((gram - Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k))).cwiseAbs().maxCoeff() < 1e-8);
    for (std::size_t i = 0; i < k; ++i) {
      const Vec u = got.vectors.col(static_cast<Eigen::Index>(i));
      CHECK((zd * u - got.values[static_cast<Eigen::Index>(i)] * u).norm() <= 1e-8);
    }
    CHECK(got.max_residual <= 1e-8);
  };
  SUBCASE("200-node random graph, dense path") {
    const SparseMatrix z = normalized_affinity(from_dense(random_connected(200, 0.05, rng)));
    check(z, 6, {});
  }
  SUBCASE("iterative path with and without shift-invert") {
    const PointMatrix p = testing::clumpy_cloud(1200, 2, rng);
    const AffinityMatrix w = build_affinity(p, Kernel::gaussian(), 0.05);
    const SparseMatrix z = normalized_affinity(w);
    EigenOptions opts;
    opts.dense_limit = 100;
    check(z, 5, opts);
    opts.shift_invert = false;
    check(z, 3, opts);
  }
  SUBCASE("iterative path on a disconnected geometric graph") {
    const PointMatrix p = testing::clumpy_cloud(900, 2, rng);
    const AffinityMatrix w = build_affinity(p, Kernel::indicator(), 0.04);
    const Partition comps = extract_components(w);
    if (comps.n_clusters < 40) {
      // Singletons have zero degree; restrict to vertices with neighbors.
      std::vector<std::size_t> keep;
      const Vec d = degrees(w);
      for (Eigen::Index i = 0; i < d.size(); ++i)
        if (d[i] > 0.0) keep.push_back(static_cast<std::size_t>(i));
      EigenOptions opts;
      opts.dense_limit = 100;
      check(normalized_affinity(induced_subgraph(w, keep)), 8, opts);
    }
  }
}

TEST_CASE("multiplicity of eigenvalue 1 equals the number of components") {
  Rng rng(9);
  for (int t = 0; t < 20; ++t) {
    std::vector<std::size_t> sizes;
    const std::size_t blocks = 1 + rng.index(5);
    for (std::size_t b = 0; b < blocks; ++b) sizes.push_back(2 + rng.index(50));
    const AffinityMatrix w = from_dense(block_diagonal(sizes, rng));
    const Vec ev = testing::dense_eigenvalues_desc(Eigen::MatrixXd(normalized_affinity(w)));
    Eigen::Index ones = 0;
    while (ones < ev.size() && ev[ones] > 1.0 - 1e-9) ++ones;
    CHECK(ones == extract_components(w).n_clusters);
    CHECK(ev[0] <= 1.0 + 1e-12);
    CHECK(ev[ev.size() - 1] >= -1.0 - 1e-12);
  }
}

TEST_CASE("row_normalize") {
  Eigen::MatrixXd u(2, 2);
  u << 3, 4, 0.6, 0.8;
  const Eigen::MatrixXd v = row_normalize(u);
  CHECK(v(0, 0) == doctest::Approx(0.6));
  CHECK(v(0, 1) == doctest::Approx(0.8));
  CHECK(v(1, 0) == doctest::Approx(0.6));
  u(1, 0) = 1e-13;
  u(1, 1) = 0.0;
  try {
    row_normalize(u);
    FAIL("expected a degenerate error");
  } catch (const Error& e) {
    CHECK(e.indices() == std::vector<std::size_t>{1});
  }
}

TEST_CASE("orthogonal_init_kmeans") {
  Eigen::MatrixXd v(6, 2);
  v << 1, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0, 1;
  const KMeansResult r = orthogonal_init_kmeans(v, 2);
  CHECK(r.partition.labels == std::vector<int>{1, 1, 2, 1, 2, 2});
  CHECK(orthogonal_init_kmeans(v, 1).partition.n_clusters == 1);
  CHECK_THROWS_AS(orthogonal_init_kmeans(v, 3), Error);

  // Noisy rows around two orthonormal directions against the exhaustive spherical K-means optimum.
  Rng rng(10);
  for (int t = 0; t < 20; ++t) {
    const double a = 2 * M_PI * rng.uniform();
    const Vec e1{{std::cos(a), std::sin(a), 0.0}}, e2{{-std::sin(a), std::cos(a), 0.0}};
    const int n = 12;
    Eigen::MatrixXd rows(n, 3);
    for (int i = 0; i < n; ++i) {
      Vec x = (rng.uniform() < 0.5 ? 1.0 : -1.0) * (rng.uniform() < 0.5 ? e1 : e2);
      for (int j = 0; j < 3; ++j) x[j] += 1e-3 * rng.normal();
      rows.row(i) = x.normalized().transpose();
    }
    double best = -1.0;
    std::vector<int> best_labels;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      // Score a grouping by the summed squared cosines to each group's principal direction.
      double score = 0.0;
      for (int g = 0; g < 2; ++g) {
        Eigen::Matrix3d c = Eigen::Matrix3d::Zero();
        for (int i = 0; i < n; ++i)
          if (static_cast<int>((mask >> i) & 1) == g) c += rows.row(i).transpose() * rows.row(i);
        score += Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(c).eigenvalues().maxCoeff();
      }
      if (score > best + 1e-12) {
        best = score;
        best_labels.assign(static_cast<std::size_t>(n), 0);
        for (int i = 0; i < n; ++i) best_labels[static_cast<std::size_t>(i)] = static_cast<int>((mask >> i) & 1);
      }
    }
    CHECK(testing::same_grouping(orthogonal_init_kmeans(rows, 2).partition.labels, best_labels));
  }
}

TEST_CASE("spectral_cluster end to end") {
  SUBCASE("two point clusters, gaussian kernel") {
    SceneSpec s;
    s.ambient_dim = 2;
    s.clusters.push_back({Surface::point(Vec{{0.2, 0.2}}), 200, 0.05, 1.0});
    s.clusters.push_back({Surface::point(Vec{{0.8, 0.8}}), 200, 0.05, 1.0});
    s.delta = 0.6;
    s.seed = 12;
    const PointCloud c = generate(s);
    SpectralOptions o;
    o.k = 2;
    const SpectralResult r = spectral_cluster(c.points, Kernel::gaussian(), 0.02, o);
    CHECK(match_accuracy(r.partition.labels, c.labels).exact_match);
  }
  SUBCASE("block-diagonal W") {
    Rng rng(14);
    const AffinityMatrix w = from_dense(block_diagonal({30, 40, 25}, rng));
    SpectralOptions o;
    o.k = 3;
    const SpectralResult r = spectral_cluster(w, o);
    std::vector<int> truth(95, 1);
    for (int i = 30; i < 70; ++i) truth[static_cast<std::size_t>(i)] = 2;
    for (int i = 70; i < 95; ++i) truth[static_cast<std::size_t>(i)] = 3;
    CHECK(match_accuracy(r.partition.labels, truth).exact_match);
    double spread = 0.0;
    for (Eigen::Index i = 0; i < 95; ++i) {
      const int l = r.partition.labels[static_cast<std::size_t>(i)] - 1;
      spread += (r.v.row(i) - r.representatives.row(l)).squaredNorm();
    }
    CHECK(spread <= 1e-12);
  }
  SUBCASE("three segment clusters at twice the threshold") {
    int exact = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const SceneSpec s = parallel_segments_scene(3, 0.7, 0.1, 0.01, {1000}, 0.3, 0, 0.1, 100 + seed);
      const PointCloud c = generate(s);
      SpectralOptions o;
      o.k = 3;
      const SpectralResult r = spectral_cluster(c.points, Kernel::indicator(), 2.0 * epsilon_threshold(s).max, o);
      exact += match_accuracy(r.partition.labels, c.labels).exact_match ? 1 : 0;
    }
    CHECK(exact >= 18);
  }
}

TEST_CASE("estimate_k") {
  const EigengapEstimate two = estimate_k(normalized_affinity(from_dense(two_blocks())), 3);
  CHECK(two.k == 2);
  REQUIRE(two.gaps.size() == 3);
  CHECK(two.gaps[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(two.gaps[1] == doctest::Approx(2.0));
  CHECK(two.gaps[2] == doctest::Approx(0.0).epsilon(1e-12));

  Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(9, 9);
  for (int b = 0; b < 3; ++b)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i != j) tri(3 * b + i, 3 * b + j) = 1.0;
  const Vec ev = testing::dense_eigenvalues_desc(testing::dense_normalized(tri));
  std::size_t oracle = 1;
  for (std::size_t k = 2; k <= 5; ++k)
    if (ev[static_cast<Eigen::Index>(k - 1)] - ev[static_cast<Eigen::Index>(k)] >
        ev[static_cast<Eigen::Index>(oracle - 1)] - ev[static_cast<Eigen::Index>(oracle)])
      oracle = k;
  CHECK(oracle == 3);
  CHECK(estimate_k(normalized_affinity(from_dense(tri)), 5).k == 3);

  Rng rng(15);
  const PointMatrix p = testing::random_cloud(300, 2, rng);
  const SparseMatrix z = normalized_affinity(build_affinity(p, Kernel::gaussian(), 0.3));
  const Vec evs = testing::dense_eigenvalues_desc(Eigen::MatrixXd(z));
  CHECK(evs[0] - evs[1] > evs[1] - evs[2]);
  CHECK(estimate_k(z, 10).k == 1);

  CHECK(estimate_k_from(Vec{{1.0, 0.5, 0.0, -0.5}}, 3).k == 1);  // equal gaps: smallest k
}

TEST_CASE("njw_diagnostics") {
  SUBCASE("two 2-node blocks") {
    const NjwDiagnostics d = njw_diagnostics(from_dense(two_blocks()), {1, 1, 2, 2});
    CHECK(d.theta == 1.0);
    CHECK(d.zeta == doctest::Approx(2.0));
    CHECK(d.nu1 == 0.0);
    CHECK(d.nu2 == 0.0);
    CHECK(d.lhs <= 1e-12);
  }
  SUBCASE("block-diagonal") {
    Rng rng(16);
    const AffinityMatrix w = from_dense(block_diagonal({20, 30, 10}, rng));
    std::vector<int> truth(60, 1);
    for (int i = 20; i < 50; ++i) truth[static_cast<std::size_t>(i)] = 2;
    for (int i = 50; i < 60; ++i) truth[static_cast<std::size_t>(i)] = 3;
    const NjwDiagnostics d = njw_diagnostics(w, truth);
    CHECK(d.nu1 == 0.0);
    CHECK(d.nu2 == 0.0);
    CHECK(d.lhs <= 1e-12);
  }
  SUBCASE("quantities against a dense computation") {
    Rng rng(17);
    const std::size_t n = 40;
    Eigen::MatrixXd w = block_diagonal({18, 22}, rng);
    for (int t = 0; t < 15; ++t) {
      const auto i = static_cast<Eigen::Index>(rng.index(18)), j = static_cast<Eigen::Index>(18 + rng.index(22));
      w(i, j) = w(j, i) = 0.05 * rng.uniform();
    }
    std::vector<int> lab(n, 1);
    for (std::size_t i = 18; i < n; ++i) lab[i] = 2;
    const NjwDiagnostics d = njw_diagnostics(from_dense(w), lab);

    Vec dring(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (lab[i] == lab[j]) s += w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      dring[static_cast<Eigen::Index>(i)] = s;
    }
    double nu1 = 0.0, c1 = 0.0, c2 = 0.0, theta = 1.0, nu2 = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double q = std::pow(w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), 2) /
                         (dring[static_cast<Eigen::Index>(i)] * dring[static_cast<Eigen::Index>(j)]);
        if (lab[i] == 1 && lab[j] == 2) nu1 += q;
        if (lab[i] == 1 && lab[j] == 1) c1 += q;
        if (lab[i] == 2 && lab[j] == 2) c2 += q;
        if (lab[i] == lab[j])
          theta = std::max(theta, dring[static_cast<Eigen::Index>(i)] / dring[static_cast<Eigen::Index>(j)]);
      }
    for (std::size_t i = 0; i < n; ++i) {
      double cross = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (lab[i] != lab[j]) cross += w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      nu2 = std::max(nu2, cross / dring[static_cast<Eigen::Index>(i)] * std::sqrt(lab[i] == 1 ? c1 : c2));
    }
    double zeta = 2.0;
    for (auto [off, len] : {std::pair<Eigen::Index, Eigen::Index>{0, 18}, {18, 22}}) {
      const Vec ev = testing::dense_eigenvalues_desc(testing::dense_normalized(w.block(off, off, len, len)));
      zeta = std::min(zeta, 1.0 - ev[1]);
    }
    CHECK(d.nu1 == doctest::Approx(nu1).epsilon(1e-10));
    CHECK(d.nu2 == doctest::Approx(nu2).epsilon(1e-10));
    CHECK(d.theta == doctest::Approx(theta).epsilon(1e-12));
    CHECK(d.zeta == doctest::Approx(zeta).epsilon(1e-10));
    CHECK(d.bound == doctest::Approx(8 * theta / (zeta * zeta) * (4 * nu1 + 2 * nu2 * nu2) * 40).epsilon(1e-9));
    CHECK(d.lhs <= d.bound);
  }
  CHECK_THROWS_AS(njw_diagnostics(from_dense(two_blocks()), {1, 1, 1, 1}), Error);
  CHECK_THROWS_AS(njw_diagnostics(from_dense(two_blocks()), {1, 2, 1, 2}), Error);
}
