#include <cmath>
#include <cstring>

#include "doctest.h"
#include "pwclust/error.hpp"
#include "pwclust/io.hpp"
#include "pwclust/nngraph.hpp"
#include "pwclust/parallel.hpp"
#include "support.hpp"

using namespace pwclust;

namespace {

PointMatrix line(std::initializer_list<double> xs) {
  PointMatrix p(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::Index i = 0;
  for (double x : xs) p(i++, 0) = x;
  return p;
}

PointMatrix pair2(double d) {
  PointMatrix p(2, 2);
  p << 0.1, 0.1, 0.1 + d, 0.1;
  return p;
}

double entry(const AffinityMatrix& w, Eigen::Index i, Eigen::Index j) { return w.w.coeff(i, j); }

bool has_entry(const AffinityMatrix& w, Eigen::Index i, Eigen::Index j) {
  for (SparseMatrix::InnerIterator it(w.w, i); it; ++it)
    if (it.col() == j) return true;
  return false;
}

void check_symmetric_zero_diagonal(const AffinityMatrix& w) {
  for (Eigen::Index i = 0; i < w.w.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(w.w, i); it; ++it) {
      CHECK(it.col() != i);
      CHECK(it.value() > 0.0);
      CHECK(it.value() <= 1.0);
      CHECK(w.w.coeff(it.col(), i) == it.value());
    }
}

}  // namespace

TEST_CASE("kernel profiles") {
  const Kernel g = Kernel::gaussian();
  CHECK(g(0.0) == 1.0);
  CHECK(g(1.0) == doctest::Approx(std::exp(-0.5)));
  const Kernel ind = Kernel::indicator(0.5);
  CHECK(ind(0.5) == 1.0);
  CHECK(ind(0.51) == 0.0);
  const Kernel t = Kernel::parse("table:0:1,1:0.5,2:0");
  CHECK(t(0.5) == doctest::Approx(0.75));
  CHECK(t(3.0) == 0.0);
  CHECK(t.compact());
  CHECK_FALSE(g.compact());
  CHECK(Kernel::parse("indicator:2").omega() == 2.0);
  CHECK_THROWS_AS(Kernel::parse("table:0:1,1:2"), Error);
  CHECK_THROWS_AS(Kernel::parse("table:0:0.5,1:0"), Error);
  CHECK_THROWS_AS(Kernel::parse("cosine"), Error);
}

TEST_CASE("build_affinity examples") {
  const AffinityMatrix in = build_affinity(pair2(0.05), Kernel::indicator(1.0), 0.1);
  CHECK(entry(in, 0, 1) == 1.0);
  CHECK(entry(in, 1, 0) == 1.0);
  const AffinityMatrix out = build_affinity(pair2(0.15), Kernel::indicator(1.0), 0.1);
  CHECK(out.w.nonZeros() == 0);
  const AffinityMatrix g = build_affinity(pair2(0.1), Kernel::gaussian(), 0.1);
  CHECK(entry(g, 0, 1) == doctest::Approx(0.60653).epsilon(1e-5));
  CHECK(g.cutoff == kDefaultCutoff);
  CHECK_THROWS_AS(build_affinity(pair2(0.1), Kernel::gaussian(), 0.0), Error);
  CHECK_THROWS_AS(build_affinity(line({0.5}), Kernel::gaussian(), 0.1), Error);
}

TEST_CASE("indicator edge set equals the brute-force threshold graph") {
  Rng rng(17);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 50 + rng.index(450);
    const int dim = 1 + static_cast<int>(rng.index(3));
    const PointMatrix p = t % 2 ? testing::clumpy_cloud(n, dim, rng) : testing::random_cloud(n, dim, rng);
    const double omega = 0.5 + rng.uniform();
    const double eps = 0.02 + 0.1 * rng.uniform();
    const AffinityMatrix w = build_affinity(p, Kernel::indicator(omega), eps);
    check_symmetric_zero_diagonal(w);
    std::size_t expected = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto nb = testing::brute_range(p, i, omega * eps);
      expected += nb.size();
      for (std::size_t j : nb) CHECK(has_entry(w, static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    CHECK(static_cast<std::size_t>(w.w.nonZeros()) == expected);
  }
}

TEST_CASE("gaussian affinity matches the formula and drops entries below the cutoff") {
  Rng rng(4);
  const PointMatrix p = testing::random_cloud(300, 2, rng);
  const double eps = 0.05;
  const AffinityMatrix w = build_affinity(p, Kernel::gaussian(), eps);
  check_symmetric_zero_diagonal(w);
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (Eigen::Index j = 0; j < p.rows(); ++j) {
      if (i == j) continue;
      const double s = testing::dist(p, i, j) / eps;
      const double val = std::exp(-0.5 * s * s);
      if (val >= 1e-11) CHECK(entry(w, i, j) == doctest::Approx(val).epsilon(1e-14));
      if (val < 1e-13) CHECK_FALSE(has_entry(w, i, j));
    }
}

TEST_CASE("grid range queries match brute force") {
  Rng rng(23);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 512 + rng.index(800);
    const int dim = 1 + static_cast<int>(rng.index(4));
    const PointMatrix p = t % 3 ? testing::random_cloud(n, dim, rng) : testing::clumpy_cloud(n, dim, rng);
    const double r = 0.01 + 0.2 * rng.uniform();
    const NeighborIndex idx(p, r * (0.5 + rng.uniform()));
    CHECK_FALSE(idx.exhaustive());
    for (int q = 0; q < 20; ++q) {
      const std::size_t i = rng.index(n);
      CHECK(idx.range(i, r) == testing::brute_range(p, i, r));
    }
  }
}

TEST_CASE("knn and local_scales") {
  const PointMatrix p = line({0.0, 1.0, 3.0});
  const auto nn = knn(p, 1);
  CHECK(nn[0][0].dist == 1.0);
  CHECK(nn[1][0].dist == 1.0);
  CHECK(nn[1][0].index == 0);  // tie between 0 and 2 goes to the smaller index
  CHECK(nn[2][0].dist == 2.0);
  const LocalScales s = local_scales(p, 1);
  CHECK(s.scales == std::vector<double>{1.0, 1.0, 2.0});
  const auto all = knn(p, 2);
  for (std::size_t i = 0; i < 3; ++i) CHECK(all[i].size() == 2);
  CHECK_THROWS_AS(knn(p, 3), Error);
  CHECK_THROWS_AS(knn(p, 0), Error);

  const PointMatrix dup = line({0.2, 0.2, 0.7});
  try {
    local_scales(dup, 1);
    FAIL("expected a degenerate error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Degenerate);
    CHECK(e.indices() == std::vector<std::size_t>{0, 1});
  }
}

TEST_CASE("knn matches brute force") {
  Rng rng(31);
  for (std::size_t n : {200, 700, 1500}) {
    for (int dim : {1, 2, 3}) {
      const PointMatrix p = testing::clumpy_cloud(n, dim, rng);
      for (std::size_t ell : {1, 5, 10}) {
        const auto got = knn(p, ell);
        const LocalScales sc = local_scales(p, ell);
        for (std::size_t i = 0; i < n; ++i) {
          const auto want = testing::brute_knn(p, i, ell);
          REQUIRE(got[i].size() == ell);
          for (std::size_t t = 0; t < ell; ++t) {
            CHECK(got[i][t].index == want[t].first);
            CHECK(got[i][t].dist == want[t].second);
          }
          CHECK(sc.scales[i] == want[ell - 1].second);
        }
      }
    }
  }
}

TEST_CASE("build_affinity_local") {
  LocalScales s{{1.0, 1.0}, 1};
  PointMatrix p(2, 2);
  p << 0.0, 0.0, 1.0, 0.0;
  CHECK(entry(build_affinity_local(p, Kernel::indicator(1.0), s), 0, 1) == 1.0);
  s.scales = {0.25, 0.25};
  CHECK(build_affinity_local(p, Kernel::indicator(1.0), s).w.nonZeros() == 0);
  s.scales = {4.0, 1.0};
  CHECK(entry(build_affinity_local(p, Kernel::gaussian(), s), 0, 1) == doctest::Approx(0.88250).epsilon(1e-5));
  s.scales = {1.0};
  CHECK_THROWS_AS(build_affinity_local(p, Kernel::gaussian(), s), Error);
  s.scales = {1.0, 0.0};
  CHECK_THROWS_AS(build_affinity_local(p, Kernel::gaussian(), s), Error);
}

TEST_CASE("local indicator graph lies between the mutual and the symmetric knn graphs") {
  Rng rng(6);
  for (std::size_t n : {300, 900}) {
    const PointMatrix p = testing::clumpy_cloud(n, 2, rng);
    const std::size_t ell = 7;
    const LocalScales sc = local_scales(p, ell);
    const AffinityMatrix w = build_affinity_local(p, Kernel::indicator(1.0), sc);
    const AffinityMatrix m = mutual_knn(p, ell);
    check_symmetric_zero_diagonal(w);
    std::vector<std::vector<bool>> nn(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i)
      for (const auto& [j, d] : testing::brute_knn(p, i, ell)) nn[i][j] = true;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double d = testing::dist(p, static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        const bool formula = d <= std::sqrt(sc.scales[i] * sc.scales[j]);
        const bool edge = has_entry(w, static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        CHECK(edge == formula);
        if (nn[i][j] && nn[j][i]) CHECK(edge);
        if (edge) CHECK((nn[i][j] || nn[j][i]));
        CHECK(has_entry(m, static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) == (nn[i][j] && nn[j][i]));
      }
  }
}

TEST_CASE("degrees") {
  const AffinityMatrix two = AffinityMatrix::from_edges(2, {{0, 1, 1.0}});
  CHECK(degrees(two) == Vec{{1.0, 1.0}});
  const AffinityMatrix empty = AffinityMatrix::from_edges(3, {});
  CHECK(degrees(empty) == Vec::Zero(3));
  const AffinityMatrix tri = AffinityMatrix::from_edges(3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}});
  CHECK(degrees(tri) == Vec{{2.0, 2.0, 2.0}});
}

TEST_CASE("affinity properties: permutation invariance, eps-monotonicity, thread independence") {
  Rng rng(13);
  const std::size_t n = 800;
  const PointMatrix p = testing::clumpy_cloud(n, 2, rng);
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.index(i + 1)]);
  PointMatrix q(p.rows(), p.cols());
  for (std::size_t i = 0; i < n; ++i) q.row(static_cast<Eigen::Index>(i)) = p.row(static_cast<Eigen::Index>(perm[i]));

  const AffinityMatrix a = build_affinity(p, Kernel::gaussian(), 0.03);
  const AffinityMatrix b = build_affinity(q, Kernel::gaussian(), 0.03);
  CHECK(a.w.nonZeros() == b.w.nonZeros());
  for (std::size_t i = 0; i < n; i += 7)
    for (std::size_t j = 0; j < n; j += 3)
      CHECK(b.w.coeff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) ==
            a.w.coeff(static_cast<Eigen::Index>(perm[i]), static_cast<Eigen::Index>(perm[j])));

  const AffinityMatrix small = build_affinity(p, Kernel::indicator(), 0.02);
  const AffinityMatrix big = build_affinity(p, Kernel::indicator(), 0.035);
  for (Eigen::Index i = 0; i < small.w.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(small.w, i); it; ++it) CHECK(has_entry(big, i, it.col()));

  std::ostringstream one, four;
  set_thread_count(1);
  write_affinity_coo(one, build_affinity(p, Kernel::gaussian(), 0.03));
  set_thread_count(4);
  write_affinity_coo(four, build_affinity(p, Kernel::gaussian(), 0.03));
  set_thread_count(0);
  CHECK(one.str() == four.str());
}

TEST_CASE("induced_subgraph and coordinate export") {
  const AffinityMatrix w = AffinityMatrix::from_edges(4, {{0, 1, 0.5}, {1, 2, 1.0}, {2, 3, 0.25}});
  const AffinityMatrix s = induced_subgraph(w, {1, 2, 3});
  CHECK(s.size() == 3);
  CHECK(s.edges() == 2);
  CHECK(s.w.coeff(0, 1) == 1.0);
  CHECK(s.w.coeff(1, 2) == 0.25);
  std::ostringstream os;
  write_affinity_coo(os, w);
  CHECK(os.str() == "0 1 0.5\n1 2 1\n2 3 0.25\n");
}
