#include "pwclust/cluster_spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pwclust/cluster_cc.hpp"
#include "pwclust/error.hpp"

namespace pwclust {

SparseMatrix normalized_affinity(const AffinityMatrix& w) {
  const Vec d = degrees(w);
  std::vector<std::size_t> isolated;
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (!(d[i] > 0.0)) isolated.push_back(static_cast<std::size_t>(i));
  if (!isolated.empty()) {
    std::ostringstream os;
    os << "normalized_affinity: " << isolated.size() << " vertex(es) with zero degree, first is " << isolated.front()
       << " (filter or reconnect before spectral clustering)";
    fail(ErrorKind::Degenerate, os.str(), isolated);
  }
  const Vec inv = d.cwiseSqrt().cwiseInverse();
  SparseMatrix z = w.w;
  for (Eigen::Index i = 0; i < z.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(z, i); it; ++it) it.valueRef() = it.value() * inv[i] * inv[it.col()];
  return z;
}

EigenResult top_eigenvectors(const SparseMatrix& z, std::size_t k, const EigenOptions& options) {
  return top_eigenpairs(z, k, options);
}

Eigen::MatrixXd row_normalize(const Eigen::MatrixXd& u) {
  Eigen::MatrixXd v = u;
  std::vector<std::size_t> bad;
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    const double n = u.row(i).norm();
    if (n < 1e-12) {
      bad.push_back(static_cast<std::size_t>(i));
      continue;
    }
    v.row(i) /= n;
  }
  if (!bad.empty()) {
    std::ostringstream os;
    os << "row_normalize: " << bad.size() << " near-zero row(s) of U, first is " << bad.front()
       << " (K too large or a disconnected residue)";
    fail(ErrorKind::Degenerate, os.str(), bad);
  }
  return v;
}

namespace {

std::size_t distinct_rows(const Eigen::MatrixXd& v) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(v.rows()));
  for (Eigen::Index i = 0; i < v.rows(); ++i)
    for (Eigen::Index j = 0; j < v.cols(); ++j) rows[static_cast<std::size_t>(i)].push_back(v(i, j));
  std::sort(rows.begin(), rows.end());
  return static_cast<std::size_t>(std::unique(rows.begin(), rows.end()) - rows.begin());
}

std::vector<int> assign(const Eigen::MatrixXd& v, const Eigen::MatrixXd& centroids) {
  const Eigen::MatrixXd cos = (v * centroids.transpose()).cwiseAbs();
  std::vector<int> out(static_cast<std::size_t>(v.rows()));
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < cos.cols(); ++c)
      if (cos(i, c) > cos(i, best)) best = c;
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

Eigen::MatrixXd cluster_means(const Eigen::MatrixXd& v, const std::vector<int>& labels, Eigen::Index k,
                              bool one_based) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(k, v.cols());
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    const int l = labels[static_cast<std::size_t>(i)] - (one_based ? 1 : 0);
    if (l >= 0 && l < k) r.row(l) += v.row(i);
  }
  for (Eigen::Index c = 0; c < k; ++c) {
    const double n = r.row(c).norm();
    if (n > 0.0) r.row(c) /= n;
  }
  return r;
}

}  // namespace

KMeansResult orthogonal_init_kmeans(const Eigen::MatrixXd& v, std::size_t k, int max_iterations) {
  require(k >= 1, "orthogonal_init_kmeans: K must be >= 1");
  require(max_iterations >= 1, "orthogonal_init_kmeans: need at least one iteration");
  const auto n = v.rows();
  require(n >= 1, "orthogonal_init_kmeans: no rows");
  const std::size_t distinct = distinct_rows(v);
  if (k > distinct) {
    fail(ErrorKind::Degenerate, "orthogonal_init_kmeans: K = " + std::to_string(k) + " exceeds the " +
                                    std::to_string(distinct) + " distinct rows");
  }
  const auto kk = static_cast<Eigen::Index>(k);
  Eigen::MatrixXd centroids(kk, v.cols());
  centroids.row(0) = v.row(0);
  Vec worst = (v * v.row(0).transpose()).cwiseAbs();
  for (Eigen::Index m = 1; m < kk; ++m) {
    Eigen::Index pick = 0;
    for (Eigen::Index i = 1; i < n; ++i)
      if (worst[i] < worst[pick]) pick = i;
    centroids.row(m) = v.row(pick);
    worst = worst.cwiseMax((v * v.row(pick).transpose()).cwiseAbs());
  }

  KMeansResult res;
  std::vector<int> labels = assign(v, centroids);
  res.iterations = 1;
  for (int it = 1; it < max_iterations; ++it) {
    const Eigen::MatrixXd next = cluster_means(v, labels, kk, false);
    for (Eigen::Index c = 0; c < kk; ++c)
      if (next.row(c).norm() > 0.0) centroids.row(c) = next.row(c);
    std::vector<int> relabeled = assign(v, centroids);
    ++res.iterations;
    if (relabeled == labels) break;
    labels = std::move(relabeled);
  }
  res.partition = canonicalize(labels);
  res.centroids = centroids;
  return res;
}

EigengapEstimate estimate_k_from(const Vec& eigenvalues, std::size_t k_max) {
  require(k_max >= 1, "estimate_k: k_max must be >= 1");
  require(static_cast<std::size_t>(eigenvalues.size()) >= k_max + 1, "estimate_k: need k_max + 1 eigenvalues");
  EigengapEstimate e;
  e.eigenvalues = eigenvalues.head(static_cast<Eigen::Index>(k_max + 1));
  double best = -1.0;
  for (std::size_t k = 1; k <= k_max; ++k) {
    const double g = eigenvalues[static_cast<Eigen::Index>(k - 1)] - eigenvalues[static_cast<Eigen::Index>(k)];
    e.gaps.push_back(g);
    if (g > best) {
      best = g;
      e.k = k;
    }
  }
  return e;
}

EigengapEstimate estimate_k(const SparseMatrix& z, std::size_t k_max, const EigenOptions& options) {
  require(k_max >= 1 && k_max + 1 <= static_cast<std::size_t>(z.rows()), "estimate_k: need 1 <= k_max <= N - 1");
  return estimate_k_from(top_eigenpairs(z, k_max + 1, options).values, k_max);
}

SpectralResult spectral_cluster(const AffinityMatrix& w, const SpectralOptions& options) {
  const std::size_t n = w.size();
  require(n >= 2, "spectral_cluster: need at least two points");
  require(options.k <= n, "spectral_cluster: K exceeds the number of points");
  const SparseMatrix z = normalized_affinity(w);
  SpectralResult r;
  const std::size_t want = std::min(n, std::max(options.k, options.k == 0 ? options.k_max : 0) + 1);
  const EigenResult eig = top_eigenvectors(z, want, options.eigen);
  r.eigenvalues = eig.values;
  r.max_residual = eig.max_residual;
  r.method = eig.method;
  if (options.k == 0) {
    const std::size_t k_max = std::min(options.k_max, n - 1);
    const EigengapEstimate e = estimate_k_from(eig.values, k_max);
    r.k = e.k;
    r.gaps = e.gaps;
  } else {
    r.k = options.k;
    for (Eigen::Index i = 0; i + 1 < eig.values.size(); ++i) r.gaps.push_back(eig.values[i] - eig.values[i + 1]);
  }
  r.u = eig.vectors.leftCols(static_cast<Eigen::Index>(r.k));
  r.v = row_normalize(r.u);
  const KMeansResult km = orthogonal_init_kmeans(r.v, r.k, options.kmeans_iterations);
  r.partition = km.partition;
  r.representatives = cluster_means(r.v, r.partition.labels, r.partition.n_clusters, true);
  return r;
}

SpectralResult spectral_cluster(const PointMatrix& points, const Kernel& kernel, double eps,
                                const SpectralOptions& options) {
  return spectral_cluster(build_affinity(points, kernel, eps), options);
}

SpectralResult spectral_cluster(const PointMatrix& points, const Kernel& kernel, const LocalScales& scales,
                                const SpectralOptions& options) {
  return spectral_cluster(build_affinity_local(points, kernel, scales), options);
}

NjwDiagnostics njw_diagnostics(const AffinityMatrix& w, const std::vector<int>& labels, const EigenOptions& options) {
  const std::size_t n = w.size();
  require(labels.size() == n, "njw_diagnostics: label count does not match the graph");
  for (int l : labels) require(l >= 1, "njw_diagnostics: labels must be 1..K (remove outliers first)");
  const Partition truth = canonicalize(labels);
  const auto k = static_cast<std::size_t>(truth.n_clusters);
  require(k >= 2, "njw_diagnostics: need at least two groups");
  const auto& lab = truth.labels;

  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < n; ++i) members[static_cast<std::size_t>(lab[i] - 1)].push_back(i);

  // Within-cluster degrees.
  Vec dr = Vec::Zero(static_cast<Eigen::Index>(n));
  Vec cross = Vec::Zero(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < w.w.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(w.w, i); it; ++it) {
      if (lab[static_cast<std::size_t>(i)] == lab[static_cast<std::size_t>(it.col())])
        dr[i] += it.value();
      else
        cross[i] += it.value();
    }

  NjwDiagnostics out;
  out.k = k;
  out.n = n;
  out.zeta = std::numeric_limits<double>::infinity();
  std::vector<double> c_k(k, 0.0);
  Eigen::MatrixXd pair = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (Eigen::Index i = 0; i < w.w.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(w.w, i); it; ++it) {
      const auto a = static_cast<std::size_t>(lab[static_cast<std::size_t>(i)] - 1);
      const auto b = static_cast<std::size_t>(lab[static_cast<std::size_t>(it.col())] - 1);
      if (dr[i] <= 0.0 || dr[it.col()] <= 0.0) continue;
      const double t = it.value() * it.value() / (dr[i] * dr[it.col()]);
      if (a == b)
        c_k[a] += t;
      else
        pair(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) += t;
    }
  out.nu1 = pair.maxCoeff();

  for (std::size_t c = 0; c < k; ++c) {
    const auto& idx = members[c];
    const AffinityMatrix block = induced_subgraph(w, idx);
    if (idx.size() < 2 || extract_components(block).n_clusters != 1) {
      fail(ErrorKind::Degenerate, "njw_diagnostics: within-cluster block " + std::to_string(c + 1) +
                                      " is not connected; the eigengap is undefined");
    }
    const SparseMatrix zb = normalized_affinity(block);
    const EigenResult e = top_eigenpairs(zb, 2, options);
    const double gap = 1.0 - e.values[1];
    out.block_gaps.push_back(gap);
    out.zeta = std::min(out.zeta, gap);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t i : idx) {
      const auto ii = static_cast<Eigen::Index>(i);
      lo = std::min(lo, dr[ii]);
      hi = std::max(hi, dr[ii]);
      out.nu2 = std::max(out.nu2, cross[ii] / dr[ii] * std::sqrt(c_k[c]));
    }
    out.theta = std::max(out.theta, hi / lo);
  }
  const double kd = static_cast<double>(k);
  out.bound = 8.0 * out.theta / (out.zeta * out.zeta) * (kd * kd * out.nu1 + kd * out.nu2 * out.nu2) *
              static_cast<double>(n);

  const SparseMatrix z = normalized_affinity(w);
  const EigenResult top = top_eigenvectors(z, std::min(n, k + 1), options);
  out.eigenvalues = top.values;
  const Eigen::MatrixXd v = row_normalize(top.vectors.leftCols(static_cast<Eigen::Index>(k)));
  const Eigen::MatrixXd r = cluster_means(v, lab, static_cast<Eigen::Index>(k), true);
  for (Eigen::Index i = 0; i < v.rows(); ++i)
    out.lhs += (v.row(i) - r.row(lab[static_cast<std::size_t>(i)] - 1)).squaredNorm();
  return out;
}

}  // namespace pwclust
