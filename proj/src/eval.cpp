#include "pwclust/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pwclust/cluster_cc.hpp"
#include "pwclust/error.hpp"

namespace pwclust {

namespace {

std::vector<int> exhaustive_assignment(const Eigen::MatrixXd& w) {
  const auto s = static_cast<int>(std::max(w.rows(), w.cols()));
  Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(s, s);
  sq.topLeftCorner(w.rows(), w.cols()) = w;
  std::vector<int> perm(static_cast<std::size_t>(s));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_val = -1.0;
  do {
    double v = 0.0;
    for (int r = 0; r < s; ++r) v += sq(r, perm[static_cast<std::size_t>(r)]);
    if (v > best_val) {
      best_val = v;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::vector<int> out(static_cast<std::size_t>(w.rows()), -1);
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    const int c = best[static_cast<std::size_t>(r)];
    out[static_cast<std::size_t>(r)] = c < w.cols() ? c : -1;
  }
  return out;
}

// Hungarian algorithm (potentials form) minimizing cost; rows <= cols, O(rows^2 cols).
std::vector<int> hungarian_min(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  std::vector<char> used(m + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j)
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace

std::vector<int> max_weight_assignment(const Eigen::MatrixXd& weight) {
  if (weight.rows() == 0 || weight.cols() == 0) return std::vector<int>(static_cast<std::size_t>(weight.rows()), -1);
  if (std::max(weight.rows(), weight.cols()) <= 8) return exhaustive_assignment(weight);
  if (weight.rows() <= weight.cols()) return hungarian_min(-weight);
  const auto by_col = hungarian_min(-weight.transpose());
  std::vector<int> out(static_cast<std::size_t>(weight.rows()), -1);
  for (std::size_t c = 0; c < by_col.size(); ++c) out[static_cast<std::size_t>(by_col[c])] = static_cast<int>(c);
  return out;
}

ScoreReport match_accuracy(const std::vector<int>& pred_raw, const std::vector<int>& truth_raw) {
  require(pred_raw.size() == truth_raw.size(), "match_accuracy: label vectors differ in length");
  auto canon = [](const std::vector<int>& raw) {
    std::vector<long long> g(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      require(raw[i] >= 0, "match_accuracy: labels must be nonnegative");
      g[i] = raw[i] == 0 ? -1 : raw[i];
    }
    return canonicalize(g);
  };
  const Partition pred = canon(pred_raw), truth = canon(truth_raw);
  ScoreReport r;
  r.k_true = static_cast<std::size_t>(truth.n_clusters);
  r.k_pred = static_cast<std::size_t>(pred.n_clusters);
  r.confusion = Eigen::MatrixXi::Zero(truth.n_clusters + 1, pred.n_clusters + 1);
  for (std::size_t i = 0; i < pred.size(); ++i) ++r.confusion(truth.labels[i], pred.labels[i]);

  const Eigen::MatrixXd inner =
      r.confusion.bottomRightCorner(truth.n_clusters, pred.n_clusters).cast<double>();
  const std::vector<int> assignment = max_weight_assignment(inner);
  double agree = r.confusion(0, 0);
  r.matching.assign(r.k_true, 0);
  for (std::size_t t = 0; t < assignment.size(); ++t) {
    if (assignment[t] < 0) continue;
    agree += inner(static_cast<Eigen::Index>(t), assignment[t]);
    r.matching[t] = assignment[t] + 1;
  }
  const double n = static_cast<double>(pred.size());
  r.error_rate = n > 0 ? 1.0 - agree / n : 0.0;
  if (r.error_rate < 0.0) r.error_rate = 0.0;
  r.exact_match = agree == n && r.k_true == r.k_pred;

  const double true_out = r.confusion.row(0).sum();
  const double pred_out = r.confusion.col(0).sum();
  if (true_out > 0 || pred_out > 0) {
    const double both = r.confusion(0, 0);
    r.outlier_precision = pred_out > 0 ? both / pred_out : 1.0;
    r.outlier_recall = true_out > 0 ? both / true_out : 1.0;
  }
  return r;
}

ThresholdReport epsilon_threshold(const SceneSpec& scene) {
  ThresholdReport r;
  const double dim = scene.ambient_dim;
  for (const auto& c : scene.clusters) {
    ThresholdEntry e;
    const double nk = static_cast<double>(c.n_points);
    const double rate = std::log(nk) / nk;
    const int d = c.surface.intrinsic_dim();
    const double size = std::max(c.tau, c.surface.diameter());
    if (d == 0) {
      e.branch2 = c.tau * std::pow(rate, 1.0 / dim);
    } else {
      e.branch1 = size * std::pow(rate, 1.0 / d);
      e.branch2 = std::pow(size, d / dim) * std::pow(c.tau, 1.0 - d / dim) * std::pow(rate, 1.0 / dim);
    }
    e.value = std::max(e.branch1, e.branch2);
    r.max = std::max(r.max, e.value);
    r.clusters.push_back(e);
  }
  return r;
}

std::vector<SamplingEntry> sampling_condition(const SceneSpec& scene) {
  std::vector<SamplingEntry> out;
  const double n = static_cast<double>(scene.total_points());
  const double dim = scene.ambient_dim;
  for (const auto& c : scene.clusters) {
    const double d = c.surface.intrinsic_dim();
    SamplingEntry e;
    e.n_k = static_cast<double>(c.n_points);
    e.required = std::max(std::pow(n, d / dim), n * std::pow(c.tau, dim - d)) * std::log(n);
    e.satisfied = e.n_k >= e.required;
    out.push_back(e);
  }
  return out;
}

CheegerResult cheeger_bruteforce(const AffinityMatrix& w) {
  const std::size_t n = w.size();
  require(n >= 2 && n <= 20, "cheeger_bruteforce: needs 2 <= N <= 20");
  CheegerResult r;
  if (extract_components(w).n_clusters != 1) {
    r.connected = false;
    r.h = 0.0;
    return r;
  }
  const Eigen::MatrixXd m = Eigen::MatrixXd(w.w);
  const Vec deg = m.rowwise().sum();
  r.h = std::numeric_limits<double>::infinity();
  const std::uint32_t total = 1u << n;
  for (std::uint32_t s = 1; s < total; ++s) {
    const auto size = static_cast<std::size_t>(__builtin_popcount(s));
    if (2 * size > n) continue;
    double cut = 0.0, vol = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(s >> i & 1u)) continue;
      vol += deg[static_cast<Eigen::Index>(i)];
      for (std::size_t j = 0; j < n; ++j)
        if (!(s >> j & 1u)) cut += m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    const double h = cut / vol;
    if (h < r.h) {
      r.h = h;
      r.subset = s;
    }
  }
  return r;
}

}  // namespace pwclust
