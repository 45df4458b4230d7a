#include "pwclust/nngraph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pwclust/error.hpp"
#include "pwclust/parallel.hpp"

namespace pwclust {

// ---------------------------------------------------------------------------
// Kernel

Kernel Kernel::indicator(double omega) {
  require(omega > 0.0 && std::isfinite(omega), "indicator kernel: omega must be positive");
  Kernel k;
  k.kind_ = KernelKind::Indicator;
  k.omega_ = omega;
  return k;
}

Kernel Kernel::gaussian() {
  Kernel k;
  k.kind_ = KernelKind::Gaussian;
  return k;
}

Kernel Kernel::table(std::vector<double> s, std::vector<double> phi) {
  require(!s.empty() && s.size() == phi.size(), "table kernel: need matching, nonempty samples");
  require(s[0] == 0.0 && phi[0] == 1.0, "table kernel: must start at phi(0) = 1");
  for (std::size_t i = 1; i < s.size(); ++i) {
    require(s[i] > s[i - 1], "table kernel: sample positions must increase");
    require(phi[i] <= phi[i - 1] && phi[i] >= 0.0, "table kernel: values must be nonincreasing and >= 0");
  }
  Kernel k;
  k.kind_ = KernelKind::Table;
  k.omega_ = s.back();
  k.s_ = std::move(s);
  k.phi_ = std::move(phi);
  return k;
}

Kernel Kernel::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string tail = colon == std::string::npos ? "" : text.substr(colon + 1);
  try {
    if (head == "indicator") return indicator(tail.empty() ? 1.0 : std::stod(tail));
    if (head == "gaussian" && tail.empty()) return gaussian();
    if (head == "table") {
      std::vector<double> s, phi;
      std::stringstream ss(tail);
      std::string item;
      while (std::getline(ss, item, ',')) {
        const auto c = item.find(':');
        require(c != std::string::npos, "table kernel: expected s:phi pairs");
        s.push_back(std::stod(item.substr(0, c)));
        phi.push_back(std::stod(item.substr(c + 1)));
      }
      return table(std::move(s), std::move(phi));
    }
  } catch (const std::logic_error&) {
    fail(ErrorKind::InvalidArgument, "malformed kernel '" + text + "'");
  }
  fail(ErrorKind::InvalidArgument, "unknown kernel '" + text + "'");
}

double Kernel::operator()(double s) const {
  switch (kind_) {
    case KernelKind::Indicator:
      return s <= omega_ ? 1.0 : 0.0;
    case KernelKind::Gaussian:
      return std::exp(-0.5 * s * s);
    case KernelKind::Table: {
      if (s <= 0.0) return phi_[0];
      if (s > s_.back()) return 0.0;
      const auto it = std::upper_bound(s_.begin(), s_.end(), s);
      if (it == s_.end()) return phi_.back();
      const std::size_t j = static_cast<std::size_t>(it - s_.begin());
      const double t = (s - s_[j - 1]) / (s_[j] - s_[j - 1]);
      return phi_[j - 1] + t * (phi_[j] - phi_[j - 1]);
    }
  }
  return 0.0;
}

double Kernel::weight(double dist, double scale) const {
  if (kind_ == KernelKind::Indicator) return dist <= omega_ * scale ? 1.0 : 0.0;
  return (*this)(dist / scale);
}

double Kernel::reach(double cutoff) const {
  if (kind_ == KernelKind::Gaussian) {
    require(cutoff > 0.0 && cutoff < 1.0, "gaussian kernel: cutoff must lie in (0, 1)");
    return std::sqrt(2.0 * std::log(1.0 / cutoff));
  }
  return omega_;
}

std::string Kernel::describe() const {
  std::ostringstream os;
  os.precision(12);
  switch (kind_) {
    case KernelKind::Indicator: os << "indicator:" << omega_; break;
    case KernelKind::Gaussian: os << "gaussian"; break;
    case KernelKind::Table:
      os << "table:";
      for (std::size_t i = 0; i < s_.size(); ++i) os << (i ? "," : "") << s_[i] << ":" << phi_[i];
      break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// AffinityMatrix

AffinityMatrix AffinityMatrix::from_edges(std::size_t n, const std::vector<Eigen::Triplet<double>>& edges,
                                          double cutoff) {
  std::vector<Eigen::Triplet<double>> both;
  both.reserve(2 * edges.size());
  for (const auto& e : edges) {
    require(e.row() != e.col(), "affinity: self loops are not allowed");
    require(e.row() >= 0 && e.col() >= 0 && static_cast<std::size_t>(std::max(e.row(), e.col())) < n,
            "affinity: edge index out of range");
    both.emplace_back(e.row(), e.col(), e.value());
    both.emplace_back(e.col(), e.row(), e.value());
  }
  AffinityMatrix a;
  a.cutoff = cutoff;
  a.w.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  a.w.setFromTriplets(both.begin(), both.end());
  a.w.makeCompressed();
  return a;
}

// ---------------------------------------------------------------------------
// NeighborIndex

NeighborIndex::NeighborIndex(const PointMatrix& points, double cell) : pts_(points) {
  const auto n = static_cast<std::size_t>(points.rows());
  dim_ = static_cast<int>(points.cols());
  exhaustive_ = !(cell > 0.0) || !std::isfinite(cell) || n < kGridMinPoints || dim_ > kGridMaxDim || dim_ == 0;
  if (exhaustive_) return;

  lo_ = points.colwise().minCoeff().transpose();
  const Vec hi = points.colwise().maxCoeff().transpose();
  bits_ = std::min(62 / dim_, 31);
  const long long max_cells = (1LL << bits_) - 2;
  double span = (hi - lo_).maxCoeff();
  // Padding keeps a query of radius `cell` within the adjacent cells despite rounding.
  cell_ = cell * (1.0 + 1e-8);
  if (span / cell_ > static_cast<double>(max_cells)) cell_ = span / static_cast<double>(max_cells);
  extent_.resize(static_cast<std::size_t>(dim_));
  for (int j = 0; j < dim_; ++j)
    extent_[static_cast<std::size_t>(j)] = static_cast<long long>(std::floor((hi[j] - lo_[j]) / cell_)) + 1;

  sorted_.resize(n);
  for (std::size_t i = 0; i < n; ++i) sorted_[i] = {pack(cell_of(i)), i};
  std::sort(sorted_.begin(), sorted_.end());
}

NeighborIndex::Coord NeighborIndex::cell_of(std::size_t i) const {
  Coord c(static_cast<std::size_t>(dim_));
  for (int j = 0; j < dim_; ++j) {
    const auto v = static_cast<long long>(std::floor((pts_(static_cast<Eigen::Index>(i), j) - lo_[j]) / cell_));
    c[static_cast<std::size_t>(j)] = std::clamp(v, 0LL, extent_[static_cast<std::size_t>(j)] - 1);
  }
  return c;
}

std::uint64_t NeighborIndex::pack(const Coord& c) const {
  std::uint64_t key = 0;
  for (int j = 0; j < dim_; ++j) key = (key << bits_) | static_cast<std::uint64_t>(c[static_cast<std::size_t>(j)]);
  return key;
}

bool NeighborIndex::in_grid(const Coord& c) const {
  for (int j = 0; j < dim_; ++j) {
    const auto v = c[static_cast<std::size_t>(j)];
    if (v < 0 || v >= extent_[static_cast<std::size_t>(j)]) return false;
  }
  return true;
}

template <class F>
void NeighborIndex::visit_cell(const Coord& c, F&& f) const {
  if (!in_grid(c)) return;
  const std::uint64_t key = pack(c);
  auto it = std::lower_bound(sorted_.begin(), sorted_.end(), std::make_pair(key, std::size_t{0}));
  for (; it != sorted_.end() && it->first == key; ++it) f(it->second);
}

namespace {

// Calls f(offset) for every integer offset in [-m, m]^dim whose max norm is at least `min_norm`.
template <class F>
void for_offsets(int dim, long long m, long long min_norm, F&& f) {
  std::vector<long long> o(static_cast<std::size_t>(dim), -m);
  while (true) {
    long long norm = 0;
    for (auto v : o) norm = std::max(norm, v < 0 ? -v : v);
    if (norm >= min_norm) f(o);
    int j = 0;
    for (; j < dim; ++j) {
      if (++o[static_cast<std::size_t>(j)] <= m) break;
      o[static_cast<std::size_t>(j)] = -m;
    }
    if (j == dim) return;
  }
}

bool by_dist_then_index(const Neighbor& a, const Neighbor& b) {
  return a.dist < b.dist || (a.dist == b.dist && a.index < b.index);
}

}  // namespace

std::vector<Neighbor> NeighborIndex::range_with_dist(std::size_t i, double r) const {
  const auto n = static_cast<std::size_t>(pts_.rows());
  require(i < n, "range query: index out of range");
  const auto xi = row_span(pts_, static_cast<Eigen::Index>(i));
  std::vector<Neighbor> out;
  auto test = [&](std::size_t j) {
    if (j == i) return;
    const double d = euclidean(xi, row_span(pts_, static_cast<Eigen::Index>(j)));
    if (d <= r) out.push_back({j, d});
  };
  bool scan = exhaustive_;
  long long m = 0;
  if (!scan) {
    m = static_cast<long long>(std::ceil(r / cell_));
    if (static_cast<double>(m) * cell_ < r * (1.0 + 1e-9)) ++m;
    scan = std::pow(2.0 * static_cast<double>(m) + 1.0, dim_) >= static_cast<double>(n);
  }
  if (scan) {
    for (std::size_t j = 0; j < n; ++j) test(j);
    return out;
  }
  const Coord c = cell_of(i);
  Coord q(c.size());
  for_offsets(dim_, m, 0, [&](const std::vector<long long>& o) {
    for (std::size_t j = 0; j < c.size(); ++j) q[j] = c[j] + o[j];
    visit_cell(q, test);
  });
  std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) { return a.index < b.index; });
  return out;
}

std::vector<std::size_t> NeighborIndex::range(std::size_t i, double r) const {
  std::vector<std::size_t> out;
  for (const auto& nb : range_with_dist(i, r)) out.push_back(nb.index);
  return out;
}

std::vector<Neighbor> NeighborIndex::nearest(std::size_t i, std::size_t ell) const {
  const auto n = static_cast<std::size_t>(pts_.rows());
  require(i < n, "knn query: index out of range");
  require(ell >= 1 && ell + 1 <= n, "knn: ell must satisfy 1 <= ell <= N - 1");
  const auto xi = row_span(pts_, static_cast<Eigen::Index>(i));
  std::vector<Neighbor> cand;
  auto add = [&](std::size_t j) {
    if (j != i) cand.push_back({j, euclidean(xi, row_span(pts_, static_cast<Eigen::Index>(j)))});
  };
  if (exhaustive_) {
    cand.reserve(n);
    for (std::size_t j = 0; j < n; ++j) add(j);
  } else {
    const Coord c = cell_of(i);
    const long long max_ring = *std::max_element(extent_.begin(), extent_.end());
    Coord q(c.size());
    for (long long m = 0;; ++m) {
      for_offsets(dim_, m, m, [&](const std::vector<long long>& o) {
        for (std::size_t j = 0; j < c.size(); ++j) q[j] = c[j] + o[j];
        visit_cell(q, add);
      });
      if (m >= max_ring) break;
      if (cand.size() >= ell) {
        // Points outside rings 0..m are farther than m cells.
        std::nth_element(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(ell - 1), cand.end(),
                         by_dist_then_index);
        if (cand[ell - 1].dist < static_cast<double>(m) * cell_ * (1.0 - 1e-9)) break;
      }
    }
  }
  std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(ell), cand.end(), by_dist_then_index);
  cand.resize(ell);
  return cand;
}

// ---------------------------------------------------------------------------
// Graphs

namespace {

double knn_cell(const PointMatrix& points, std::size_t ell) {
  const auto n = static_cast<double>(points.rows());
  const int dim = static_cast<int>(points.cols());
  if (points.rows() == 0 || dim == 0) return 0.0;
  const Vec span = (points.colwise().maxCoeff() - points.colwise().minCoeff()).transpose();
  const double floor_len = std::max(span.maxCoeff(), 1e-300) * 1e-6;
  double vol = 1.0;
  for (int j = 0; j < dim; ++j) vol *= std::max(span[j], floor_len);
  return std::pow(vol * static_cast<double>(ell + 1) / n, 1.0 / dim);
}

AffinityMatrix assemble(std::size_t n, const std::vector<std::vector<std::pair<std::size_t, double>>>& upper,
                        double cutoff) {
  std::vector<Eigen::Triplet<double>> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [j, w] : upper[i]) edges.emplace_back(static_cast<int>(i), static_cast<int>(j), w);
  return AffinityMatrix::from_edges(n, edges, cutoff);
}

}  // namespace

std::vector<std::vector<Neighbor>> knn(const PointMatrix& points, std::size_t ell) {
  const auto n = static_cast<std::size_t>(points.rows());
  require(ell >= 1 && ell + 1 <= n, "knn: ell must satisfy 1 <= ell <= N - 1");
  const NeighborIndex index(points, knn_cell(points, ell));
  std::vector<std::vector<Neighbor>> out(n);
  parallel_for(n, [&](std::size_t i) { out[i] = index.nearest(i, ell); });
  return out;
}

LocalScales local_scales(const PointMatrix& points, std::size_t ell) {
  const auto lists = knn(points, ell);
  LocalScales ls;
  ls.ell = ell;
  ls.scales.resize(lists.size());
  std::vector<std::size_t> zero;
  for (std::size_t i = 0; i < lists.size(); ++i) {
    ls.scales[i] = lists[i].back().dist;
    if (!(ls.scales[i] > 0.0)) zero.push_back(i);
  }
  if (!zero.empty()) {
    std::ostringstream os;
    os << "local_scales: " << zero.size() << " point(s) have zero distance to neighbor number " << ell
       << " (duplicated points), first index " << zero.front();
    fail(ErrorKind::Degenerate, os.str(), zero);
  }
  return ls;
}

AffinityMatrix build_affinity(const PointMatrix& points, const Kernel& kernel, double eps, double cutoff) {
  require(eps > 0.0 && std::isfinite(eps), "build_affinity: eps must be positive");
  const auto n = static_cast<std::size_t>(points.rows());
  require(n >= 2, "build_affinity: need at least two points");
  const double radius = kernel.reach(cutoff) * eps * (kernel.compact() ? 1.0 : 1.0 + 1e-9);
  const NeighborIndex index(points, radius);
  std::vector<std::vector<std::pair<std::size_t, double>>> upper(n);
  parallel_for(n, [&](std::size_t i) {
    for (const auto& nb : index.range_with_dist(i, radius)) {
      if (nb.index <= i) continue;
      const double w = kernel.weight(nb.dist, eps);
      if (kernel.compact() ? w > 0.0 : w >= cutoff) upper[i].emplace_back(nb.index, w);
    }
  });
  return assemble(n, upper, kernel.compact() ? 0.0 : cutoff);
}

AffinityMatrix build_affinity_local(const PointMatrix& points, const Kernel& kernel, const LocalScales& scales,
                                    double cutoff) {
  const auto n = static_cast<std::size_t>(points.rows());
  require(n >= 2, "build_affinity_local: need at least two points");
  require(scales.scales.size() == n, "build_affinity_local: scale count does not match the cloud");
  for (std::size_t i = 0; i < n; ++i)
    if (!(scales.scales[i] > 0.0) || !std::isfinite(scales.scales[i]))
      fail(ErrorKind::InvalidArgument, "build_affinity_local: nonpositive scale at index " + std::to_string(i), {i});
  const double smax = *std::max_element(scales.scales.begin(), scales.scales.end());
  const double reach = kernel.reach(cutoff) * (kernel.compact() ? 1.0 : 1.0 + 1e-9);
  const NeighborIndex index(points, reach * smax);
  std::vector<std::vector<std::pair<std::size_t, double>>> upper(n);
  parallel_for(n, [&](std::size_t i) {
    const double si = scales.scales[i];
    for (const auto& nb : index.range_with_dist(i, reach * std::sqrt(si * smax))) {
      if (nb.index <= i) continue;
      const double w = kernel.weight(nb.dist, std::sqrt(si * scales.scales[nb.index]));
      if (kernel.compact() ? w > 0.0 : w >= cutoff) upper[i].emplace_back(nb.index, w);
    }
  });
  return assemble(n, upper, kernel.compact() ? 0.0 : cutoff);
}

AffinityMatrix mutual_knn(const PointMatrix& points, std::size_t ell) {
  const auto lists = knn(points, ell);
  const std::size_t n = lists.size();
  std::vector<std::vector<std::size_t>> sorted(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& nb : lists[i]) sorted[i].push_back(nb.index);
    std::sort(sorted[i].begin(), sorted[i].end());
  }
  std::vector<std::vector<std::pair<std::size_t, double>>> upper(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j : sorted[i])
      if (j > i && std::binary_search(sorted[j].begin(), sorted[j].end(), i)) upper[i].emplace_back(j, 1.0);
  return assemble(n, upper, 0.0);
}

Vec degrees(const AffinityMatrix& w) {
  Vec d = Vec::Zero(w.w.rows());
  for (Eigen::Index i = 0; i < w.w.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(w.w, i); it; ++it) d[i] += it.value();
  return d;
}

AffinityMatrix induced_subgraph(const AffinityMatrix& w, const std::vector<std::size_t>& keep) {
  std::vector<long long> map(w.size(), -1);
  for (std::size_t k = 0; k < keep.size(); ++k) {
    require(keep[k] < w.size() && (k == 0 || keep[k] > keep[k - 1]), "induced_subgraph: keep must be sorted and unique");
    map[keep[k]] = static_cast<long long>(k);
  }
  std::vector<Eigen::Triplet<double>> edges;
  for (std::size_t k = 0; k < keep.size(); ++k) {
    for (SparseMatrix::InnerIterator it(w.w, static_cast<Eigen::Index>(keep[k])); it; ++it) {
      const long long j = map[static_cast<std::size_t>(it.col())];
      if (j > static_cast<long long>(k)) edges.emplace_back(static_cast<int>(k), static_cast<int>(j), it.value());
    }
  }
  return AffinityMatrix::from_edges(keep.size(), edges, w.cutoff);
}

}  // namespace pwclust
