#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <span>

namespace pwclust {

using Vec = Eigen::VectorXd;

/// N x D coordinates, one point per row (row-major so each point is contiguous).
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline std::span<const double> row_span(const PointMatrix& m, Eigen::Index i) {
  return {m.data() + i * m.cols(), static_cast<std::size_t>(m.cols())};
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

/// Euclidean distance. Every neighbor test in the library goes through this
/// function so that range queries, graphs and linkage agree bit-for-bit.
inline double euclidean(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

}  // namespace pwclust
