#include "pwclust/eigensolver.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "pwclust/error.hpp"
#include "pwclust/rng.hpp"

namespace pwclust {

void normalize_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    auto col = vectors.col(c);
    const double big = col.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (std::abs(col[i]) > 1e-10 * big) {
        if (col[i] < 0.0) col = -col;
        break;
      }
    }
  }
}

namespace {

double max_residual(const SparseMatrix& a, const Vec& values, const Eigen::MatrixXd& vectors) {
  const Eigen::MatrixXd av = a * vectors;
  double r = 0.0;
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) r = std::max(r, (av.col(c) - values[c] * vectors.col(c)).norm());
  return r;
}

EigenResult dense_top(const SparseMatrix& a, std::size_t k) {
  const Eigen::MatrixXd m = Eigen::MatrixXd(a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  if (es.info() != Eigen::Success) fail(ErrorKind::Convergence, "dense symmetric eigensolver failed");
  const auto n = m.rows();
  const auto kk = static_cast<Eigen::Index>(k);
  EigenResult r;
  r.values.resize(kk);
  r.vectors.resize(n, kk);
  for (Eigen::Index c = 0; c < kk; ++c) {
    r.values[c] = es.eigenvalues()[n - 1 - c];
    r.vectors.col(c) = es.eigenvectors().col(n - 1 - c);
  }
  r.method = "dense";
  return r;
}

// Appends `y` to the orthonormal basis columns [0, filled) after two passes of
// classical Gram-Schmidt. Returns false if y is (numerically) in the span.
bool orthonormalize_into(Eigen::MatrixXd& basis, Eigen::Index filled, Vec y) {
  const double before = y.norm();
  if (before == 0.0) return false;
  for (int pass = 0; pass < 2; ++pass) {
    if (filled > 0) y -= basis.leftCols(filled) * (basis.leftCols(filled).transpose() * y);
  }
  const double after = y.norm();
  if (after <= 1e-10 * before) return false;
  basis.col(filled) = y / after;
  return true;
}

}  // namespace

EigenResult top_eigenpairs(const SparseMatrix& a, std::size_t k, const EigenOptions& options) {
  const auto n = static_cast<std::size_t>(a.rows());
  require(a.rows() == a.cols(), "top_eigenpairs: matrix must be square");
  require(k >= 1 && k <= n, "top_eigenpairs: need 1 <= k <= N");

  const std::size_t block = std::min(n, std::max(k + 8, 2 * k));
  constexpr std::size_t kDepth = 4;
  if (n <= options.dense_limit || 2 * block * kDepth > n) {
    EigenResult r = dense_top(a, k);
    normalize_signs(r.vectors);
    r.max_residual = max_residual(a, r.values, r.vectors);
    return r;
  }

  // Krylov operator.
  std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)> op;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  std::string method = "block-krylov";
  const double avg_row = static_cast<double>(a.nonZeros()) / static_cast<double>(n);
  if (options.shift_invert && avg_row <= options.factor_row_limit) {
    const double sigma = options.spectrum_upper + options.shift_gap;
    Eigen::SparseMatrix<double> shifted = -Eigen::SparseMatrix<double>(a);
    Eigen::SparseMatrix<double> id(a.rows(), a.cols());
    id.setIdentity();
    shifted += sigma * id;
    ldlt.compute(shifted);
    if (ldlt.info() == Eigen::Success) {
      op = [&ldlt](const Eigen::MatrixXd& x) -> Eigen::MatrixXd { return ldlt.solve(x); };
      method = "block-krylov-shift-invert";
    }
  }
  if (!op) op = [&a](const Eigen::MatrixXd& x) -> Eigen::MatrixXd { return a * x; };

  const int budget = options.max_restarts > 0 ? options.max_restarts : static_cast<int>(30 * k);
  const auto nn = static_cast<Eigen::Index>(n);
  const auto p = static_cast<Eigen::Index>(block);
  const auto dim = p * static_cast<Eigen::Index>(kDepth);
  Rng rng(options.seed);
  auto random_vec = [&] {
    Vec v(nn);
    for (Eigen::Index i = 0; i < nn; ++i) v[i] = rng.normal();
    return v;
  };

  Eigen::MatrixXd x(nn, p);
  for (Eigen::Index c = 0; c < p; ++c) x.col(c) = random_vec();

  EigenResult best;
  double best_res = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart <= budget; ++restart) {
    Eigen::MatrixXd basis(nn, dim);
    Eigen::Index filled = 0;
    auto push = [&](const Vec& y) {
      if (orthonormalize_into(basis, filled, y)) {
        ++filled;
        return;
      }
      // Deflated direction: replace by a fresh random vector.
      for (int tries = 0; tries < 8; ++tries)
        if (orthonormalize_into(basis, filled, random_vec())) {
          ++filled;
          return;
        }
      fail(ErrorKind::Convergence, "top_eigenpairs: could not extend the Krylov basis");
    };
    for (Eigen::Index c = 0; c < p; ++c) push(x.col(c));
    for (std::size_t depth = 1; depth < kDepth; ++depth) {
      const Eigen::MatrixXd y = op(basis.middleCols(filled - p, p));
      for (Eigen::Index c = 0; c < p; ++c) push(y.col(c));
    }

    const Eigen::MatrixXd ab = a * basis;
    Eigen::MatrixXd t = basis.transpose() * ab;
    t = 0.5 * (t + t.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    if (es.info() != Eigen::Success) fail(ErrorKind::Convergence, "top_eigenpairs: projected eigensolver failed");
    // Top p Ritz pairs, descending.
    Eigen::MatrixXd s(dim, p);
    Vec theta(p);
    for (Eigen::Index c = 0; c < p; ++c) {
      s.col(c) = es.eigenvectors().col(dim - 1 - c);
      theta[c] = es.eigenvalues()[dim - 1 - c];
    }
    x = basis * s;
    const Eigen::MatrixXd ax = ab * s;
    double res = 0.0;
    for (Eigen::Index c = 0; c < static_cast<Eigen::Index>(k); ++c)
      res = std::max(res, (ax.col(c) - theta[c] * x.col(c)).norm());

    if (res < best_res) {
      best_res = res;
      best.values = theta.head(static_cast<Eigen::Index>(k));
      best.vectors = x.leftCols(static_cast<Eigen::Index>(k));
      best.restarts = restart;
    }
    // Aim well below the contract so that downstream eigenvectors are accurate.
    if (res <= 1e-2 * options.tol) break;
  }
  if (!(best_res <= options.tol)) {
    std::ostringstream os;
    os << "top_eigenpairs: residual " << best_res << " above tolerance " << options.tol << " after " << budget
       << " restarts (" << method << ")";
    fail(ErrorKind::Convergence, os.str());
  }
  best.method = method;
  normalize_signs(best.vectors);
  best.max_residual = max_residual(a, best.values, best.vectors);
  return best;
}

}  // namespace pwclust
