#pragma once

#include <cstdint>
#include <string>

#include "pwclust/nngraph.hpp"
#include "pwclust/types.hpp"

namespace pwclust {

struct EigenOptions {
  /// Matrices up to this size use the dense symmetric solver.
  std::size_t dense_limit = 512;
  /// Required residual |A u - lambda u| per pair.
  double tol = 1e-8;
  /// Restart budget; 0 means 30 * k.
  int max_restarts = 0;
  /// Upper bound on the spectrum (1 for normalized affinities). The
  /// shift-invert operator uses sigma = upper + shift_gap.
  double spectrum_upper = 1.0;
  double shift_gap = 1e-3;
  /// Use (sigma I - A)^-1 as the Krylov operator. Falls back to A itself when
  /// the average row has more than `factor_row_limit` entries or the
  /// factorization fails.
  bool shift_invert = true;
  double factor_row_limit = 200.0;
  std::uint64_t seed = 0x5eedULL;
};

struct EigenResult {
  /// Largest eigenvalues, descending.
  Vec values;
  /// Orthonormal eigenvectors as columns, sign-normalized.
  Eigen::MatrixXd vectors;
  double max_residual = 0.0;
  int restarts = 0;
  std::string method;
};

/// The k algebraically largest eigenpairs of the symmetric matrix `a`.
///
/// Above dense_limit this runs a restarted block Krylov (block Lanczos) method
/// with full reorthogonalization and Rayleigh-Ritz extraction on `a`.
/// Throws Convergence if the residual tolerance is not met within the budget.
EigenResult top_eigenpairs(const SparseMatrix& a, std::size_t k, const EigenOptions& options = {});

/// Makes the first coordinate with |u_i| > 1e-10 max |u| positive, per column.
void normalize_signs(Eigen::MatrixXd& vectors);

}  // namespace pwclust
