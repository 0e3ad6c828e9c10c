#pragma once

#include <vector>

#include "trec/matrix.hpp"

namespace trec::linalg {

struct ThinQR {
  Matrix q;  // n x k, orthonormal columns
  Matrix r;  // k x k, upper triangular, nonnegative diagonal
};

struct TruncatedSVD {
  Matrix u;               // n x r, orthonormal columns
  std::vector<double> s;  // r, nonincreasing, nonnegative
  Matrix v;               // m x r, orthonormal columns
};

/// Householder thin QR, n >= k. Deterministic (no pivoting); the sign
/// convention makes every diagonal entry of R nonnegative. Rank-deficient
/// input leaves (near-)zero rows in R, which is permitted.
ThinQR qr_thin(const Matrix& a);

/// Leading-r SVD. The full decomposition is computed by one-sided Jacobi
/// with a fixed cyclic sweep order and then truncated; no randomization, so
/// identical inputs give bit-identical outputs. Sign convention: in every
/// column of U the entry of largest magnitude is nonnegative (U and V flip
/// together). Columns whose singular value is numerically zero are replaced
/// by a deterministic orthonormal completion.
TruncatedSVD svd_truncated(const Matrix& a, Index r);

/// All singular values, nonincreasing. Cheaper than svd_truncated when the
/// vectors are not needed (no V accumulation).
std::vector<double> singular_values(const Matrix& a);

/// Moore-Penrose pseudoinverse via the full SVD; singular values below
/// tol * sigma_max are treated as zero.
Matrix pinv(const Matrix& a, double tol = 1e-12);

/// Singular values below this fraction of sigma_max count as zero in rank
/// decisions.
inline constexpr double kRankCutoff = 1e-13;

}  // namespace trec::linalg
