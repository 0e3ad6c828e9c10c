#include "trec/tangent.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "trec/flops.hpp"
#include "trec/kernels.hpp"

namespace trec {

namespace {

// Leading-order accounting: a gemm of extents (m, k, p) counts its m*k*p
// multiply-adds iff at least two extents exceed r1. This keeps exactly the
// terms that grow with two or more problem dimensions.
std::uint64_t leading(Index m, Index k, Index p, Index r1) {
  const int big = (m > r1) + (k > r1) + (p > r1);
  return big >= 2 ? static_cast<std::uint64_t>(m) * k * p : 0;
}

void check_basis(const DenseTensor& z, const ModeOneBasis& basis) {
  const Index n1 = z.dim(1);
  const Index q = z.size() / n1;
  if (basis.u.rows() != n1 || basis.v.rows() != q || basis.u.cols() != basis.v.cols())
    throw std::invalid_argument("tangent: basis shape does not match tensor");
}

// w -= B (B^T w) for an orthonormal block B; two passes keep the residual
// orthogonal to span(B) even when w is small.
void project_out(const Matrix& b, Matrix& w) {
  for (int pass = 0; pass < 2; ++pass) {
    Matrix coeff(b.cols(), w.cols());
    kernels::gemm_tn(b.cols(), b.rows(), w.cols(), b.data(), w.data(), coeff.data());
    Matrix corr(b.rows(), w.cols());
    kernels::gemm_nn(b.rows(), b.cols(), w.cols(), b.data(), coeff.data(), corr.data());
    kernels::add_scaled(w.size(), w.data(), -1.0, corr.data(), w.data());
    flops::add(2ull * b.rows() * b.cols() * w.cols());
  }
}

}  // namespace

DenseTensor project_dense(const DenseTensor& z, const ModeOneBasis& basis,
                          std::uint64_t* leading_macs) {
  check_basis(z, basis);
  const Index n1 = z.dim(1);
  const Index q = z.size() / n1;
  const Index r1 = basis.u.cols();
  const double* zm = z.data();
  std::uint64_t lead = 0;

  // A1 = Uhat^T Z
  std::vector<double> a1(r1 * q);
  kernels::gemm_tn(r1, n1, q, basis.u.data(), zm, a1.data());
  lead += leading(r1, n1, q, r1);

  // A2 = Uhat A1 (the column-space component)
  DenseTensor out(z.dims());
  kernels::gemm_nn(n1, r1, q, basis.u.data(), a1.data(), out.data());
  lead += leading(n1, r1, q, r1);

  // D = Z - A2
  std::vector<double> d(n1 * q);
  kernels::add_scaled(n1 * q, zm, -1.0, out.data(), d.data());

  // A3 = D Vhat, A4 = A3 Vhat^T (the residual row-space component)
  std::vector<double> a3(n1 * r1);
  kernels::gemm_nn(n1, q, r1, d.data(), basis.v.data(), a3.data());
  lead += leading(n1, q, r1, r1);
  std::vector<double> a4(n1 * q);
  kernels::gemm_nt(n1, r1, q, a3.data(), basis.v.data(), a4.data());
  lead += leading(n1, r1, q, r1);

  kernels::axpy(n1 * q, 1.0, a4.data(), out.data());

  flops::add(4ull * n1 * q * r1);
  if (leading_macs) *leading_macs += lead;
  return out;
}

FactoredTangentPoint project_factored(const DenseTensor& z, const ModeOneBasis& basis) {
  check_basis(z, basis);
  const Index n1 = z.dim(1);
  const Index q = z.size() / n1;
  const Index r1 = basis.u.cols();
  const double* zm = z.data();

  // P = Z Vhat, C = Uhat^T P
  Matrix p(n1, r1);
  kernels::gemm_nn(n1, q, r1, zm, basis.v.data(), p.data());
  Matrix c(r1, r1);
  kernels::gemm_tn(r1, n1, r1, basis.u.data(), p.data(), c.data());
  flops::add(static_cast<std::uint64_t>(n1) * q * r1 +
             static_cast<std::uint64_t>(r1) * n1 * r1);

  // Y1 = (I - Uhat Uhat^T) Z Vhat
  Matrix y1 = p;
  project_out(basis.u, y1);

  // Y2 = (I - Vhat Vhat^T) Z^T Uhat
  Matrix y2(q, r1);
  kernels::gemm_tn(q, n1, r1, zm, basis.u.data(), y2.data());
  flops::add(static_cast<std::uint64_t>(q) * n1 * r1);
  project_out(basis.v, y2);

  const linalg::ThinQR qr1 = linalg::qr_thin(y1);
  const linalg::ThinQR qr2 = linalg::qr_thin(y2);

  FactoredTangentPoint out;
  out.left = hcat(basis.u, qr1.q);
  out.right = hcat(basis.v, qr2.q);
  out.mid = Matrix(2 * r1, 2 * r1);
  for (Index j = 0; j < r1; ++j)
    for (Index i = 0; i < r1; ++i) {
      out.mid(i, j) = c(i, j);
      out.mid(i, j + r1) = qr2.r(j, i);  // R2^T
      out.mid(i + r1, j) = qr1.r(i, j);  // R1
    }
  return out;
}

RetractResult fused_retract(const DenseTensor& z, const ModeOneBasis& basis,
                            const MultilinearRank& r) {
  check_basis(z, basis);
  if (r.order() != z.order())
    throw std::invalid_argument("fused_retract: rank vector length mismatch");
  const Index n1 = z.dim(1);
  const Index q = z.size() / n1;
  const Index r1 = basis.u.cols();
  if (r[1] != r1)
    throw std::invalid_argument("fused_retract: basis rank does not match r_1");
  std::uint64_t lead = 0;

  // Factored projection; its two big products are the leading terms.
  FactoredTangentPoint fp = project_factored(z, basis);
  lead += leading(n1, q, r1, r1);  // Z Vhat
  lead += leading(q, n1, r1, r1);  // Z^T Uhat

  // Rank-r1 SVD of the small mid matrix replaces the mode-1 SVD of the full
  // unfolding.
  linalg::TruncatedSVD mid_svd = linalg::svd_truncated(fp.mid, r1);

  Matrix u1(n1, r1);
  kernels::gemm_nn(n1, 2 * r1, r1, fp.left.data(), mid_svd.u.data(), u1.data());
  lead += leading(n1, 2 * r1, r1, r1);
  Matrix vnew(q, r1);
  kernels::gemm_nn(q, 2 * r1, r1, fp.right.data(), mid_svd.v.data(), vnew.data());
  lead += leading(q, 2 * r1, r1, r1);
  flops::add(static_cast<std::uint64_t>(n1 + q) * 2 * r1 * r1);

  // B = M1^{-1}(Sigma V^T [Vhat Q2]^T) = M1^{-1}(Sigma vnew^T): elementwise.
  Matrix b1(r1, q);
  for (Index j = 0; j < q; ++j)
    for (Index i = 0; i < r1; ++i) b1(i, j) = mid_svd.s[i] * vnew(j, i);

  std::vector<Index> bdims = z.dims();
  bdims[0] = r1;
  DenseTensor b = tensorize(b1, bdims, 1);

  // Remaining modes exactly as in the sequential truncation.
  TuckerFactorization fact;
  fact.factors.resize(z.order());
  fact.factors[0] = std::move(u1);
  std::vector<Index> order = mode1_first_order(r);
  for (std::size_t oi = 1; oi < order.size(); ++oi) {
    const Index m = order[oi];
    const Matrix unf = matricize(b, m);
    const Index rm = std::min<Index>(r[m], std::min(unf.rows(), unf.cols()));
    linalg::TruncatedSVD svd = linalg::svd_truncated(unf, rm);
    fact.factors[m - 1] = std::move(svd.u);
    Matrix sv(rm, svd.v.rows());
    for (Index j = 0; j < sv.cols(); ++j)
      for (Index i = 0; i < rm; ++i) sv(i, j) = svd.s[i] * svd.v(j, i);
    std::vector<Index> next_dims = b.dims();
    next_dims[m - 1] = rm;
    b = tensorize(sv, next_dims, m);
  }
  fact.core = std::move(b);

  // Compose the dense iterate; the last mode product carries the n^d r term.
  DenseTensor dense = fact.core;
  for (Index k = 1; k <= z.order(); ++k) {
    Index left = 1, right = 1;
    for (Index l = 1; l < k; ++l) left *= dense.dim(l);
    for (Index l = k + 1; l <= z.order(); ++l) right *= dense.dim(l);
    lead += static_cast<std::uint64_t>(right) *
            leading(left, dense.dim(k), fact.factors[k - 1].rows(), r1);
    dense = mode_product(dense, k, fact.factors[k - 1]);
  }

  ModeOneBasis next{fact.factors[0], std::move(vnew)};
  return RetractResult{std::move(fact), std::move(dense), std::move(next), lead};
}

double lemma31_check(const TuckerFactorization& x, const ModeOneBasis& basis) {
  const DenseTensor composed = x.compose();
  const double norm = frob_norm(composed);
  if (norm == 0.0) return 0.0;
  const DenseTensor projected = project_dense(composed, basis);
  const DenseTensor diff = add_scaled(projected, -1.0, composed);
  return frob_norm(diff) / norm;
}

}  // namespace trec
