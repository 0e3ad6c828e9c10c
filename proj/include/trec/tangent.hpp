#pragma once

#include <cstdint>

#include "trec/hosvd.hpp"

namespace trec {

/// Mode-1 tangent-space point in factored form: left * mid * right^T equals
/// the mode-1 unfolding of the dense projection.
struct FactoredTangentPoint {
  Matrix left;   // n_1 x 2r_1, orthonormal [Uhat Q1]
  Matrix mid;    // 2r_1 x 2r_1, [[Uhat^T Z Vhat, R2^T], [R1, 0]]
  Matrix right;  // (prod_{i>=2} n_i) x 2r_1, orthonormal [Vhat Q2]
};

struct RetractResult {
  TuckerFactorization x;
  DenseTensor dense;  // x.compose(), built as part of the fused path
  ModeOneBasis basis;
  std::uint64_t leading_macs;
};

/// Dense tangent-space projection of z:
///   P(Y) = Uhat Uhat^T Y + Y Vhat Vhat^T - Uhat Uhat^T Y Vhat Vhat^T
/// applied to the mode-1 unfolding and re-tensorized. When `leading_macs` is
/// given it receives the leading-order multiply-add count: products whose
/// cost grows with at least two problem dimensions (both operands larger
/// than r_1 in at least two of the three gemm extents); elementwise work and
/// small r x r products are excluded, matching the leading-term accounting
/// of the step-size normalization.
DenseTensor project_dense(const DenseTensor& z, const ModeOneBasis& basis,
                          std::uint64_t* leading_macs = nullptr);

/// Factored form of the same projection via
///   Y1 = (I - Uhat Uhat^T) M1(z) Vhat,  Y2 = (I - Vhat Vhat^T) M1(z)^T Uhat
/// and thin QR of each.
FactoredTangentPoint project_factored(const DenseTensor& z, const ModeOneBasis& basis);

/// Fused projection + sequential truncation: equivalent to st_hosvd applied
/// to project_dense(z, basis) with mode 1 first and the remaining modes in
/// ascending-rank order, but the mode-1 truncated SVD is computed on the
/// 2r_1 x 2r_1 mid matrix of the factored projection. Also returns the new
/// mode-1 basis for the next iteration and the leading-order multiply-add
/// count of the whole retraction (including the final composition).
RetractResult fused_retract(const DenseTensor& z, const ModeOneBasis& basis,
                            const MultilinearRank& r);

/// Relative residual of the in-space fixed point: the projection of
/// compose(x) onto the tangent space defined by `basis` should reproduce it
/// when x and basis came from the same retraction input.
double lemma31_check(const TuckerFactorization& x, const ModeOneBasis& basis);

}  // namespace trec
