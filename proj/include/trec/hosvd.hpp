#pragma once

#include <utility>
#include <vector>

#include "trec/linalg.hpp"
#include "trec/tensor.hpp"

namespace trec {

/// Core tensor plus one orthonormal factor per mode.
struct TuckerFactorization {
  DenseTensor core;             // r_1 x ... x r_d
  std::vector<Matrix> factors;  // factor i is n_i x r_i

  /// core x_1 U_1 x_2 ... x_d U_d.
  DenseTensor compose() const;
};

/// Left/right singular bases of the mode-1 unfolding of the substitution
/// iterate; they define the single-mode tangent space.
struct ModeOneBasis {
  Matrix u;  // n_1 x r_1
  Matrix v;  // (prod_{i>=2} n_i) x r_1
};

/// Per-mode discarded singular-value energy of the original tensor:
/// tau_i = sqrt(sum_{j > r_i} sigma_j^2 of the mode-i unfolding). Each tau_i
/// lower-bounds the optimal rank-r approximation error, which is what the
/// quasi-projection tests certify against.
struct TailEnergies {
  std::vector<double> tau;

  double max_tau() const;
};

/// Truncated HOSVD: every factor comes from the unfolding of the original
/// input; the core is the input contracted with all factor transposes.
/// Requested ranks are clamped to the attainable rank of each unfolding.
TuckerFactorization t_hosvd(const DenseTensor& z, const MultilinearRank& r);

/// Sequentially truncated HOSVD over the given mode order: after each mode
/// the working tensor is replaced by sigma * V^T re-tensorized, shrinking
/// that mode. The final working tensor is the core.
TuckerFactorization st_hosvd(const DenseTensor& z, const MultilinearRank& r,
                             const std::vector<Index>& order);

/// Modes sorted by ascending rank, ties by ascending mode index (the
/// cost-minimal processing order).
std::vector<Index> default_order(const MultilinearRank& r);

/// Mode order used inside SM-QRGD: mode 1 first (required by the fused
/// tangent-space path), remaining modes by ascending rank.
std::vector<Index> mode1_first_order(const MultilinearRank& r);

/// Best mode-1-rank-r1 approximation (truncated SVD of the mode-1 unfolding,
/// re-tensorized) together with the singular bases of that SVD.
std::pair<DenseTensor, ModeOneBasis> h_mode1(const DenseTensor& z, Index r1);

TailEnergies tail_energies(const DenseTensor& z, const MultilinearRank& r);

}  // namespace trec
