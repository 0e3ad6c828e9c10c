#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "trec/matrix.hpp"

namespace trec {

/// Dense d-order tensor, d >= 2, stored in canonical mode-1-major order:
/// element (i_1,...,i_d) (0-based) lives at flat position
/// i_1 + n_1*(i_2 + n_2*(i_3 + ...)). With this layout the mode-1
/// matricization is a direct reinterpretation of the buffer as an
/// n_1 x (prod of the rest) column-major matrix; the hot mode-1 paths use
/// that view without copying. Mode parameters throughout the library are
/// 1-based, matching the usual multilinear-algebra convention.
class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(std::vector<Index> dims);  // zero-filled
  DenseTensor(std::vector<Index> dims, std::vector<double> values);

  Index order() const { return static_cast<Index>(dims_.size()); }
  const std::vector<Index>& dims() const { return dims_; }
  Index dim(Index mode) const { return dims_[mode - 1]; }  // 1-based
  Index size() const { return static_cast<Index>(v_.size()); }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  double& operator[](Index flat) { return v_[flat]; }
  double operator[](Index flat) const { return v_[flat]; }

  double& at(std::span<const Index> idx) { return v_[flat_index(idx)]; }
  double at(std::span<const Index> idx) const { return v_[flat_index(idx)]; }
  Index flat_index(std::span<const Index> idx) const;

  bool same_dims(const DenseTensor& other) const { return dims_ == other.dims_; }

 private:
  std::vector<Index> dims_;
  std::vector<double> v_;
};

struct MultilinearRank {
  std::vector<Index> r;

  MultilinearRank() = default;
  explicit MultilinearRank(std::vector<Index> ranks) : r(std::move(ranks)) {}

  Index order() const { return static_cast<Index>(r.size()); }
  Index operator[](Index mode) const { return r[mode - 1]; }  // 1-based
  bool operator==(const MultilinearRank&) const = default;
};

/// Mode-k unfolding (1-based k): element (i_1,...,i_d) goes to row i_k,
/// column sum_{l != k} i_l * J_l with J_l = prod_{m<l, m != k} n_m.
/// Mode 1 is a straight copy of the canonical buffer.
Matrix matricize(const DenseTensor& t, Index mode);

/// Inverse of matricize for the same mode; `dims` are the target dims.
DenseTensor tensorize(const Matrix& m, const std::vector<Index>& dims, Index mode);

/// t x_mode u, with u of shape (m x n_mode); the mode's extent becomes m.
DenseTensor mode_product(const DenseTensor& t, Index mode, const Matrix& u);

double inner(const DenseTensor& a, const DenseTensor& b);
double frob_norm(const DenseTensor& t);

/// Per-mode ranks of the unfoldings; singular values <= tol * sigma_max
/// count as zero. The zero tensor reports rank zero in every mode.
MultilinearRank multilinear_rank(const DenseTensor& t, double tol = 1e-10);

/// Rearranged tensor with new mode i = old mode perm[i-1] (perm is a 1-based
/// permutation of 1..d).
DenseTensor permute_modes(const DenseTensor& t, const std::vector<Index>& perm);

// Elementwise helpers used by the solvers; shapes must match.
DenseTensor add_scaled(const DenseTensor& x, double alpha, const DenseTensor& y);
DenseTensor scale(const DenseTensor& x, double alpha);

}  // namespace trec
