#pragma once

#include <cstdint>
#include <vector>

namespace trec {

using Index = std::int64_t;

/// Dense column-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(Index rows, Index cols) : rows_(rows), cols_(cols), v_(rows * cols, 0.0) {}
  Matrix(Index rows, Index cols, std::vector<double> v);

  static Matrix identity(Index n);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index size() const { return rows_ * cols_; }

  double& operator()(Index i, Index j) { return v_[j * rows_ + i]; }
  double operator()(Index i, Index j) const { return v_[j * rows_ + i]; }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  double* col(Index j) { return v_.data() + j * rows_; }
  const double* col(Index j) const { return v_.data() + j * rows_; }

  double frob_norm() const;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<double> v_;
};

// Products route through the kernels and add their multiply-add count to the
// global flops tally.
Matrix matmul(const Matrix& a, const Matrix& b);     // A * B
Matrix matmul_tn(const Matrix& a, const Matrix& b);  // A^T * B
Matrix matmul_nt(const Matrix& a, const Matrix& b);  // A * B^T

Matrix transpose(const Matrix& a);

/// [a b] side by side; row counts must match.
Matrix hcat(const Matrix& a, const Matrix& b);

/// First k columns of a.
Matrix left_cols(const Matrix& a, Index k);

double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace trec
