#include "trec/matrix.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "trec/flops.hpp"
#include "trec/kernels.hpp"

namespace trec {

Matrix::Matrix(Index rows, Index cols, std::vector<double> v)
    : rows_(rows), cols_(cols), v_(std::move(v)) {
  if (static_cast<Index>(v_.size()) != rows_ * cols_)
    throw std::invalid_argument("Matrix: data length does not match shape");
}

Matrix Matrix::identity(Index n) {
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

double Matrix::frob_norm() const {
  double s = 0.0;
  for (double x : v_) s += x * x;
  return std::sqrt(s);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: shape mismatch");
  Matrix c(a.rows(), b.cols());
  flops::add(static_cast<std::uint64_t>(a.rows()) * a.cols() * b.cols());
  kernels::gemm_nn(a.rows(), a.cols(), b.cols(), a.data(), b.data(), c.data());
  return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("matmul_tn: shape mismatch");
  Matrix c(a.cols(), b.cols());
  flops::add(static_cast<std::uint64_t>(a.cols()) * a.rows() * b.cols());
  kernels::gemm_tn(a.cols(), a.rows(), b.cols(), a.data(), b.data(), c.data());
  return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("matmul_nt: shape mismatch");
  Matrix c(a.rows(), b.rows());
  flops::add(static_cast<std::uint64_t>(a.rows()) * a.cols() * b.rows());
  kernels::gemm_nt(a.rows(), a.cols(), b.rows(), a.data(), b.data(), c.data());
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i) t(j, i) = a(i, j);
  return t;
}

Matrix hcat(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("hcat: row mismatch");
  Matrix c(a.rows(), a.cols() + b.cols());
  std::memcpy(c.data(), a.data(), sizeof(double) * a.size());
  std::memcpy(c.data() + a.size(), b.data(), sizeof(double) * b.size());
  return c;
}

Matrix left_cols(const Matrix& a, Index k) {
  if (k > a.cols()) throw std::invalid_argument("left_cols: k exceeds cols");
  Matrix c(a.rows(), k);
  std::memcpy(c.data(), a.data(), sizeof(double) * a.rows() * k);
  return c;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (Index i = 0; i < a.size(); ++i)
    m = std::max(m, std::fabs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace trec
