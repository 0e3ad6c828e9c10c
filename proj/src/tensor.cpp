#include "trec/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>

#include "trec/flops.hpp"
#include "trec/kernels.hpp"
#include "trec/linalg.hpp"

namespace trec {

namespace {

Index dims_product(const std::vector<Index>& dims) {
  Index p = 1;
  for (Index n : dims) p *= n;
  return p;
}

void validate_dims(const std::vector<Index>& dims) {
  if (dims.size() < 2) throw std::invalid_argument("DenseTensor: order must be >= 2");
  for (Index n : dims)
    if (n < 1) throw std::invalid_argument("DenseTensor: dimensions must be positive");
}

// Flat strides of the canonical layout: stride_l = prod_{m<l} n_m.
std::vector<Index> strides_of(const std::vector<Index>& dims) {
  std::vector<Index> s(dims.size());
  Index acc = 1;
  for (std::size_t l = 0; l < dims.size(); ++l) {
    s[l] = acc;
    acc *= dims[l];
  }
  return s;
}

// Base flat offset of unfolding column j for the given mode (1-based):
// decode j over the modes != k in ascending order, earlier modes fastest.
Index column_base(Index j, Index mode, const std::vector<Index>& dims,
                  const std::vector<Index>& strides) {
  Index base = 0;
  for (std::size_t l = 0; l < dims.size(); ++l) {
    if (static_cast<Index>(l) == mode - 1) continue;
    const Index il = j % dims[l];
    j /= dims[l];
    base += il * strides[l];
  }
  return base;
}

}  // namespace

DenseTensor::DenseTensor(std::vector<Index> dims) : dims_(std::move(dims)) {
  validate_dims(dims_);
  v_.assign(dims_product(dims_), 0.0);
}

DenseTensor::DenseTensor(std::vector<Index> dims, std::vector<double> values)
    : dims_(std::move(dims)), v_(std::move(values)) {
  validate_dims(dims_);
  if (static_cast<Index>(v_.size()) != dims_product(dims_))
    throw std::invalid_argument("DenseTensor: data length does not match dims");
}

Index DenseTensor::flat_index(std::span<const Index> idx) const {
  Index flat = 0;
  Index stride = 1;
  for (std::size_t l = 0; l < dims_.size(); ++l) {
    flat += idx[l] * stride;
    stride *= dims_[l];
  }
  return flat;
}

Matrix matricize(const DenseTensor& t, Index mode) {
  const Index d = t.order();
  if (mode < 1 || mode > d) throw std::invalid_argument("matricize: mode out of range");
  const Index rows = t.dim(mode);
  const Index cols = t.size() / rows;
  Matrix m(rows, cols);
  if (mode == 1) {
    std::memcpy(m.data(), t.data(), sizeof(double) * t.size());
    return m;
  }
  const auto strides = strides_of(t.dims());
  const Index step = strides[mode - 1];
  const double* src = t.data();
  double* dst = m.data();
#pragma omp parallel for schedule(static) if (kernels::parallel_enabled())
  for (Index j = 0; j < cols; ++j) {
    const Index base = column_base(j, mode, t.dims(), strides);
    double* out = dst + j * rows;
    for (Index i = 0; i < rows; ++i) out[i] = src[base + i * step];
  }
  return m;
}

DenseTensor tensorize(const Matrix& m, const std::vector<Index>& dims, Index mode) {
  const Index d = static_cast<Index>(dims.size());
  if (mode < 1 || mode > d) throw std::invalid_argument("tensorize: mode out of range");
  const Index total = dims_product(dims);
  if (m.rows() != dims[mode - 1] || m.rows() * m.cols() != total)
    throw std::invalid_argument("tensorize: matrix shape does not match dims");
  DenseTensor t(dims);
  if (mode == 1) {
    std::memcpy(t.data(), m.data(), sizeof(double) * total);
    return t;
  }
  const auto strides = strides_of(dims);
  const Index step = strides[mode - 1];
  const Index rows = m.rows();
  const Index cols = m.cols();
  const double* src = m.data();
  double* dst = t.data();
#pragma omp parallel for schedule(static) if (kernels::parallel_enabled())
  for (Index j = 0; j < cols; ++j) {
    const Index base = column_base(j, mode, dims, strides);
    const double* in = src + j * rows;
    for (Index i = 0; i < rows; ++i) dst[base + i * step] = in[i];
  }
  return t;
}

DenseTensor mode_product(const DenseTensor& t, Index mode, const Matrix& u) {
  const Index d = t.order();
  if (mode < 1 || mode > d) throw std::invalid_argument("mode_product: mode out of range");
  if (u.cols() != t.dim(mode))
    throw std::invalid_argument("mode_product: matrix columns do not match mode extent");
  std::vector<Index> out_dims = t.dims();
  out_dims[mode - 1] = u.rows();
  DenseTensor out(out_dims);

  Index left = 1, right = 1;
  for (Index l = 1; l < mode; ++l) left *= t.dim(l);
  for (Index l = mode + 1; l <= d; ++l) right *= t.dim(l);
  const Index nk = t.dim(mode);
  const Index m = u.rows();

  flops::add(static_cast<std::uint64_t>(left) * right * nk * m);
  if (mode == 1) {
    kernels::gemm_nn(m, nk, right, u.data(), t.data(), out.data());
  } else {
    kernels::mode_apply(left, nk, right, m, u.data(), t.data(), out.data());
  }
  return out;
}

double inner(const DenseTensor& a, const DenseTensor& b) {
  if (!a.same_dims(b)) throw std::invalid_argument("inner: dims mismatch");
  return kernels::dot(a.size(), a.data(), b.data());
}

double frob_norm(const DenseTensor& t) {
  return std::sqrt(kernels::dot(t.size(), t.data(), t.data()));
}

MultilinearRank multilinear_rank(const DenseTensor& t, double tol) {
  if (tol < 0) throw std::invalid_argument("multilinear_rank: tol must be >= 0");
  std::vector<Index> r(t.order());
  for (Index k = 1; k <= t.order(); ++k) {
    const auto sv = linalg::singular_values(matricize(t, k));
    const double smax = sv.empty() ? 0.0 : sv.front();
    Index count = 0;
    for (double s : sv)
      if (s > tol * smax && s > 0.0) ++count;
    r[k - 1] = count;
  }
  return MultilinearRank(std::move(r));
}

DenseTensor permute_modes(const DenseTensor& t, const std::vector<Index>& perm) {
  const Index d = t.order();
  if (static_cast<Index>(perm.size()) != d)
    throw std::invalid_argument("permute_modes: permutation length mismatch");
  std::vector<bool> seen(d, false);
  for (Index p : perm) {
    if (p < 1 || p > d || seen[p - 1])
      throw std::invalid_argument("permute_modes: not a permutation of 1..d");
    seen[p - 1] = true;
  }
  std::vector<Index> out_dims(d);
  for (Index l = 0; l < d; ++l) out_dims[l] = t.dim(perm[l]);
  DenseTensor out(out_dims);

  const auto in_strides = strides_of(t.dims());
  std::vector<Index> gather_stride(d);
  for (Index l = 0; l < d; ++l) gather_stride[l] = in_strides[perm[l] - 1];

  const Index total = t.size();
  const double* src = t.data();
  double* dst = out.data();
#pragma omp parallel for schedule(static) if (kernels::parallel_enabled())
  for (Index f = 0; f < total; ++f) {
    Index rem = f;
    Index in_flat = 0;
    for (Index l = 0; l < d; ++l) {
      in_flat += (rem % out_dims[l]) * gather_stride[l];
      rem /= out_dims[l];
    }
    dst[f] = src[in_flat];
  }
  return out;
}

DenseTensor add_scaled(const DenseTensor& x, double alpha, const DenseTensor& y) {
  if (!x.same_dims(y)) throw std::invalid_argument("add_scaled: dims mismatch");
  DenseTensor z(x.dims());
  kernels::add_scaled(x.size(), x.data(), alpha, y.data(), z.data());
  return z;
}

DenseTensor scale(const DenseTensor& x, double alpha) {
  DenseTensor z(x.dims());
  kernels::add_scaled(x.size(), z.data(), alpha, x.data(), z.data());
  return z;
}

}  // namespace trec
