#include "trec/hosvd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace trec {

namespace {

void validate_ranks(const DenseTensor& z, const MultilinearRank& r) {
  if (r.order() != z.order())
    throw std::invalid_argument("hosvd: rank vector length does not match order");
  for (Index k = 1; k <= z.order(); ++k)
    if (r[k] < 1 || r[k] > z.dim(k))
      throw std::invalid_argument("hosvd: rank exceeds dimension");
}

}  // namespace

DenseTensor TuckerFactorization::compose() const {
  DenseTensor out = core;
  for (Index k = 1; k <= core.order(); ++k) out = mode_product(out, k, factors[k - 1]);
  return out;
}

double TailEnergies::max_tau() const {
  double m = 0.0;
  for (double t : tau) m = std::max(m, t);
  return m;
}

TuckerFactorization t_hosvd(const DenseTensor& z, const MultilinearRank& r) {
  validate_ranks(z, r);
  TuckerFactorization out;
  out.factors.reserve(z.order());
  for (Index k = 1; k <= z.order(); ++k) {
    const Matrix unf = matricize(z, k);
    const Index rk = std::min<Index>(r[k], std::min(unf.rows(), unf.cols()));
    out.factors.push_back(linalg::svd_truncated(unf, rk).u);
  }
  out.core = z;
  for (Index k = 1; k <= z.order(); ++k)
    out.core = mode_product(out.core, k, transpose(out.factors[k - 1]));
  return out;
}

TuckerFactorization st_hosvd(const DenseTensor& z, const MultilinearRank& r,
                             const std::vector<Index>& order) {
  validate_ranks(z, r);
  const Index d = z.order();
  if (static_cast<Index>(order.size()) != d)
    throw std::invalid_argument("st_hosvd: order length does not match tensor order");
  std::vector<bool> seen(d, false);
  for (Index m : order) {
    if (m < 1 || m > d || seen[m - 1])
      throw std::invalid_argument("st_hosvd: order is not a permutation of 1..d");
    seen[m - 1] = true;
  }

  TuckerFactorization out;
  out.factors.resize(d);
  DenseTensor b = z;
  for (Index m : order) {
    const Matrix unf = matricize(b, m);
    const Index rm = std::min<Index>(r[m], std::min(unf.rows(), unf.cols()));
    linalg::TruncatedSVD svd = linalg::svd_truncated(unf, rm);
    out.factors[m - 1] = std::move(svd.u);
    // b <- M_m^{-1}(Sigma V^T): the mode shrinks to r_m.
    Matrix sv(rm, svd.v.rows());
    for (Index j = 0; j < sv.cols(); ++j)
      for (Index i = 0; i < rm; ++i) sv(i, j) = svd.s[i] * svd.v(j, i);
    std::vector<Index> next_dims = b.dims();
    next_dims[m - 1] = rm;
    b = tensorize(sv, next_dims, m);
  }
  out.core = std::move(b);
  return out;
}

std::vector<Index> default_order(const MultilinearRank& r) {
  std::vector<Index> order(r.order());
  std::iota(order.begin(), order.end(), Index{1});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return r[a] < r[b]; });
  return order;
}

std::vector<Index> mode1_first_order(const MultilinearRank& r) {
  std::vector<Index> rest(r.order() - 1);
  std::iota(rest.begin(), rest.end(), Index{2});
  std::stable_sort(rest.begin(), rest.end(),
                   [&](Index a, Index b) { return r[a] < r[b]; });
  std::vector<Index> order{1};
  order.insert(order.end(), rest.begin(), rest.end());
  return order;
}

std::pair<DenseTensor, ModeOneBasis> h_mode1(const DenseTensor& z, Index r1) {
  if (r1 < 1 || r1 > z.dim(1)) throw std::invalid_argument("h_mode1: r1 out of range");
  const Index rows = z.dim(1);
  const Index cols = z.size() / rows;
  const Matrix unf(rows, cols, std::vector<double>(z.data(), z.data() + z.size()));
  const Index rr = std::min<Index>(r1, std::min(rows, cols));
  linalg::TruncatedSVD svd = linalg::svd_truncated(unf, rr);

  Matrix us = svd.u;  // U * Sigma
  for (Index j = 0; j < rr; ++j)
    for (Index i = 0; i < us.rows(); ++i) us(i, j) *= svd.s[j];
  const Matrix approx = matmul_nt(us, svd.v);
  DenseTensor xhat(z.dims(), std::vector<double>(approx.data(), approx.data() + approx.size()));
  return {std::move(xhat), ModeOneBasis{std::move(svd.u), std::move(svd.v)}};
}

TailEnergies tail_energies(const DenseTensor& z, const MultilinearRank& r) {
  if (r.order() != z.order())
    throw std::invalid_argument("tail_energies: rank vector length mismatch");
  TailEnergies out;
  out.tau.resize(z.order());
  for (Index k = 1; k <= z.order(); ++k) {
    const auto sv = linalg::singular_values(matricize(z, k));
    double acc = 0.0;
    for (std::size_t j = static_cast<std::size_t>(r[k]); j < sv.size(); ++j)
      acc += sv[j] * sv[j];
    out.tau[k - 1] = std::sqrt(acc);
  }
  return out;
}

}  // namespace trec
