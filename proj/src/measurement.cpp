#include "trec/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "trec/flops.hpp"
#include "trec/kernels.hpp"

namespace trec {

namespace {

Index dims_product(const std::vector<Index>& dims) {
  Index p = 1;
  for (Index n : dims) p *= n;
  return p;
}

constexpr Index kCacheBudget = 100'000'000;  // m * prod(dims) entries

}  // namespace

SamplingOperator::SamplingOperator(std::vector<Index> dims, std::vector<Index> omega_flat)
    : dims_(std::move(dims)), omega_(std::move(omega_flat)) {
  const Index total = dims_product(dims_);
  std::sort(omega_.begin(), omega_.end());
  for (std::size_t j = 0; j < omega_.size(); ++j) {
    if (omega_[j] < 0 || omega_[j] >= total)
      throw std::invalid_argument("SamplingOperator: index out of range");
    if (j > 0 && omega_[j] == omega_[j - 1])
      throw std::invalid_argument("SamplingOperator: duplicate index");
  }
}

std::vector<double> SamplingOperator::apply(const DenseTensor& x) const {
  if (x.dims() != dims_) throw std::invalid_argument("SamplingOperator: dims mismatch");
  std::vector<double> y(omega_.size());
  for (std::size_t j = 0; j < omega_.size(); ++j) y[j] = x[omega_[j]];
  return y;
}

DenseTensor SamplingOperator::adjoint(std::span<const double> y) const {
  if (static_cast<Index>(y.size()) != m())
    throw std::invalid_argument("SamplingOperator: measurement length mismatch");
  DenseTensor x(dims_);
  for (std::size_t j = 0; j < omega_.size(); ++j) x[omega_[j]] = y[j];
  return x;
}

std::vector<Index> SamplingOperator::multi_index(Index j) const {
  Index f = omega_[j];
  std::vector<Index> idx(dims_.size());
  for (std::size_t l = 0; l < dims_.size(); ++l) {
    idx[l] = f % dims_[l];
    f /= dims_[l];
  }
  return idx;
}

GaussianOperator::GaussianOperator(std::vector<Index> dims, Index m, std::uint64_t seed,
                                   Storage storage)
    : dims_(std::move(dims)), m_(m), seed_(seed), total_(dims_product(dims_)) {
  if (m_ < 1) throw std::invalid_argument("GaussianOperator: m must be positive");
  const bool cache = storage == Storage::Cached ||
                     (storage == Storage::Auto && m_ * total_ <= kCacheBudget);
  if (cache) {
    rows_.resize(static_cast<std::size_t>(m_) * total_);
    for (Index i = 0; i < m_; ++i) {
      const auto r = row(i);
      std::copy(r.begin(), r.end(), rows_.begin() + i * total_);
    }
  }
}

std::vector<double> GaussianOperator::row(Index i) const {
  rng::Stream s = rng::Stream(seed_).child("gaussian-op").child(static_cast<std::uint64_t>(i));
  const double scale = 1.0 / std::sqrt(static_cast<double>(m_));
  std::vector<double> r(total_);
  for (auto& x : r) x = s.next_gaussian() * scale;
  return r;
}

std::vector<double> GaussianOperator::apply(const DenseTensor& x) const {
  if (x.dims() != dims_) throw std::invalid_argument("GaussianOperator: dims mismatch");
  std::vector<double> y(m_);
  flops::add(static_cast<std::uint64_t>(m_) * total_);
  if (cached()) {
    kernels::gemm_tn(m_, total_, 1, rows_.data(), x.data(), y.data());
  } else {
    for (Index i = 0; i < m_; ++i) {
      const auto r = row(i);
      y[i] = kernels::dot(total_, r.data(), x.data());
    }
  }
  return y;
}

DenseTensor GaussianOperator::adjoint(std::span<const double> y) const {
  if (static_cast<Index>(y.size()) != m_)
    throw std::invalid_argument("GaussianOperator: measurement length mismatch");
  DenseTensor x(dims_);
  flops::add(static_cast<std::uint64_t>(m_) * total_);
  if (cached()) {
    kernels::gemm_nn(total_, m_, 1, rows_.data(), y.data(), x.data());
  } else {
    for (Index i = 0; i < m_; ++i) {
      const auto r = row(i);
      kernels::serial::axpy(total_, y[i], r.data(), x.data());
    }
  }
  return x;
}

PermutedOperator::PermutedOperator(std::shared_ptr<const MeasurementOp> inner,
                                   std::vector<Index> perm)
    : inner_(std::move(inner)), perm_(std::move(perm)) {
  const Index d = static_cast<Index>(inner_->dims().size());
  if (static_cast<Index>(perm_.size()) != d)
    throw std::invalid_argument("PermutedOperator: permutation length mismatch");
  inverse_perm_.assign(d, 0);
  dims_.assign(d, 0);
  for (Index l = 0; l < d; ++l) {
    dims_[l] = inner_->dims()[perm_[l] - 1];
    inverse_perm_[perm_[l] - 1] = l + 1;
  }
}

std::vector<double> PermutedOperator::apply(const DenseTensor& x) const {
  return inner_->apply(permute_modes(x, inverse_perm_));
}

DenseTensor PermutedOperator::adjoint(std::span<const double> y) const {
  return permute_modes(inner_->adjoint(y), perm_);
}

SamplingOperator sample_omega(const std::vector<Index>& dims, double rho,
                              rng::Stream stream) {
  if (!(rho > 0.0 && rho <= 1.0))
    throw std::invalid_argument("sample_omega: rho must lie in (0, 1]");
  const Index total = dims_product(dims);
  const Index m = std::llround(rho * static_cast<double>(total));
  if (m < 1) throw std::invalid_argument("sample_omega: rho too small, empty sample");

  // Floyd's sampling: m distinct values from [0, total).
  std::set<Index> chosen;
  for (Index j = total - m; j < total; ++j) {
    const Index t = static_cast<Index>(stream.below(static_cast<std::uint64_t>(j) + 1));
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  return SamplingOperator(dims, std::vector<Index>(chosen.begin(), chosen.end()));
}

double noise_sigma2(const DenseTensor& t, double snr_db) {
  if (std::isinf(snr_db)) return 0.0;
  const double nf = frob_norm(t);
  return nf * nf / (static_cast<double>(t.size()) * std::pow(10.0, snr_db / 10.0));
}

DenseTensor add_noise(const DenseTensor& t, const NoiseSpec& spec) {
  if (std::isinf(spec.snr_db)) return t;
  const double sigma = std::sqrt(noise_sigma2(t, spec.snr_db));
  rng::Stream s = rng::Stream(spec.seed).child("noise");
  DenseTensor out = t;
  for (Index i = 0; i < out.size(); ++i) out[i] += sigma * s.next_gaussian();
  return out;
}

void save_omega_csv(const SamplingOperator& op, std::uint64_t seed, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("omega csv: cannot open " + path);
  os << "# dims=";
  for (std::size_t l = 0; l < op.dims().size(); ++l)
    os << (l ? "x" : "") << op.dims()[l];
  os << "\n# seed=" << seed << "\n# prng=" << rng::kAlgorithmId
     << "\n# index_base=0\n";
  const Index d = static_cast<Index>(op.dims().size());
  for (Index j = 0; j < op.m(); ++j) {
    const auto idx = op.multi_index(j);
    for (Index l = 0; l < d; ++l) os << (l ? "," : "") << idx[l];
    os << "\n";
  }
  if (!os) throw std::runtime_error("omega csv: write failed");
}

SamplingOperator load_omega_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("omega csv: cannot open " + path);
  std::vector<Index> dims;
  std::vector<Index> flat;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("dims=");
      if (pos != std::string::npos) {
        std::stringstream ss(line.substr(pos + 5));
        std::string part;
        while (std::getline(ss, part, 'x')) dims.push_back(std::stoll(part));
      }
      continue;
    }
    if (dims.empty()) throw std::runtime_error("omega csv: missing dims header");
    std::stringstream ss(line);
    std::string part;
    std::vector<Index> idx;
    while (std::getline(ss, part, ',')) idx.push_back(std::stoll(part));
    if (idx.size() != dims.size()) throw std::runtime_error("omega csv: bad row width");
    Index f = 0, stride = 1;
    for (std::size_t l = 0; l < dims.size(); ++l) {
      if (idx[l] < 0 || idx[l] >= dims[l]) throw std::runtime_error("omega csv: index range");
      f += idx[l] * stride;
      stride *= dims[l];
    }
    flat.push_back(f);
  }
  return SamplingOperator(dims, std::move(flat));
}

}  // namespace trec
