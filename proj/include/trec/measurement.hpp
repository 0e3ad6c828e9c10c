#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trec/rng.hpp"
#include "trec/tensor.hpp"

namespace trec {

/// Linear measurement map with its adjoint. The adjoint identity
/// <apply(x), y> = <x, adjoint(y)> is the defining contract.
class MeasurementOp {
 public:
  virtual ~MeasurementOp() = default;
  virtual const std::vector<Index>& dims() const = 0;
  virtual Index m() const = 0;
  virtual std::vector<double> apply(const DenseTensor& x) const = 0;
  virtual DenseTensor adjoint(std::span<const double> y) const = 0;
};

/// Entry sampler P_Omega: apply extracts the entries at Omega, adjoint
/// scatters them back with zeros elsewhere. Omega holds distinct canonical
/// flat indices in sorted order.
class SamplingOperator final : public MeasurementOp {
 public:
  SamplingOperator(std::vector<Index> dims, std::vector<Index> omega_flat);

  const std::vector<Index>& dims() const override { return dims_; }
  Index m() const override { return static_cast<Index>(omega_.size()); }
  std::vector<double> apply(const DenseTensor& x) const override;
  DenseTensor adjoint(std::span<const double> y) const override;

  const std::vector<Index>& omega() const { return omega_; }
  /// Multi-index (0-based) of the j-th sample.
  std::vector<Index> multi_index(Index j) const;

 private:
  std::vector<Index> dims_;
  std::vector<Index> omega_;
};

/// Dense Gaussian ensemble: m sensing tensors with i.i.d. N(0, 1/m) entries,
/// regenerated deterministically from the seed. Rows are materialized lazily
/// unless the cache fits the desk-scale budget m * prod(dims) <= 1e8.
class GaussianOperator final : public MeasurementOp {
 public:
  enum class Storage { Auto, Lazy, Cached };

  GaussianOperator(std::vector<Index> dims, Index m, std::uint64_t seed,
                   Storage storage = Storage::Auto);

  const std::vector<Index>& dims() const override { return dims_; }
  Index m() const override { return m_; }
  std::vector<double> apply(const DenseTensor& x) const override;
  DenseTensor adjoint(std::span<const double> y) const override;

  std::uint64_t seed() const { return seed_; }
  bool cached() const { return !rows_.empty(); }
  /// Entries of sensing tensor i, regenerated from the seed.
  std::vector<double> row(Index i) const;

 private:
  std::vector<Index> dims_;
  Index m_;
  std::uint64_t seed_;
  Index total_;
  std::vector<double> rows_;  // column i = row i, when cached
};

/// Applies an inner operator in permuted mode order: apply(x) first undoes
/// the permutation, adjoint permutes the result. Used to run SM-QRGD with a
/// tangent mode other than 1.
class PermutedOperator final : public MeasurementOp {
 public:
  PermutedOperator(std::shared_ptr<const MeasurementOp> inner, std::vector<Index> perm);

  const std::vector<Index>& dims() const override { return dims_; }
  Index m() const override { return inner_->m(); }
  std::vector<double> apply(const DenseTensor& x) const override;
  DenseTensor adjoint(std::span<const double> y) const override;

 private:
  std::shared_ptr<const MeasurementOp> inner_;
  std::vector<Index> perm_;          // new mode i = old mode perm[i-1]
  std::vector<Index> inverse_perm_;  // old mode i = new mode inverse_perm[i-1]
  std::vector<Index> dims_;
};

/// Additive Gaussian noise level given as an SNR in dB:
///   sigma^2 = ||t||_F^2 / (prod(dims) * 10^(snr_db/10)).
/// An infinite snr_db is the no-noise sentinel.
struct NoiseSpec {
  double snr_db;
  std::uint64_t seed;
};

/// round(rho * prod(dims)) distinct flat indices drawn uniformly without
/// replacement (Floyd's algorithm on the given stream), sorted.
SamplingOperator sample_omega(const std::vector<Index>& dims, double rho,
                              rng::Stream stream);

DenseTensor add_noise(const DenseTensor& t, const NoiseSpec& spec);

/// sigma^2 implied by the spec for tensor t (0 when snr_db is infinite).
double noise_sigma2(const DenseTensor& t, double snr_db);

// Omega CSV: header comments with dims, seed and PRNG id, then one 0-based
// multi-index per line.
void save_omega_csv(const SamplingOperator& op, std::uint64_t seed, const std::string& path);
SamplingOperator load_omega_csv(const std::string& path);

}  // namespace trec
