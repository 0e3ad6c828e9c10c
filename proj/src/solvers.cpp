#include "trec/solvers.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "trec/flops.hpp"
#include "trec/format.hpp"
#include "trec/kernels.hpp"

namespace trec {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kDivergenceFactor = 1e3;

void validate_config(const SolverConfig& cfg) {
  if (cfg.max_iters < 1) throw std::invalid_argument("SolverConfig: max_iters must be >= 1");
  if (cfg.tol < 0) throw std::invalid_argument("SolverConfig: tol must be >= 0");
  if (cfg.step_rule == StepRule::Constant && !(cfg.alpha > 0))
    throw std::invalid_argument("SolverConfig: constant step requires alpha > 0");
}

std::int64_t now_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

double vec_norm(std::span<const double> v) {
  return std::sqrt(kernels::dot(static_cast<Index>(v.size()), v.data(), v.data()));
}

std::vector<double> residual_vec(const MeasurementOp& op, std::span<const double> y,
                                 const DenseTensor& x) {
  std::vector<double> r = op.apply(x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = y[i] - r[i];
  return r;
}

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : num; }

// Shared per-iteration bookkeeping: metric evaluation, trace rows, stopping.
struct Driver {
  const MeasurementOp& op;
  std::span<const double> y;
  const SolverConfig& cfg;
  const DenseTensor* truth;
  double norm_y;
  double norm_t;
  SolverTrace trace;
  double metric0 = -1.0;

  Driver(const MeasurementOp& op_, std::span<const double> y_, const SolverConfig& cfg_,
         const DenseTensor* truth_)
      : op(op_), y(y_), cfg(cfg_), truth(truth_), norm_y(vec_norm(y_)),
        norm_t(truth_ ? frob_norm(*truth_) : 0.0) {}

  // Records the row for iterate k (pending carries the update fields that
  // produced it) and decides whether to stop. Returns true to stop.
  bool record(int k, const DenseTensor& xd, std::span<const double> res,
              IterRecord pending) {
    pending.iter = k;
    pending.residual = safe_ratio(vec_norm(res), norm_y);
    if (truth) {
      const DenseTensor diff = add_scaled(xd, -1.0, *truth);
      pending.rel_err = safe_ratio(frob_norm(diff), norm_t);
    } else {
      pending.rel_err = kNaN;
    }
    const double metric = truth ? pending.rel_err : pending.residual;
    trace.rows.push_back(pending);
    if (metric0 < 0.0) metric0 = metric;
    if (metric <= cfg.tol) {
      trace.status = SolverStatus::Converged;
      return true;
    }
    if (metric0 > 0.0 && metric > kDivergenceFactor * metric0) {
      trace.status = SolverStatus::Diverged;
      return true;
    }
    if (k >= cfg.max_iters) {
      trace.status = SolverStatus::MaxIters;
      return true;
    }
    return false;
  }
};

MonitorRecord monitors_for(const DenseTensor& x, const DenseTensor& xhat,
                           const DenseTensor& w, const DenseTensor* truth) {
  if (!truth) return {kNaN, kNaN, kNaN};
  return monitor_appendix(x, xhat, w, *truth);
}

std::vector<Index> tangent_perm(Index d, Index mode) {
  std::vector<Index> perm{mode};
  for (Index l = 1; l <= d; ++l)
    if (l != mode) perm.push_back(l);
  return perm;
}

SolveResult sm_qrgd_mode1(const MeasurementOp& op, std::span<const double> y,
                          const SolverConfig& cfg, const DenseTensor* truth) {
  Driver drv(op, y, cfg, truth);
  const MultilinearRank& r = cfg.rank;

  const DenseTensor z0 = op.adjoint(y);
  auto [fact, basis] = init_point(op, y, r);
  DenseTensor xd = fact.compose();

  IterRecord pending;
  pending.alpha = kNaN;
  if (cfg.monitors) {
    const auto [xhat0, b0] = h_mode1(z0, r[1]);
    const MonitorRecord mon = monitors_for(xd, xhat0, z0, truth);
    pending.mon1 = mon.ratio_x;
    pending.mon2 = mon.ratio_xhat;
    pending.mon3 = mon.ratio_gap;
    pending.lemma31 = lemma31_check(fact, basis);
  } else {
    pending.mon1 = pending.mon2 = pending.mon3 = pending.lemma31 = kNaN;
  }

  for (int k = 0;; ++k) {
    const std::vector<double> res = residual_vec(op, y, xd);
    if (drv.record(k, xd, res, pending)) break;

    const std::int64_t t0 = now_ns();
    const std::uint64_t macs0 = flops::total();

    const DenseTensor g = op.adjoint(res);

    std::uint64_t step_lead = 0;
    const std::uint64_t macs_step0 = flops::total();
    const DenseTensor pg = project_dense(g, basis, &step_lead);
    double alpha = cfg.alpha;
    if (cfg.step_rule == StepRule::Normalized) {
      const auto a = step_size_normalized(pg, op);
      if (!a) {
        drv.trace.status = SolverStatus::DegenerateStep;
        break;
      }
      alpha = *a;
    }
    const std::uint64_t step_macs = flops::total() - macs_step0;

    // W = X + alpha * P(G); the unprojected sum is never formed (the iterate
    // already lies in the tangent space).
    const DenseTensor w = add_scaled(xd, alpha, pg);

    const std::uint64_t macs_thresh0 = flops::total();
    RetractResult rr = fused_retract(w, basis, r);
    const std::uint64_t thresh_macs = flops::total() - macs_thresh0;

    fact = std::move(rr.x);
    xd = std::move(rr.dense);
    basis = std::move(rr.basis);

    pending = IterRecord{};
    pending.alpha = alpha;
    pending.step_macs = step_macs;
    pending.step_leading = step_lead;
    pending.thresh_macs = thresh_macs;
    pending.thresh_leading = rr.leading_macs;
    pending.flops = flops::total() - macs0;
    pending.wall_ns = now_ns() - t0;
    if (cfg.monitors) {
      const auto [xhat, bh] = h_mode1(w, r[1]);
      const MonitorRecord mon = monitors_for(xd, xhat, w, truth);
      pending.mon1 = mon.ratio_x;
      pending.mon2 = mon.ratio_xhat;
      pending.mon3 = mon.ratio_gap;
      pending.lemma31 = lemma31_check(fact, basis);
    } else {
      pending.mon1 = pending.mon2 = pending.mon3 = pending.lemma31 = kNaN;
    }
  }
  return SolveResult{std::move(fact), std::move(drv.trace)};
}

// Shared IHT loop; `st` selects sequential (SeMPIHT) or independent (TIHT)
// truncation, `niht` the normalized step of Eq. 2.2.
SolveResult iht_loop(const MeasurementOp& op, std::span<const double> y,
                     const SolverConfig& cfg, const DenseTensor* truth, bool sequential,
                     bool normalized) {
  Driver drv(op, y, cfg, truth);
  const MultilinearRank& r = cfg.rank;
  const Index d = static_cast<Index>(op.dims().size());

  const DenseTensor z0 = op.adjoint(y);
  TuckerFactorization fact =
      sequential ? st_hosvd(z0, r, default_order(r)) : t_hosvd(z0, r);
  DenseTensor xd = fact.compose();

  IterRecord pending;
  pending.alpha = kNaN;
  pending.mon1 = pending.mon2 = pending.mon3 = pending.lemma31 = kNaN;

  for (int k = 0;; ++k) {
    const std::vector<double> res = residual_vec(op, y, xd);
    if (drv.record(k, xd, res, pending)) break;

    const std::int64_t t0 = now_ns();
    const std::uint64_t macs0 = flops::total();

    const DenseTensor g = op.adjoint(res);

    double alpha = cfg.alpha;
    const std::uint64_t macs_step0 = flops::total();
    if (normalized) {
      // F(G) = G x_i (U_i U_i^T), factors of the current iterate.
      DenseTensor f = g;
      for (Index i = 1; i <= d; ++i) f = mode_product(f, i, transpose(fact.factors[i - 1]));
      for (Index i = 1; i <= d; ++i) f = mode_product(f, i, fact.factors[i - 1]);
      const auto a = step_size_normalized(f, op);
      if (!a) {
        drv.trace.status = SolverStatus::DegenerateStep;
        break;
      }
      alpha = *a;
    }
    const std::uint64_t step_macs = flops::total() - macs_step0;

    const DenseTensor v = add_scaled(xd, alpha, g);
    const std::uint64_t macs_thresh0 = flops::total();
    fact = sequential ? st_hosvd(v, r, default_order(r)) : t_hosvd(v, r);
    xd = fact.compose();
    const std::uint64_t thresh_macs = flops::total() - macs_thresh0;

    pending = IterRecord{};
    pending.alpha = alpha;
    pending.step_macs = step_macs;
    pending.thresh_macs = thresh_macs;
    pending.flops = flops::total() - macs0;
    pending.wall_ns = now_ns() - t0;
    pending.mon1 = pending.mon2 = pending.mon3 = pending.lemma31 = kNaN;
  }
  return SolveResult{std::move(fact), std::move(drv.trace)};
}

}  // namespace

const char* to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::Converged: return "converged";
    case SolverStatus::MaxIters: return "max_iters";
    case SolverStatus::Diverged: return "diverged";
    case SolverStatus::DegenerateStep: return "degenerate_step";
  }
  return "unknown";
}

double SolverTrace::final_metric() const {
  if (rows.empty()) return kNaN;
  const IterRecord& last = rows.back();
  return std::isnan(last.rel_err) ? last.residual : last.rel_err;
}

std::pair<TuckerFactorization, ModeOneBasis> init_point(const MeasurementOp& op,
                                                        std::span<const double> y,
                                                        const MultilinearRank& r) {
  const DenseTensor z0 = op.adjoint(y);
  TuckerFactorization fact = st_hosvd(z0, r, mode1_first_order(r));
  auto [xhat, basis] = h_mode1(z0, r[1]);
  (void)xhat;
  return {std::move(fact), std::move(basis)};
}

std::optional<double> step_size_normalized(const DenseTensor& g_projected,
                                           const MeasurementOp& op) {
  const double num = inner(g_projected, g_projected);
  const std::vector<double> ag = op.apply(g_projected);
  const double den = kernels::dot(static_cast<Index>(ag.size()), ag.data(), ag.data());
  if (den == 0.0) return std::nullopt;
  return num / den;
}

SolveResult sm_qrgd(const MeasurementOp& op, std::span<const double> y,
                    const SolverConfig& cfg, const DenseTensor* truth) {
  validate_config(cfg);
  const Index d = static_cast<Index>(op.dims().size());
  if (cfg.tangent_mode < 1 || cfg.tangent_mode > d)
    throw std::invalid_argument("sm_qrgd: tangent_mode out of range");
  if (cfg.tangent_mode == 1) return sm_qrgd_mode1(op, y, cfg, truth);

  // Rotate the chosen mode into position 1, solve there, rotate back.
  const std::vector<Index> perm = tangent_perm(d, cfg.tangent_mode);
  std::vector<Index> inv(d);
  for (Index l = 0; l < d; ++l) inv[perm[l] - 1] = l + 1;

  const auto inner_op = std::shared_ptr<const MeasurementOp>(std::shared_ptr<void>(), &op);
  const PermutedOperator pop(inner_op, perm);

  SolverConfig pcfg = cfg;
  pcfg.tangent_mode = 1;
  std::vector<Index> pranks(d);
  for (Index l = 0; l < d; ++l) pranks[l] = cfg.rank[perm[l]];
  pcfg.rank = MultilinearRank(pranks);

  DenseTensor ptruth;
  const DenseTensor* ptruth_ptr = nullptr;
  if (truth) {
    ptruth = permute_modes(*truth, perm);
    ptruth_ptr = &ptruth;
  }

  SolveResult res = sm_qrgd_mode1(pop, y, pcfg, ptruth_ptr);

  TuckerFactorization unperm;
  unperm.core = permute_modes(res.x.core, inv);
  unperm.factors.resize(d);
  for (Index l = 0; l < d; ++l) unperm.factors[perm[l] - 1] = std::move(res.x.factors[l]);
  res.x = std::move(unperm);
  return res;
}

SolveResult sempiht(const MeasurementOp& op, std::span<const double> y,
                    const SolverConfig& cfg, const DenseTensor* truth) {
  validate_config(cfg);
  return iht_loop(op, y, cfg, truth, /*sequential=*/true,
                  cfg.step_rule == StepRule::Normalized);
}

SolveResult tiht(const MeasurementOp& op, std::span<const double> y,
                 const SolverConfig& cfg, TihtVariant variant, const DenseTensor* truth) {
  validate_config(cfg);
  SolverConfig c = cfg;
  c.step_rule = variant == TihtVariant::NIHT ? StepRule::Normalized : StepRule::Constant;
  if (variant == TihtVariant::CIHT) c.alpha = 1.0;
  return iht_loop(op, y, c, truth, /*sequential=*/false,
                  variant == TihtVariant::NIHT);
}

SolveResult rgd(const MeasurementOp& op, std::span<const double> y,
                const SolverConfig& cfg, const DenseTensor* truth) {
  validate_config(cfg);
  Driver drv(op, y, cfg, truth);
  const MultilinearRank& r = cfg.rank;
  const Index d = static_cast<Index>(op.dims().size());

  const DenseTensor z0 = op.adjoint(y);
  TuckerFactorization fact = t_hosvd(z0, r);
  DenseTensor xd = fact.compose();

  IterRecord pending;
  pending.alpha = kNaN;
  pending.mon1 = pending.mon2 = pending.mon3 = pending.lemma31 = kNaN;

  for (int k = 0;; ++k) {
    const std::vector<double> res = residual_vec(op, y, xd);
    if (drv.record(k, xd, res, pending)) break;

    const std::int64_t t0 = now_ns();
    const std::uint64_t macs0 = flops::total();

    const DenseTensor g = op.adjoint(res);

    // Tangent-space components of Eq. 2.3: the core direction D and one
    // orthogonal factor direction per mode, U_i^T V_i = 0 enforced by an
    // explicit projection. V_i solves the least-squares fit against the
    // mode-i core unfolding (pseudoinverse with spectral cutoff).
    const std::uint64_t macs_thresh0 = flops::total();
    DenseTensor dcore = g;
    for (Index i = 1; i <= d; ++i)
      dcore = mode_product(dcore, i, transpose(fact.factors[i - 1]));

    std::vector<Matrix> vs(d);
    for (Index i = 1; i <= d; ++i) {
      DenseTensor gi = g;
      for (Index j = 1; j <= d; ++j)
        if (j != i) gi = mode_product(gi, j, transpose(fact.factors[j - 1]));
      const Matrix mg = matricize(gi, i);
      const Matrix ci = matricize(fact.core, i);
      Matrix vi = matmul(mg, linalg::pinv(ci));
      const Matrix proj = matmul_tn(fact.factors[i - 1], vi);
      const Matrix corr = matmul(fact.factors[i - 1], proj);
      kernels::add_scaled(vi.size(), vi.data(), -1.0, corr.data(), vi.data());
      vs[i - 1] = std::move(vi);
    }

    DenseTensor z = dcore;
    for (Index i = 1; i <= d; ++i) z = mode_product(z, i, fact.factors[i - 1]);
    for (Index i = 1; i <= d; ++i) {
      DenseTensor term = fact.core;
      for (Index j = 1; j <= d; ++j)
        term = mode_product(term, j, j == i ? vs[i - 1] : fact.factors[j - 1]);
      z = add_scaled(z, 1.0, term);
    }
    const std::uint64_t proj_macs = flops::total() - macs_thresh0;

    double alpha = cfg.alpha;
    const std::uint64_t macs_step0 = flops::total();
    if (cfg.step_rule == StepRule::Normalized) {
      const auto a = step_size_normalized(z, op);
      if (!a) {
        drv.trace.status = SolverStatus::DegenerateStep;
        break;
      }
      alpha = *a;
    }
    const std::uint64_t step_macs = flops::total() - macs_step0;

    // Retraction: X + alpha Z lives in the span of [U_i V_i], so the
    // truncation happens on a core of size at most 2r per mode.
    const std::uint64_t macs_retract0 = flops::total();
    std::vector<Matrix> qts(d);
    std::vector<Matrix> eus(d), evs(d);
    for (Index i = 0; i < d; ++i) {
      Matrix wi = vs[i];
      for (Index idx = 0; idx < wi.size(); ++idx) wi.data()[idx] *= alpha;
      const Matrix block = hcat(fact.factors[i], wi);
      if (block.cols() <= block.rows()) {
        qts[i] = linalg::qr_thin(block).q;
      } else {
        qts[i] = Matrix::identity(block.rows());
      }
      eus[i] = matmul_tn(qts[i], fact.factors[i]);
      evs[i] = matmul_tn(qts[i], wi);
    }
    DenseTensor core2 = add_scaled(fact.core, alpha, dcore);
    for (Index i = 1; i <= d; ++i) core2 = mode_product(core2, i, eus[i - 1]);
    for (Index i = 1; i <= d; ++i) {
      DenseTensor term = fact.core;
      for (Index j = 1; j <= d; ++j)
        term = mode_product(term, j, j == i ? evs[i - 1] : eus[j - 1]);
      core2 = add_scaled(core2, 1.0, term);
    }
    TuckerFactorization small = t_hosvd(core2, r);
    fact.core = std::move(small.core);
    for (Index i = 0; i < d; ++i) fact.factors[i] = matmul(qts[i], small.factors[i]);
    xd = fact.compose();
    const std::uint64_t retract_macs = flops::total() - macs_retract0;

    pending = IterRecord{};
    pending.alpha = alpha;
    pending.step_macs = step_macs;
    pending.thresh_macs = proj_macs + retract_macs;
    pending.flops = flops::total() - macs0;
    pending.wall_ns = now_ns() - t0;
    pending.mon1 = pending.mon2 = pending.mon3 = pending.lemma31 = kNaN;
  }
  return SolveResult{std::move(fact), std::move(drv.trace)};
}

GammaDiagnostics gamma_constants(const ConvergenceConstants& c) {
  if (c.d < 2 || c.r1 < 1) throw std::invalid_argument("gamma_constants: bad d or r1");
  if (!(c.kappa1 >= 1.0)) throw std::invalid_argument("gamma_constants: kappa1 must be >= 1");
  if (!(c.ric >= 0.0 && c.ric < 1.0))
    throw std::invalid_argument("gamma_constants: ric must lie in [0, 1)");

  const double d = static_cast<double>(c.d);
  const double sr = std::sqrt(static_cast<double>(c.r1));
  const double sd = std::sqrt(d);
  const double sdm1 = std::sqrt(d - 1.0);
  const double kk = c.kappa1;
  const double rr = c.ric;

  GammaDiagnostics out;
  out.gamma1 = rr * (8.0 * sr * kk * ((sdm1 + 1.0) * (rr + 2.0) + rr) + sd + 3.0);
  out.gamma2 = (2.0 * rr / (1.0 - rr)) *
               (4.0 * sr * kk * (2.0 * (sdm1 + 1.0) + rr) + sd + 2.0);
  out.threshold1 = 1.0 / ((20.0 * sdm1 + 24.0) * sr * kk + sd + 3.0);
  out.threshold2 = 1.0 / ((32.0 * sdm1 + 40.0) * sr * kk + 4.0 * sd + 8.0);
  out.gamma1_lt_1 = out.gamma1 < 1.0;
  out.gamma2_lt_1 = out.gamma2 < 1.0;
  out.ric_below_threshold1 = rr < std::min(0.5, out.threshold1);
  out.ric_below_threshold2 = rr < std::min(0.5, out.threshold2);
  return out;
}

MonitorRecord monitor_appendix(const DenseTensor& x, const DenseTensor& xhat,
                               const DenseTensor& w, const DenseTensor& truth) {
  const double den = frob_norm(add_scaled(w, -1.0, truth));
  MonitorRecord out;
  if (den == 0.0) {
    out.ratio_x = out.ratio_xhat = out.ratio_gap = 0.0;
    return out;
  }
  out.ratio_x = frob_norm(add_scaled(x, -1.0, truth)) / den;
  out.ratio_xhat = frob_norm(add_scaled(xhat, -1.0, truth)) / den;
  out.ratio_gap = frob_norm(add_scaled(xhat, -1.0, x)) / den;
  return out;
}

double mode_condition_number(const DenseTensor& t, Index mode, Index r) {
  const auto sv = linalg::singular_values(matricize(t, mode));
  if (r < 1 || r > static_cast<Index>(sv.size()))
    throw std::invalid_argument("mode_condition_number: r out of range");
  if (sv[r - 1] == 0.0) return std::numeric_limits<double>::infinity();
  return sv[0] / sv[r - 1];
}

void save_trace_csv(const SolverTrace& trace, const std::string& solver_name,
                    std::uint64_t seed, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("trace csv: cannot open " + path);
  os << "# solver=" << solver_name << "\n# seed=" << seed
     << "\n# prng=" << rng::kAlgorithmId << "\n# status=" << to_string(trace.status)
     << "\n";
  os << "iter,rel_err,residual,alpha,flops,wall_ns,monitor1,monitor2,monitor3,lemma31\n";
  for (const IterRecord& row : trace.rows) {
    os << row.iter << ',' << fmt_double(row.rel_err) << ',' << fmt_double(row.residual)
       << ',' << fmt_double(row.alpha) << ',' << row.flops << ',' << row.wall_ns << ','
       << fmt_double(row.mon1) << ',' << fmt_double(row.mon2) << ','
       << fmt_double(row.mon3) << ',' << fmt_double(row.lemma31) << "\n";
  }
  if (!os) throw std::runtime_error("trace csv: write failed");
}

}  // namespace trec
