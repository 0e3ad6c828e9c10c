#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>

#include "trec/measurement.hpp"
#include "trec/tangent.hpp"

namespace trec {

enum class StepRule { Constant, Normalized };

struct SolverConfig {
  MultilinearRank rank;
  StepRule step_rule = StepRule::Normalized;
  double alpha = 1.0;  // step for the constant rule
  int max_iters = 100;
  double tol = 1e-5;
  Index tangent_mode = 1;  // SM-QRGD only; others ignore it
  bool monitors = false;   // record the appendix inequality monitors
  std::uint64_t seed = 0;  // carried into traces; the solvers are deterministic
};

enum class SolverStatus { Converged, MaxIters, Diverged, DegenerateStep };

const char* to_string(SolverStatus s);

struct IterRecord {
  int iter = 0;
  double rel_err = 0.0;   // vs ground truth when known, else nan
  double residual = 0.0;  // ||A x - y|| / ||y||
  double alpha = 0.0;     // step that produced this iterate (nan on row 0)
  std::uint64_t flops = 0;        // instrumented multiply-adds this iteration
  std::uint64_t thresh_macs = 0;  // share spent in the thresholding step
  std::uint64_t step_macs = 0;    // share spent projecting / normalizing
  std::uint64_t thresh_leading = 0;  // SM-QRGD: leading-order fused count
  std::uint64_t step_leading = 0;    // SM-QRGD: leading-order projection count
  std::int64_t wall_ns = 0;
  double mon1 = 0.0, mon2 = 0.0, mon3 = 0.0;  // Lemma-style ratios (nan when off)
  double lemma31 = 0.0;                       // tangent fixed-point residual
};

struct SolverTrace {
  std::vector<IterRecord> rows;
  SolverStatus status = SolverStatus::MaxIters;

  int iters() const { return rows.empty() ? 0 : rows.back().iter; }
  double final_metric() const;
};

struct SolveResult {
  TuckerFactorization x;
  SolverTrace trace;
};

/// Alg. 3 initialization: X0 is the sequential truncation of A*(y) with mode
/// 1 first, the basis comes from the mode-1-only truncation of the same
/// tensor.
std::pair<TuckerFactorization, ModeOneBasis> init_point(const MeasurementOp& op,
                                                        std::span<const double> y,
                                                        const MultilinearRank& r);

/// ||g||^2 / ||A(g)||^2 for an already-projected gradient; empty when the
/// denominator vanishes (stationary or degenerate direction).
std::optional<double> step_size_normalized(const DenseTensor& g_projected,
                                           const MeasurementOp& op);

SolveResult sm_qrgd(const MeasurementOp& op, std::span<const double> y,
                    const SolverConfig& config, const DenseTensor* truth = nullptr);

SolveResult sempiht(const MeasurementOp& op, std::span<const double> y,
                    const SolverConfig& config, const DenseTensor* truth = nullptr);

enum class TihtVariant { CIHT, NIHT };

SolveResult tiht(const MeasurementOp& op, std::span<const double> y,
                 const SolverConfig& config, TihtVariant variant,
                 const DenseTensor* truth = nullptr);

SolveResult rgd(const MeasurementOp& op, std::span<const double> y,
                const SolverConfig& config, const DenseTensor* truth = nullptr);

/// Inputs for the recovery-guarantee constants. The restricted isometry
/// constant is a user-supplied hypothesis (it is not computable at realistic
/// sizes); kappa1 is sigma_1/sigma_r1 of the mode-1 unfolding of the truth.
struct ConvergenceConstants {
  Index d;
  Index r1;
  double kappa1;
  double ric;  // hypothesised R_{3 r1}
};

struct GammaDiagnostics {
  double gamma1, gamma2;
  double threshold1, threshold2;
  bool gamma1_lt_1, gamma2_lt_1;
  bool ric_below_threshold1, ric_below_threshold2;
};

GammaDiagnostics gamma_constants(const ConvergenceConstants& c);

/// The three per-iteration ratios ||X - T||, ||Xhat - T||, ||Xhat - X||
/// over ||W - T||; each is bounded by (sqrt(d)+1, 2, sqrt(d)+1). Zero
/// denominators report zero ratios.
struct MonitorRecord {
  double ratio_x, ratio_xhat, ratio_gap;
};

MonitorRecord monitor_appendix(const DenseTensor& x, const DenseTensor& xhat,
                               const DenseTensor& w, const DenseTensor& truth);

/// sigma_1 / sigma_r of the mode-k unfolding.
double mode_condition_number(const DenseTensor& t, Index mode, Index r);

/// Columns: iter,rel_err,residual,alpha,flops,wall_ns,monitor1,monitor2,
/// monitor3,lemma31. Comment header records solver, seed and PRNG id.
void save_trace_csv(const SolverTrace& trace, const std::string& solver_name,
                    std::uint64_t seed, const std::string& path);

}  // namespace trec
