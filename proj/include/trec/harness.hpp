#pragma once

#include <string>
#include <vector>

#include "trec/solvers.hpp"

namespace trec {

enum class ExperimentKind { Complete, Phase, Noise, Modes, Cond, Compare };

const char* to_string(ExperimentKind k);
ExperimentKind experiment_kind_from(const std::string& name);

/// Flat description of one experiment; parsed from a key=value config file.
struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::Complete;
  std::vector<Index> dims{20, 20, 20};
  std::vector<Index> rank{2, 2, 2};
  std::vector<Index> rank_grid;      // phase: scalar rank per grid row
  std::vector<double> rho_grid;      // phase: sampling ratios
  double rho = 0.3;
  std::vector<double> snr_list;      // noise sweep (dB); empty = exact data
  std::vector<std::string> solvers;  // complete/compare/noise
  std::vector<Index> tangent_modes{1, 2, 3};
  std::vector<double> kappa_list{1.0, 5.0, 10.0};
  int trials = 10;
  std::uint64_t seed = 1;
  double tol = 1e-5;
  int max_iters = 100;
  StepRule step_rule = StepRule::Normalized;
  double alpha = 1.0;
  bool monitors = false;
  std::string out_dir = "out";
};

/// Parses `key = value` lines; '#' starts a comment. Unknown keys and
/// malformed values are errors.
ExperimentSpec parse_config_text(const std::string& text);
ExperimentSpec parse_config_file(const std::string& path);

/// Canonical one-line rendering of the spec; its hash ties every output file
/// to the exact configuration.
std::string canonical_spec_string(const ExperimentSpec& spec);
std::uint64_t spec_hash(const ExperimentSpec& spec);

/// Gaussian tensor pushed through t_hosvd at the requested rank, composed
/// back; deterministic per stream.
DenseTensor synth_tensor(const std::vector<Index>& dims, const MultilinearRank& rank,
                         rng::Stream stream);

/// Ground truth with prescribed mode-2 condition number kappa2 (modes 1 and
/// 3 stay perfectly conditioned): structured core with sigma_{j2}/sqrt(r) on
/// the congruence pattern j1+j2+j3 = 0 (mod r), random orthonormal factors.
DenseTensor synth_conditioned(Index n, Index r, double kappa2, rng::Stream stream);

struct RunOutcome {
  bool any_diverged = false;
  std::string results_csv;  // path of the deterministic results file
};

RunOutcome run_complete(const ExperimentSpec& spec);
RunOutcome run_phase_transition(const ExperimentSpec& spec);
RunOutcome run_noise(const ExperimentSpec& spec);
RunOutcome run_mode_selection(const ExperimentSpec& spec);
RunOutcome run_cond(const ExperimentSpec& spec);
RunOutcome run_compare(const ExperimentSpec& spec);

/// Dispatch on spec.kind; creates the output directory, writes results.csv
/// (deterministic rows), timings.csv (wall clock, informational), traces and
/// meta.txt. Returns the process exit code: 0, or 2 when any run diverged.
int run_experiment(const ExperimentSpec& spec);

}  // namespace trec
