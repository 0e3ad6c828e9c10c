#include "trec/harness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "trec/format.hpp"
#include "trec/version.hpp"

namespace trec {

namespace {

namespace fs = std::filesystem;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

std::vector<Index> parse_index_list(const std::string& s, const std::string& key) {
  std::vector<Index> out;
  for (const auto& p : split_list(s)) {
    try {
      out.push_back(std::stoll(p));
    } catch (...) {
      throw std::invalid_argument("config: bad integer in " + key + ": " + p);
    }
  }
  if (out.empty()) throw std::invalid_argument("config: empty list for " + key);
  return out;
}

std::vector<double> parse_double_list(const std::string& s, const std::string& key) {
  std::vector<double> out;
  for (const auto& p : split_list(s)) {
    try {
      out.push_back(std::stod(p));
    } catch (...) {
      throw std::invalid_argument("config: bad number in " + key + ": " + p);
    }
  }
  if (out.empty()) throw std::invalid_argument("config: empty list for " + key);
  return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_same_v<T, double>)
      out += fmt_double(v[i]);
    else if constexpr (std::is_same_v<T, std::string>)
      out += v[i];
    else
      out += std::to_string(v[i]);
  }
  return out;
}

SolveResult dispatch_solver(const std::string& name, const MeasurementOp& op,
                            std::span<const double> y, const SolverConfig& cfg,
                            const DenseTensor* truth) {
  if (name == "sm_qrgd") return sm_qrgd(op, y, cfg, truth);
  if (name == "sempiht") return sempiht(op, y, cfg, truth);
  if (name == "tiht_ciht") return tiht(op, y, cfg, TihtVariant::CIHT, truth);
  if (name == "tiht_niht") return tiht(op, y, cfg, TihtVariant::NIHT, truth);
  if (name == "rgd") return rgd(op, y, cfg, truth);
  throw std::invalid_argument("config: unknown solver " + name);
}

SolverConfig base_config(const ExperimentSpec& spec, const MultilinearRank& rank) {
  SolverConfig cfg;
  cfg.rank = rank;
  cfg.step_rule = spec.step_rule;
  cfg.alpha = spec.alpha;
  cfg.max_iters = spec.max_iters;
  cfg.tol = spec.tol;
  cfg.monitors = spec.monitors;
  cfg.seed = spec.seed;
  return cfg;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_csv_preamble(std::ofstream& os, const ExperimentSpec& spec) {
  os << "# experiment=" << to_string(spec.kind) << "\n"
     << "# spec_hash=" << hex64(spec_hash(spec)) << "\n"
     << "# prng=" << rng::kAlgorithmId << "\n"
     << "# seed=" << spec.seed << "\n"
     << "# version=" << kVersionString << "\n";
}

std::ofstream open_csv(const ExperimentSpec& spec, const std::string& name) {
  const fs::path p = fs::path(spec.out_dir) / name;
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot open " + p.string() + " for writing");
  write_csv_preamble(os, spec);
  return os;
}

void write_meta(const ExperimentSpec& spec) {
  std::ofstream os(fs::path(spec.out_dir) / "meta.txt");
  if (!os) throw std::runtime_error("cannot write meta.txt");
  os << "experiment=" << to_string(spec.kind) << "\n"
     << "spec=" << canonical_spec_string(spec) << "\n"
     << "spec_hash=" << hex64(spec_hash(spec)) << "\n"
     << "prng=" << rng::kAlgorithmId << "\n"
     << "version=" << kVersionString << "\n"
     << "master_seed=" << spec.seed << "\n"
     << "seed_derivation=child(kind)/child(cell)/child(trial)/child(purpose)\n";
}

rng::Stream trial_stream(const ExperimentSpec& spec, const std::string& cell, int trial) {
  return rng::Stream(spec.seed)
      .child(to_string(spec.kind))
      .child(cell)
      .child(static_cast<std::uint64_t>(trial));
}

MultilinearRank cubic_rank(const ExperimentSpec& spec, Index r) {
  return MultilinearRank(std::vector<Index>(spec.dims.size(), r));
}

struct TrialData {
  DenseTensor truth;
  SamplingOperator op;
  std::vector<double> y;
};

TrialData make_completion_trial(const ExperimentSpec& spec, const MultilinearRank& rank,
                                const std::string& cell, int trial, double snr_db) {
  rng::Stream ts = trial_stream(spec, cell, trial);
  DenseTensor truth = synth_tensor(spec.dims, rank, ts.child("tensor"));
  SamplingOperator op = sample_omega(spec.dims, spec.rho, ts.child("omega"));
  std::vector<double> y;
  if (std::isinf(snr_db)) {
    y = op.apply(truth);
  } else {
    const DenseTensor noisy = add_noise(truth, NoiseSpec{snr_db, ts.child("noise").key()});
    y = op.apply(noisy);
  }
  return TrialData{std::move(truth), std::move(op), std::move(y)};
}

std::string trace_name(const std::string& label, int trial) {
  return "traces/trace_" + label + "_t" + std::to_string(trial) + ".csv";
}

double mean_over_updates(const SolverTrace& trace,
                         std::uint64_t IterRecord::*field) {
  if (trace.rows.size() <= 1) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 1; i < trace.rows.size(); ++i)
    acc += static_cast<double>(trace.rows[i].*field);
  return acc / static_cast<double>(trace.rows.size() - 1);
}

std::vector<std::string> default_solvers(const ExperimentSpec& spec) {
  if (!spec.solvers.empty()) return spec.solvers;
  if (spec.kind == ExperimentKind::Noise) return {"sm_qrgd", "sempiht"};
  return {"sm_qrgd", "sempiht", "tiht_niht", "rgd"};
}

}  // namespace

const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Complete: return "complete";
    case ExperimentKind::Phase: return "phase";
    case ExperimentKind::Noise: return "noise";
    case ExperimentKind::Modes: return "modes";
    case ExperimentKind::Cond: return "cond";
    case ExperimentKind::Compare: return "compare";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from(const std::string& name) {
  if (name == "complete") return ExperimentKind::Complete;
  if (name == "phase") return ExperimentKind::Phase;
  if (name == "noise") return ExperimentKind::Noise;
  if (name == "modes") return ExperimentKind::Modes;
  if (name == "cond") return ExperimentKind::Cond;
  if (name == "compare") return ExperimentKind::Compare;
  throw std::invalid_argument("unknown experiment kind: " + name);
}

ExperimentSpec parse_config_text(const std::string& text) {
  ExperimentSpec spec;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected key = value, got: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (val.empty()) throw std::invalid_argument("config: empty value for " + key);

    if (key == "kind") {
      spec.kind = experiment_kind_from(val);
    } else if (key == "dims") {
      spec.dims = parse_index_list(val, key);
    } else if (key == "rank") {
      spec.rank = parse_index_list(val, key);
    } else if (key == "ranks") {
      spec.rank_grid = parse_index_list(val, key);
    } else if (key == "rho") {
      spec.rho = std::stod(val);
    } else if (key == "rhos") {
      spec.rho_grid = parse_double_list(val, key);
    } else if (key == "snrs") {
      spec.snr_list = parse_double_list(val, key);
    } else if (key == "solvers") {
      spec.solvers = split_list(val);
    } else if (key == "modes") {
      spec.tangent_modes = parse_index_list(val, key);
    } else if (key == "kappas") {
      spec.kappa_list = parse_double_list(val, key);
    } else if (key == "trials") {
      spec.trials = std::stoi(val);
    } else if (key == "seed") {
      spec.seed = std::stoull(val);
    } else if (key == "tol") {
      spec.tol = std::stod(val);
    } else if (key == "max_iters") {
      spec.max_iters = std::stoi(val);
    } else if (key == "step") {
      if (val == "constant")
        spec.step_rule = StepRule::Constant;
      else if (val == "normalized")
        spec.step_rule = StepRule::Normalized;
      else
        throw std::invalid_argument("config: step must be constant or normalized");
    } else if (key == "alpha") {
      spec.alpha = std::stod(val);
    } else if (key == "monitors") {
      spec.monitors = (val == "1" || val == "true");
    } else if (key == "out") {
      spec.out_dir = val;
    } else {
      throw std::invalid_argument("config: unknown key " + key);
    }
  }

  if (spec.trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (spec.dims.size() < 2) throw std::invalid_argument("config: need at least 2 dims");
  if (spec.rank.size() == 1)
    spec.rank = std::vector<Index>(spec.dims.size(), spec.rank[0]);
  if (spec.rank.size() != spec.dims.size())
    throw std::invalid_argument("config: rank length must match dims");
  for (std::size_t i = 0; i < spec.rank.size(); ++i)
    if (spec.rank[i] < 1 || spec.rank[i] > spec.dims[i])
      throw std::invalid_argument("config: rank out of range");
  if (!(spec.rho > 0.0 && spec.rho <= 1.0))
    throw std::invalid_argument("config: rho must lie in (0,1]");
  if (spec.kind == ExperimentKind::Phase) {
    if (spec.rank_grid.empty()) spec.rank_grid = {2, 3, 4};
    if (spec.rho_grid.empty()) spec.rho_grid = {0.1, 0.2, 0.3, 0.4, 0.5};
  }
  if (spec.kind == ExperimentKind::Noise && spec.snr_list.empty())
    spec.snr_list = {60.0, 80.0, 100.0};
  return spec;
}

ExperimentSpec parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("config: cannot open " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  return parse_config_text(buf.str());
}

std::string canonical_spec_string(const ExperimentSpec& spec) {
  std::string s;
  s += "kind=" + std::string(to_string(spec.kind));
  s += ";dims=" + join(spec.dims);
  s += ";rank=" + join(spec.rank);
  s += ";ranks=" + join(spec.rank_grid);
  s += ";rho=" + fmt_double(spec.rho);
  s += ";rhos=" + join(spec.rho_grid);
  s += ";snrs=" + join(spec.snr_list);
  s += ";solvers=" + join(spec.solvers);
  s += ";modes=" + join(spec.tangent_modes);
  s += ";kappas=" + join(spec.kappa_list);
  s += ";trials=" + std::to_string(spec.trials);
  s += ";seed=" + std::to_string(spec.seed);
  s += ";tol=" + fmt_double(spec.tol);
  s += ";max_iters=" + std::to_string(spec.max_iters);
  s += ";step=" + std::string(spec.step_rule == StepRule::Constant ? "constant" : "normalized");
  s += ";alpha=" + fmt_double(spec.alpha);
  s += ";monitors=" + std::string(spec.monitors ? "1" : "0");
  return s;
}

std::uint64_t spec_hash(const ExperimentSpec& spec) {
  return rng::hash_str(canonical_spec_string(spec));
}

DenseTensor synth_tensor(const std::vector<Index>& dims, const MultilinearRank& rank,
                         rng::Stream stream) {
  DenseTensor g(dims);
  rng::Stream s = stream.child("gaussian");
  for (Index i = 0; i < g.size(); ++i) g[i] = s.next_gaussian();
  return t_hosvd(g, rank).compose();
}

DenseTensor synth_conditioned(Index n, Index r, double kappa2, rng::Stream stream) {
  if (!(kappa2 >= 1.0)) throw std::invalid_argument("synth_conditioned: kappa2 must be >= 1");
  if (r < 1 || r > n) throw std::invalid_argument("synth_conditioned: r out of range");

  // sigma_j equispaced from 1 down to 1/kappa2.
  std::vector<double> sigma(r, 1.0);
  for (Index j = 0; j < r; ++j)
    sigma[j] = r == 1 ? 1.0
                      : 1.0 + static_cast<double>(j) * (1.0 / kappa2 - 1.0) /
                                  static_cast<double>(r - 1);

  DenseTensor core({r, r, r});
  const double inv_sqrt_r = 1.0 / std::sqrt(static_cast<double>(r));
  for (Index j3 = 1; j3 <= r; ++j3)
    for (Index j2 = 1; j2 <= r; ++j2)
      for (Index j1 = 1; j1 <= r; ++j1)
        if ((j1 + j2 + j3) % r == 0) {
          const std::array<Index, 3> idx{j1 - 1, j2 - 1, j3 - 1};
          core.at(std::span<const Index>(idx)) = sigma[j2 - 1] * inv_sqrt_r;
        }

  DenseTensor out = core;
  for (Index mode = 1; mode <= 3; ++mode) {
    rng::Stream fs = stream.child("factor").child(static_cast<std::uint64_t>(mode));
    Matrix g(n, r);
    for (Index i = 0; i < g.size(); ++i) g.data()[i] = fs.next_gaussian();
    out = mode_product(out, mode, linalg::qr_thin(g).q);
  }
  return out;
}

RunOutcome run_complete(const ExperimentSpec& spec) {
  const MultilinearRank rank(spec.rank);
  const double snr = spec.snr_list.empty()
                         ? std::numeric_limits<double>::infinity()
                         : spec.snr_list.front();
  std::ofstream results = open_csv(spec, "results.csv");
  results << "solver,trial,status,iters,rel_err,residual\n";
  std::ofstream timings = open_csv(spec, "timings.csv");
  timings << "solver,trial,wall_ms\n";

  RunOutcome outcome;
  outcome.results_csv = (fs::path(spec.out_dir) / "results.csv").string();
  for (const std::string& solver : default_solvers(spec)) {
    for (int trial = 0; trial < spec.trials; ++trial) {
      const TrialData data = make_completion_trial(spec, rank, "single", trial, snr);
      if (trial == 0 && solver == default_solvers(spec).front()) {
        save_omega_csv(data.op, trial_stream(spec, "single", trial).child("omega").key(),
                       (fs::path(spec.out_dir) / "omega_t0.csv").string());
      }
      const SolveResult res =
          dispatch_solver(solver, data.op, data.y, base_config(spec, rank), &data.truth);
      outcome.any_diverged |= res.trace.status == SolverStatus::Diverged;
      const IterRecord& last = res.trace.rows.back();
      results << solver << ',' << trial << ',' << to_string(res.trace.status) << ','
              << res.trace.iters() << ',' << fmt_double(last.rel_err) << ','
              << fmt_double(last.residual) << "\n";
      std::int64_t wall = 0;
      for (const auto& row : res.trace.rows) wall += row.wall_ns;
      timings << solver << ',' << trial << ',' << fmt_double(wall / 1e6) << "\n";
      save_trace_csv(res.trace, solver, spec.seed,
                     (fs::path(spec.out_dir) / trace_name(solver, trial)).string());
    }
  }
  return outcome;
}

RunOutcome run_phase_transition(const ExperimentSpec& spec) {
  std::ofstream results = open_csv(spec, "results.csv");
  results << "r,rho,successes,trials,mean_iters\n";
  std::ofstream timings = open_csv(spec, "timings.csv");
  timings << "r,rho,wall_ms\n";

  RunOutcome outcome;
  outcome.results_csv = (fs::path(spec.out_dir) / "results.csv").string();
  for (Index r : spec.rank_grid) {
    for (double rho : spec.rho_grid) {
      const std::string cell = "r" + std::to_string(r) + "_rho" + fmt_double(rho);
      ExperimentSpec cspec = spec;
      cspec.rho = rho;
      const MultilinearRank rank = cubic_rank(spec, r);
      int successes = 0;
      double iter_acc = 0.0;
      int iter_count = 0;
      std::int64_t wall = 0;
      for (int trial = 0; trial < spec.trials; ++trial) {
        const TrialData data = make_completion_trial(
            cspec, rank, cell, trial, std::numeric_limits<double>::infinity());
        const SolveResult res =
            dispatch_solver("sm_qrgd", data.op, data.y, base_config(cspec, rank), &data.truth);
        outcome.any_diverged |= res.trace.status == SolverStatus::Diverged;
        if (res.trace.status == SolverStatus::Converged &&
            res.trace.rows.back().rel_err <= spec.tol) {
          ++successes;
          iter_acc += res.trace.iters();
          ++iter_count;
        }
        for (const auto& row : res.trace.rows) wall += row.wall_ns;
      }
      const double mean_iters = iter_count ? iter_acc / iter_count : 0.0;
      results << r << ',' << fmt_double(rho) << ',' << successes << ',' << spec.trials
              << ',' << fmt_double(mean_iters) << "\n";
      timings << r << ',' << fmt_double(rho) << ',' << fmt_double(wall / 1e6) << "\n";
    }
  }
  return outcome;
}

RunOutcome run_noise(const ExperimentSpec& spec) {
  const MultilinearRank rank(spec.rank);
  std::ofstream results = open_csv(spec, "results.csv");
  results << "snr_db,solver,trial,status,iters,rel_err\n";
  std::ofstream timings = open_csv(spec, "timings.csv");
  timings << "snr_db,solver,trial,wall_ms\n";

  RunOutcome outcome;
  outcome.results_csv = (fs::path(spec.out_dir) / "results.csv").string();
  for (double snr : spec.snr_list) {
    const std::string cell = "snr" + fmt_double(snr);
    for (const std::string& solver : default_solvers(spec)) {
      for (int trial = 0; trial < spec.trials; ++trial) {
        const TrialData data = make_completion_trial(spec, rank, cell, trial, snr);
        const SolveResult res =
            dispatch_solver(solver, data.op, data.y, base_config(spec, rank), &data.truth);
        outcome.any_diverged |= res.trace.status == SolverStatus::Diverged;
        results << fmt_double(snr) << ',' << solver << ',' << trial << ','
                << to_string(res.trace.status) << ',' << res.trace.iters() << ','
                << fmt_double(res.trace.rows.back().rel_err) << "\n";
        std::int64_t wall = 0;
        for (const auto& row : res.trace.rows) wall += row.wall_ns;
        timings << fmt_double(snr) << ',' << solver << ',' << trial << ','
                << fmt_double(wall / 1e6) << "\n";
        if (trial == 0)
          save_trace_csv(res.trace, solver, spec.seed,
                         (fs::path(spec.out_dir) /
                          trace_name(solver + "_snr" + fmt_double(snr), trial))
                             .string());
      }
    }
  }
  return outcome;
}

RunOutcome run_mode_selection(const ExperimentSpec& spec) {
  const MultilinearRank rank(spec.rank);
  for (std::size_t i = 1; i < spec.rank.size(); ++i)
    if (spec.rank[i] <= spec.rank[i - 1])
      throw std::invalid_argument("modes experiment needs strictly increasing ranks");
  for (Index m : spec.tangent_modes)
    if (m < 1 || m > static_cast<Index>(spec.dims.size()))
      throw std::invalid_argument("modes experiment: tangent mode out of range");

  std::ofstream results = open_csv(spec, "results.csv");
  results << "tangent_mode,trial,status,iters,rel_err\n";
  std::ofstream timings = open_csv(spec, "timings.csv");
  timings << "tangent_mode,trial,wall_ms\n";

  RunOutcome outcome;
  outcome.results_csv = (fs::path(spec.out_dir) / "results.csv").string();
  for (int trial = 0; trial < spec.trials; ++trial) {
    // One instance per trial, shared by the three projections.
    const TrialData data = make_completion_trial(spec, rank, "shared", trial,
                                                 std::numeric_limits<double>::infinity());
    for (Index mode : spec.tangent_modes) {
      SolverConfig cfg = base_config(spec, rank);
      cfg.tangent_mode = mode;
      const SolveResult res = sm_qrgd(data.op, data.y, cfg, &data.truth);
      outcome.any_diverged |= res.trace.status == SolverStatus::Diverged;
      results << mode << ',' << trial << ',' << to_string(res.trace.status) << ','
              << res.trace.iters() << ',' << fmt_double(res.trace.rows.back().rel_err)
              << "\n";
      std::int64_t wall = 0;
      for (const auto& row : res.trace.rows) wall += row.wall_ns;
      timings << mode << ',' << trial << ',' << fmt_double(wall / 1e6) << "\n";
      if (trial == 0)
        save_trace_csv(res.trace, "sm_qrgd", spec.seed,
                       (fs::path(spec.out_dir) /
                        trace_name("mode" + std::to_string(mode), trial))
                           .string());
    }
  }
  return outcome;
}

RunOutcome run_cond(const ExperimentSpec& spec) {
  if (spec.dims.size() != 3)
    throw std::invalid_argument("cond experiment is defined for 3-order tensors");
  const Index n = spec.dims[0];
  const Index r = spec.rank[0];
  const MultilinearRank rank(spec.rank);

  std::ofstream results = open_csv(spec, "results.csv");
  results << "kappa2,trial,status,iters,rel_err\n";
  std::ofstream timings = open_csv(spec, "timings.csv");
  timings << "kappa2,trial,wall_ms\n";

  RunOutcome outcome;
  outcome.results_csv = (fs::path(spec.out_dir) / "results.csv").string();
  for (double kappa : spec.kappa_list) {
    const std::string cell = "kappa" + fmt_double(kappa);
    for (int trial = 0; trial < spec.trials; ++trial) {
      rng::Stream ts = trial_stream(spec, cell, trial);
      const DenseTensor truth = synth_conditioned(n, r, kappa, ts.child("tensor"));
      const SamplingOperator op = sample_omega(spec.dims, spec.rho, ts.child("omega"));
      const std::vector<double> y = op.apply(truth);
      const SolveResult res = sm_qrgd(op, y, base_config(spec, rank), &truth);
      outcome.any_diverged |= res.trace.status == SolverStatus::Diverged;
      results << fmt_double(kappa) << ',' << trial << ','
              << to_string(res.trace.status) << ',' << res.trace.iters() << ','
              << fmt_double(res.trace.rows.back().rel_err) << "\n";
      std::int64_t wall = 0;
      for (const auto& row : res.trace.rows) wall += row.wall_ns;
      timings << fmt_double(kappa) << ',' << trial << ',' << fmt_double(wall / 1e6)
              << "\n";
      if (trial == 0)
        save_trace_csv(res.trace, "sm_qrgd", spec.seed,
                       (fs::path(spec.out_dir) / trace_name(cell, trial)).string());
    }
  }
  return outcome;
}

RunOutcome run_compare(const ExperimentSpec& spec) {
  const MultilinearRank rank(spec.rank);
  std::ofstream results = open_csv(spec, "results.csv");
  results << "solver,trial,status,iters,rel_err,mean_thresh_macs,mean_step_macs,"
             "mean_thresh_leading,mean_step_leading\n";
  std::ofstream summary = open_csv(spec, "summary.csv");
  summary << "solver,successes,trials,mean_iters,mean_thresh_macs,mean_step_macs\n";
  std::ofstream timings = open_csv(spec, "timings.csv");
  timings << "solver,trial,wall_ms\n";

  RunOutcome outcome;
  outcome.results_csv = (fs::path(spec.out_dir) / "results.csv").string();
  for (const std::string& solver : default_solvers(spec)) {
    int successes = 0;
    double iters_acc = 0.0, thresh_acc = 0.0, step_acc = 0.0;
    for (int trial = 0; trial < spec.trials; ++trial) {
      const TrialData data = make_completion_trial(spec, rank, "shared", trial,
                                                   std::numeric_limits<double>::infinity());
      const SolveResult res =
          dispatch_solver(solver, data.op, data.y, base_config(spec, rank), &data.truth);
      outcome.any_diverged |= res.trace.status == SolverStatus::Diverged;
      const double thresh = mean_over_updates(res.trace, &IterRecord::thresh_macs);
      const double step = mean_over_updates(res.trace, &IterRecord::step_macs);
      const double thresh_lead = mean_over_updates(res.trace, &IterRecord::thresh_leading);
      const double step_lead = mean_over_updates(res.trace, &IterRecord::step_leading);
      results << solver << ',' << trial << ',' << to_string(res.trace.status) << ','
              << res.trace.iters() << ',' << fmt_double(res.trace.rows.back().rel_err)
              << ',' << fmt_double(thresh) << ',' << fmt_double(step) << ','
              << fmt_double(thresh_lead) << ',' << fmt_double(step_lead) << "\n";
      if (res.trace.status == SolverStatus::Converged) {
        ++successes;
        iters_acc += res.trace.iters();
      }
      thresh_acc += thresh;
      step_acc += step;
      std::int64_t wall = 0;
      for (const auto& row : res.trace.rows) wall += row.wall_ns;
      timings << solver << ',' << trial << ',' << fmt_double(wall / 1e6) << "\n";
      if (trial == 0)
        save_trace_csv(res.trace, solver, spec.seed,
                       (fs::path(spec.out_dir) / trace_name(solver, trial)).string());
    }
    summary << solver << ',' << successes << ',' << spec.trials << ','
            << fmt_double(successes ? iters_acc / successes : 0.0) << ','
            << fmt_double(thresh_acc / spec.trials) << ','
            << fmt_double(step_acc / spec.trials) << "\n";
  }
  return outcome;
}

int run_experiment(const ExperimentSpec& spec) {
  fs::create_directories(fs::path(spec.out_dir) / "traces");
  write_meta(spec);
  RunOutcome outcome;
  switch (spec.kind) {
    case ExperimentKind::Complete: outcome = run_complete(spec); break;
    case ExperimentKind::Phase: outcome = run_phase_transition(spec); break;
    case ExperimentKind::Noise: outcome = run_noise(spec); break;
    case ExperimentKind::Modes: outcome = run_mode_selection(spec); break;
    case ExperimentKind::Cond: outcome = run_cond(spec); break;
    case ExperimentKind::Compare: outcome = run_compare(spec); break;
  }
  return outcome.any_diverged ? 2 : 0;
}

}  // namespace trec
