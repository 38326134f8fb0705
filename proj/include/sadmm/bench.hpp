#ifndef SADMM_BENCH_HPP
#define SADMM_BENCH_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "sadmm/admm.hpp"

namespace sadmm {

enum class Algorithm { SADMM, SVRG_ADMM, SPIDER_ADMM, H_SADMM, ASADMM, AH_SADMM };

// Canonical names: SADMM, SVRG-ADMM, SPIDER-ADMM, H-SADMM, ASADMM, AH-SADMM.
std::string algorithm_name(Algorithm a);
Algorithm parse_algorithm(const std::string& name);  // unknown -> ConfigError

struct ExperimentConfig {
  enum class ProblemKind { ScadClassification, FusedLasso };
  ProblemKind problem = ProblemKind::ScadClassification;

  // Dataset: either a libsvm file or a synthetic draw.
  std::string dataset_path;  // empty -> synthetic
  int synth_n = 2000;
  int synth_d = 50;
  std::uint64_t synth_seed = 1;
  double synth_noise = 0.1;

  // Constraint graph; "identity" / "chain_difference" take the feature count,
  // "edge_list:<path>" / "matrix:<path>" load files. Empty -> problem default
  // (identity for SCAD classification, chain_difference for fused lasso).
  std::string graph;

  double lambda1 = 1e-5;
  double scad_c = 3.7;
  double scad_kappa = 0.1;

  std::vector<Algorithm> algorithms;
  int epochs = 20;
  std::vector<std::uint64_t> seeds;
  std::string output_dir;  // empty -> $SADMM_OUT_DIR or "out"
  double beta = 1.01;
  double s = 1.2;
  int probe_interval = 10;
  bool record_timing = false;
  int threads = 1;  // worker pool width for sweeps

  // Raw per-algorithm overrides from [algorithms.<name>] sections.
  std::map<std::string, std::map<std::string, std::string>> overrides;

  // Probe-subcommand knobs ([probe] section).
  double probe_alpha = 0.5;
  int probe_steps = 5;
  int probe_t_max = 3;
  int probe_batch = 0;  // 0 -> N
};

// Sectioned key=value config text: [problem], [run], [algorithms.<name>],
// [probe]. '#'/';' comments. Errors carry line numbers.
ExperimentConfig parse_experiment_config(std::istream& in);
ExperimentConfig parse_experiment_config_file(const std::string& path);

// Literature defaults per algorithm (penalty 1.01, dual stepsize 1.2;
// stepsizes eta enter as w1 = 1/(beta*eta)):
//   SADMM:       SGD batch ceil(sqrt(N)), decaying eta_k = 0.05/(1+1.0*ceil(k/N))
//   SVRG-ADMM:   SVRG batch ceil(N^(2/3)), eta = 1/(3L)
//   SPIDER-ADMM: SPIDER batch ceil(sqrt(N)), eta = 1/(2L), restart ceil(N/M)
//   AH-SADMM:    inner-accelerated hybrid, init batch ceil(N^(1/3)), eta = 1/(2L),
//                momentum tau 0.8
//   H-SADMM:     AH-SADMM with beta_t == 1
//   ASADMM:      AH-SADMM with alpha forced to 0
SolverConfig default_config(Algorithm algo, int problem_size_N, double L);

// Gaussian rows, planted weight vector, labels sign(a.w* + noise*eps)
// (ties -> +1); noise_level 0 gives perfectly separable labels.
Dataset synth_data(int n, int d, std::uint64_t seed, double noise_level);

// Fraction of samples with sign(a_i.x) == b_i; zero dot product counts as incorrect.
double accuracy(const Dataset& ds, const Eigen::VectorXd& x);

struct RunSummary {
  std::string algorithm;
  std::uint64_t seed = 0;
  double final_loss = std::numeric_limits<double>::quiet_NaN();
  double final_accuracy = std::numeric_limits<double>::quiet_NaN();
  std::int64_t grad_calls = 0;
  double wall_time_s = std::numeric_limits<double>::quiet_NaN();
  bool diverged = false;
  int diverged_at = -1;
  int outer_iters = 0;
};

// Outer iteration count whose closed-form IFO total best matches the budget
// N*epochs for this solver configuration.
int iterations_for_budget(const SolverConfig& cfg, int N, std::int64_t budget);
// The closed-form IFO total after T outer iterations.
std::int64_t ifo_total(const SolverConfig& cfg, int N, int T);

// Runs every (algorithm, seed) cell: writes {algo}_{seed}.csv,
// {algo}_{seed}_probe.csv and summary.csv into the output directory; returns
// the summary rows (config order). Divergent runs are recorded and the rest
// continue. `threads` > 1 runs cells in a worker pool (per-run files, no
// shared writers).
std::vector<RunSummary> run_experiment(const ExperimentConfig& cfg);

// Assembles the ProblemSpec a config describes (shared by the CLI subcommands).
ProblemSpec build_experiment_problem(const ExperimentConfig& cfg);
// Solver config for one cell: defaults + [algorithms.<name>] overrides applied.
SolverConfig cell_config(const ExperimentConfig& cfg, Algorithm algo, int N, double L,
                         std::uint64_t seed);

std::string default_output_dir(const ExperimentConfig& cfg);

}  // namespace sadmm

#endif  // SADMM_BENCH_HPP
