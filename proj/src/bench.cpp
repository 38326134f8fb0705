#include "sadmm/bench.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "sadmm/csv.hpp"
#include "sadmm/diagnostics.hpp"
#include "sadmm/inner.hpp"
#include "sadmm/rng.hpp"

namespace sadmm {

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::SADMM: return "SADMM";
    case Algorithm::SVRG_ADMM: return "SVRG-ADMM";
    case Algorithm::SPIDER_ADMM: return "SPIDER-ADMM";
    case Algorithm::H_SADMM: return "H-SADMM";
    case Algorithm::ASADMM: return "ASADMM";
    case Algorithm::AH_SADMM: return "AH-SADMM";
  }
  throw std::logic_error("unreachable algorithm");
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "SADMM") return Algorithm::SADMM;
  if (name == "SVRG-ADMM") return Algorithm::SVRG_ADMM;
  if (name == "SPIDER-ADMM") return Algorithm::SPIDER_ADMM;
  if (name == "H-SADMM") return Algorithm::H_SADMM;
  if (name == "ASADMM") return Algorithm::ASADMM;
  if (name == "AH-SADMM") return Algorithm::AH_SADMM;
  throw ConfigError("unknown algorithm name: " + name);
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t comma = s.find(',', start);
    if (comma == std::string::npos) comma = s.size();
    std::string tok = trim(s.substr(start, comma - start));
    if (!tok.empty()) out.push_back(tok);
    start = comma + 1;
  }
  return out;
}

double to_double(const std::string& v, const std::string& what) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("expected a number for " + what + ", got '" + v + "'");
  return out;
}

long long to_int(const std::string& v, const std::string& what) {
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("expected an integer for " + what + ", got '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& v, const std::string& what) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("expected an unsigned integer for " + what + ", got '" + v + "'");
  return out;
}

bool to_bool(const std::string& v, const std::string& what) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("expected a boolean for " + what + ", got '" + v + "'");
}

// Smallest k >= 1 with k^power >= target (exact integer arithmetic).
int ceil_root(long long target, int power) {
  if (target <= 1) return 1;
  auto pw = [power](long long v) {
    long long r = 1;
    for (int i = 0; i < power; ++i) {
      if (r > (1LL << 62) / std::max<long long>(v, 1)) return (1LL << 62);
      r *= v;
    }
    return r;
  };
  int k = static_cast<int>(std::floor(std::pow(static_cast<double>(target), 1.0 / power)));
  if (k < 1) k = 1;
  while (pw(k) < target) ++k;
  while (k > 1 && pw(k - 1) >= target) --k;
  return k;
}

}  // namespace

ExperimentConfig parse_experiment_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line, section;
  int line_no = 0;
  auto err = [&](const std::string& what) {
    return ConfigError("config parse error at line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t cpos = line.find_first_of("#;");
    if (cpos != std::string::npos) line.resize(cpos);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw err("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.rfind("algorithms.", 0) == 0) {
        std::string name = section.substr(std::string("algorithms.").size());
        try {
          parse_algorithm(name);
        } catch (const ConfigError&) {
          throw err("unknown algorithm section [" + section + "]");
        }
      } else if (section != "problem" && section != "run" && section != "probe") {
        throw err("unknown section [" + section + "]");
      }
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw err("expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw err("empty key");
    try {
      if (section == "problem") {
        if (key == "kind") {
          if (value == "scad_classification")
            cfg.problem = ExperimentConfig::ProblemKind::ScadClassification;
          else if (value == "fused_lasso")
            cfg.problem = ExperimentConfig::ProblemKind::FusedLasso;
          else
            throw ConfigError("unknown problem kind '" + value + "'");
        } else if (key == "dataset") {
          cfg.dataset_path = value;
        } else if (key == "synth_n") {
          cfg.synth_n = static_cast<int>(to_int(value, key));
          if (cfg.synth_n < 1) throw ConfigError("synth_n must be >= 1");
        } else if (key == "synth_d") {
          cfg.synth_d = static_cast<int>(to_int(value, key));
          if (cfg.synth_d < 1) throw ConfigError("synth_d must be >= 1");
        } else if (key == "synth_seed") {
          cfg.synth_seed = to_u64(value, key);
        } else if (key == "synth_noise") {
          cfg.synth_noise = to_double(value, key);
          if (cfg.synth_noise < 0) throw ConfigError("synth_noise must be >= 0");
        } else if (key == "graph") {
          cfg.graph = value;
        } else if (key == "lambda1") {
          cfg.lambda1 = to_double(value, key);
          if (cfg.lambda1 < 0) throw ConfigError("lambda1 must be >= 0");
        } else if (key == "scad_c") {
          cfg.scad_c = to_double(value, key);
          if (cfg.scad_c <= 1.0) throw ConfigError("scad_c must be > 1");
        } else if (key == "scad_kappa") {
          cfg.scad_kappa = to_double(value, key);
          if (cfg.scad_kappa <= 0) throw ConfigError("scad_kappa must be > 0");
        } else {
          throw ConfigError("unknown key '" + key + "' in [problem]");
        }
      } else if (section == "run") {
        if (key == "algorithms") {
          cfg.algorithms.clear();
          for (const auto& name : split_list(value))
            cfg.algorithms.push_back(parse_algorithm(name));
        } else if (key == "epochs") {
          cfg.epochs = static_cast<int>(to_int(value, key));
          if (cfg.epochs < 1) throw ConfigError("epochs must be >= 1");
        } else if (key == "seeds") {
          cfg.seeds.clear();
          for (const auto& tok : split_list(value)) cfg.seeds.push_back(to_u64(tok, key));
        } else if (key == "output_dir") {
          cfg.output_dir = value;
        } else if (key == "beta") {
          cfg.beta = to_double(value, key);
          if (cfg.beta <= 0) throw ConfigError("beta must be positive");
        } else if (key == "s") {
          cfg.s = to_double(value, key);
        } else if (key == "probe_interval") {
          cfg.probe_interval = static_cast<int>(to_int(value, key));
          if (cfg.probe_interval < 0) throw ConfigError("probe_interval must be >= 0");
        } else if (key == "record_timing") {
          cfg.record_timing = to_bool(value, key);
        } else if (key == "threads") {
          cfg.threads = static_cast<int>(to_int(value, key));
          if (cfg.threads < 1) throw ConfigError("threads must be >= 1");
        } else {
          throw ConfigError("unknown key '" + key + "' in [run]");
        }
      } else if (section == "probe") {
        if (key == "alpha") {
          cfg.probe_alpha = to_double(value, key);
          if (cfg.probe_alpha < 0 || cfg.probe_alpha > 1)
            throw ConfigError("probe alpha must lie in [0, 1]");
        } else if (key == "steps") {
          cfg.probe_steps = static_cast<int>(to_int(value, key));
          if (cfg.probe_steps < 1) throw ConfigError("probe steps must be >= 1");
        } else if (key == "t_max") {
          cfg.probe_t_max = static_cast<int>(to_int(value, key));
        } else if (key == "batch") {
          cfg.probe_batch = static_cast<int>(to_int(value, key));
          if (cfg.probe_batch < 0) throw ConfigError("probe batch must be >= 0");
        } else {
          throw ConfigError("unknown key '" + key + "' in [probe]");
        }
      } else if (section.rfind("algorithms.", 0) == 0) {
        cfg.overrides[section.substr(std::string("algorithms.").size())][key] = value;
      } else {
        throw ConfigError("key outside any section");
      }
    } catch (const ConfigError& e) {
      throw err(e.what());
    }
  }
  return cfg;
}

ExperimentConfig parse_experiment_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  return parse_experiment_config(f);
}

SolverConfig default_config(Algorithm algo, int N, double L) {
  if (N < 1) throw ConfigError("default_config needs N >= 1");
  if (!(L > 0)) throw ConfigError("default_config needs L > 0");
  SolverConfig sc;
  sc.w2 = 0.0;
  sc.allow_infeasible_params = true;
  const int sqrt_n = ceil_root(N, 2);
  switch (algo) {
    case Algorithm::SADMM:
      sc.estimator.kind = EstimatorKind::SGD;
      sc.estimator.batch_M = sqrt_n;
      sc.eta0 = 0.05;
      sc.eta_prime = 1.0;
      sc.w1 = 1.0 / (sc.beta * sc.eta0);
      break;
    case Algorithm::SVRG_ADMM:
      sc.estimator.kind = EstimatorKind::SVRG;
      sc.estimator.batch_M = ceil_root(static_cast<long long>(N) * N, 3);
      sc.w1 = 3.0 * L / sc.beta;  // eta = 1/(3L)
      break;
    case Algorithm::SPIDER_ADMM:
      sc.estimator.kind = EstimatorKind::SPIDER;
      sc.estimator.batch_M = sqrt_n;
      sc.estimator.restart_q = (N + sqrt_n - 1) / sqrt_n;
      sc.w1 = 2.0 * L / sc.beta;  // eta = 1/(2L)
      break;
    case Algorithm::AH_SADMM:
    case Algorithm::H_SADMM:
    case Algorithm::ASADMM: {
      sc.x_update_mode = SolverConfig::XUpdateMode::InnerAccel;
      sc.estimator.kind = EstimatorKind::HYBRID;
      const int cube = ceil_root(N, 3);
      sc.estimator.batch_M = cube;   // anchor batch for the carried estimate
      sc.estimator.pair_batch = 1;   // correction pairs are single samples
      sc.w1 = 2.0 * L / sc.beta;  // eta = 1/(2L)
      sc.inner.tau_momentum = 0.8;
      if (algo == Algorithm::H_SADMM) sc.inner.momentum = false;
      if (algo == Algorithm::ASADMM) sc.inner.force_alpha = 0.0;
      break;
    }
  }
  return sc;
}

Dataset synth_data(int n, int d, std::uint64_t seed, double noise_level) {
  if (n < 1 || d < 1) throw ConfigError("synthetic dataset needs n >= 1 and d >= 1");
  if (noise_level < 0) throw ConfigError("synthetic noise level must be >= 0");
  Rng rng(seed);
  Eigen::VectorXd planted(d);
  for (int j = 0; j < d; ++j) planted[j] = rng.normal();
  // Rows are scaled to unit norm in expectation, mimicking the normalized
  // feature ranges of the standard classification benchmarks.
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  Dataset ds;
  ds.n_samples = n;
  ds.n_features = d;
  ds.rows.resize(static_cast<std::size_t>(n));
  ds.labels.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& row = ds.rows[static_cast<std::size_t>(i)];
    row.reserve(static_cast<std::size_t>(d));
    double dot = 0.0;
    for (int j = 0; j < d; ++j) {
      double v = scale * rng.normal();
      row.push_back({j, v});
      dot += v * planted[j];
    }
    double eps = rng.normal();  // always drawn, so streams match across noise levels
    ds.labels[static_cast<std::size_t>(i)] = dot + noise_level * eps >= 0.0 ? 1.0 : -1.0;
  }
  return ds;
}

double accuracy(const Dataset& ds, const Eigen::VectorXd& x) {
  if (ds.n_samples == 0) throw std::invalid_argument("accuracy: empty dataset");
  int correct = 0;
  for (int i = 0; i < ds.n_samples; ++i) {
    double dot = row_dot(ds.rows[static_cast<std::size_t>(i)], x);
    double pred = dot > 0.0 ? 1.0 : (dot < 0.0 ? -1.0 : 0.0);
    if (pred == ds.labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ds.n_samples);
}

std::int64_t ifo_total(const SolverConfig& cfg, int N, int T) {
  if (T < 0) throw ConfigError("ifo_total needs T >= 0");
  const std::int64_t n = N;
  const std::int64_t M = cfg.estimator.batch_M;
  switch (cfg.estimator.kind) {
    case EstimatorKind::SGD:
      return M * T;
    case EstimatorKind::SVRG: {
      const int E = static_cast<int>((n + M - 1) / M);
      const std::int64_t per_call = M == n ? n : 2 * M;
      const std::int64_t refreshes = T > 0 ? (static_cast<std::int64_t>(T) - 1) / E : 0;
      return n + per_call * T + n * refreshes;
    }
    case EstimatorKind::SPIDER: {
      const std::int64_t q = cfg.estimator.restart_q;
      const std::int64_t fulls = (T + q - 1) / q;
      const std::int64_t per_rest = M == n ? 2 * n : 2 * M;
      return n * fulls + per_rest * (T - fulls);
    }
    case EstimatorKind::HYBRID:
      return static_cast<std::int64_t>(T) *
             inner_ifo_cost(cfg.inner, cfg.estimator.batch_M, cfg.estimator.pair_batch);
  }
  throw std::logic_error("unreachable estimator kind");
}

int iterations_for_budget(const SolverConfig& cfg, int N, std::int64_t budget) {
  if (budget < 1) throw ConfigError("IFO budget must be positive");
  int hi = 1;
  while (ifo_total(cfg, N, hi) < budget) {
    if (hi > (1 << 28)) throw ConfigError("IFO budget is unreachably large");
    hi *= 2;
  }
  int lo = 1;
  while (lo < hi) {
    int mid = lo + (hi - lo) / 2;
    if (ifo_total(cfg, N, mid) >= budget) hi = mid;
    else lo = mid + 1;
  }
  const int t_hi = lo;
  const std::int64_t d_hi = std::llabs(ifo_total(cfg, N, t_hi) - budget);
  if (t_hi > 1) {
    const std::int64_t d_lo = std::llabs(ifo_total(cfg, N, t_hi - 1) - budget);
    if (d_lo <= d_hi) return t_hi - 1;
  }
  return t_hi;
}

ProblemSpec build_experiment_problem(const ExperimentConfig& cfg) {
  Dataset ds = cfg.dataset_path.empty()
                   ? synth_data(cfg.synth_n, cfg.synth_d, cfg.synth_seed, cfg.synth_noise)
                   : parse_libsvm_file(cfg.dataset_path);

  ConstraintSystem C;
  const std::string& g = cfg.graph;
  if (g.empty()) {
    C = cfg.problem == ExperimentConfig::ProblemKind::FusedLasso
            ? make_chain_difference_constraint(ds.n_features)
            : make_identity_constraint(ds.n_features);
  } else if (g == "identity") {
    C = make_identity_constraint(ds.n_features);
  } else if (g == "chain_difference") {
    C = make_chain_difference_constraint(ds.n_features);
  } else if (g.rfind("edge_list:", 0) == 0) {
    C = make_edge_list_constraint(g.substr(std::string("edge_list:").size()), ds.n_features);
  } else if (g.rfind("matrix:", 0) == 0) {
    C = make_matrix_constraint(g.substr(std::string("matrix:").size()));
  } else if (g.find('(') != std::string::npos) {
    C = build_constraint(g);
  } else {
    throw ConfigError("unknown graph spec '" + g + "'");
  }

  RegularizerSpec reg;
  reg.lambda1 = cfg.lambda1;
  if (cfg.problem == ExperimentConfig::ProblemKind::ScadClassification) {
    reg.kind = RegularizerKind::SCAD;
    reg.scad_c = cfg.scad_c;
    reg.scad_kappa = cfg.scad_kappa;
  } else {
    reg.kind = RegularizerKind::L1;
  }
  return make_problem(std::move(ds), reg, std::move(C));
}

namespace {

void apply_override(SolverConfig& sc, const std::string& algo, const std::string& key,
                    const std::string& value, bool* outer_T_set) {
  const std::string what = "[algorithms." + algo + "] " + key;
  if (key == "beta") sc.beta = to_double(value, what);
  else if (key == "s") sc.s = to_double(value, what);
  else if (key == "w1") sc.w1 = to_double(value, what);
  else if (key == "w2") sc.w2 = to_double(value, what);
  else if (key == "tau_lemma") sc.tau_lemma = to_double(value, what);
  else if (key == "w_margin") sc.w_margin = to_double(value, what);
  else if (key == "outer_T") {
    sc.outer_T = static_cast<int>(to_int(value, what));
    *outer_T_set = true;
  } else if (key == "c_x_surrogate") sc.c_x_surrogate = to_double(value, what);
  else if (key == "probe_interval") sc.probe_interval = static_cast<int>(to_int(value, what));
  else if (key == "record_timing") sc.record_timing = to_bool(value, what);
  else if (key == "allow_infeasible") sc.allow_infeasible_params = to_bool(value, what);
  else if (key == "eta0") sc.eta0 = to_double(value, what);
  else if (key == "eta_prime") sc.eta_prime = to_double(value, what);
  else if (key == "batch") sc.estimator.batch_M = static_cast<int>(to_int(value, what));
  else if (key == "restart_q") sc.estimator.restart_q = static_cast<int>(to_int(value, what));
  else if (key == "pair_batch") sc.estimator.pair_batch =
      static_cast<int>(to_int(value, what));
  else if (key == "inner_m") sc.inner.m = static_cast<int>(to_int(value, what));
  else if (key == "c1") sc.inner.c1 = to_double(value, what);
  else if (key == "force_alpha") sc.inner.force_alpha = to_double(value, what);
  else if (key == "tau_momentum") sc.inner.tau_momentum = to_double(value, what);
  else if (key == "l3") sc.inner.l3 = to_double(value, what);
  else if (key == "mu") sc.inner.mu = to_double(value, what);
  else if (key == "lambda_curvature") sc.inner.lambda_curvature = to_double(value, what);
  else if (key == "momentum") sc.inner.momentum = to_bool(value, what);
  else if (key == "uniform_output") sc.inner.uniform_output = to_bool(value, what);
  else throw ConfigError("unknown override key '" + key + "' for algorithm " + algo);
}

}  // namespace

SolverConfig cell_config(const ExperimentConfig& cfg, Algorithm algo, int N, double L,
                         std::uint64_t seed) {
  SolverConfig sc = default_config(algo, N, L);
  if (cfg.beta != sc.beta) {
    sc.w1 = sc.w1 * sc.beta / cfg.beta;  // keep the implied stepsize eta fixed
    sc.beta = cfg.beta;
  }
  sc.s = cfg.s;
  sc.probe_interval = cfg.probe_interval;
  sc.record_timing = cfg.record_timing;
  sc.seed = seed;
  bool outer_T_set = false;
  auto ov = cfg.overrides.find(algorithm_name(algo));
  if (ov != cfg.overrides.end())
    for (const auto& [key, value] : ov->second)
      apply_override(sc, algorithm_name(algo), key, value, &outer_T_set);
  if (!outer_T_set)
    sc.outer_T =
        iterations_for_budget(sc, N, static_cast<std::int64_t>(N) * cfg.epochs);
  return sc;
}

std::string default_output_dir(const ExperimentConfig& cfg) {
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv("SADMM_OUT_DIR"); env && *env) return env;
  return "out";
}

namespace {

struct CellOutcome {
  RunSummary summary;
  std::exception_ptr error;  // non-divergence failure
};

CellOutcome run_cell(const ProblemSpec& problem, const ExperimentConfig& cfg,
                     Algorithm algo, std::uint64_t seed, const std::string& out_dir) {
  CellOutcome outcome;
  RunSummary& sum = outcome.summary;
  sum.algorithm = algorithm_name(algo);
  sum.seed = seed;
  const int N = problem.smooth->size();
  try {
    SolverConfig sc = cell_config(cfg, algo, N, problem.lipschitz_L, seed);
    sum.outer_iters = sc.outer_T;

    std::map<int, double> xi_by_k;
    std::function<void(const StepSnapshot&)> observer;
    if (sc.probe_interval > 0) {
      observer = [&](const StepSnapshot& snap) {
        const int k_next = snap.k + 1;
        if (k_next % sc.probe_interval != 0) return;
        double w1_k = sc.w1;
        if (sc.eta0 > 0.0) {
          long ceil_k_over_N = (static_cast<long>(snap.k) + N - 1) / N;
          double eta_k = sc.eta0 / (1.0 + sc.eta_prime * static_cast<double>(ceil_k_over_N));
          w1_k = 1.0 / (sc.beta * eta_k);
        }
        xi_by_k[k_next] = xi_x_residual(problem, snap.x_next, snap.x_k, snap.y_next,
                                        snap.lambda_k, sc.beta, w1_k);
      };
    }

    RunResult res = run(problem, sc, observer);

    const std::string stem = sum.algorithm + "_" + std::to_string(seed);
    write_trace_csv(out_dir + "/" + stem + ".csv", res.initial, res.trace);

    std::vector<ProbeRow> probe_rows;
    auto add_probe_row = [&](const TraceRecord& r) {
      if (std::isnan(r.stat_x)) return;
      ProbeRow row;
      row.k = r.k;
      row.stat_x = r.stat_x;
      row.stat_y = r.stat_y;
      row.stat_r = r.stat_r;
      auto it = xi_by_k.find(r.k);
      if (it != xi_by_k.end()) row.xi_x = it->second;
      probe_rows.push_back(row);
    };
    add_probe_row(res.initial);
    for (const auto& r : res.trace) add_probe_row(r);
    write_probe_csv(out_dir + "/" + stem + "_probe.csv", probe_rows);

    sum.final_loss = res.trace.empty() ? res.initial.loss_F : res.trace.back().loss_F;
    sum.final_accuracy = problem.dataset.n_samples > 0
                             ? accuracy(problem.dataset, res.last.x)
                             : std::numeric_limits<double>::quiet_NaN();
    sum.grad_calls = res.grad_calls;
    if (cfg.record_timing && !res.trace.empty())
      sum.wall_time_s = res.trace.back().wall_time_s;
  } catch (const DivergenceError& e) {
    sum.diverged = true;
    sum.diverged_at = e.iteration();
  } catch (...) {
    outcome.error = std::current_exception();
  }
  return outcome;
}

}  // namespace

std::vector<RunSummary> run_experiment(const ExperimentConfig& cfg) {
  if (cfg.algorithms.empty()) throw ConfigError("no algorithms configured");
  ProblemSpec problem = build_experiment_problem(cfg);
  std::vector<std::uint64_t> seeds = cfg.seeds;
  if (seeds.empty()) seeds.push_back(1);

  const std::string out_dir = default_output_dir(cfg);
  std::filesystem::create_directories(out_dir);

  struct Cell {
    Algorithm algo;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (Algorithm a : cfg.algorithms)
    for (std::uint64_t s : seeds) cells.push_back({a, s});

  std::vector<CellOutcome> outcomes(cells.size());
  const int n_threads =
      std::max(1, std::min<int>(cfg.threads, static_cast<int>(cells.size())));
  if (n_threads == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i)
      outcomes[i] = run_cell(problem, cfg, cells[i].algo, cells[i].seed, out_dir);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      while (true) {
        std::size_t i = next.fetch_add(1);
        if (i >= cells.size()) return;
        outcomes[i] = run_cell(problem, cfg, cells[i].algo, cells[i].seed, out_dir);
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (const auto& o : outcomes)
    if (o.error) std::rethrow_exception(o.error);

  std::vector<RunSummary> summaries;
  summaries.reserve(outcomes.size());
  for (const auto& o : outcomes) summaries.push_back(o.summary);

  std::ofstream sf(out_dir + "/summary.csv", std::ios::binary);
  if (!sf) throw std::runtime_error("cannot write summary CSV in " + out_dir);
  sf << "algorithm,seed,final_loss,final_accuracy,grad_calls,wall_time_s,diverged,"
        "diverged_at,outer_iters\n";
  for (const auto& s : summaries) {
    sf << s.algorithm << ',' << s.seed << ',' << format_double(s.final_loss) << ','
       << format_double(s.final_accuracy) << ',' << s.grad_calls << ','
       << format_double(s.wall_time_s) << ',' << (s.diverged ? 1 : 0) << ','
       << s.diverged_at << ',' << s.outer_iters << '\n';
  }
  if (!sf) throw std::runtime_error("write failure on summary CSV");
  return summaries;
}

}  // namespace sadmm
