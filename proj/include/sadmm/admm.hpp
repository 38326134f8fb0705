#ifndef SADMM_ADMM_HPP
#define SADMM_ADMM_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "sadmm/constraint.hpp"
#include "sadmm/estimators.hpp"
#include "sadmm/regularizer.hpp"
#include "sadmm/sigmoid.hpp"

namespace sadmm {

// Composite problem: min f(x) + g(y)  s.t.  A x + B y = b, with f a smooth
// finite-sum mean and g a separable (possibly nonconvex) regularizer.
struct ProblemSpec {
  Dataset dataset;  // may be empty when `smooth` is not sigmoid-backed
  std::shared_ptr<FiniteSum> smooth;
  RegularizerSpec regularizer;
  ConstraintSystem constraint;
  double lipschitz_L = 0.0;  // gradient Lipschitz bound for the smooth mean
};

// Sigmoid-loss problem over a dataset; fills smooth + lipschitz_L.
ProblemSpec make_problem(Dataset ds, RegularizerSpec g, ConstraintSystem C);
// Problem over an arbitrary finite sum (tests, diagnostics).
ProblemSpec make_problem(std::shared_ptr<FiniteSum> f, RegularizerSpec g, ConstraintSystem C);

// F(x, y) = f(x) + g(y).
double objective_value(const ProblemSpec& p, const Eigen::VectorXd& x, const Eigen::VectorXd& y);
// L_beta(x, y, lambda) = F - lambda' r + (beta/2)||r||^2, r = A x + B y - b.
double aug_lagrangian(const ProblemSpec& p, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& lambda, double beta);

struct InnerConfig {
  int m = 10;                    // inner steps per outer iteration (t = 0..m)
  double c1 = 1.0;               // alpha = 1 - c1 / sqrt(M(m+1)); needs c1 < sqrt(M(m+1))
  double force_alpha = -1.0;     // >= 0 overrides the c1 formula
  double tau_momentum = 0.8;     // momentum constant in (0, 1)
  double l3 = 8.0;               // schedule curvature constant (safe upper bound)
  double mu = 0.0;               // weak-convexity lower bound of the smooth part
  double lambda_curvature = -1;  // curvature upper bound; <= 0 -> L + beta*w1
  bool momentum = true;          // false -> beta_t == 1 variant
  bool uniform_output = false;   // pick a uniformly random inner iterate instead of the last
};

struct SolverConfig {
  double beta = 1.01;  // penalty > 0
  double s = 1.2;      // dual stepsize in (0, 2)
  double w1 = 1.0;     // D_x = w1 I
  double w2 = 1.0;     // D_y = w2 I
  double tau_lemma = 0.5;   // descent-analysis constant in (0, 1)
  double w_margin = 1e-6;   // strict-descent margin w > 0
  int outer_T = 100;
  enum class XUpdateMode { Linearized, InnerAccel };
  XUpdateMode x_update_mode = XUpdateMode::Linearized;
  EstimatorConfig estimator;
  InnerConfig inner;
  std::uint64_t seed = 0;
  double c_x_surrogate = -1.0;  // <= 0 -> sqrt(3) * max(L/beta, w1)
  int probe_interval = 10;      // stationarity probe cadence; 0 -> never
  bool record_timing = false;   // off keeps traces bit-reproducible
  bool allow_infeasible_params = false;  // proceed past validation with a warning
  // Decaying-stepsize schedule (eta0 > 0 enables): eta_k = eta0 / (1 + eta_prime*ceil(k/N)),
  // applied as w1(k) = 1/(beta*eta_k) with k the 0-based outer iteration.
  double eta0 = 0.0;
  double eta_prime = 0.0;
};

struct Iterate {
  Eigen::VectorXd x, y, lambda;
  Eigen::VectorXd d_x, d_y, d_lambda;  // previous-step differences (zero at k=0)
  Eigen::VectorXd residual;            // A x + B y - b
};

// Derived descent-analysis constants for a configured solver.
struct PotentialParams {
  double psi1 = 0.0, psi2 = 0.0;
  double c_x = 0.0;                  // surrogate actually used
  double A_hat = 0.0, B_hat = 0.0;   // difference-term weights
  double lambda_weight = 0.0;        // (1+tau)/(s*beta*sigma_A) * psi2
  double mu_floor = 0.0;             // min{w, tau/(s*beta)}
  double w_margin = 0.0;
  bool feasible = false;
  double w1_min = 0.0, w2_min = 0.0;  // minimal feasible pair report
};

struct TraceRecord {
  int k = 0;
  double loss_F = 0.0;
  double aug_lagrangian = 0.0;
  double potential_P = 0.0;
  double residual_norm = 0.0;
  double dx_norm = 0.0, dy_norm = 0.0, dlam_norm = 0.0;
  // Probe fields; NaN means "not measured this iteration" (empty CSV field).
  double stat_x = std::numeric_limits<double>::quiet_NaN();
  double stat_y = std::numeric_limits<double>::quiet_NaN();
  double stat_r = std::numeric_limits<double>::quiet_NaN();
  double xi_x = std::numeric_limits<double>::quiet_NaN();  // probe CSV only
  std::int64_t grad_calls = 0;
  double wall_time_s = std::numeric_limits<double>::quiet_NaN();
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParamValidationError : public std::runtime_error {
 public:
  ParamValidationError(const std::string& msg, PotentialParams report)
      : std::runtime_error(msg), report_(report) {}
  const PotentialParams& report() const { return report_; }

 private:
  PotentialParams report_;
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& msg, int iteration)
      : std::runtime_error(msg), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_ = 0;
};

// Dual-update weight pair for s in (0, 2):
// psi1 = max{1, s^2/(2-s)^2},  psi2 = max{(1-s)/s, (s-1)/(2-s)}.
struct PsiPair {
  double psi1, psi2;
};
PsiPair psi(double s);

// Checks the descent-feasibility constraints
//   w1 >= (B_hat + A_hat + w) / (beta/2),   w2 >= (2 A_hat + w) / (beta/2)
// with A_hat = 4 K psi1 c_x^2 beta^2, B_hat = K psi1 (2L^2 + 4 c_x^2 beta^2),
// K = (1+tau)/(s beta sigma_A). Returns derived constants; infeasible configs
// throw ParamValidationError carrying the minimal feasible pair (for the
// default surrogate the minimum solves the w1 self-consistency, since c_x
// itself depends on w1).
PotentialParams validate_params(const SolverConfig& cfg, const ProblemSpec& p,
                                double c_x_surrogate = -1.0);

// Cached factorization of (w1 I + A'A) for the linearized x step.
struct XUpdateFactorization {
  double w1 = std::numeric_limits<double>::quiet_NaN();
  Eigen::LDLT<Eigen::MatrixXd> ldlt;
};
XUpdateFactorization make_x_update_factorization(const ConstraintSystem& C, double w1);

// Exact minimizer of
//   <grad, x - x_k> + (beta/2)||A x + B y_next - b - lambda_k/beta||^2
//                   + (beta*w1/2)||x - x_k||^2,
// i.e. the solution of (w1 I + A'A) x = w1 x_k + A'(lambda_k/beta - B y_next + b) - grad/beta.
// A singular system (w1 = 0 with rank-deficient A) raises a linear-solve error.
Eigen::VectorXd x_update_linearized(const Iterate& it, const Eigen::VectorXd& grad_estimate,
                                    const ConstraintSystem& C, const Eigen::VectorXd& y_next,
                                    double beta, double w1, XUpdateFactorization& fact);

// lambda_next = lambda_k - s*beta*residual.
Eigen::VectorXd dual_update(const Eigen::VectorXd& lambda_k, const Eigen::VectorXd& residual,
                            double s, double beta);

// P = L_beta + A_hat(||d_x||^2 + ||d_y||^2) + lambda_weight * ||A'd_lambda||^2,
// with the differences taken from the step that produced the iterate.
double potential(const Iterate& it, const PotentialParams& pp, const ConstraintSystem& C,
                 double aug_lagrangian_value);

// Per-iteration snapshot handed to the optional observer (all references are
// valid only during the call).
struct StepSnapshot {
  int k;  // 0-based index of the step being completed
  const Eigen::VectorXd& x_k;
  const Eigen::VectorXd& y_k;
  const Eigen::VectorXd& lambda_k;
  const Eigen::VectorXd& x_next;
  const Eigen::VectorXd& y_next;
  const Eigen::VectorXd& lambda_next;
  const Eigen::VectorXd& grad_estimate;  // empty in inner-accel mode
};

struct RunResult {
  Iterate last;
  Iterate sampled;  // iterate at a uniformly drawn index in {1..outer_T}
  int sampled_k = 0;
  TraceRecord initial;             // k = 0 snapshot
  std::vector<TraceRecord> trace;  // k = 1..outer_T
  std::vector<std::string> warnings;
  std::int64_t grad_calls = 0;
  PotentialParams params;
};

// Outer loop: per iteration y-update, x-update (linearized estimator step or
// accelerated inner solve), dual update. Initialization: x0 standard normal
// from the seeded stream, y0 solving B y = b - A x0 (feasible start), lambda0 = 0.
// NaN/Inf in an iterate or ||x|| > 1e8 raises DivergenceError with the
// iteration index.
RunResult run(const ProblemSpec& p, const SolverConfig& cfg,
              const std::function<void(const StepSnapshot&)>& observer = {});

}  // namespace sadmm

#endif  // SADMM_ADMM_HPP
