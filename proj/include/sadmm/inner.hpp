#ifndef SADMM_INNER_HPP
#define SADMM_INNER_HPP

#include <Eigen/Dense>
#include <vector>

#include "sadmm/admm.hpp"

namespace sadmm {

// x-subproblem Phi(x) = h(x) + phi(x) for one outer iteration, with
//   h(x)   = f(x) + (beta*w1/2)||x - anchor||^2        (stochastic part)
//   phi(x) = p'x + (beta/2)||x - anchor||^2_{A'A}      (exact quadratic part)
// and p = -A'(lambda_k - beta(A anchor + B y_next - b)).
struct InnerProblem {
  const FiniteSum* f = nullptr;
  const ConstraintSystem* C = nullptr;
  Eigen::VectorXd anchor;  // outer x_k
  Eigen::VectorXd p;       // linear coefficient of phi
  double beta = 1.0;
  double w1 = 0.0;
  double mu = 0.0;      // curvature lower bound of h
  double Lambda = 1.0;  // curvature upper bound of h
};

InnerProblem make_inner_problem(const ProblemSpec& p, const Eigen::VectorXd& x_k,
                                const Eigen::VectorXd& y_next, const Eigen::VectorXd& lambda_k,
                                double beta, double w1, const InnerConfig& icfg);

Eigen::VectorXd phi_gradient(const InnerProblem& ip, const Eigen::VectorXd& x);
// grad h = full_grad f + beta*w1*(x - anchor).
Eigen::VectorXd smooth_gradient_full(const InnerProblem& ip, const Eigen::VectorXd& x);
// grad Phi = grad h + grad phi.
Eigen::VectorXd composite_gradient(const InnerProblem& ip, const Eigen::VectorXd& x);

// beta_t = max{2/(t+1), tau} (2 at t=0); the no-momentum variant pins it to 1.
double beta_schedule(int t, double tau_momentum, bool momentum_enabled = true);

// g(alpha) = alpha * Lambda * sqrt(2 l3 / (1 - alpha^2)); alpha >= 1 -> domain error.
double g_of_alpha(double alpha, double Lambda, double l3);

// gamma_t = beta_t * ((mu + 2 g(alpha))/(2 tau - tau^2) - mu) * (t+1)/t for t >= 1
// (t = 0 callers reuse the t = 1 value).
double gamma_schedule(int t, double beta_t, double mu, double g_alpha, double tau_momentum);

// Cached factorization of (gamma I + beta A'A); refactorized only when gamma changes.
struct InnerProxFactorization {
  double gamma = std::numeric_limits<double>::quiet_NaN();
  Eigen::LDLT<Eigen::MatrixXd> ldlt;
};

// Exact minimizer of <v_tilde, x> + (gamma/2)||x - x_breve||^2 + phi(x), i.e.
// the solution of (gamma I + beta A'A) x = gamma x_breve - v_tilde - p + beta A'A anchor.
Eigen::VectorXd inner_prox_step(const Eigen::VectorXd& v_tilde, const Eigen::VectorXd& x_breve,
                                double gamma, const InnerProblem& ip,
                                InnerProxFactorization& fact);

// Per-step diagnostics collected when a sink is provided.
struct InnerStepRecord {
  int t;
  double gamma;
  double beta_t;
  double opt_residual;    // ||v_tilde + gamma*(x_breve_next - x_breve) + grad phi(x_breve_next)||
  double grad_phi_norm;   // ||grad Phi(x_hat_t)|| (exact; costs a full gradient)
};

struct InnerDiagnostics {
  bool record_grad_phi = false;  // exact composite gradients are O(N) each
  std::vector<InnerStepRecord> steps;
};

// Accelerated stochastic solve of the x-subproblem:
//   x_breve_0 = x_0 = anchor; v_0 = size-M batch mean at anchor;
//   for t = 0..m: beta_t combine -> x_hat_t; (t>=1) hybrid pair step on f;
//   v_tilde_t = v_t + beta*w1*(x_hat_t - anchor); prox step -> x_breve_{t+1};
//   x_{t+1} = x_hat_t + beta_t (x_breve_{t+1} - x_breve_t).
// Returns x_hat_{m+1} (or a uniformly drawn x_hat_j, j in {1..m+1}, when
// icfg.uniform_output). `est` must be a HYBRID estimator on the same f.
Eigen::VectorXd solve_x_subproblem(const InnerProblem& ip, const InnerConfig& icfg,
                                   EstimatorState& est, Rng& pick_rng,
                                   InnerDiagnostics* diag = nullptr);

// Effective mixing weight: force_alpha if set, else 1 - c1/sqrt(M(m+1)).
double inner_alpha(const InnerConfig& icfg, int batch_M);

// Closed-form IFO cost of one solve_x_subproblem call (init batch + m pair steps).
std::int64_t inner_ifo_cost(const InnerConfig& icfg, int batch_M, int pair_batch);

}  // namespace sadmm

#endif  // SADMM_INNER_HPP
