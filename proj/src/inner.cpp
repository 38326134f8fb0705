#include "sadmm/inner.hpp"

#include <cmath>
#include <stdexcept>

namespace sadmm {

InnerProblem make_inner_problem(const ProblemSpec& p, const Eigen::VectorXd& x_k,
                                const Eigen::VectorXd& y_next, const Eigen::VectorXd& lambda_k,
                                double beta, double w1, const InnerConfig& icfg) {
  InnerProblem ip;
  ip.f = p.smooth.get();
  ip.C = &p.constraint;
  ip.anchor = x_k;
  Eigen::VectorXd r_half = p.constraint.A * x_k + p.constraint.apply_B(y_next) - p.constraint.b;
  ip.p = -p.constraint.A.transpose() * (lambda_k - beta * r_half);
  ip.beta = beta;
  ip.w1 = w1;
  ip.mu = icfg.mu;
  ip.Lambda = icfg.lambda_curvature > 0.0 ? icfg.lambda_curvature
                                          : p.lipschitz_L + beta * w1;
  return ip;
}

Eigen::VectorXd phi_gradient(const InnerProblem& ip, const Eigen::VectorXd& x) {
  return ip.p + ip.beta * (ip.C->A.transpose() * (ip.C->A * (x - ip.anchor)));
}

Eigen::VectorXd smooth_gradient_full(const InnerProblem& ip, const Eigen::VectorXd& x) {
  return ip.f->full_grad(x) + ip.beta * ip.w1 * (x - ip.anchor);
}

Eigen::VectorXd composite_gradient(const InnerProblem& ip, const Eigen::VectorXd& x) {
  return smooth_gradient_full(ip, x) + phi_gradient(ip, x);
}

double beta_schedule(int t, double tau_momentum, bool momentum_enabled) {
  if (t < 0) throw std::invalid_argument("beta_schedule: t must be >= 0");
  if (!momentum_enabled) return 1.0;
  return std::max(2.0 / (t + 1.0), tau_momentum);
}

double g_of_alpha(double alpha, double Lambda, double l3) {
  if (alpha < 0.0 || alpha >= 1.0)
    throw std::domain_error("g_of_alpha requires alpha in [0, 1)");
  if (alpha == 0.0) return 0.0;
  return alpha * Lambda * std::sqrt(2.0 * l3 / (1.0 - alpha * alpha));
}

double gamma_schedule(int t, double beta_t, double mu, double g_alpha, double tau_momentum) {
  if (t < 1) throw std::invalid_argument("gamma_schedule: t must be >= 1");
  double denom = 2.0 * tau_momentum - tau_momentum * tau_momentum;
  double base = (mu + 2.0 * g_alpha) / denom - mu;
  return beta_t * base * (t + 1.0) / static_cast<double>(t);
}

Eigen::VectorXd inner_prox_step(const Eigen::VectorXd& v_tilde, const Eigen::VectorXd& x_breve,
                                double gamma, const InnerProblem& ip,
                                InnerProxFactorization& fact) {
  if (gamma < 0.0) throw ConfigError("inner proximal weight gamma is negative");
  const Eigen::MatrixXd& A = ip.C->A;
  if (!(fact.gamma == gamma)) {
    fact.gamma = gamma;
    Eigen::MatrixXd M = ip.beta * (A.transpose() * A);
    M.diagonal().array() += gamma;
    fact.ldlt.compute(M);
    if (fact.ldlt.info() != Eigen::Success)
      throw std::runtime_error("inner proximal factorization failed");
  }
  Eigen::VectorXd rhs =
      gamma * x_breve - v_tilde - ip.p + ip.beta * (A.transpose() * (A * ip.anchor));
  Eigen::VectorXd x = fact.ldlt.solve(rhs);
  Eigen::VectorXd check =
      ip.beta * (A.transpose() * (A * x)) + gamma * x - rhs;
  if (!x.allFinite() || check.norm() > 1e-6 * (1.0 + rhs.norm() + x.norm()))
    throw std::runtime_error(
        "inner proximal system is singular (gamma = 0 with rank-deficient A?)");
  return x;
}

double inner_alpha(const InnerConfig& icfg, int batch_M) {
  if (icfg.force_alpha >= 0.0) {
    if (icfg.force_alpha > 1.0) throw ConfigError("force_alpha must lie in [0, 1]");
    return icfg.force_alpha;
  }
  double denom = std::sqrt(static_cast<double>(batch_M) * (icfg.m + 1.0));
  if (icfg.c1 <= 0.0) throw ConfigError("c1 must be positive");
  if (icfg.c1 >= denom)
    throw ConfigError("c1 >= sqrt(M(m+1)) leaves no valid hybrid mixing weight");
  return 1.0 - icfg.c1 / denom;
}

std::int64_t inner_ifo_cost(const InnerConfig& icfg, int batch_M, int pair_batch) {
  double alpha = inner_alpha(icfg, batch_M);
  std::int64_t per_pair = pair_batch;
  if (alpha == 1.0) per_pair = 2 * static_cast<std::int64_t>(pair_batch);
  else if (alpha != 0.0) per_pair = 3 * static_cast<std::int64_t>(pair_batch);
  return batch_M + static_cast<std::int64_t>(icfg.m) * per_pair;
}

Eigen::VectorXd solve_x_subproblem(const InnerProblem& ip, const InnerConfig& icfg,
                                   EstimatorState& est, Rng& pick_rng,
                                   InnerDiagnostics* diag) {
  if (est.config().kind != EstimatorKind::HYBRID)
    throw ConfigError("solve_x_subproblem needs a hybrid estimator");
  const int m = icfg.m;
  const double tau = icfg.tau_momentum;
  const double g_alpha = g_of_alpha(est.config().alpha, ip.Lambda, icfg.l3);

  int picked_j = 0;
  if (icfg.uniform_output)
    picked_j = static_cast<int>(pick_rng.uniform_index(static_cast<std::size_t>(m + 1))) + 1;

  Eigen::VectorXd x_breve = ip.anchor;
  Eigen::VectorXd x_t = ip.anchor;
  Eigen::VectorXd picked;
  est.hybrid_init(ip.anchor);

  InnerProxFactorization fact;
  for (int t = 0; t <= m; ++t) {
    const double beta_t = beta_schedule(t, tau, icfg.momentum);
    Eigen::VectorXd x_hat = beta_t * x_breve + (1.0 - beta_t) * x_t;
    if (t >= 1 && t == picked_j) picked = x_hat;
    Eigen::VectorXd v = t == 0 ? est.carried_v() : est.hybrid_estimate(x_hat);
    Eigen::VectorXd v_tilde = v + ip.beta * ip.w1 * (x_hat - ip.anchor);
    const int ts = std::max(t, 1);
    const double gamma =
        gamma_schedule(ts, beta_schedule(ts, tau, icfg.momentum), ip.mu, g_alpha, tau);
    Eigen::VectorXd x_breve_next = inner_prox_step(v_tilde, x_breve, gamma, ip, fact);
    if (diag) {
      InnerStepRecord rec;
      rec.t = t;
      rec.gamma = gamma;
      rec.beta_t = beta_t;
      rec.opt_residual =
          (v_tilde + gamma * (x_breve_next - x_breve) + phi_gradient(ip, x_breve_next)).norm();
      rec.grad_phi_norm = diag->record_grad_phi
                              ? composite_gradient(ip, x_hat).norm()
                              : std::numeric_limits<double>::quiet_NaN();
      diag->steps.push_back(rec);
    }
    x_t = x_hat + beta_t * (x_breve_next - x_breve);
    x_breve = std::move(x_breve_next);
  }
  const double beta_last = beta_schedule(m + 1, tau, icfg.momentum);
  Eigen::VectorXd x_hat_final = beta_last * x_breve + (1.0 - beta_last) * x_t;
  if (icfg.uniform_output && picked_j <= m) return picked;
  return x_hat_final;
}

}  // namespace sadmm
