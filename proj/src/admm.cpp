#include "sadmm/admm.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <utility>

#include "sadmm/diagnostics.hpp"
#include "sadmm/inner.hpp"
#include "sadmm/rng.hpp"

namespace sadmm {

namespace {

// Owns its dataset so the finite sum stays valid however the enclosing
// ProblemSpec is copied or moved.
class OwningSigmoidSum final : public FiniteSum {
 public:
  explicit OwningSigmoidSum(Dataset ds) : ds_(std::move(ds)), impl_(ds_) {}
  int size() const override { return impl_.size(); }
  int dim() const override { return impl_.dim(); }
  double value_single(const Eigen::VectorXd& x, std::size_t i) const override {
    return impl_.value_single(x, i);
  }
  Eigen::VectorXd grad_single(const Eigen::VectorXd& x, std::size_t i) const override {
    return impl_.grad_single(x, i);
  }
  double per_sample_lipschitz() const override { return impl_.per_sample_lipschitz(); }

 private:
  Dataset ds_;
  SigmoidFiniteSum impl_;
};

}  // namespace

ProblemSpec make_problem(Dataset ds, RegularizerSpec g, ConstraintSystem C) {
  ProblemSpec p;
  p.dataset = ds;
  p.smooth = std::make_shared<OwningSigmoidSum>(std::move(ds));
  p.regularizer = g;
  p.constraint = std::move(C);
  p.lipschitz_L = p.smooth->per_sample_lipschitz();
  return p;
}

ProblemSpec make_problem(std::shared_ptr<FiniteSum> f, RegularizerSpec g, ConstraintSystem C) {
  if (!f) throw std::invalid_argument("make_problem: null finite sum");
  ProblemSpec p;
  p.smooth = std::move(f);
  p.regularizer = g;
  p.constraint = std::move(C);
  p.lipschitz_L = p.smooth->per_sample_lipschitz();
  return p;
}

double objective_value(const ProblemSpec& p, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  return p.smooth->full_value(x) + regularizer_value(p.regularizer, y);
}

double aug_lagrangian(const ProblemSpec& p, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& lambda, double beta) {
  Eigen::VectorXd r = p.constraint.residual(x, y);
  return objective_value(p, x, y) - lambda.dot(r) + 0.5 * beta * r.squaredNorm();
}

PsiPair psi(double s) {
  if (s <= 0.0 || s >= 2.0) throw ConfigError("dual stepsize s must lie in (0, 2)");
  double ratio = (s * s) / ((2.0 - s) * (2.0 - s));
  double psi1 = std::max(1.0, ratio);
  double psi2 = std::max((1.0 - s) / s, (s - 1.0) / (2.0 - s));
  return {psi1, psi2};
}

PotentialParams validate_params(const SolverConfig& cfg, const ProblemSpec& p,
                                double c_x_surrogate) {
  if (cfg.beta <= 0.0) throw ConfigError("beta must be positive");
  PsiPair ps = psi(cfg.s);
  if (cfg.tau_lemma <= 0.0 || cfg.tau_lemma >= 1.0)
    throw ConfigError("tau_lemma must lie in (0, 1)");
  if (cfg.w_margin <= 0.0) throw ConfigError("w_margin must be positive");
  if (cfg.w1 < 0.0 || cfg.w2 < 0.0) throw ConfigError("w1 and w2 must be nonnegative");
  const double sigma = p.constraint.sigma_A;
  if (!(sigma > 0.0)) throw ConfigError("constraint system has sigma_A <= 0");

  const double beta = cfg.beta;
  const double L = p.lipschitz_L;
  const double w = cfg.w_margin;
  const double K = (1.0 + cfg.tau_lemma) / (cfg.s * beta * sigma);
  const double half_beta = beta / 2.0;

  const double cx_explicit = c_x_surrogate > 0.0 ? c_x_surrogate : cfg.c_x_surrogate;
  const bool use_default = !(cx_explicit > 0.0);
  auto cx_at = [&](double w1v) {
    return use_default ? std::sqrt(3.0) * std::max(L / beta, w1v) : cx_explicit;
  };
  auto a_hat_at = [&](double cx) { return 4.0 * K * ps.psi1 * cx * cx * beta * beta; };
  auto b_hat_at = [&](double cx) {
    return K * ps.psi1 * (2.0 * L * L + 4.0 * cx * cx * beta * beta);
  };

  PotentialParams out;
  out.psi1 = ps.psi1;
  out.psi2 = ps.psi2;
  out.c_x = cx_at(cfg.w1);
  out.A_hat = a_hat_at(out.c_x);
  out.B_hat = b_hat_at(out.c_x);
  out.lambda_weight = K * ps.psi2;
  out.mu_floor = std::min(w, cfg.tau_lemma / (cfg.s * beta));
  out.w_margin = w;

  // Minimal feasible (w1, w2). With the default surrogate c_x depends on w1,
  // so the w1 bound solves the self-consistency; the feasible set can then be
  // a bounded interval and may be empty.
  double w1_min;
  if (!use_default) {
    w1_min = (b_hat_at(cx_explicit) + a_hat_at(cx_explicit) + w) / half_beta;
  } else {
    const double w1_low_branch = (26.0 * K * ps.psi1 * L * L + w) / half_beta;
    if (w1_low_branch <= L / beta) {
      w1_min = w1_low_branch;
    } else {
      const double a = 24.0 * K * ps.psi1 * beta * beta;
      const double b = half_beta;
      const double c = 2.0 * K * ps.psi1 * L * L + w;
      const double disc = b * b - 4.0 * a * c;
      if (disc < 0.0) {
        w1_min = std::numeric_limits<double>::infinity();
      } else {
        const double r_lo = (b - std::sqrt(disc)) / (2.0 * a);
        const double r_hi = (b + std::sqrt(disc)) / (2.0 * a);
        w1_min = r_hi < L / beta ? std::numeric_limits<double>::infinity()
                                 : std::max(r_lo, L / beta);
      }
    }
  }
  out.w1_min = w1_min;
  const double cx_for_w2 = std::isfinite(w1_min) ? cx_at(w1_min) : out.c_x;
  out.w2_min = (2.0 * a_hat_at(cx_for_w2) + w) / half_beta;

  const double w1_req = (out.B_hat + out.A_hat + w) / half_beta;
  const double w2_req = (2.0 * out.A_hat + w) / half_beta;
  out.feasible = cfg.w1 >= w1_req && cfg.w2 >= w2_req;
  if (!out.feasible) {
    std::ostringstream msg;
    msg << "descent feasibility violated: w1 = " << cfg.w1 << " needs >= " << w1_req
        << ", w2 = " << cfg.w2 << " needs >= " << w2_req
        << " (minimal feasible pair w1 = " << out.w1_min << ", w2 = " << out.w2_min << ")";
    throw ParamValidationError(msg.str(), out);
  }
  return out;
}

XUpdateFactorization make_x_update_factorization(const ConstraintSystem& C, double w1) {
  XUpdateFactorization f;
  f.w1 = w1;
  Eigen::MatrixXd M = C.A.transpose() * C.A;
  M.diagonal().array() += w1;
  f.ldlt.compute(M);
  if (f.ldlt.info() != Eigen::Success)
    throw std::runtime_error("x-update factorization failed");
  return f;
}

Eigen::VectorXd x_update_linearized(const Iterate& it, const Eigen::VectorXd& grad_estimate,
                                    const ConstraintSystem& C, const Eigen::VectorXd& y_next,
                                    double beta, double w1, XUpdateFactorization& fact) {
  if (!(fact.w1 == w1)) fact = make_x_update_factorization(C, w1);
  Eigen::VectorXd rhs = w1 * it.x +
                        C.A.transpose() * (it.lambda / beta - C.apply_B(y_next) + C.b) -
                        grad_estimate / beta;
  Eigen::VectorXd x = fact.ldlt.solve(rhs);
  Eigen::VectorXd check = C.A.transpose() * (C.A * x) + w1 * x - rhs;
  if (!x.allFinite() || check.norm() > 1e-6 * (1.0 + rhs.norm() + x.norm()))
    throw std::runtime_error(
        "x-update linear system is singular (w1 = 0 with rank-deficient A?)");
  return x;
}

Eigen::VectorXd dual_update(const Eigen::VectorXd& lambda_k, const Eigen::VectorXd& residual,
                            double s, double beta) {
  return lambda_k + (-(s * beta)) * residual;
}

double potential(const Iterate& it, const PotentialParams& pp, const ConstraintSystem& C,
                 double aug_lagrangian_value) {
  double value = aug_lagrangian_value +
                 pp.A_hat * (it.d_x.squaredNorm() + it.d_y.squaredNorm());
  if (pp.lambda_weight != 0.0)
    value += pp.lambda_weight * (C.A.transpose() * it.d_lambda).squaredNorm();
  return value;
}

RunResult run(const ProblemSpec& p, const SolverConfig& cfg,
              const std::function<void(const StepSnapshot&)>& observer) {
  using Clock = std::chrono::steady_clock;
  const auto t_start = Clock::now();
  auto elapsed_s = [&]() {
    return std::chrono::duration<double>(Clock::now() - t_start).count();
  };

  if (!p.smooth) throw ConfigError("problem has no smooth objective");
  if (cfg.outer_T < 0) throw ConfigError("outer_T must be >= 0");
  if (cfg.probe_interval < 0) throw ConfigError("probe_interval must be >= 0");
  if (cfg.eta0 < 0.0 || cfg.eta_prime < 0.0)
    throw ConfigError("stepsize schedule constants must be nonnegative");
  const int n_x = p.smooth->dim();
  if (p.constraint.n_x() != n_x)
    throw ConfigError("constraint column count does not match the smooth dimension");

  const bool inner_mode = cfg.x_update_mode == SolverConfig::XUpdateMode::InnerAccel;
  if (inner_mode && cfg.estimator.kind != EstimatorKind::HYBRID)
    throw ConfigError("the accelerated inner solver requires the hybrid estimator");
  if (!inner_mode && cfg.estimator.kind == EstimatorKind::HYBRID)
    throw ConfigError("the hybrid estimator runs only under the accelerated inner solver");
  if (inner_mode) {
    if (cfg.inner.m < 0) throw ConfigError("inner step count m must be >= 0");
    if (cfg.inner.tau_momentum <= 0.0 || cfg.inner.tau_momentum >= 1.0)
      throw ConfigError("inner tau_momentum must lie in (0, 1)");
    if (cfg.inner.l3 <= 0.0) throw ConfigError("inner l3 must be positive");
  }

  RunResult out;
  try {
    out.params = validate_params(cfg, p);
  } catch (const ParamValidationError& e) {
    if (!cfg.allow_infeasible_params) throw;
    out.params = e.report();
    out.warnings.push_back(std::string("parameter validation failed (proceeding): ") +
                           e.what());
  }
  for (const auto& msg : p.constraint.warnings) out.warnings.push_back(msg);

  EstimatorConfig ecfg = cfg.estimator;
  if (inner_mode) ecfg.alpha = inner_alpha(cfg.inner, ecfg.batch_M);

  const int N = p.smooth->size();
  const int m_dim = p.constraint.m();
  const auto& C = p.constraint;

  Rng init_rng(derive_seed(cfg.seed, 0));
  Eigen::VectorXd x0(n_x);
  for (int i = 0; i < n_x; ++i) x0[i] = init_rng.normal();
  Eigen::VectorXd rhs0 = C.b - C.A * x0;
  Eigen::VectorXd y0(m_dim);
  bool zero_b_diag = false;
  for (int i = 0; i < m_dim; ++i) {
    double d = C.B_diag[i];
    if (d == 0.0) {
      y0[i] = 0.0;
      zero_b_diag = true;
    } else {
      y0[i] = rhs0[i] / d;
    }
  }
  if (zero_b_diag)
    out.warnings.push_back("B has a zero diagonal entry; the start point may be infeasible");

  EstimatorState est(ecfg, *p.smooth, derive_seed(cfg.seed, 1));
  if (ecfg.kind == EstimatorKind::SVRG) est.svrg_init(x0);

  Rng pick_rng(derive_seed(cfg.seed, 2));
  int sampled_k = 0;
  if (cfg.outer_T > 0)
    sampled_k = static_cast<int>(pick_rng.uniform_index(
                    static_cast<std::size_t>(cfg.outer_T))) + 1;

  Iterate it;
  it.x = x0;
  it.y = y0;
  it.lambda = Eigen::VectorXd::Zero(m_dim);
  it.d_x = Eigen::VectorXd::Zero(n_x);
  it.d_y = Eigen::VectorXd::Zero(m_dim);
  it.d_lambda = Eigen::VectorXd::Zero(m_dim);
  it.residual = C.residual(it.x, it.y);

  auto make_record = [&](int k) {
    TraceRecord rec;
    rec.k = k;
    rec.loss_F = objective_value(p, it.x, it.y);
    rec.aug_lagrangian = aug_lagrangian(p, it.x, it.y, it.lambda, cfg.beta);
    rec.potential_P = potential(it, out.params, C, rec.aug_lagrangian);
    rec.residual_norm = it.residual.norm();
    rec.dx_norm = it.d_x.norm();
    rec.dy_norm = it.d_y.norm();
    rec.dlam_norm = it.d_lambda.norm();
    if (cfg.probe_interval > 0 && k % cfg.probe_interval == 0) {
      StationarityReport st = stationarity(p, it.x, it.y, it.lambda);
      rec.stat_x = st.stat_x;
      rec.stat_y = st.stat_y;
      rec.stat_r = st.stat_r;
    }
    rec.grad_calls = est.grad_calls();
    if (cfg.record_timing) rec.wall_time_s = elapsed_s();
    return rec;
  };

  out.initial = make_record(0);

  XUpdateFactorization fact;
  const Eigen::VectorXd empty_grad;
  for (int k = 0; k < cfg.outer_T; ++k) {
    double w1_k = cfg.w1;
    if (cfg.eta0 > 0.0) {
      long ceil_k_over_N = (static_cast<long>(k) + N - 1) / N;
      double eta_k = cfg.eta0 / (1.0 + cfg.eta_prime * static_cast<double>(ceil_k_over_N));
      w1_k = 1.0 / (cfg.beta * eta_k);
    }

    Eigen::VectorXd y_next =
        y_update(it.y, it.x, it.lambda, C, p.regularizer, cfg.beta, cfg.w2);
    Eigen::VectorXd x_next;
    Eigen::VectorXd grad_est;
    if (inner_mode) {
      InnerProblem ip =
          make_inner_problem(p, it.x, y_next, it.lambda, cfg.beta, w1_k, cfg.inner);
      x_next = solve_x_subproblem(ip, cfg.inner, est, pick_rng);
    } else {
      grad_est = est.estimate(it.x);
      x_next = x_update_linearized(it, grad_est, C, y_next, cfg.beta, w1_k, fact);
    }
    Eigen::VectorXd residual_next = C.residual(x_next, y_next);
    Eigen::VectorXd d_lambda = (-(cfg.s * cfg.beta)) * residual_next;
    Eigen::VectorXd lambda_next = it.lambda + d_lambda;

    if (!x_next.allFinite() || !y_next.allFinite() || !lambda_next.allFinite() ||
        x_next.norm() > 1e8)
      throw DivergenceError("iterate diverged (non-finite value or ||x|| > 1e8) at outer "
                            "iteration " + std::to_string(k + 1),
                            k + 1);

    if (observer) {
      StepSnapshot snap{k,      it.x,   it.y,        it.lambda,
                        x_next, y_next, lambda_next, inner_mode ? empty_grad : grad_est};
      observer(snap);
    }

    it.d_x = x_next - it.x;
    it.d_y = y_next - it.y;
    it.d_lambda = std::move(d_lambda);
    it.x = std::move(x_next);
    it.y = std::move(y_next);
    it.lambda = std::move(lambda_next);
    it.residual = std::move(residual_next);

    out.trace.push_back(make_record(k + 1));
    if (k + 1 == sampled_k) {
      out.sampled = it;
      out.sampled_k = sampled_k;
    }
  }

  out.last = it;
  if (cfg.outer_T == 0) {
    out.sampled = it;
    out.sampled_k = 0;
  }
  out.grad_calls = est.grad_calls();
  return out;
}

}  // namespace sadmm
