#include "sadmm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace sadmm {

StationarityReport stationarity(const ProblemSpec& p, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& y, const Eigen::VectorXd& lambda,
                                double epsilon) {
  StationarityReport rep;
  Eigen::VectorXd gx = p.smooth->full_grad(x) - p.constraint.A.transpose() * lambda;
  Eigen::VectorXd bt_lambda = p.constraint.B_diag.cwiseProduct(lambda);
  double dy = subgrad_distance(p.regularizer, y, bt_lambda);
  rep.stat_x = gx.squaredNorm();
  rep.stat_y = dy * dy;
  rep.stat_r = p.constraint.residual(x, y).squaredNorm();
  if (epsilon > 0.0)
    rep.epsilon_met = rep.stat_x <= epsilon && rep.stat_y <= epsilon && rep.stat_r <= epsilon;
  return rep;
}

double xi_x_residual(const ProblemSpec& p, const Eigen::VectorXd& x_next,
                     const Eigen::VectorXd& x_prev, const Eigen::VectorXd& y_next,
                     const Eigen::VectorXd& lambda_k, double beta, double w1) {
  Eigen::VectorXd r_next = p.constraint.residual(x_next, y_next);
  Eigen::VectorXd v = p.smooth->full_grad(x_next) +
                      p.constraint.A.transpose() * (beta * r_next - lambda_k) +
                      beta * w1 * (x_next - x_prev);
  return v.norm();
}

namespace {

// Visit every size-m index subset of {0..n-1} in lexicographic order.
template <typename Fn>
void for_each_combination(int n, int m, Fn&& fn) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(m));
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  while (true) {
    fn(idx);
    int i = m - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] ==
                         static_cast<std::size_t>(n - m + i))
      --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < m; ++j)
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
}

void check_probe_setup(const HybridProbeSetup& setup, int n_budget) {
  if (!setup.f) throw std::invalid_argument("hybrid probe: null objective");
  const int n = setup.f->size();
  if (n > n_budget)
    throw std::invalid_argument("hybrid probe enumeration budget exceeded: N <= " +
                                std::to_string(n_budget));
  if (setup.batch_M < 1 || setup.batch_M > n)
    throw std::invalid_argument("hybrid probe: batch_M must be in [1, N]");
  if (setup.alpha < 0.0 || setup.alpha > 1.0)
    throw std::invalid_argument("hybrid probe: alpha must be in [0, 1]");
  if (setup.shift_weight != 0.0 && setup.anchor.size() != setup.f->dim())
    throw std::invalid_argument("hybrid probe: anchor required with a proximal shift");
}

}  // namespace

std::vector<BiasProbeRecord> bias_probe(const HybridProbeSetup& setup,
                                        const std::vector<Eigen::VectorXd>& trajectory) {
  check_probe_setup(setup, 16);
  if (trajectory.size() < 2)
    throw std::invalid_argument("bias_probe needs at least two trajectory points");
  const int N = setup.f->size();
  const double sw = setup.shift_weight;

  auto grad_h = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd g = setup.f->full_grad(x);
    if (sw != 0.0) g += sw * (x - setup.anchor);
    return g;
  };
  auto to_h = [&](const Eigen::VectorXd& v, const Eigen::VectorXd& x) {
    Eigen::VectorXd out = v;
    if (sw != 0.0) out += sw * (x - setup.anchor);
    return out;
  };

  EstimatorConfig cfg;
  cfg.kind = EstimatorKind::HYBRID;
  cfg.batch_M = setup.batch_M;
  cfg.alpha = setup.alpha;
  cfg.pair_batch = 1;
  EstimatorState est(cfg, *setup.f, setup.seed);
  est.hybrid_init(trajectory[0]);

  std::vector<BiasProbeRecord> out;
  for (std::size_t t = 1; t < trajectory.size(); ++t) {
    const Eigen::VectorXd& x_hat = trajectory[t];
    const Eigen::VectorXd& x_prev = trajectory[t - 1];
    double predicted =
        setup.alpha * (to_h(est.carried_v(), x_prev) - grad_h(x_prev)).norm();

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(setup.f->dim());
    for (std::size_t i = 0; i < static_cast<std::size_t>(N); ++i) {
      for (std::size_t j = 0; j < static_cast<std::size_t>(N); ++j) {
        EstimatorState branch = est;
        mean += branch.hybrid_update_with_pair(x_hat, std::span<const std::size_t>(&i, 1),
                                               std::span<const std::size_t>(&j, 1));
      }
    }
    mean /= static_cast<double>(N) * static_cast<double>(N);
    double measured = (to_h(mean, x_hat) - grad_h(x_hat)).norm();
    out.push_back({static_cast<int>(t), measured, predicted});
    est.hybrid_estimate(x_hat);
  }
  return out;
}

std::vector<VarianceProbeRecord> variance_bound_probe(
    const HybridProbeSetup& setup, const std::vector<Eigen::VectorXd>& trajectory,
    int t_max) {
  check_probe_setup(setup, 10);
  if (t_max < 0 || t_max > 3)
    throw std::invalid_argument("variance_bound_probe budget: 0 <= t_max <= 3");
  if (trajectory.size() < static_cast<std::size_t>(t_max) + 1)
    throw std::invalid_argument("variance_bound_probe: trajectory shorter than t_max + 1");
  const int N = setup.f->size();
  const int d = setup.f->dim();
  const int M = setup.batch_M;
  const double a = setup.alpha;

  // Per-sample gradients at every trajectory point (the recursion error on the
  // shifted objective equals the error on the raw finite sum, so the shift
  // never enters the measured side).
  std::vector<Eigen::MatrixXd> G(static_cast<std::size_t>(t_max) + 1);
  std::vector<Eigen::VectorXd> Gbar(static_cast<std::size_t>(t_max) + 1);
  for (int t = 0; t <= t_max; ++t) {
    G[static_cast<std::size_t>(t)].resize(d, N);
    for (int i = 0; i < N; ++i)
      G[static_cast<std::size_t>(t)].col(i) =
          setup.f->grad_single(trajectory[static_cast<std::size_t>(t)],
                               static_cast<std::size_t>(i));
    Gbar[static_cast<std::size_t>(t)] =
        G[static_cast<std::size_t>(t)].rowwise().mean();
  }

  // Exact E||e_0||^2 over all init batches, and exact MSE at deeper t by
  // enumerating every sample-pair sequence from each init batch.
  std::vector<double> mse(static_cast<std::size_t>(t_max) + 1, 0.0);
  long n_combos = 0;
  for_each_combination(N, M, [&](const std::vector<std::size_t>&) { ++n_combos; });
  const double combo_w = 1.0 / static_cast<double>(n_combos);

  std::function<void(int, const Eigen::VectorXd&, double)> dfs =
      [&](int t, const Eigen::VectorXd& v, double weight) {
        if (t > t_max) return;
        const auto& Gt = G[static_cast<std::size_t>(t)];
        const auto& Gp = G[static_cast<std::size_t>(t) - 1];
        const auto& mean_t = Gbar[static_cast<std::size_t>(t)];
        const double w_pair = weight / (static_cast<double>(N) * static_cast<double>(N));
        for (int i = 0; i < N; ++i) {
          Eigen::VectorXd carried_part;
          if (a != 0.0) carried_part = v + Gt.col(i) - Gp.col(i);
          for (int j = 0; j < N; ++j) {
            Eigen::VectorXd vn;
            if (a == 0.0) vn = Gt.col(j);
            else if (a == 1.0) vn = carried_part;
            else vn = a * carried_part + (1.0 - a) * Gt.col(j);
            mse[static_cast<std::size_t>(t)] += w_pair * (vn - mean_t).squaredNorm();
            dfs(t + 1, vn, w_pair);
          }
        }
      };

  for_each_combination(N, M, [&](const std::vector<std::size_t>& idx) {
    Eigen::VectorXd v0 = Eigen::VectorXd::Zero(d);
    for (std::size_t i : idx) v0 += G[0].col(static_cast<Eigen::Index>(i));
    v0 /= static_cast<double>(M);
    mse[0] += combo_w * (v0 - Gbar[0]).squaredNorm();
    dfs(1, v0, combo_w);
  });

  // Bound constants: Lambda covers the shifted objective, sigma^2 is the worst
  // exact population variance along the trajectory.
  const double Lam = setup.f->per_sample_lipschitz() + setup.shift_weight;
  double sigma2 = 0.0;
  for (int t = 0; t <= t_max; ++t) {
    double s = 0.0;
    for (int i = 0; i < N; ++i)
      s += (G[static_cast<std::size_t>(t)].col(i) - Gbar[static_cast<std::size_t>(t)])
               .squaredNorm();
    sigma2 = std::max(sigma2, s / static_cast<double>(N));
  }

  std::vector<VarianceProbeRecord> out;
  for (int t = 0; t <= t_max; ++t) {
    double bound = std::pow(a, 2 * t) * mse[0];
    for (int i = 0; i < t; ++i) {
      double step2 = (trajectory[static_cast<std::size_t>(i) + 1] -
                      trajectory[static_cast<std::size_t>(i)])
                         .squaredNorm();
      bound += Lam * Lam * std::pow(a, 2 * (t - i)) * step2;
    }
    if (t >= 1) bound += (1.0 - a) / (1.0 + a) * sigma2;
    out.push_back({t, mse[static_cast<std::size_t>(t)], bound});
  }
  return out;
}

RateFit rate_fit(const std::vector<TraceRecord>& trace, RateFit::Kind kind, int window_lo,
                 int window_hi) {
  if (trace.size() < 50)
    throw std::invalid_argument("rate_fit needs a trace of at least 50 records");
  std::vector<const TraceRecord*> win;
  for (const auto& r : trace) {
    if (window_lo >= 0 && r.k < window_lo) continue;
    if (window_hi >= 0 && r.k > window_hi) continue;
    win.push_back(&r);
  }
  if (win.size() < 2) throw std::runtime_error("rate_fit: window selects fewer than 2 records");

  std::vector<double> gaps(win.size(), 0.0);
  if (kind == RateFit::Kind::Sublinear) {
    double env = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < win.size(); ++i) {
      double v = win[i]->dx_norm * win[i]->dx_norm + win[i]->dy_norm * win[i]->dy_norm +
                 win[i]->dlam_norm * win[i]->dlam_norm;
      env = std::min(env, v);
      gaps[i] = env;
    }
  } else {
    double fstar = std::numeric_limits<double>::infinity();
    for (const auto* r : win) fstar = std::min(fstar, r->potential_P);
    for (std::size_t i = 0; i < win.size(); ++i)
      gaps[i] = win[i]->potential_P - fstar + 1e-14;
  }
  double gmax = *std::max_element(gaps.begin(), gaps.end());
  const double thr = 1e-8 * gmax;

  std::vector<double> xs, ys;
  std::vector<int> ks;
  for (std::size_t i = 0; i < win.size(); ++i) {
    if (!(gaps[i] >= thr) || gaps[i] <= 0.0 || win[i]->k < 1) continue;
    double x = kind == RateFit::Kind::Sublinear
                   ? std::log(static_cast<double>(win[i]->k))
                   : static_cast<double>(win[i]->k);
    xs.push_back(x);
    ys.push_back(std::log(gaps[i]));
    ks.push_back(win[i]->k);
  }
  if (xs.size() < 2)
    throw std::runtime_error("rate_fit: tail trimming left fewer than 2 usable points");

  const double n = static_cast<double>(xs.size());
  double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) throw std::runtime_error("rate_fit: degenerate abscissa");
  double slope = sxy / sxx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double pred = my + slope * (xs[i] - mx);
    ss_res += (ys[i] - pred) * (ys[i] - pred);
  }
  RateFit out;
  out.kind = kind;
  out.slope = slope;
  out.ratio = std::exp(slope);
  out.r_squared = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
  out.window_lo = ks.front();
  out.window_hi = ks.back();
  return out;
}

}  // namespace sadmm
