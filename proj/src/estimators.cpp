#include "sadmm/estimators.hpp"

#include <cmath>
#include <stdexcept>

namespace sadmm {

namespace {

void check_batch(int batch, int n, const char* who) {
  if (batch < 1 || batch > n)
    throw std::invalid_argument(std::string(who) + ": batch size must be in [1, N]");
}

}  // namespace

EstimatorState::EstimatorState(EstimatorConfig cfg, const FiniteSum& f, std::uint64_t seed)
    : cfg_(cfg), f_(&f), rng_(seed) {
  const int n = f.size();
  check_batch(cfg_.batch_M, n, "EstimatorState");
  if (cfg_.kind == EstimatorKind::SPIDER && cfg_.restart_q < 1)
    throw std::invalid_argument("EstimatorState: SPIDER restart period must be >= 1");
  if (cfg_.kind == EstimatorKind::HYBRID) {
    if (cfg_.alpha < 0.0 || cfg_.alpha > 1.0)
      throw std::invalid_argument("EstimatorState: hybrid alpha must be in [0, 1]");
    check_batch(cfg_.pair_batch, n, "EstimatorState pair_batch");
  }
}

int EstimatorState::refresh_period() const {
  return static_cast<int>((f_->size() + cfg_.batch_M - 1) / cfg_.batch_M);
}

Eigen::VectorXd EstimatorState::full_grad_counted(const Eigen::VectorXd& x) {
  grad_calls_ += f_->size();
  return f_->full_grad(x);
}

Eigen::VectorXd EstimatorState::draw_batch_mean(const Eigen::VectorXd& x, int batch) {
  // A full batch is the exact gradient in canonical order; the stream is left
  // untouched so full-batch runs stay deterministic without RNG drift.
  if (batch == f_->size()) return full_grad_counted(x);
  auto idx = rng_.sample_without_replacement(static_cast<std::size_t>(f_->size()),
                                             static_cast<std::size_t>(batch));
  grad_calls_ += batch;
  return f_->mean_grad(x, idx);
}

Eigen::VectorXd EstimatorState::estimate(const Eigen::VectorXd& x) {
  const int n = f_->size();
  const int M = cfg_.batch_M;
  switch (cfg_.kind) {
    case EstimatorKind::SGD: {
      ++call_count_;
      return draw_batch_mean(x, M);
    }
    case EstimatorKind::SVRG: {
      if (!snapshot_ready_)
        throw std::logic_error("SVRG estimate before svrg_init");
      const std::int64_t c = call_count_;
      if (c > 0 && c % refresh_period() == 0) svrg_init(x);
      ++call_count_;
      if (M == n) return full_grad_counted(x);
      auto idx = rng_.sample_without_replacement(static_cast<std::size_t>(n),
                                                 static_cast<std::size_t>(M));
      grad_calls_ += 2 * M;
      return f_->mean_grad(x, idx) - f_->mean_grad(snapshot_x_, idx) + snapshot_full_grad_;
    }
    case EstimatorKind::SPIDER: {
      const std::int64_t c = call_count_;
      ++call_count_;
      if (c % cfg_.restart_q == 0) {
        carried_v_ = full_grad_counted(x);
        prev_point_ = x;
        return carried_v_;
      }
      if (M == n) {
        grad_calls_ += 2 * n;
        carried_v_ = f_->full_grad(x) - f_->full_grad(prev_point_) + carried_v_;
      } else {
        auto idx = rng_.sample_without_replacement(static_cast<std::size_t>(n),
                                                   static_cast<std::size_t>(M));
        grad_calls_ += 2 * M;
        carried_v_ = f_->mean_grad(x, idx) - f_->mean_grad(prev_point_, idx) + carried_v_;
      }
      prev_point_ = x;
      return carried_v_;
    }
    case EstimatorKind::HYBRID:
      throw std::logic_error("hybrid estimator is driven via hybrid_init/hybrid_estimate");
  }
  throw std::logic_error("unreachable estimator kind");
}

void EstimatorState::svrg_init(const Eigen::VectorXd& x_snapshot) {
  snapshot_x_ = x_snapshot;
  snapshot_full_grad_ = full_grad_counted(x_snapshot);
  snapshot_ready_ = true;
}

void EstimatorState::hybrid_init(const Eigen::VectorXd& x0) {
  carried_v_ = draw_batch_mean(x0, cfg_.batch_M);
  prev_point_ = x0;
  hybrid_ready_ = true;
}

Eigen::VectorXd EstimatorState::hybrid_estimate(const Eigen::VectorXd& x_hat_t) {
  if (!hybrid_ready_)
    throw std::logic_error("hybrid_estimate before hybrid_init");
  const std::size_t n = static_cast<std::size_t>(f_->size());
  const std::size_t p = static_cast<std::size_t>(cfg_.pair_batch);
  // Both sample sets are drawn every step, xi first, so the stream position
  // after a step does not depend on alpha.
  std::vector<std::size_t> xi, zeta;
  if (p == n) {
    xi.resize(n);
    zeta.resize(n);
    for (std::size_t i = 0; i < n; ++i) xi[i] = zeta[i] = i;
  } else {
    xi = rng_.sample_without_replacement(n, p);
    zeta = rng_.sample_without_replacement(n, p);
  }
  return hybrid_update_with_pair(x_hat_t, xi, zeta);
}

Eigen::VectorXd EstimatorState::hybrid_update_with_pair(const Eigen::VectorXd& x_hat_t,
                                                        std::span<const std::size_t> xi,
                                                        std::span<const std::size_t> zeta) {
  if (!hybrid_ready_)
    throw std::logic_error("hybrid_update_with_pair before hybrid_init");
  const double a = cfg_.alpha;
  Eigen::VectorXd v;
  if (a == 0.0) {
    grad_calls_ += static_cast<std::int64_t>(zeta.size());
    v = f_->mean_grad(x_hat_t, zeta);
  } else if (a == 1.0) {
    grad_calls_ += 2 * static_cast<std::int64_t>(xi.size());
    v = carried_v_ + (f_->mean_grad(x_hat_t, xi) - f_->mean_grad(prev_point_, xi));
  } else {
    grad_calls_ += 2 * static_cast<std::int64_t>(xi.size()) +
                   static_cast<std::int64_t>(zeta.size());
    v = a * (carried_v_ + f_->mean_grad(x_hat_t, xi) - f_->mean_grad(prev_point_, xi)) +
        (1.0 - a) * f_->mean_grad(x_hat_t, zeta);
  }
  carried_v_ = v;
  prev_point_ = x_hat_t;
  ++call_count_;
  return v;
}

double population_grad_variance(const FiniteSum& f, const Eigen::VectorXd& x) {
  const int n = f.size();
  Eigen::VectorXd mean = f.full_grad(x);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    total += (f.grad_single(x, static_cast<std::size_t>(i)) - mean).squaredNorm();
  }
  return total / static_cast<double>(n);
}

}  // namespace sadmm
