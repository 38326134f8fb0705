#ifndef SADMM_ESTIMATORS_HPP
#define SADMM_ESTIMATORS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "sadmm/rng.hpp"
#include "sadmm/sigmoid.hpp"

namespace sadmm {

enum class EstimatorKind { SGD, SVRG, SPIDER, HYBRID };

struct EstimatorConfig {
  EstimatorKind kind = EstimatorKind::SGD;
  int batch_M = 1;     // minibatch size (and hybrid init-batch size)
  int restart_q = 1;   // SPIDER full-gradient period
  double alpha = 0.0;  // hybrid mixing weight in [0, 1]
  int pair_batch = 1;  // hybrid per-step sample-pair size
};

// Stochastic gradient estimators over a finite sum with a uniform interface.
// Single-owner mutable; copyable so probes can branch the state. All
// randomness comes from the owned stream; identical seeds and query sequences
// give bit-identical outputs. grad_calls counts evaluated per-sample
// gradients (the IFO cost unit).
class EstimatorState {
 public:
  EstimatorState(EstimatorConfig cfg, const FiniteSum& f, std::uint64_t seed);

  // SGD / SVRG / SPIDER query at x. SVRG requires svrg_init first.
  Eigen::VectorXd estimate(const Eigen::VectorXd& x);

  // SVRG snapshot initialization (full gradient at x_snapshot).
  void svrg_init(const Eigen::VectorXd& x_snapshot);

  // Hybrid: (re)initialize the recursion at x0 with a size-M batch mean.
  void hybrid_init(const Eigen::VectorXd& x0);

  // Hybrid step at x_hat_t: draws the sample pair (xi, zeta) from the stream
  // (always both, in fixed order, so streams stay aligned across alpha) and
  // applies the recursion. Requires hybrid_init.
  Eigen::VectorXd hybrid_estimate(const Eigen::VectorXd& x_hat_t);

  // Deterministic core of hybrid_estimate with caller-chosen sample sets;
  // used by the enumeration probes so they exercise the production path.
  Eigen::VectorXd hybrid_update_with_pair(const Eigen::VectorXd& x_hat_t,
                                          std::span<const std::size_t> xi,
                                          std::span<const std::size_t> zeta);

  const EstimatorConfig& config() const { return cfg_; }
  const FiniteSum& objective() const { return *f_; }
  std::int64_t grad_calls() const { return grad_calls_; }
  std::int64_t call_count() const { return call_count_; }
  bool snapshot_ready() const { return snapshot_ready_; }
  bool hybrid_ready() const { return hybrid_ready_; }
  const Eigen::VectorXd& carried_v() const { return carried_v_; }
  const Eigen::VectorXd& prev_point() const { return prev_point_; }
  const Eigen::VectorXd& snapshot_x() const { return snapshot_x_; }
  const Eigen::VectorXd& snapshot_full_grad() const { return snapshot_full_grad_; }
  // SVRG snapshot refresh period ceil(N/M).
  int refresh_period() const;

 private:
  Eigen::VectorXd draw_batch_mean(const Eigen::VectorXd& x, int batch);
  Eigen::VectorXd full_grad_counted(const Eigen::VectorXd& x);

  EstimatorConfig cfg_;
  const FiniteSum* f_;
  Rng rng_;
  Eigen::VectorXd snapshot_x_, snapshot_full_grad_;  // SVRG
  Eigen::VectorXd carried_v_;                        // SPIDER v / hybrid recursion
  Eigen::VectorXd prev_point_;                       // recursion anchor
  std::int64_t grad_calls_ = 0;
  std::int64_t call_count_ = 0;
  bool snapshot_ready_ = false;
  bool hybrid_ready_ = false;
};

// Exact population variance of the per-sample gradients at x:
// (1/N) sum_i ||grad_i(x) - full_grad(x)||^2.
double population_grad_variance(const FiniteSum& f, const Eigen::VectorXd& x);

}  // namespace sadmm

#endif  // SADMM_ESTIMATORS_HPP
