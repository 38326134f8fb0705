#ifndef SADMM_SIGMOID_HPP
#define SADMM_SIGMOID_HPP

#include <Eigen/Dense>
#include <memory>
#include <span>

#include "sadmm/dataset.hpp"

namespace sadmm {

// v(u) = 1/(1+e^u), computed through e^{-|u|} so it never overflows and the
// value stays inside (0, 1).
double sigmoid_value(double u);

// v'(u) = -e^u/(1+e^u)^2 (an even, negative function); underflows to 0
// gracefully for large |u|.
double sigmoid_derivative(double u);

// max_u |v''(u)|, located once by coarse scan + golden-section refinement on
// [-10, 10] to 1e-10 and cached. Analytic value is 1/(6*sqrt(3)).
double sigmoid_curvature_constant();

// f_i(x) = v(b_i * a_i.x); loss/gradient averaged over `idx` (empty -> domain error).
double sigmoid_loss(const Dataset& ds, const Eigen::VectorXd& x, std::span<const std::size_t> idx);
Eigen::VectorXd sigmoid_grad(const Dataset& ds, const Eigen::VectorXd& x, std::span<const std::size_t> idx);

double sigmoid_loss_full(const Dataset& ds, const Eigen::VectorXd& x);
Eigen::VectorXd sigmoid_grad_full(const Dataset& ds, const Eigen::VectorXd& x);

// Gradient Lipschitz bound for the mean loss: c_sig * max_i ||a_i||^2.
double estimate_lipschitz(const Dataset& ds);

// Minimal smooth finite-sum interface so estimators and the inner solver can
// run on any per-sample-differentiable mean objective (sigmoid in production,
// quadratics in tests).
class FiniteSum {
 public:
  virtual ~FiniteSum() = default;
  virtual int size() const = 0;  // number of summands N
  virtual int dim() const = 0;
  virtual double value_single(const Eigen::VectorXd& x, std::size_t i) const = 0;
  virtual Eigen::VectorXd grad_single(const Eigen::VectorXd& x, std::size_t i) const = 0;
  // Uniform bound on the per-sample gradient Lipschitz constants.
  virtual double per_sample_lipschitz() const = 0;

  // Mean over an index set / over everything (fixed summation order).
  double mean_value(const Eigen::VectorXd& x, std::span<const std::size_t> idx) const;
  Eigen::VectorXd mean_grad(const Eigen::VectorXd& x, std::span<const std::size_t> idx) const;
  double full_value(const Eigen::VectorXd& x) const;
  Eigen::VectorXd full_grad(const Eigen::VectorXd& x) const;
};

// Sigmoid loss over a dataset; delegates to the free functions above.
class SigmoidFiniteSum final : public FiniteSum {
 public:
  explicit SigmoidFiniteSum(const Dataset& ds) : ds_(&ds) {}
  int size() const override { return ds_->n_samples; }
  int dim() const override { return ds_->n_features; }
  double value_single(const Eigen::VectorXd& x, std::size_t i) const override;
  Eigen::VectorXd grad_single(const Eigen::VectorXd& x, std::size_t i) const override;
  double per_sample_lipschitz() const override;
  const Dataset& dataset() const { return *ds_; }

 private:
  const Dataset* ds_;
};

// Test/diagnostic workhorse: f_i(x) = 0.5 x'Q_i x - c_i'x.
class QuadraticFiniteSum final : public FiniteSum {
 public:
  QuadraticFiniteSum(std::vector<Eigen::MatrixXd> Q, std::vector<Eigen::VectorXd> c);
  int size() const override { return static_cast<int>(Q_.size()); }
  int dim() const override { return Q_.empty() ? 0 : static_cast<int>(Q_[0].rows()); }
  double value_single(const Eigen::VectorXd& x, std::size_t i) const override;
  Eigen::VectorXd grad_single(const Eigen::VectorXd& x, std::size_t i) const override;
  double per_sample_lipschitz() const override;

 private:
  std::vector<Eigen::MatrixXd> Q_;
  std::vector<Eigen::VectorXd> c_;
};

}  // namespace sadmm

#endif  // SADMM_SIGMOID_HPP
