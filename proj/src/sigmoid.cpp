#include "sadmm/sigmoid.hpp"

#include <cmath>
#include <stdexcept>

namespace sadmm {

double sigmoid_value(double u) {
  double t = std::exp(-std::abs(u));
  return u >= 0.0 ? t / (1.0 + t) : 1.0 / (1.0 + t);
}

double sigmoid_derivative(double u) {
  // e^u/(1+e^u)^2 is even in u, so evaluate at -|u| to avoid overflow.
  double t = std::exp(-std::abs(u));
  return -t / ((1.0 + t) * (1.0 + t));
}

namespace {

// |v''(u)| = t(1-t)/(1+t)^3 with t = e^{-|u|}; even in u.
double abs_second_derivative(double u) {
  double t = std::exp(-std::abs(u));
  double onept = 1.0 + t;
  return t * (1.0 - t) / (onept * onept * onept);
}

double maximize_curvature() {
  // Coarse scan brackets the global max of the (two-peaked, even) function,
  // then golden-section refines inside the bracket.
  const double lo = -10.0, hi = 10.0;
  const int n_scan = 2001;
  double best_u = lo, best_v = -1.0;
  for (int i = 0; i < n_scan; ++i) {
    double u = lo + (hi - lo) * i / (n_scan - 1);
    double v = abs_second_derivative(u);
    if (v > best_v) {
      best_v = v;
      best_u = u;
    }
  }
  double step = (hi - lo) / (n_scan - 1);
  double a = best_u - step, b = best_u + step;
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = abs_second_derivative(c);
  double fd = abs_second_derivative(d);
  while (b - a > 1e-10) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = abs_second_derivative(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = abs_second_derivative(d);
    }
  }
  return abs_second_derivative(0.5 * (a + b));
}

}  // namespace

double sigmoid_curvature_constant() {
  static const double c_sig = maximize_curvature();
  return c_sig;
}

double sigmoid_loss(const Dataset& ds, const Eigen::VectorXd& x,
                    std::span<const std::size_t> idx) {
  if (idx.empty()) throw std::domain_error("sigmoid_loss: empty index set");
  double acc = 0.0;
  for (std::size_t i : idx) acc += sigmoid_value(ds.labels[i] * row_dot(ds.rows[i], x));
  return acc / static_cast<double>(idx.size());
}

Eigen::VectorXd sigmoid_grad(const Dataset& ds, const Eigen::VectorXd& x,
                             std::span<const std::size_t> idx) {
  if (idx.empty()) throw std::domain_error("sigmoid_grad: empty index set");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(ds.n_features);
  const double inv = 1.0 / static_cast<double>(idx.size());
  for (std::size_t i : idx) {
    double u = ds.labels[i] * row_dot(ds.rows[i], x);
    double scale = inv * ds.labels[i] * sigmoid_derivative(u);
    add_scaled_row(g, ds.rows[i], scale);
  }
  return g;
}

namespace {

std::vector<std::size_t> all_indices(int n) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = static_cast<std::size_t>(i);
  return idx;
}

}  // namespace

double sigmoid_loss_full(const Dataset& ds, const Eigen::VectorXd& x) {
  auto idx = all_indices(ds.n_samples);
  return sigmoid_loss(ds, x, idx);
}

Eigen::VectorXd sigmoid_grad_full(const Dataset& ds, const Eigen::VectorXd& x) {
  auto idx = all_indices(ds.n_samples);
  return sigmoid_grad(ds, x, idx);
}

double estimate_lipschitz(const Dataset& ds) {
  if (ds.n_samples == 0) throw std::domain_error("estimate_lipschitz: empty dataset");
  double max_sq = 0.0;
  for (const auto& row : ds.rows) max_sq = std::max(max_sq, row_squared_norm(row));
  return sigmoid_curvature_constant() * max_sq;
}

double FiniteSum::mean_value(const Eigen::VectorXd& x, std::span<const std::size_t> idx) const {
  if (idx.empty()) throw std::domain_error("FiniteSum::mean_value: empty index set");
  double acc = 0.0;
  for (std::size_t i : idx) acc += value_single(x, i);
  return acc / static_cast<double>(idx.size());
}

Eigen::VectorXd FiniteSum::mean_grad(const Eigen::VectorXd& x,
                                     std::span<const std::size_t> idx) const {
  if (idx.empty()) throw std::domain_error("FiniteSum::mean_grad: empty index set");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dim());
  for (std::size_t i : idx) g += grad_single(x, i);
  return g / static_cast<double>(idx.size());
}

double FiniteSum::full_value(const Eigen::VectorXd& x) const {
  auto idx = all_indices(size());
  return mean_value(x, idx);
}

Eigen::VectorXd FiniteSum::full_grad(const Eigen::VectorXd& x) const {
  auto idx = all_indices(size());
  return mean_grad(x, idx);
}

double SigmoidFiniteSum::value_single(const Eigen::VectorXd& x, std::size_t i) const {
  return sigmoid_value(ds_->labels[i] * row_dot(ds_->rows[i], x));
}

Eigen::VectorXd SigmoidFiniteSum::grad_single(const Eigen::VectorXd& x, std::size_t i) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(ds_->n_features);
  double u = ds_->labels[i] * row_dot(ds_->rows[i], x);
  add_scaled_row(g, ds_->rows[i], ds_->labels[i] * sigmoid_derivative(u));
  return g;
}

double SigmoidFiniteSum::per_sample_lipschitz() const { return estimate_lipschitz(*ds_); }

QuadraticFiniteSum::QuadraticFiniteSum(std::vector<Eigen::MatrixXd> Q,
                                       std::vector<Eigen::VectorXd> c)
    : Q_(std::move(Q)), c_(std::move(c)) {
  if (Q_.empty() || Q_.size() != c_.size())
    throw std::invalid_argument("QuadraticFiniteSum: need matching nonempty Q, c lists");
}

double QuadraticFiniteSum::value_single(const Eigen::VectorXd& x, std::size_t i) const {
  return 0.5 * x.dot(Q_[i] * x) - c_[i].dot(x);
}

Eigen::VectorXd QuadraticFiniteSum::grad_single(const Eigen::VectorXd& x, std::size_t i) const {
  return Q_[i] * x - c_[i];
}

double QuadraticFiniteSum::per_sample_lipschitz() const {
  double worst = 0.0;
  for (const auto& Q : Q_) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (Q + Q.transpose()));
    worst = std::max(worst, es.eigenvalues().cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace sadmm
