#include "sadmm/regularizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sadmm {

double scad_penalty(double theta, double kappa, double c) {
  double t = std::abs(theta);
  if (t <= kappa) return kappa * t;
  if (t <= c * kappa) return (-t * t + 2.0 * c * kappa * t - kappa * kappa) / (2.0 * (c - 1.0));
  return (c + 1.0) * kappa * kappa / 2.0;
}

double scad_derivative(double theta, double kappa, double c) {
  double t = std::abs(theta);
  if (t <= kappa) return kappa;
  if (t <= c * kappa) return (c * kappa - t) / (c - 1.0);
  return 0.0;
}

double soft_threshold_scalar(double q, double threshold) {
  if (q > threshold) return q - threshold;
  if (q < -threshold) return q + threshold;
  return 0.0;
}

double scad_prox_scalar(double q, double v, double kappa, double c) {
  if (!(v > 0.0)) throw std::invalid_argument("scad prox requires v > 0");
  if (!(1.0 + v <= c))
    throw std::invalid_argument("scad prox closed form requires 1 + v <= c");
  double aq = std::abs(q);
  if (aq <= (1.0 + v) * kappa) return soft_threshold_scalar(q, v * kappa);
  if (aq <= c * kappa) {
    double sign = q >= 0.0 ? 1.0 : -1.0;
    return ((c - 1.0) * q - sign * c * kappa * v) / (c - 1.0 - v);
  }
  return q;
}

Eigen::VectorXd scad_prox(const Eigen::VectorXd& q, double v, double kappa, double c) {
  Eigen::VectorXd out(q.size());
  for (Eigen::Index i = 0; i < q.size(); ++i) out[i] = scad_prox_scalar(q[i], v, kappa, c);
  return out;
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& q, double lambda1, double v) {
  Eigen::VectorXd out(q.size());
  for (Eigen::Index i = 0; i < q.size(); ++i)
    out[i] = soft_threshold_scalar(q[i], lambda1 * v);
  return out;
}

double regularizer_value(const RegularizerSpec& g, const Eigen::VectorXd& y) {
  switch (g.kind) {
    case RegularizerKind::None:
      return 0.0;
    case RegularizerKind::L1:
      return g.lambda1 * y.lpNorm<1>();
    case RegularizerKind::SCAD: {
      double total = 0.0;
      for (Eigen::Index i = 0; i < y.size(); ++i)
        total += scad_penalty(y[i], g.scad_kappa, g.scad_c);
      return g.lambda1 * total;
    }
  }
  throw std::logic_error("unreachable regularizer kind");
}

Eigen::VectorXd regularizer_prox(const RegularizerSpec& g, const Eigen::VectorXd& q,
                                 const Eigen::VectorXd& v) {
  if (q.size() != v.size())
    throw std::invalid_argument("regularizer_prox: q and v size mismatch");
  switch (g.kind) {
    case RegularizerKind::None:
      return q;
    case RegularizerKind::L1: {
      Eigen::VectorXd out(q.size());
      for (Eigen::Index i = 0; i < q.size(); ++i)
        out[i] = soft_threshold_scalar(q[i], g.lambda1 * v[i]);
      return out;
    }
    case RegularizerKind::SCAD: {
      Eigen::VectorXd out(q.size());
      for (Eigen::Index i = 0; i < q.size(); ++i) {
        double v_eff = g.lambda1 * v[i];
        out[i] = scad_prox_scalar(q[i], v_eff, g.scad_kappa, g.scad_c);
      }
      return out;
    }
  }
  throw std::logic_error("unreachable regularizer kind");
}

Eigen::VectorXd y_update(const Eigen::VectorXd& y_k, const Eigen::VectorXd& x_k,
                         const Eigen::VectorXd& lambda_k, const ConstraintSystem& C,
                         const RegularizerSpec& g, double beta, double w2) {
  const Eigen::Index m = C.B_diag.size();
  if (y_k.size() != m) throw std::invalid_argument("y_update: y dimension mismatch");
  Eigen::VectorXd u = C.b + lambda_k / beta - C.A * x_k;
  Eigen::VectorXd q(m), v(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    double d = C.B_diag[i];
    double denom = d * d + w2;
    if (denom <= 0.0)
      throw std::invalid_argument(
          "y_update: B_diag[i]^2 + w2 must be positive for every coordinate");
    q[i] = (d * u[i] + w2 * y_k[i]) / denom;
    v[i] = 1.0 / (beta * denom);
  }
  return regularizer_prox(g, q, v);
}

double subgrad_distance(const RegularizerSpec& g, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& z) {
  if (y.size() != z.size())
    throw std::invalid_argument("subgrad_distance: size mismatch");
  double dist2 = 0.0;
  auto interval_dist = [](double zi, double lo, double hi) {
    if (zi < lo) return lo - zi;
    if (zi > hi) return zi - hi;
    return 0.0;
  };
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    double d = 0.0;
    switch (g.kind) {
      case RegularizerKind::None:
        d = z[i];
        break;
      case RegularizerKind::L1:
        if (y[i] == 0.0) {
          d = interval_dist(z[i], -g.lambda1, g.lambda1);
        } else {
          d = z[i] - g.lambda1 * (y[i] > 0.0 ? 1.0 : -1.0);
        }
        break;
      case RegularizerKind::SCAD:
        if (y[i] == 0.0) {
          double r = g.lambda1 * g.scad_kappa;
          d = interval_dist(z[i], -r, r);
        } else {
          double sgn = y[i] > 0.0 ? 1.0 : -1.0;
          d = z[i] - g.lambda1 * sgn * scad_derivative(y[i], g.scad_kappa, g.scad_c);
        }
        break;
    }
    dist2 += d * d;
  }
  return std::sqrt(dist2);
}

}  // namespace sadmm
