#ifndef SADMM_REGULARIZER_HPP
#define SADMM_REGULARIZER_HPP

#include <Eigen/Dense>

#include "sadmm/constraint.hpp"

namespace sadmm {

enum class RegularizerKind { None, L1, SCAD };

// g(y) = lambda1 * sum_i p(|y_i|): p = |.| for L1, the SCAD spline for SCAD.
struct RegularizerSpec {
  RegularizerKind kind = RegularizerKind::None;
  double lambda1 = 0.0;
  double scad_c = 3.7;     // > 2
  double scad_kappa = 0.1; // > 0
};

// SCAD spline p(theta) for theta >= 0 (negative theta -> domain error):
//   kappa*theta                              theta <= kappa
//   (-theta^2 + 2c*kappa*theta - kappa^2)/(2(c-1))   kappa < theta <= c*kappa
//   (c+1)kappa^2/2                           theta > c*kappa
double scad_penalty(double theta, double kappa, double c);

// p'(theta) for theta > 0: kappa; (c*kappa - theta)/(c-1); 0.
double scad_derivative(double theta, double kappa, double c);

// argmin_y p(|y|) + (1/(2v)) (y-q)^2, closed form, valid for 1+v <= c
// (violation -> configuration error naming the condition). Ties at branch
// boundaries resolve to the left branch (<=).
double scad_prox_scalar(double q, double v, double kappa, double c);
Eigen::VectorXd scad_prox(const Eigen::VectorXd& q, double v, double kappa, double c);

// argmin_y lambda1*|y| + (1/(2v)) (y-q)^2 = sign(q) * max(|q| - lambda1*v, 0).
double soft_threshold_scalar(double q, double threshold);
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& q, double lambda1, double v);

double regularizer_value(const RegularizerSpec& g, const Eigen::VectorXd& y);

// Componentwise argmin g(y) + sum_i (1/(2 v_i)) (y_i - q_i)^2. The scaled
// penalty lambda1*p folds into the closed forms via v_eff = lambda1 * v_i.
Eigen::VectorXd regularizer_prox(const RegularizerSpec& g, const Eigen::VectorXd& q,
                                 const Eigen::VectorXd& v);

// Block update for y: argmin_y g(y) + (beta/2)||A x_k + B y - b - lambda_k/beta||^2
//                              + (beta*w2/2)||y - y_k||^2,
// reduced per component (B diagonal) to a prox query and dispatched to the
// closed forms above.
Eigen::VectorXd y_update(const Eigen::VectorXd& y_k, const Eigen::VectorXd& x_k,
                         const Eigen::VectorXd& lambda_k, const ConstraintSystem& C,
                         const RegularizerSpec& g, double beta, double w2);

// Euclidean distance from z to the Clarke subdifferential of g at y.
// At y_i = 0 the subdifferential is [-lambda1, lambda1] (L1) or
// [-lambda1*kappa, lambda1*kappa] (SCAD, convex hull of nearby derivatives).
double subgrad_distance(const RegularizerSpec& g, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& z);

}  // namespace sadmm

#endif  // SADMM_REGULARIZER_HPP
