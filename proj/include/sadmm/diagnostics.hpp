#ifndef SADMM_DIAGNOSTICS_HPP
#define SADMM_DIAGNOSTICS_HPP

#include <Eigen/Dense>
#include <vector>

#include "sadmm/admm.hpp"

namespace sadmm {

// Full-gradient stationarity residuals (all squared):
//   stat_x = ||grad f(x) - A'lambda||^2
//   stat_y = dist(B'lambda, subdiff g(y))^2
//   stat_r = ||A x + B y - b||^2
struct StationarityReport {
  double stat_x = 0.0;
  double stat_y = 0.0;
  double stat_r = 0.0;
  bool epsilon_met = false;  // all three <= epsilon (when epsilon > 0 was given)
};

StationarityReport stationarity(const ProblemSpec& p, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& y, const Eigen::VectorXd& lambda,
                                double epsilon = -1.0);

// Post-step x-block residual (the quantity the inner solver drives to zero):
//   || grad f(x_next) + A'(-lambda_k + beta * r_next) + beta*w1*(x_next - x_prev) ||,
// r_next = A x_next + B y_next - b.
double xi_x_residual(const ProblemSpec& p, const Eigen::VectorXd& x_next,
                     const Eigen::VectorXd& x_prev, const Eigen::VectorXd& y_next,
                     const Eigen::VectorXd& lambda_k, double beta, double w1);

// Shared setup for the enumeration-scale hybrid-estimator probes. The probes
// replay the estimator recursion on a fixed trajectory, enumerate the sample
// pairs exactly, and compare against the theoretical quantities. The smooth
// part may carry the proximal shift h(x) = f(x) + (shift_weight/2)||x-anchor||^2.
struct HybridProbeSetup {
  const FiniteSum* f = nullptr;
  double alpha = 0.5;
  int batch_M = 1;  // init batch for v_0
  double shift_weight = 0.0;
  Eigen::VectorXd anchor;  // required when shift_weight != 0
  std::uint64_t seed = 0;
};

struct BiasProbeRecord {
  int t;  // step index >= 1
  double measured;   // || E[v_t | F_t] - grad h(x_hat_t) ||, exact pair enumeration
  double predicted;  // alpha * || v_{t-1} - grad h(x_hat_{t-1}) ||
};

// Runs the realized recursion along `trajectory` (seeded draws) and at each
// step measures the conditional bias by enumerating all sample pairs.
// Enumeration budget: N <= 16, pair batch 1 (violations -> refusal error).
std::vector<BiasProbeRecord> bias_probe(const HybridProbeSetup& setup,
                                        const std::vector<Eigen::VectorXd>& trajectory);

struct VarianceProbeRecord {
  int t;
  double measured;  // exact E||v_t - grad h(x_hat_t)||^2 over all sample sequences
  double bound;     // alpha^{2t} E||e_0||^2 + Lambda^2 sum alpha^{2(t-i)}||dx_hat_i||^2
                    //   + ((1-alpha)/(1+alpha)) sigma^2, constants exact for the sum
};

// Exact mean-squared-error enumeration over all (init batch, pair sequence)
// combinations up to t_max. Budget: N <= 10, t_max <= 3, pair batch 1.
std::vector<VarianceProbeRecord> variance_bound_probe(const HybridProbeSetup& setup,
                                                      const std::vector<Eigen::VectorXd>& trajectory,
                                                      int t_max);

struct RateFit {
  enum class Kind { Sublinear, Linear };
  Kind kind = Kind::Sublinear;
  double slope = 0.0;      // least-squares slope of the log fit
  double ratio = 0.0;      // exp(slope); per-step ratio for the linear kind
  double r_squared = 0.0;
  int window_lo = 0, window_hi = 0;  // k range actually used
};

// Sublinear: slope of log(min_{k<=T} (dx^2+dy^2+dlam^2)) vs log T.
// Linear:    slope of log(P_k - Fstar + floor) vs k, Fstar = min observed
//            potential_P, floor = 1e-14.
// Fits skip the distorted tail: only entries with floored gap >= 1e-8 x the
// max floored gap participate. Requires trace length >= 50; window bounds
// (when >= 0) restrict the k/T range first.
RateFit rate_fit(const std::vector<TraceRecord>& trace, RateFit::Kind kind,
                 int window_lo = -1, int window_hi = -1);

}  // namespace sadmm

#endif  // SADMM_DIAGNOSTICS_HPP
