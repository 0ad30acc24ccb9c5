#pragma once

#include "rsw/core.hpp"

#include <functional>
#include <span>
#include <vector>

namespace rsw {

/// Real roots of x^3 + a2 x^2 + a1 x + a0, ascending, Newton-polished.
std::vector<double> cubic_roots(double a2, double a1, double a0);

/// Real roots of h^3 + phi1 h^2 + phi2 = 0, ascending.
inline std::vector<double> cubic_roots(double phi1, double phi2) {
  return cubic_roots(phi1, 0.0, phi2);
}

/// Value of h^3 + phi1 h^2 + phi2 at its local minimum h = -2 phi1 / 3.
/// Negative means three real roots (two positive when phi2 > 0).
inline double cubic_discriminant(double phi1, double phi2) {
  return 4.0 / 27.0 * phi1 * phi1 * phi1 + phi2;
}

/// Free constants of the stationary ring: U = C3/(rh), V = C2/r - fr/2.
struct RingConstants {
  double c1 = 1.0;
  double c2 = 1.0;
  double c3 = 1.0;
};

struct CubicCoeffs {
  double phi1 = 0;
  double phi2 = 0;
};

CubicCoeffs ring_coeffs(const RingConstants& c, const FlowParameters& params, double r);
/// d(phi1)/dr and d(phi2)/dr.
CubicCoeffs ring_coeffs_dr(const RingConstants& c, const FlowParameters& params, double r);
double ring_discriminant(const RingConstants& c, const FlowParameters& params, double r);

struct RingBounds {
  double r_inner = 0;
  double r_outer = 0;
  double hc_inner = 0;  // double root -2 phi1 / 3 at r_inner
  double hc_outer = 0;
};

/// Sonic radii where the two positive depth branches merge.
/// Throws invalid_params for C3 = 0 and no_ring_exists when the cubic never
/// has two positive roots.
RingBounds ring_bounds(const RingConstants& c, const FlowParameters& params);

enum class Branch { lower, upper };

/// Depth on the chosen branch at radius r (r inside the ring).
double ring_depth(const RingConstants& c, const FlowParameters& params, double r, Branch branch);

/// Maximum residuals of the reduced contact-characteristic ODEs
///   (lambda (phi^2 + 2 g eta))' + psi^2 = 0,  lambda phi psi' = 0,  (lambda phi eta)' = 0
/// with derivatives by central differences in lambda.
struct ContactResidual {
  double momentum = 0;
  double swirl = 0;
  double mass = 0;
  double max() const { return std::max({momentum, swirl, mass}); }
};

ContactResidual submodel_residual_contact(const std::function<double(double)>& phi,
                                          const std::function<double(double)>& psi,
                                          const std::function<double(double)>& eta,
                                          std::span<const double> lambdas,
                                          const FlowParameters& params, double step = 1e-5);

/// Implicit solution of phi' = -f^2/4 - phi^2 - 2 g eta, eta' = -4 phi eta
/// (the psi = -f/2 reduction) given by t(eta) as a quadrature.
class ImplicitCollapse {
 public:
  struct State {
    double eta = 0;
    double phi = 0;
    double eta_dot = 0;
    double phi_dot = 0;
  };

  ImplicitCollapse() = default;
  ImplicitCollapse(double phi0, double eta0, const FlowParameters& params);

  double phi0() const { return phi0_; }
  double eta0() const { return eta0_; }
  /// Root of the radicand: the smallest depth invariant, reached when phi = 0.
  double eta1() const { return eta1_; }
  /// Time at which eta = eta1. Positive when phi0 > 0 (spreading first),
  /// negative when phi0 < 0 (the turn lies in the past).
  double turning_time() const { return t_turn_; }
  /// t1 of the spreading-then-collapse regime (0 when phi0 <= 0).
  double t1() const { return phi0_ > 0 ? t_turn_ : 0.0; }
  double blow_up_time() const { return t_star_; }
  bool has_turning_point() const { return phi0_ > 0; }
  const FlowParameters& params() const { return params_; }

  /// Signed radicand-root phi-hat(eta).
  double phi_hat(double eta, bool spreading) const;
  /// Time at which eta is reached on the spreading (phi > 0) or collapse (phi < 0) branch.
  double time_of(double eta, bool spreading) const;
  /// State at time t. The motion is symmetric about the turning time, so any t
  /// with |t - turning_time()| < T* - turning_time() is accepted (FD stencils may
  /// step slightly before t = 0); outside that, throws window_violation.
  State at(double t) const;

 private:
  double radicand(double eta) const;
  // Integral of dnu / (4 nu |phi-hat|) between nu = eta1 + a^2 and eta1 + b^2.
  double core_integral(double a, double b) const;
  // Same in v = 1/sqrt(nu) on [0, v].
  double tail_integral(double v) const;
  // Time to run from eta1 to eta along either branch.
  double elapsed(double eta) const;
  double eta_after(double s) const;

  FlowParameters params_;
  double phi0_ = 0;
  double eta0_ = 1;
  double k_ = 0;
  double eta1_ = 0;
  double nu_big_ = 0;
  double sigma_big_ = 0;
  double t_big_ = 0;
  double t_half_ = 0;
  double t_turn_ = 0;
  double t_star_ = 0;
};

ImplicitCollapse collapse2_build(double phi0, double eta0, const FlowParameters& params);

struct CollapseOdeReport {
  double t_end = 0;
  int steps = 0;
  double max_eta_error = 0;  // |eta_rk - eta| / max(1, eta)
  double max_phi_error = 0;  // |phi_rk - phi| / max(1, |phi|)
  double psi_drift = 0;      // max |psi + f/2|
  double piston_error = 0;   // max |R' - U(t, R)| / max(1, |U|)
  bool eta_monotone_after_turn = true;
  bool turning_point_seen = false;
};

/// RK4 integration of the full three-equation submodel from (phi0, -f/2, eta0)
/// compared against the implicit solution on [0, fraction * T*].
CollapseOdeReport collapse2_verify_ode(const ImplicitCollapse& ic, double fraction = 0.9,
                                       int steps = 20000);

}  // namespace rsw
