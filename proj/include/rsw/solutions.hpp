#pragma once

#include "rsw/core.hpp"
#include "rsw/reduction.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace rsw {

enum class FamilyId {
  rest,
  constant_sw_image,
  barochronous_sw,
  stationary_rot_sym,
  pulsating_cylinder,
  drop,
  ring,
  collapse_contact,
  collapse_contact_cubic,
  collapse_scaling,
};

inline constexpr std::array<FamilyId, 10> kAllFamilies = {
    FamilyId::rest,           FamilyId::constant_sw_image,      FamilyId::barochronous_sw,
    FamilyId::stationary_rot_sym, FamilyId::pulsating_cylinder, FamilyId::drop,
    FamilyId::ring,           FamilyId::collapse_contact,       FamilyId::collapse_contact_cubic,
    FamilyId::collapse_scaling};

/// CLI spelling, e.g. "pulsating-cylinder".
std::string_view to_string(FamilyId id);
std::optional<FamilyId> parse_family(std::string_view name);

/// Swirl profile V(r) of the stationary class: c r^p or c r exp(-r^2).
struct RadialProfile {
  enum class Kind { power, gaussian };
  Kind kind = Kind::gaussian;
  double c = 0.5;
  double p = 1.0;

  template <class S>
  S operator()(const S& r) const {
    using std::exp;
    using std::pow;
    if (kind == Kind::gaussian) return c * r * exp(-r * r);
    return c * pow(r, p);
  }
};

/// psi(lambda) of the contact-characteristic class: c sin(lambda) or the constant c.
struct ContactProfile {
  enum class Kind { sine, constant };
  Kind kind = Kind::sine;
  double c = 1.0;

  template <class S>
  S operator()(const S& lambda) const {
    using std::sin;
    if (kind == Kind::sine) return c * sin(lambda);
    return constant<S>(c);
  }
};

/// Parameters for every family; each family reads only its own fields.
struct FamilyParams {
  double h0 = 1.0;
  double u0 = 1.0;
  double v0 = 0.5;
  double alpha = 2.0;  // cylinder, drop; transport parameter for the stationary class
  RadialProfile profile;
  RingConstants ring{1.0, 1.0, 1.0};
  Branch branch = Branch::lower;
  ContactProfile psi;
  double lambda0 = 1.0;
  double eta0 = 1.0;
  double lambda_lo = 0.5;  // contact class lambda window
  double lambda_hi = 2.0;
  RingConstants cubic{1.0, 0.5, 0.1};
  double phi0 = 0.0;
  double piston_inner = 0.5;  // collapse-scaling piston radii at t = 0
  double piston_outer = 1.5;
};

FamilyParams default_family_params(FamilyId id);
/// f = 0.1 for the ring, f = g = 1 otherwise.
FlowParameters default_flow_parameters(FamilyId id);

/// Throws invalid_params / no_ring_exists when the family's invariants fail.
FlowField make_family(FamilyId id, const FamilyParams& fp, const FlowParameters& params);

/// Default residual sample over the family's validity window.
GridSpec default_grid(FamilyId id, const FamilyParams& fp, const FlowParameters& params,
                      int n = 10);

/// The drop's l = -f^2 sqrt(alpha / (12 g)).
double drop_l(double alpha, const FlowParameters& params);
/// Boundary radius R*(t) where the drop depth vanishes.
double drop_radius(double t, double alpha, const FlowParameters& params);
/// lambda interval on which the contact cubic has two positive roots.
double cubic_lambda_max(const RingConstants& c, const FlowParameters& params);

/// Closed-form particle paths.
struct TrajectoryFormula {
  FamilyId family = FamilyId::rest;
  double r0 = 0;
  double theta0 = 0;
  /// Accumulated-angle polar position (t, r, theta) at time t.
  std::function<PolarPoint(double)> position;
  bool has_circle = false;
  double circle_a = 0;
  double circle_b = 0;
  double circle_r = 0;
  /// Angular rate constant C of the transported stationary class.
  double c = 0;
};

/// Supported: rest, constant-sw-image (r0, theta0 locate the particle at t = pi/f),
/// pulsating-cylinder, drop, stationary-rot-sym transported by fp.alpha.
TrajectoryFormula trajectory_formula(FamilyId id, const FamilyParams& fp,
                                     const FlowParameters& params, double r0, double theta0);

struct Closure {
  bool closed = false;
  long m = 0;
  long M = 0;
};

/// Drop trajectories close after M periods when |C| M / f = m is an integer.
Closure closure_condition(const FamilyParams& fp, const FlowParameters& params, double r0,
                          long max_periods = 1000, double tol = 1e-9);

/// A copy of `field` with its depth multiplied by `factor` (fault-injection fixture).
FlowField scaled_depth(const FlowField& field, double factor);

}  // namespace rsw
