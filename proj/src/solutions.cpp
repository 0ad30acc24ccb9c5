#include "rsw/solutions.hpp"

#include "rsw/quadrature.hpp"
#include "rsw/transforms.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <memory>
#include <sstream>

namespace rsw {
namespace {

constexpr std::array<std::string_view, 10> kNames = {
    "rest", "constant-sw-image", "barochronous-sw", "stationary-rot-sym", "pulsating-cylinder",
    "drop", "ring", "collapse-contact", "collapse-contact-cubic", "collapse-scaling"};

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::invalid_params, what);
}

std::string number(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

TimeWindow open_period(const FlowParameters& params) {
  TimeWindow w;
  w.lo = 0.0;
  w.hi = 2 * kPi / params.f;
  w.guard = 1e-9 * w.hi;
  return w;
}

// Half-angle pieces of tau = tan(ft/2): D = cos^2 + alpha^2 sin^2 = cos^2 (1 + alpha^2 tau^2).
template <class S>
struct HalfAngle {
  S s, c, d;
  HalfAngle(const S& t, double f, double alpha) {
    using std::cos;
    using std::sin;
    s = sin(0.5 * f * t);
    c = cos(0.5 * f * t);
    d = c * c + alpha * alpha * s * s;
  }
};

struct RestFunctor {
  double h0;
  template <class S>
  Triple<S> operator()(const Triple<S>&) const {
    return Triple<S>(constant<S>(0.0), constant<S>(0.0), constant<S>(h0));
  }
};

struct ConstantImageFunctor {
  double u0, v0, h0, f;
  template <class S>
  Triple<S> operator()(const Triple<S>& p) const {
    using std::cos;
    using std::sin;
    const S half = 0.5 * f * p(0);
    const S ct = cos(half) / sin(half);
    const S& x = p(1);
    const S& y = p(2);
    return Triple<S>(-u0 * ct - v0 + 0.5 * f * (x * ct + y), u0 - v0 * ct - 0.5 * f * (x - y * ct),
                     h0 * (1.0 + ct * ct));
  }
};

struct BarochronousFunctor {
  double h0, f;
  template <class S>
  Triple<S> operator()(const Triple<S>& p) const {
    const S& t = p(0);
    const S& r = p(1);
    const S q = 1.0 + f * f * t * t;
    return Triple<S>(f * f * t * r / q, f * r / q, h0 / q);
  }
};

struct StationaryFunctor {
  RadialProfile profile;
  double h0, f, g;

  double depth(double r) const {
    if (r <= 0.0) return h0;
    auto integrand = [this](double rho) {
      const double v = profile(rho);
      return v * v / rho + f * v;
    };
    return h0 + quad::gauss_kronrod(integrand, 0.0, r, {1e-10, 1e-15, 4000}).value / g;
  }

  template <class S>
  Triple<S> operator()(const Triple<S>& p) const {
    const S& r = p(1);
    const S v = profile(r);
    const double rv = value_of(r);
    const double vv = value_of(v);
    const double slope = rv > 0 ? (vv * vv / rv + f * vv) / g : 0.0;
    return Triple<S>(constant<S>(0.0), v, chain<S>(depth(rv), slope, r));
  }
};

// Stationary member with V = l r^2 and its closed-form depth.
struct DropPreimageFunctor {
  double l, f, g;
  template <class S>
  Triple<S> operator()(const Triple<S>& p) const {
    const S& r = p(1);
    const S r2 = r * r;
    const S h = l * l / (4 * g) *
                (r2 * r2 + 4 * f / (3 * l) * r2 * r + f * f * f * f / (3 * l * l * l * l));
    return Triple<S>(constant<S>(0.0), l * r2, h);
  }
};

struct CylinderFunctor {
  double alpha, h0, f;
  template <class S>
  Triple<S> operator()(const Triple<S>& p) const {
    const HalfAngle<S> ha(p(0), f, alpha);
    const S& r = p(1);
    return Triple<S>(0.5 * f * r * (alpha * alpha - 1) * ha.s * ha.c / ha.d,
                     -0.5 * f * r * (alpha - 1) * (alpha * ha.s * ha.s - ha.c * ha.c) / ha.d,
                     alpha * h0 / ha.d);
  }
};

struct RingFunctor {
  RingConstants k;
  Branch branch;
  FlowParameters params;
  template <class S>
  Triple<S> operator()(const Triple<S>& p) const {
    const S& r = p(1);
    const double rv = value_of(r);
    const double h = ring_depth(k, params, rv, branch);
    const CubicCoeffs c = ring_coeffs(k, params, rv);
    const CubicCoeffs dc = ring_coeffs_dr(k, params, rv);
    const double fr = dc.phi1 * h * h + dc.phi2;
    const double fh = (3 * h + 2 * c.phi1) * h;
    const S hs = chain<S>(h, -fr / fh, r);
    return Triple<S>(k.c3 / (r * hs), k.c2 / r - 0.5 * params.f * r, hs);
  }
};

struct ContactFunctor {
  ContactProfile psi;
  double lambda0, eta0, f, g;

  double integral(double lambda) const {
    auto integrand = [this](double nu) {
      const double v = psi(nu);
      return v * v;
    };
    return quad::gauss_kronrod(integrand, lambda0, lambda, {1e-12, 1e-15, 4000}).value;
  }
  double eta(double lambda) const { return (lambda0 * eta0 - integral(lambda) / (2 * g)) / lambda; }

  template <class S>
  Triple<S> operator()(const Triple<S>& p) const {
    using std::cos;
    using std::sin;
    const S& r = p(1);
    const S half = 0.5 * f * p(0);
    const S lambda = (1.0 - cos(f * p(0))) / (r * r);
    const S ps = psi(lambda);
    const double lv = value_of(lambda);
    const double pv = value_of(ps);
    const S integ = chain<S>(integral(lv), pv * pv, lambda);
    const S eta = (lambda0 * eta0 - integ / (2 * g)) / lambda;
    return Triple<S>(0.5 * f * r * cos(half) / sin(half), ps / r - 0.5 * f * r, eta / (r * r));
  }
};

struct ContactCubicFunctor {
  RingConstants k;
  Branch branch;
  double f, g;

  double root(double lambda) const {
    const std::vector<double> roots = cubic_roots(0.0, k.c2 * k.c2 - k.c1 / lambda, 2 * g * k.c3 / lambda);
    std::vector<double> positive;
    for (double x : roots) {
      if (x > 0) positive.push_back(x);
    }
    if (positive.size() < 2) {
      throw Error(ErrorKind::window_violation,
                  "lambda = " + number(lambda) + " has fewer than two positive roots");
    }
    return branch == Branch::lower ? positive.front() : positive.back();
  }

  template <class S>
  Triple<S> operator()(const Triple<S>& p) const {
    using std::cos;
    using std::sin;
    const S& r = p(1);
    const S half = 0.5 * f * p(0);
    const S lambda = (1.0 - cos(f * p(0))) / (r * r);
    const double lv = value_of(lambda);
    const double phi = root(lv);
    const double d_lambda = (k.c1 * phi - 2 * g * k.c3) / (lv * lv);
    const double d_phi = 3 * phi * phi + k.c2 * k.c2 - k.c1 / lv;
    const S ph = chain<S>(phi, -d_lambda / d_phi, lambda);
    const S eta = k.c3 / (lambda * ph);
    return Triple<S>(ph / r + 0.5 * f * r * cos(half) / sin(half), k.c2 / r - 0.5 * f * r,
                     eta / (r * r));
  }
};

struct ScalingFunctor {
  std::shared_ptr<const ImplicitCollapse> ic;
  double f;
  template <class S>
  Triple<S> operator()(const Triple<S>& p) const {
    const S& r = p(1);
    const ImplicitCollapse::State st = ic->at(value_of(p(0)));
    const S phi = chain<S>(st.phi, st.phi_dot, p(0));
    const S eta = chain<S>(st.eta, st.eta_dot, p(0));
    return Triple<S>(r * phi, -0.5 * f * r, r * r * eta);
  }
};

// r = sqrt((1 - cos ft) / lambda) for lambda in [lo, hi].
Domain lambda_domain(double lo, double hi, const FlowParameters& params) {
  Domain dom;
  dom.time = open_period(params);
  const double f = params.f;
  dom.radial = [lo, hi, f](double t) {
    const double d = 1.0 - std::cos(f * t);
    return std::make_pair(std::sqrt(d / hi), std::sqrt(d / lo));
  };
  return dom;
}

FlowField stationary_field(const FamilyParams& fp, const FlowParameters& params) {
  require(fp.h0 > 0, "h0 must be positive, got " + number(fp.h0));
  if (fp.profile.kind == RadialProfile::Kind::power) {
    require(fp.profile.p > 0, "profile exponent must be positive, got " + number(fp.profile.p));
  }
  return FlowField::from_functor(Frame::polar, System::rsw, Domain{},
                                 StationaryFunctor{fp.profile, fp.h0, params.f, params.g},
                                 "stationary-rot-sym");
}

}  // namespace

std::string_view to_string(FamilyId id) { return kNames[static_cast<std::size_t>(id)]; }

std::optional<FamilyId> parse_family(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<FamilyId>(i);
  }
  return std::nullopt;
}

FamilyParams default_family_params(FamilyId id) {
  FamilyParams fp;
  if (id == FamilyId::stationary_rot_sym) fp.alpha = 1.0;
  return fp;
}

FlowParameters default_flow_parameters(FamilyId id) {
  if (id == FamilyId::ring) return {0.1, 1.0};
  return {1.0, 1.0};
}

double drop_l(double alpha, const FlowParameters& params) {
  return -params.f * params.f * std::sqrt(alpha / (12.0 * params.g));
}

double drop_radius(double t, double alpha, const FlowParameters& params) {
  const HalfAngle<double> ha(t, params.f, alpha);
  return -params.f / drop_l(alpha, params) * std::sqrt(ha.d / alpha);
}

double cubic_lambda_max(const RingConstants& k, const FlowParameters& params) {
  const double g = params.g;
  // Three real roots (one negative, two positive) while the discriminant is positive.
  auto disc = [&](double lambda) {
    const double p = k.c2 * k.c2 - k.c1 / lambda;
    const double q = 2 * g * k.c3 / lambda;
    return -4 * p * p * p - 27 * q * q;
  };
  double hi = k.c2 != 0.0 ? k.c1 / (k.c2 * k.c2) : 2 * k.c1 * k.c1 * k.c1 / (27 * g * g * k.c3 * k.c3);
  double lo = 0.5 * hi;
  int guard = 0;
  while (disc(lo) <= 0) {
    lo *= 0.5;
    if (++guard > 200) throw Error(ErrorKind::invalid_params, "contact cubic never has two positive roots");
  }
  std::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      disc, lo, hi, boost::math::tools::eps_tolerance<double>(50), iters);
  return 0.5 * (a + b);
}

FlowField make_family(FamilyId id, const FamilyParams& fp, const FlowParameters& params) {
  params.validate();
  const double f = params.f;
  const double g = params.g;
  switch (id) {
    case FamilyId::rest:
      require(fp.h0 > 0, "h0 must be positive, got " + number(fp.h0));
      return FlowField::from_functor(Frame::cartesian, System::rsw, Domain{}, RestFunctor{fp.h0},
                                     "rest");
    case FamilyId::constant_sw_image: {
      require(fp.h0 > 0, "h0 must be positive, got " + number(fp.h0));
      Domain dom;
      dom.time = open_period(params);
      return FlowField::from_functor(Frame::cartesian, System::rsw, dom,
                                     ConstantImageFunctor{fp.u0, fp.v0, fp.h0, f},
                                     "constant-sw-image");
    }
    case FamilyId::barochronous_sw:
      require(fp.h0 > 0, "h0 must be positive, got " + number(fp.h0));
      return FlowField::from_functor(Frame::polar, System::sw, Domain{},
                                     BarochronousFunctor{fp.h0, f}, "barochronous-sw");
    case FamilyId::stationary_rot_sym: {
      require(fp.alpha > 0, "alpha must be positive, got " + number(fp.alpha));
      const FlowField base = stationary_field(fp, params);
      if (fp.alpha == 1.0) return base;
      return transport_solution(base, fp.alpha, params).with_name("stationary-rot-sym");
    }
    case FamilyId::pulsating_cylinder:
      require(fp.alpha > 0, "alpha must be positive, got " + number(fp.alpha));
      require(fp.h0 > 0, "h0 must be positive, got " + number(fp.h0));
      return FlowField::from_functor(Frame::polar, System::rsw, Domain{},
                                     CylinderFunctor{fp.alpha, fp.h0, f}, "pulsating-cylinder");
    case FamilyId::drop: {
      require(fp.alpha > 0, "alpha must be positive, got " + number(fp.alpha));
      const double l = drop_l(fp.alpha, params);
      Domain dom;
      const double edge = -f / l;
      dom.radial = [edge](double) { return std::make_pair(0.0, edge); };
      const FlowField pre = FlowField::from_functor(Frame::polar, System::rsw, dom,
                                                    DropPreimageFunctor{l, f, g}, "drop-preimage");
      return transport_solution(pre, fp.alpha, params).with_name("drop");
    }
    case FamilyId::ring: {
      const RingBounds rb = ring_bounds(fp.ring, params);
      Domain dom;
      dom.radial = [rb](double) { return std::make_pair(rb.r_inner, rb.r_outer); };
      return FlowField::from_functor(Frame::polar, System::rsw, dom,
                                     RingFunctor{fp.ring, fp.branch, params}, "ring");
    }
    case FamilyId::collapse_contact: {
      require(fp.lambda0 > 0 && fp.eta0 > 0, "lambda0 and eta0 must be positive");
      require(fp.lambda_lo > 0 && fp.lambda_hi > fp.lambda_lo, "need 0 < lambda_lo < lambda_hi");
      const ContactFunctor fn{fp.psi, fp.lambda0, fp.eta0, f, g};
      for (int i = 0; i <= 64; ++i) {
        const double lambda = fp.lambda_lo + (fp.lambda_hi - fp.lambda_lo) * i / 64.0;
        require(fn.eta(lambda) > 0, "depth invariant eta turns non-positive at lambda = " + number(lambda));
      }
      return FlowField::from_functor(Frame::polar, System::rsw,
                                     lambda_domain(fp.lambda_lo, fp.lambda_hi, params), fn,
                                     "collapse-contact");
    }
    case FamilyId::collapse_contact_cubic: {
      require(fp.cubic.c1 > 0 && fp.cubic.c3 > 0, "contact cubic needs C1 > 0 and C3 > 0");
      const double lmax = cubic_lambda_max(fp.cubic, params);
      return FlowField::from_functor(Frame::polar, System::rsw,
                                     lambda_domain(0.5 * lmax, 0.95 * lmax, params),
                                     ContactCubicFunctor{fp.cubic, fp.branch, f, g},
                                     "collapse-contact-cubic");
    }
    case FamilyId::collapse_scaling: {
      require(fp.piston_inner >= 0 && fp.piston_outer > fp.piston_inner,
              "need 0 <= piston_inner < piston_outer");
      auto ic = std::make_shared<const ImplicitCollapse>(fp.phi0, fp.eta0, params);
      Domain dom;
      dom.time.lo = 0.0;
      dom.time.lo_closed = true;
      dom.time.hi = ic->blow_up_time();
      dom.time.guard = 1e-9 * ic->blow_up_time();
      const double r1 = fp.piston_inner, r2 = fp.piston_outer, eta0 = fp.eta0;
      dom.radial = [ic, r1, r2, eta0](double t) {
        const double s = std::pow(eta0 / ic->at(t).eta, 0.25);
        return std::make_pair(r1 * s, r2 * s);
      };
      return FlowField::from_functor(Frame::polar, System::rsw, dom, ScalingFunctor{ic, f},
                                     "collapse-scaling");
    }
  }
  throw Error(ErrorKind::unsupported_family, "unknown family");
}

GridSpec default_grid(FamilyId id, const FamilyParams& fp, const FlowParameters& params, int n) {
  const double period = 2 * kPi / params.f;
  const Axis full_angle{-kPi, kPi, n};
  const Axis plane{-2.0, 2.0, n};
  switch (id) {
    case FamilyId::rest: return {{0.0, 5.0, n}, plane, plane, false};
    case FamilyId::constant_sw_image: return {{0.5, 5.0, n}, plane, plane, false};
    case FamilyId::barochronous_sw: return {{-3.0, 3.0, n}, {0.1, 2.0, n}, full_angle, false};
    case FamilyId::stationary_rot_sym: return {{0.0, 5.0, n}, {0.1, 2.0, n}, full_angle, false};
    case FamilyId::pulsating_cylinder: return {{0.0, period, n}, {0.1, 2.0, n}, full_angle, false};
    case FamilyId::drop: return {{0.0, period, n}, {0.02, 0.95, n}, full_angle, true};
    case FamilyId::ring: {
      const RingBounds rb = ring_bounds(fp.ring, params);
      return {{0.0, 5.0, n}, {1.05 * rb.r_inner, 0.95 * rb.r_outer, n}, full_angle, false};
    }
    case FamilyId::collapse_contact:
    case FamilyId::collapse_contact_cubic:
      return {{0.08 * period, 0.92 * period, n}, {0.0, 1.0, n}, full_angle, true};
    case FamilyId::collapse_scaling: {
      const ImplicitCollapse ic(fp.phi0, fp.eta0, params);
      return {{0.0, 0.9 * ic.blow_up_time(), n}, {0.0, 1.0, n}, full_angle, true};
    }
  }
  throw Error(ErrorKind::unsupported_family, "unknown family");
}

TrajectoryFormula trajectory_formula(FamilyId id, const FamilyParams& fp,
                                     const FlowParameters& params, double r0, double theta0) {
  params.validate();
  require(r0 >= 0, "r0 must be non-negative, got " + number(r0));
  const double f = params.f;
  TrajectoryFormula out;
  out.family = id;
  out.r0 = r0;
  out.theta0 = theta0;
  switch (id) {
    case FamilyId::rest:
      out.position = [r0, theta0](double t) { return PolarPoint{t, r0, theta0}; };
      return out;
    case FamilyId::constant_sw_image: {
      // Straight lines in the plain frame, parameterised by the position at t = pi/f.
      const double x0 = r0 * std::cos(theta0);
      const double y0 = r0 * std::sin(theta0);
      const double u0 = fp.u0, v0 = fp.v0;
      out.position = [=](double t) {
        const double c = std::cos(0.5 * f * t) / std::sin(0.5 * f * t);
        const double tp = -c / f;
        const double xp = 0.5 * y0 + u0 * tp;
        const double yp = -0.5 * x0 + v0 * tp;
        const double q = 1.0 + c * c;
        const double x = -2.0 * (c * xp + yp) / q;
        const double y = 2.0 * (xp - c * yp) / q;
        return PolarPoint{t, std::hypot(x, y), std::atan2(y, x)};
      };
      out.has_circle = true;
      out.circle_a = x0 / 2 + u0 / f;
      out.circle_b = y0 / 2 + v0 / f;
      out.circle_r = std::hypot(-x0 / 2 + u0 / f, y0 / 2 - v0 / f);
      return out;
    }
    case FamilyId::pulsating_cylinder:
    case FamilyId::drop:
    case FamilyId::stationary_rot_sym: {
      const double alpha = fp.alpha;
      require(alpha > 0, "alpha must be positive, got " + number(alpha));
      // Angular rate of the stationary preimage at the fixed radius r0 sqrt(alpha).
      double c = 0.0;
      const double rb = r0 * std::sqrt(alpha);
      if (rb > 0) {
        if (id == FamilyId::drop) {
          c = drop_l(alpha, params) * rb;
        } else if (id == FamilyId::stationary_rot_sym) {
          c = fp.profile(rb) / rb;
        }
      }
      out.c = c;
      out.position = [=](double t) {
        const int k = static_cast<int>(std::floor(f * t / (2 * kPi) + 0.5));
        const double phi = 0.5 * f * t - k * kPi;
        const double s = std::sin(phi), co = std::cos(phi);
        const double tbar = 2.0 / f * (std::atan2(alpha * s, co) + k * kPi);
        const double r = r0 * std::sqrt(co * co + alpha * alpha * s * s);
        return PolarPoint{t, r, theta0 + c * tbar + 0.5 * f * (tbar - t)};
      };
      if (id == FamilyId::pulsating_cylinder) {
        out.has_circle = true;
        out.circle_a = 0.5 * (alpha + 1) * r0 * std::cos(theta0);
        out.circle_b = 0.5 * (alpha + 1) * r0 * std::sin(theta0);
        out.circle_r = 0.5 * (alpha - 1) * r0;
      }
      return out;
    }
    default: break;
  }
  throw Error(ErrorKind::unsupported_family,
              "no closed-form trajectories for family " + std::string(to_string(id)));
}

Closure closure_condition(const FamilyParams& fp, const FlowParameters& params, double r0,
                          long max_periods, double tol) {
  const double c = drop_l(fp.alpha, params) * r0 * std::sqrt(fp.alpha);
  const double q = std::abs(c) / params.f;
  for (long M = 1; M <= max_periods; ++M) {
    const double m = std::round(q * M);
    if (std::abs(q - m / M) < tol) return {true, static_cast<long>(m), M};
  }
  return {};
}

FlowField scaled_depth(const FlowField& field, double factor) {
  const FlowField src = field;
  auto eval = [src, factor](const Vec3& p) {
    Vec3 v = src.eval(p);
    v(2) *= factor;
    return v;
  };
  auto jet = [src, factor](const JetVec3& p) {
    JetVec3 v = src.eval_jet(p);
    v(2) *= factor;
    return v;
  };
  return FlowField(field.frame(), field.system(), field.domain(), eval, jet,
                   field.name() + "|depth*" + number(factor))
      .with_mode(field.mode(), field.fd_step());
}

}  // namespace rsw
