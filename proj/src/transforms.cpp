#include "rsw/transforms.hpp"

#include <sstream>

namespace rsw {
namespace {

constexpr double kGuard = 1e-9;

void require_regular_time(double t, const FlowParameters& params) {
  if (std::abs(std::sin(0.5 * params.f * t)) < kGuard) {
    std::ostringstream os;
    os.precision(17);
    os << "equivalence map undefined at t = " << t << " (sin(ft/2) = 0)";
    throw Error(ErrorKind::singular_time, os.str());
  }
}

// Rotating -> plain frame, written in terms of c = cot(ft/2).
template <class S>
Triple<S> to_sw_point(const S& c, const S& x, const S& y, double f) {
  return Triple<S>(-c / f, -0.5 * (x * c - y), -0.5 * (x + y * c));
}

template <class S>
Triple<S> to_sw_state(const S& c, const S& x, const S& y, const Triple<S>& st, double f) {
  const S q = 1.0 + c * c;
  const S sn = 2.0 * c / q;   // sin(ft)
  const S d = 2.0 / q;        // 1 - cos(ft)
  return Triple<S>(-0.5 * (st(0) * sn - st(1) * d - f * x), -0.5 * (st(0) * d + st(1) * sn - f * y),
                   0.5 * st(2) * d);
}

template <class S>
Triple<S> from_sw_position(const S& c, const S& xp, const S& yp) {
  const S q = 1.0 + c * c;
  return Triple<S>(constant<S>(0.0), -2.0 * (c * xp + yp) / q, 2.0 * (xp - c * yp) / q);
}

template <class S>
Triple<S> from_sw_state(const S& c, const S& x, const S& y, const Triple<S>& st, double f) {
  const S w1 = st(0) - 0.5 * f * x;
  const S w2 = st(1) - 0.5 * f * y;
  return Triple<S>(-(c * w1 + w2), w1 - c * w2, st(2) * (1.0 + c * c));
}

}  // namespace

JetPoint equivalence_map6(const JetPoint& p, const FlowParameters& params) {
  require_regular_time(p(0), params);
  const double half = 0.5 * params.f * p(0);
  const double c = std::cos(half) / std::sin(half);
  const Triple<double> pt = to_sw_point<double>(c, p(1), p(2), params.f);
  const Triple<double> st =
      to_sw_state<double>(c, p(1), p(2), Triple<double>(p(3), p(4), p(5)), params.f);
  JetPoint out;
  out << pt, st;
  return out;
}

JetPoint equivalence_inverse6(const JetPoint& p, const FlowParameters& params) {
  const double f = params.f;
  const double t = 2.0 / f * std::atan2(1.0, -f * p(0));
  const double c = -f * p(0);
  const Triple<double> pos = from_sw_position<double>(c, p(1), p(2));
  const Triple<double> st =
      from_sw_state<double>(c, pos(1), pos(2), Triple<double>(p(3), p(4), p(5)), f);
  JetPoint out;
  out << t, pos(1), pos(2), st;
  return out;
}

std::pair<CartesianPoint, CartesianState> equiv_point(const EquivalenceMap& m,
                                                      const CartesianPoint& p,
                                                      const CartesianState& s) {
  JetPoint in;
  in << p.t, p.x, p.y, s.u, s.v, s.h;
  const JetPoint out = m.direction == MapDirection::rsw_to_sw ? equivalence_map6(in, m.params)
                                                              : equivalence_inverse6(in, m.params);
  return {{out(0), out(1), out(2)}, {out(3), out(4), out(5)}};
}

namespace {

double sw_time(double t, double f) {
  if (t <= 0.0) return -std::numeric_limits<double>::infinity();
  if (t >= 2 * kPi / f) return std::numeric_limits<double>::infinity();
  return -std::cos(0.5 * f * t) / std::sin(0.5 * f * t) / f;
}

double rsw_time(double tp, double f) {
  if (tp == -std::numeric_limits<double>::infinity()) return 0.0;
  if (tp == std::numeric_limits<double>::infinity()) return 2 * kPi / f;
  return 2.0 / f * std::atan2(1.0, -f * tp);
}

}  // namespace

FlowField map_field_rsw_to_sw(const FlowField& field, const FlowParameters& params) {
  const FlowField src = field.as_cartesian();
  if (src.system() != System::rsw) {
    throw Error(ErrorKind::invalid_params, "map_field_rsw_to_sw expects a rotating-frame field");
  }
  const double f = params.f;
  const TimeWindow& w = src.domain().time;
  const double lo = std::max(w.lo, 0.0);
  const double hi = std::min(w.hi, 2 * kPi / f);
  Domain dom;
  dom.time.lo = sw_time(lo, f);
  dom.time.hi = sw_time(hi, f);
  dom.time.lo_closed = w.lo_closed && lo == w.lo && lo > 0.0;
  dom.time.hi_closed = w.hi_closed && hi == w.hi && hi < 2 * kPi / f;
  // The window edges map to t' edges; a relative band keeps evaluation off them.
  dom.time.guard = 0.0;
  const Domain src_dom = src.domain();
  dom.radial = [src_dom, f](double tp) {
    const double c = -f * tp;
    const double scale = 0.5 * std::sqrt(1.0 + c * c);
    const auto [rlo, rhi] = src_dom.radial_range(rsw_time(tp, f));
    return std::make_pair(rlo * scale, rhi * scale);
  };

  auto eval = [src, f](const Vec3& p) -> Vec3 {
    const double c = -f * p(0);
    const Triple<double> pos = from_sw_position<double>(c, p(1), p(2));
    const double t = rsw_time(p(0), f);
    const Vec3 st = src.eval(Vec3(t, pos(1), pos(2)));
    return to_sw_state<double>(c, pos(1), pos(2), st, f);
  };
  auto jet = [src, f](const JetVec3& p) -> JetVec3 {
    const Jet c = -f * p(0);
    const Triple<Jet> pos = from_sw_position<Jet>(c, p(1), p(2));
    JetVec3 q;
    q << 2.0 / f * atan2(constant<Jet>(1.0), c), pos(1), pos(2);
    const JetVec3 st = src.eval_jet(q);
    return to_sw_state<Jet>(c, pos(1), pos(2), st, f);
  };
  FlowField out(Frame::cartesian, System::sw, dom, eval, jet, field.name() + "@sw");
  return out.with_mode(field.mode(), field.fd_step());
}

FlowField map_field_sw_to_rsw(const FlowField& field, const FlowParameters& params) {
  const FlowField src = field.as_cartesian();
  if (src.system() != System::sw) {
    throw Error(ErrorKind::invalid_params, "map_field_sw_to_rsw expects a shallow-water field");
  }
  const double f = params.f;
  const TimeWindow& w = src.domain().time;
  Domain dom;
  dom.time.lo = rsw_time(w.lo, f);
  dom.time.hi = rsw_time(w.hi, f);
  dom.time.lo_closed = w.lo_closed && std::isfinite(w.lo);
  dom.time.hi_closed = w.hi_closed && std::isfinite(w.hi);
  dom.time.guard = kGuard * 2 * kPi / f;
  const Domain src_dom = src.domain();
  dom.radial = [src_dom, f](double t) {
    const double tp = sw_time(t, f);
    const double c = -f * tp;
    const double scale = 2.0 / std::sqrt(1.0 + c * c);
    const auto [rlo, rhi] = src_dom.radial_range(tp);
    return std::make_pair(rlo * scale, rhi * scale);
  };

  auto eval = [src, f](const Vec3& p) -> Vec3 {
    const double half = 0.5 * f * p(0);
    const double c = std::cos(half) / std::sin(half);
    const Triple<double> q = to_sw_point<double>(c, p(1), p(2), f);
    const Vec3 st = src.eval(q);
    return from_sw_state<double>(c, p(1), p(2), st, f);
  };
  auto jet = [src, f](const JetVec3& p) -> JetVec3 {
    const Jet half = 0.5 * f * p(0);
    const Jet c = cos(half) / sin(half);
    const JetVec3 q = to_sw_point<Jet>(c, p(1), p(2), f);
    const JetVec3 st = src.eval_jet(q);
    return from_sw_state<Jet>(c, p(1), p(2), st, f);
  };
  FlowField out(Frame::cartesian, System::rsw, dom, eval, jet, field.name() + "@rsw");
  return out.with_mode(field.mode(), field.fd_step());
}

GroupAction GroupAction::y9(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorKind::invalid_params, "alpha must be positive, got " + std::to_string(alpha));
  }
  return {ActionGenerator::y9, alpha};
}

int branch_index(double t, const FlowParameters& params) {
  return static_cast<int>(std::floor(params.f * t / (2 * kPi) + 0.5));
}

double branch_offset(double t, const FlowParameters& params) {
  return 2 * kPi * branch_index(t, params) / params.f;
}

double branch_offset_y7(double t, const FlowParameters& params) {
  const int k = static_cast<int>(std::floor(params.f * t / (2 * kPi)));
  return (2 * k + 1) * kPi / params.f;
}

namespace {

// Y9 with the reduced half angle phi = ft/2 - k pi in [-pi/2, pi/2), c = cos(phi) >= 0.
std::pair<PolarPoint, PolarState> apply_y9(double alpha, const PolarPoint& p, const PolarState& s,
                                           const FlowParameters& params) {
  const double f = params.f;
  const double r = p.r;
  if (std::abs(std::cos(0.5 * f * p.t)) < kGuard) {
    const double sa = std::sqrt(alpha);
    return {{p.t, r / sa, p.theta},
            {s.U * sa, (s.V + (alpha - 1) / (2 * alpha) * f * r) * sa, alpha * s.h}};
  }
  const int k = branch_index(p.t, params);
  const double phi = 0.5 * f * p.t - k * kPi;
  const double sn = std::sin(phi);
  const double c = std::cos(phi);
  const double D = c * c + alpha * alpha * sn * sn;
  const double ang = std::atan2(alpha * sn, c);
  const double scale = std::sqrt(D / alpha);
  PolarPoint q{2.0 / f * ang + 2 * kPi * k / f, r / scale, p.theta + phi - ang};
  PolarState st{(s.U - 0.5 * f * r * (alpha * alpha - 1) * sn * c / D) * scale,
                (s.V + 0.5 * f * r * (alpha - 1) * (alpha * sn * sn - c * c) / D) * scale,
                s.h * D / alpha};
  return {q, st};
}

// Shared Y7/Y8 form in terms of the half angle whose tangent is tau (Y8) or sigma (Y7).
std::pair<PolarPoint, PolarState> apply_shift_form(double a, double phi, double offset,
                                                   const PolarPoint& p, const PolarState& s,
                                                   const FlowParameters& params) {
  const double f = params.f;
  const double r = p.r;
  const double sn = std::sin(phi);
  const double c = std::cos(phi);
  if (std::abs(c) < kGuard) {
    return {p, {s.U + 0.5 * f * r * a, s.V, s.h}};
  }
  const double E = (sn + a * c) * (sn + a * c) + c * c;
  const double ang = std::atan2(sn + a * c, c);
  const double root = std::sqrt(E);
  PolarPoint q{2.0 / f * ang + offset, r / root, p.theta + phi - ang};
  PolarState st{(s.U + 0.5 * f * r * (sn * sn + a * sn * c - c * c) * a / E) * root,
                (s.V + 0.5 * f * r * (2 * sn * c + a * c * c) * a / E) * root, s.h * E};
  return {q, st};
}

}  // namespace

std::pair<PolarPoint, PolarState> finite_transform(const GroupAction& action, const PolarPoint& p,
                                                   const PolarState& s,
                                                   const FlowParameters& params) {
  const double f = params.f;
  switch (action.generator) {
    case ActionGenerator::y9: return apply_y9(GroupAction::y9(action.parameter).parameter, p, s, params);
    case ActionGenerator::y8: {
      const int k = branch_index(p.t, params);
      return apply_shift_form(action.parameter, 0.5 * f * p.t - k * kPi, 2 * kPi * k / f, p, s,
                              params);
    }
    case ActionGenerator::y7: {
      const int k = static_cast<int>(std::floor(f * p.t / (2 * kPi)));
      // sigma = -cot(ft/2) = tan(ft/2 - pi/2), reduced into [-pi/2, pi/2).
      return apply_shift_form(action.parameter, 0.5 * f * p.t - k * kPi - 0.5 * kPi,
                              (2 * k + 1) * kPi / f, p, s, params);
    }
  }
  return {p, s};
}

FlowField transport_solution(const FlowField& field, double alpha, const FlowParameters& params) {
  GroupAction::y9(alpha);  // validates alpha
  const FlowField src = field.as_polar();
  const double f = params.f;

  auto body = [src, alpha, f](const auto& p) {
    using S = std::decay_t<decltype(p(0))>;
    using std::atan2;
    using std::cos;
    using std::sin;
    using std::sqrt;
    const int k = static_cast<int>(std::floor(f * value_of(p(0)) / (2 * kPi) + 0.5));
    const S phi = 0.5 * f * p(0) - k * kPi;
    const S sn = sin(phi);
    const S c = cos(phi);
    const S D = c * c + alpha * alpha * sn * sn;
    const S ang = atan2(alpha * sn, c);
    const S rbar = p(1) * sqrt(alpha / D);
    Triple<S> q;
    q << 2.0 / f * ang + 2 * kPi * k / f, rbar, p(2) + phi - ang;
    Triple<S> st;
    if constexpr (std::is_same_v<S, double>) {
      st = src.eval(q);
    } else {
      st = src.eval_jet(q);
    }
    // Half angle of t-bar is `ang`.
    const S sb = sin(ang);
    const S cb = cos(ang);
    const S Db = alpha * alpha * cb * cb + sb * sb;
    const S scale = sqrt(Db / alpha);
    Triple<S> out;
    out << (st(0) + 0.5 * f * rbar * (alpha * alpha - 1) * sb * cb / Db) * scale,
        (st(1) - 0.5 * f * rbar * (alpha - 1) * (sb * sb - alpha * cb * cb) / Db) * scale,
        Db / alpha * st(2);
    return out;
  };

  // The image of the source domain: radial bounds scale by 1/sqrt(alpha/D).
  Domain dom;
  dom.time = src.domain().time;
  const Domain src_dom = src.domain();
  dom.radial = [src_dom, alpha, f](double t) {
    const int k = static_cast<int>(std::floor(f * t / (2 * kPi) + 0.5));
    const double phi = 0.5 * f * t - k * kPi;
    const double sn = std::sin(phi), c = std::cos(phi);
    const double D = c * c + alpha * alpha * sn * sn;
    const double tbar = 2.0 / f * std::atan2(alpha * sn, c) + 2 * kPi * k / f;
    const double scale = std::sqrt(D / alpha);
    const auto [lo, hi] = src_dom.radial_range(tbar);
    return std::make_pair(lo * scale, hi * scale);
  };
  std::ostringstream name;
  name << src.name() << "|transport(alpha=" << alpha << ")";
  FlowField out(
      Frame::polar, src.system(), dom, [body](const Vec3& p) { return Vec3(body(Triple<double>(p))); },
      [body](const JetVec3& p) { return JetVec3(body(p)); }, name.str());
  return out.with_mode(field.mode(), field.fd_step());
}

}  // namespace rsw
