#include "rsw/core.hpp"

#include <sstream>

namespace rsw {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_params: return "InvalidParams";
    case ErrorKind::origin_singular: return "OriginSingular";
    case ErrorKind::zero_depth: return "ZeroDepth";
    case ErrorKind::singular_time: return "SingularTime";
    case ErrorKind::window_violation: return "WindowViolation";
    case ErrorKind::no_ring_exists: return "NoRingExists";
    case ErrorKind::fit_degenerate: return "FitDegenerate";
    case ErrorKind::quadrature_fail: return "QuadratureFail";
    case ErrorKind::left_domain: return "LeftDomain";
    case ErrorKind::blow_up: return "BlowUp";
    case ErrorKind::cfl_violation: return "CFLViolation";
    case ErrorKind::negative_depth: return "NegativeDepth";
    case ErrorKind::unsupported_family: return "UnsupportedFamily";
    case ErrorKind::mismatch: return "MismatchReport";
  }
  return "Unknown";
}

const char* to_string(Frame frame) { return frame == Frame::cartesian ? "cartesian" : "polar"; }
const char* to_string(System system) { return system == System::rsw ? "rsw" : "sw"; }
const char* to_string(DerivativeMode mode) {
  return mode == DerivativeMode::analytic ? "analytic" : "fd";
}

JetVec3 seed(const Vec3& p) {
  JetVec3 out;
  for (int i = 0; i < 3; ++i) out(i) = Jet(p(i), Eigen::Vector3d::Unit(i));
  return out;
}

FlowParameters FlowParameters::make(double f, double g) {
  FlowParameters p{f, g};
  p.validate();
  return p;
}

void FlowParameters::validate() const {
  if (!(f > 0.0) || !std::isfinite(f)) {
    throw Error(ErrorKind::invalid_params, "Coriolis parameter f must be positive, got " + std::to_string(f));
  }
  if (!(g > 0.0) || !std::isfinite(g)) {
    throw Error(ErrorKind::invalid_params, "gravity g must be positive, got " + std::to_string(g));
  }
}

std::pair<CartesianPoint, CartesianState> polar_to_cartesian(const PolarPoint& p,
                                                             const PolarState& s) {
  const double c = std::cos(p.theta);
  const double sn = std::sin(p.theta);
  return {{p.t, p.r * c, p.r * sn}, {s.U * c - s.V * sn, s.U * sn + s.V * c, s.h}};
}

std::pair<PolarPoint, PolarState> cartesian_to_polar(const CartesianPoint& p,
                                                     const CartesianState& s) {
  if (p.x == 0.0 && p.y == 0.0) {
    throw Error(ErrorKind::origin_singular, "velocity decomposition undefined at the origin");
  }
  const double r = std::hypot(p.x, p.y);
  const double theta = std::atan2(p.y, p.x);
  const double c = p.x / r;
  const double sn = p.y / r;
  return {{p.t, r, theta}, {s.u * c + s.v * sn, -s.u * sn + s.v * c, s.h}};
}

bool TimeWindow::contains(double t) const {
  if (!std::isfinite(t)) return false;
  if (lo_closed ? t < lo : t <= lo + guard) return false;
  if (hi_closed ? t > hi : t >= hi - guard) return false;
  return true;
}

std::pair<double, double> Domain::radial_range(double t) const {
  if (radial) return radial(t);
  return {0.0, std::numeric_limits<double>::infinity()};
}

bool Domain::contains(Frame frame, const Vec3& p) const {
  if (!p.allFinite()) return false;
  if (!time.contains(p(0))) return false;
  const double r = frame == Frame::polar ? p(1) : std::hypot(p(1), p(2));
  if (r < 0.0) return false;
  const auto [lo, hi] = radial_range(p(0));
  const double slack = 1e-12 * std::max(1.0, std::abs(r));
  return r >= lo - slack && r <= hi + slack;
}

Vec3 GridSpec::point(std::size_t index, const Domain& domain) const {
  const auto nb = static_cast<std::size_t>(b.n);
  const auto na = static_cast<std::size_t>(a.n);
  const int ib = static_cast<int>(index % nb);
  const int ia = static_cast<int>((index / nb) % na);
  const int it = static_cast<int>(index / (nb * na));
  const double t = this->t.node(it);
  double av = a.node(ia);
  if (radial_fraction) {
    const auto [lo, hi] = domain.radial_range(t);
    av = lo + av * (hi - lo);
  }
  return {t, av, b.node(ib)};
}

FlowField::FlowField(Frame frame, System system, Domain domain, Evaluator eval,
                     JetEvaluator jet_eval, std::string name)
    : frame_(frame),
      system_(system),
      domain_(std::move(domain)),
      eval_(std::move(eval)),
      jet_eval_(std::move(jet_eval)),
      name_(std::move(name)) {}

FlowField FlowField::with_mode(DerivativeMode mode, double fd_step) const {
  FlowField out = *this;
  out.mode_ = mode;
  out.fd_step_ = fd_step;
  return out;
}

FlowField FlowField::with_name(std::string name) const {
  FlowField out = *this;
  out.name_ = std::move(name);
  return out;
}

FlowField FlowField::with_domain(Domain domain) const {
  FlowField out = *this;
  out.domain_ = std::move(domain);
  return out;
}

void FlowField::check(const Vec3& p) const {
  if (!contains(p)) {
    std::ostringstream os;
    os.precision(17);
    os << "field '" << name_ << "' evaluated outside its validity window at (" << p(0) << ", "
       << p(1) << ", " << p(2) << ")";
    throw Error(ErrorKind::window_violation, os.str());
  }
}

Vec3 FlowField::eval(const Vec3& p) const {
  check(p);
  return eval_(p);
}

Mat3 fd_gradient(const FlowField::Evaluator& eval, const Vec3& p, double step) {
  Mat3 grad;
  for (int j = 0; j < 3; ++j) {
    const double dh = step * std::max(1.0, std::abs(p(j)));
    Vec3 plus = p;
    Vec3 minus = p;
    plus(j) += dh;
    minus(j) -= dh;
    grad.col(j) = (eval(plus) - eval(minus)) / (2.0 * dh);
  }
  return grad;
}

FieldSample FlowField::sample(const Vec3& p) const {
  check(p);
  FieldSample out;
  if (mode_ == DerivativeMode::analytic && jet_eval_) {
    const JetVec3 j = jet_eval_(seed(p));
    for (int i = 0; i < 3; ++i) {
      out.value(i) = j(i).value();
      out.grad.row(i) = j(i).derivatives().transpose();
    }
    return out;
  }
  out.value = eval_(p);
  // Stencil points may sit just outside the window; the raw evaluator is used.
  out.grad = fd_gradient(eval_, p, fd_step_);
  return out;
}

JetVec3 FlowField::eval_jet(const JetVec3& p) const {
  const Vec3 pv(p(0).value(), p(1).value(), p(2).value());
  check(pv);
  if (mode_ == DerivativeMode::analytic && jet_eval_) return jet_eval_(p);
  const FieldSample s = sample(pv);
  Eigen::Matrix3d dp;
  for (int j = 0; j < 3; ++j) dp.row(j) = p(j).derivatives().transpose();
  const Eigen::Matrix3d d = s.grad * dp;
  JetVec3 out;
  for (int i = 0; i < 3; ++i) out(i) = Jet(s.value(i), d.row(i).transpose());
  return out;
}

namespace {

template <class S>
Triple<S> polar_to_cartesian_state(const Triple<S>& polar_state, const S& c, const S& s) {
  return Triple<S>(polar_state(0) * c - polar_state(1) * s,
                   polar_state(0) * s + polar_state(1) * c, polar_state(2));
}

}  // namespace

FlowField FlowField::as_cartesian() const {
  if (frame_ == Frame::cartesian) return *this;
  const FlowField src = *this;
  auto eval = [src](const Vec3& p) -> Vec3 {
    const double r = std::hypot(p(1), p(2));
    if (r == 0.0) throw Error(ErrorKind::origin_singular, "polar field evaluated at the origin");
    const double c = p(1) / r;
    const double s = p(2) / r;
    const Vec3 st = src.eval(Vec3(p(0), r, std::atan2(p(2), p(1))));
    return polar_to_cartesian_state<double>(st, c, s);
  };
  auto jet = [src](const JetVec3& p) -> JetVec3 {
    using std::sqrt;
    const Jet r = sqrt(p(1) * p(1) + p(2) * p(2));
    if (r.value() == 0.0) {
      throw Error(ErrorKind::origin_singular, "polar field evaluated at the origin");
    }
    const Jet th = atan2(p(2), p(1));
    const Jet c = p(1) / r;
    const Jet s = p(2) / r;
    JetVec3 q;
    q << p(0), r, th;
    return polar_to_cartesian_state<Jet>(src.eval_jet(q), c, s);
  };
  FlowField out(Frame::cartesian, system_, domain_, eval, jet, name_);
  out.mode_ = mode_;
  out.fd_step_ = fd_step_;
  return out;
}

FlowField FlowField::as_polar() const {
  if (frame_ == Frame::polar) return *this;
  const FlowField src = *this;
  auto eval = [src](const Vec3& p) -> Vec3 {
    const double c = std::cos(p(2));
    const double s = std::sin(p(2));
    const Vec3 st = src.eval(Vec3(p(0), p(1) * c, p(1) * s));
    return Vec3(st(0) * c + st(1) * s, -st(0) * s + st(1) * c, st(2));
  };
  auto jet = [src](const JetVec3& p) -> JetVec3 {
    using std::cos;
    using std::sin;
    const Jet c = cos(p(2));
    const Jet s = sin(p(2));
    JetVec3 q;
    q << p(0), p(1) * c, p(1) * s;
    const JetVec3 st = src.eval_jet(q);
    JetVec3 out;
    out << st(0) * c + st(1) * s, -st(0) * s + st(1) * c, st(2);
    return out;
  };
  FlowField out(Frame::polar, system_, domain_, eval, jet, name_);
  out.mode_ = mode_;
  out.fd_step_ = fd_step_;
  return out;
}

namespace {

double relative_vorticity(const FlowField& field, const FieldSample& s, const Vec3& p) {
  if (field.frame() == Frame::cartesian) return s.grad(1, 1) - s.grad(0, 2);
  const double r = p(1);
  if (r <= 0.0) throw Error(ErrorKind::origin_singular, "polar vorticity undefined at r = 0");
  return s.grad(1, 1) + s.value(1) / r - s.grad(0, 2) / r;
}

void require_depth(const FieldSample& s) {
  if (s.value(2) < kDepthFloor) {
    throw Error(ErrorKind::zero_depth,
                "depth " + std::to_string(s.value(2)) + " below floor; diagnostics undefined");
  }
}

}  // namespace

double potential_vorticity(const FlowField& field, const Vec3& p, const FlowParameters& params) {
  const FieldSample s = field.sample(p);
  require_depth(s);
  return (relative_vorticity(field, s, p) + coriolis(field, params)) / s.value(2);
}

Diagnostics diagnostics(const FlowField& field, const Vec3& p, const FlowParameters& params) {
  const FieldSample s = field.sample(p);
  require_depth(s);
  Diagnostics d;
  d.omega = (relative_vorticity(field, s, p) + coriolis(field, params)) / s.value(2);
  d.speed = std::sqrt(s.value(0) * s.value(0) + s.value(1) * s.value(1));
  d.froude = d.speed / std::sqrt(params.g * s.value(2));
  return d;
}

}  // namespace rsw
