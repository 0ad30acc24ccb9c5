#include "rsw/reduction.hpp"

#include "rsw/quadrature.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cstdint>
#include <sstream>

namespace rsw {
namespace {

double cubic_value(double a2, double a1, double a0, double x) {
  return ((x + a2) * x + a1) * x + a0;
}

double polish(double a2, double a1, double a0, double x) {
  for (int i = 0; i < 2; ++i) {
    const double fx = cubic_value(a2, a1, a0, x);
    const double dfx = (3 * x + 2 * a2) * x + a1;
    if (dfx == 0.0) break;
    const double next = x - fx / dfx;
    if (std::abs(cubic_value(a2, a1, a0, next)) >= std::abs(fx)) break;
    x = next;
  }
  return x;
}

template <class F>
double solve_bracketed(F&& fn, double lo, double hi, double flo, double fhi) {
  std::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      fn, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (a + b);
}

}  // namespace

std::vector<double> cubic_roots(double a2, double a1, double a0) {
  const double p = a1 - a2 * a2 / 3.0;
  const double q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
  const double shift = -a2 / 3.0;
  const double disc = 18 * a2 * a1 * a0 - 4 * a2 * a2 * a2 * a0 + a2 * a2 * a1 * a1 -
                      4 * a1 * a1 * a1 - 27 * a0 * a0;
  std::vector<double> roots;
  if (disc > 0.0 && p < 0.0) {
    const double m = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
    const double phi = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) roots.push_back(m * std::cos(phi - 2.0 * kPi * k / 3.0) + shift);
  } else {
    const double root = std::sqrt(std::max(0.0, q * q / 4.0 + p * p * p / 27.0));
    const double y = std::cbrt(-q / 2.0 + root) + std::cbrt(-q / 2.0 - root);
    roots.push_back(y + shift);
  }
  for (double& r : roots) r = polish(a2, a1, a0, r);
  std::sort(roots.begin(), roots.end());
  return roots;
}

CubicCoeffs ring_coeffs(const RingConstants& c, const FlowParameters& params, double r) {
  const double f = params.f;
  const double g = params.g;
  return {(f * f * r * r / 8.0 + c.c2 * c.c2 / (2.0 * r * r) - c.c1) / g,
          c.c3 * c.c3 / (2.0 * g * r * r)};
}

CubicCoeffs ring_coeffs_dr(const RingConstants& c, const FlowParameters& params, double r) {
  const double f = params.f;
  const double g = params.g;
  return {(f * f * r / 4.0 - c.c2 * c.c2 / (r * r * r)) / g, -c.c3 * c.c3 / (g * r * r * r)};
}

double ring_discriminant(const RingConstants& c, const FlowParameters& params, double r) {
  const CubicCoeffs k = ring_coeffs(c, params, r);
  return cubic_discriminant(k.phi1, k.phi2);
}

RingBounds ring_bounds(const RingConstants& c, const FlowParameters& params) {
  params.validate();
  if (c.c3 == 0.0) throw Error(ErrorKind::invalid_params, "ring requires C3 != 0");
  const double f = params.f;
  const double g = params.g;
  if (!(c.c1 > 0.5 * f * std::abs(c.c2))) {
    throw Error(ErrorKind::no_ring_exists, "C1 must exceed f|C2|/2 for a ring to exist");
  }
  const double outer = 100.0 * std::sqrt(8.0 * g * c.c1) / f;
  const double inner = c.c2 != 0.0 ? 0.01 * std::sqrt(2.0 * std::abs(c.c2) / f) : 1e-6 * outer;
  auto G = [&](double r) { return ring_discriminant(c, params, r); };

  double prev_r = inner;
  double prev_g = G(inner);
  double r_in = -1, r_out = -1;
  for (double r = inner * 1.1; r <= outer * 1.1; r *= 1.1) {
    const double gr = G(r);
    if (r_in < 0 && prev_g > 0 && gr <= 0) {
      r_in = solve_bracketed(G, prev_r, r, prev_g, gr);
    } else if (r_in > 0 && prev_g <= 0 && gr > 0) {
      r_out = solve_bracketed(G, prev_r, r, prev_g, gr);
      break;
    }
    prev_r = r;
    prev_g = gr;
  }
  if (r_in < 0 || r_out < 0) {
    std::ostringstream os;
    os << "no radius with two positive depth roots for C = (" << c.c1 << ", " << c.c2 << ", "
       << c.c3 << ")";
    throw Error(ErrorKind::no_ring_exists, os.str());
  }
  return {r_in, r_out, -2.0 / 3.0 * ring_coeffs(c, params, r_in).phi1,
          -2.0 / 3.0 * ring_coeffs(c, params, r_out).phi1};
}

double ring_depth(const RingConstants& c, const FlowParameters& params, double r, Branch branch) {
  const CubicCoeffs k = ring_coeffs(c, params, r);
  const std::vector<double> roots = cubic_roots(k.phi1, k.phi2);
  std::vector<double> positive;
  for (double x : roots) {
    if (x > 0) positive.push_back(x);
  }
  if (positive.size() < 2) {
    // Rounding at the sonic radii can lose the double root.
    const double hc = -2.0 / 3.0 * k.phi1;
    if (hc > 0 && std::abs(cubic_discriminant(k.phi1, k.phi2)) <= 1e-12 * std::max(1.0, hc * hc * hc)) {
      return hc;
    }
    std::ostringstream os;
    os.precision(17);
    os << "radius r = " << r << " lies outside the ring";
    throw Error(ErrorKind::window_violation, os.str());
  }
  return branch == Branch::lower ? positive.front() : positive.back();
}

ContactResidual submodel_residual_contact(const std::function<double(double)>& phi,
                                          const std::function<double(double)>& psi,
                                          const std::function<double(double)>& eta,
                                          std::span<const double> lambdas,
                                          const FlowParameters& params, double step) {
  const double g = params.g;
  auto momentum = [&](double l) { return l * (phi(l) * phi(l) + 2 * g * eta(l)); };
  auto mass = [&](double l) { return l * phi(l) * eta(l); };
  ContactResidual out;
  for (double l : lambdas) {
    const double d = step * std::max(1.0, std::abs(l));
    const double dm = (momentum(l + d) - momentum(l - d)) / (2 * d);
    const double dpsi = (psi(l + d) - psi(l - d)) / (2 * d);
    const double dmass = (mass(l + d) - mass(l - d)) / (2 * d);
    out.momentum = std::max(out.momentum, std::abs(dm + psi(l) * psi(l)));
    out.swirl = std::max(out.swirl, std::abs(l * phi(l) * dpsi));
    out.mass = std::max(out.mass, std::abs(dmass));
  }
  return out;
}

ImplicitCollapse::ImplicitCollapse(double phi0, double eta0, const FlowParameters& params)
    : params_(params), phi0_(phi0), eta0_(eta0) {
  params.validate();
  if (!(eta0 > 0) || !std::isfinite(eta0) || !std::isfinite(phi0)) {
    throw Error(ErrorKind::invalid_params, "collapse requires eta0 > 0 and finite phi0");
  }
  const double f = params.f;
  const double g = params.g;
  k_ = (phi0 * phi0 - 2 * g * eta0 + f * f / 4) / std::sqrt(eta0);
  // Positive root s1 of 2g s^2 + K s - f^2/4, in the cancellation-free form.
  const double d = std::sqrt(k_ * k_ + 2 * g * f * f);
  const double s1 = k_ > 0 ? f * f / (2 * (k_ + d)) : (d - k_) / (4 * g);
  eta1_ = s1 * s1;
  nu_big_ = 16.0 * std::max(eta0, eta1_);
  sigma_big_ = std::sqrt(nu_big_ - eta1_);
  t_big_ = core_integral(0.0, sigma_big_);
  t_half_ = t_big_ + tail_integral(1.0 / std::sqrt(nu_big_));
  // Both branches take the same time to run between eta1 and a given eta, so the
  // motion is symmetric about the turning time.
  const double rise = core_integral(0.0, std::sqrt(std::max(0.0, eta0 - eta1_)));
  t_turn_ = phi0 > 0 ? rise : -rise;
  t_star_ = t_turn_ + t_half_;
}

double ImplicitCollapse::radicand(double eta) const {
  return (eta - eta1_) * (2 * params_.g + k_ / (std::sqrt(eta) + std::sqrt(eta1_)));
}

double ImplicitCollapse::phi_hat(double eta, bool spreading) const {
  const double r = std::sqrt(std::max(0.0, radicand(eta)));
  return spreading ? r : -r;
}

double ImplicitCollapse::core_integral(double a, double b) const {
  const double g = params_.g;
  const double e1 = eta1_;
  const double k = k_;
  // nu = eta1 + s^2 removes the square-root zero of the radicand at eta1.
  auto integrand = [g, e1, k](double s) {
    const double nu = e1 + s * s;
    return 1.0 / (2.0 * nu * std::sqrt(2 * g + k / (std::sqrt(nu) + std::sqrt(e1))));
  };
  return quad::gauss_kronrod(integrand, a, b, {1e-12, 1e-15, 4000}).value;
}

double ImplicitCollapse::tail_integral(double v) const {
  const double g = params_.g;
  const double f = params_.f;
  const double k = k_;
  // nu = 1/v^2 maps (nu_big, inf) onto a finite interval with a regular integrand.
  auto integrand = [g, f, k](double w) { return 0.5 / std::sqrt(2 * g + k * w - f * f * w * w / 4); };
  return quad::gauss_kronrod(integrand, 0.0, v, {1e-12, 1e-15, 4000}).value;
}

double ImplicitCollapse::elapsed(double eta) const {
  if (eta < eta1_) throw Error(ErrorKind::window_violation, "eta below the turning value eta1");
  if (eta <= nu_big_) return core_integral(0.0, std::sqrt(eta - eta1_));
  return t_half_ - tail_integral(1.0 / std::sqrt(eta));
}

double ImplicitCollapse::eta_after(double s) const {
  if (s <= 0.0) return eta1_;
  if (s <= t_big_) {
    auto fn = [&](double x) { return core_integral(0.0, x) - s; };
    const double x = solve_bracketed(fn, 0.0, sigma_big_, -s, t_big_ - s);
    return eta1_ + x * x;
  }
  const double vb = 1.0 / std::sqrt(nu_big_);
  auto fn = [&](double v) { return t_half_ - tail_integral(v) - s; };
  const double v = solve_bracketed(fn, 0.0, vb, t_half_ - s, t_big_ - s);
  return 1.0 / (v * v);
}

double ImplicitCollapse::time_of(double eta, bool spreading) const {
  const double s = elapsed(eta);
  return spreading ? t_turn_ - s : t_turn_ + s;
}

ImplicitCollapse::State ImplicitCollapse::at(double t) const {
  const double s = t - t_turn_;
  if (!(std::abs(s) < t_half_) || t >= t_star_) {
    std::ostringstream os;
    os.precision(17);
    os << "t = " << t << " outside the lifetime (" << t_turn_ - t_half_ << ", " << t_star_
       << ") of the collapse solution";
    throw Error(ErrorKind::window_violation, os.str());
  }
  State st;
  if (t == 0.0) {
    st.eta = eta0_;
    st.phi = phi0_;
  } else {
    st.eta = eta_after(std::abs(s));
    st.phi = phi_hat(st.eta, s < 0);
  }
  const double f = params_.f;
  st.eta_dot = -4 * st.phi * st.eta;
  st.phi_dot = -f * f / 4 - st.phi * st.phi - 2 * params_.g * st.eta;
  return st;
}

ImplicitCollapse collapse2_build(double phi0, double eta0, const FlowParameters& params) {
  return {phi0, eta0, params};
}

CollapseOdeReport collapse2_verify_ode(const ImplicitCollapse& ic, double fraction, int steps) {
  const FlowParameters& p = ic.params();
  const double f = p.f;
  const double g = p.g;
  using State3 = Eigen::Vector3d;  // (phi, psi, eta)
  auto rhs = [f, g](const State3& s) {
    return State3((s(1) + f) * s(1) - s(0) * s(0) - 2 * g * s(2), -(2 * s(1) + f) * s(0),
                  -4 * s(0) * s(2));
  };
  CollapseOdeReport rep;
  rep.t_end = fraction * ic.blow_up_time();
  rep.steps = steps;
  const double dt = rep.t_end / steps;
  const int stride = std::max(1, steps / 1000);
  State3 s(ic.phi0(), -f / 2, ic.eta0());
  double prev_eta = s(2);
  double min_eta = s(2);
  const double fd = 1e-6 * ic.blow_up_time();
  for (int i = 1; i <= steps; ++i) {
    const State3 k1 = rhs(s);
    const State3 k2 = rhs(s + 0.5 * dt * k1);
    const State3 k3 = rhs(s + 0.5 * dt * k2);
    const State3 k4 = rhs(s + dt * k3);
    s += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    const double t = i * dt;
    rep.psi_drift = std::max(rep.psi_drift, std::abs(s(1) + f / 2));
    if (t - dt > ic.turning_time() && s(2) < prev_eta) rep.eta_monotone_after_turn = false;
    min_eta = std::min(min_eta, s(2));
    prev_eta = s(2);
    if (i % stride != 0 && i != steps) continue;
    const auto exact = ic.at(t);
    rep.max_eta_error =
        std::max(rep.max_eta_error, std::abs(s(2) - exact.eta) / std::max(1.0, exact.eta));
    rep.max_phi_error =
        std::max(rep.max_phi_error, std::abs(s(0) - exact.phi) / std::max(1.0, std::abs(exact.phi)));
    // Piston law R(t) = R0 (eta0/eta)^(1/4) with R0 = 1, against U(t, R) = R phi.
    if (t > fd && t + fd < ic.blow_up_time()) {
      auto radius = [&](double tt) { return std::pow(ic.eta0() / ic.at(tt).eta, 0.25); };
      const double dr = (radius(t + fd) - radius(t - fd)) / (2 * fd);
      const double u = radius(t) * exact.phi;
      rep.piston_error = std::max(rep.piston_error, std::abs(dr - u) / std::max(1.0, std::abs(u)));
    }
  }
  rep.turning_point_seen = ic.has_turning_point() && min_eta < ic.eta0() && s(2) > min_eta;
  return rep;
}

}  // namespace rsw
