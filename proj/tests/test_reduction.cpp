#include "rsw/quadrature.hpp"
#include "rsw/reduction.hpp"

#include <doctest.h>

#include <random>

using namespace rsw;

namespace {

// Plain sign scan plus bisection, sharing nothing with ring_bounds.
std::vector<double> scan_roots(const std::function<double(double)>& G, double lo, double hi, double step) {
  std::vector<double> out;
  double a = lo, ga = G(lo);
  for (double b = lo + step; b <= hi; b += step) {
    const double gb = G(b);
    if ((ga > 0) != (gb > 0)) {
      double x0 = a, x1 = b, g0 = ga;
      for (int i = 0; i < 200 && x1 - x0 > 1e-15 * x1; ++i) {
        const double m = 0.5 * (x0 + x1);
        const double gm = G(m);
        if ((gm > 0) == (g0 > 0)) {
          x0 = m;
          g0 = gm;
        } else {
          x1 = m;
        }
      }
      out.push_back(0.5 * (x0 + x1));
    }
    a = b;
    ga = gb;
  }
  return out;
}

double G_ring(double r, double c1, double c2, double c3, double f, double g) {
  const double phi1 = (f * f * r * r / 8 + c2 * c2 / (2 * r * r) - c1) / g;
  const double phi2 = c3 * c3 / (2 * g * r * r);
  return 4.0 / 27.0 * phi1 * phi1 * phi1 + phi2;
}

}  // namespace

TEST_CASE("cubic roots recover random three-root polynomials") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  int tested = 0;
  while (tested < 500) {
    std::array<double, 3> r{u(rng), u(rng), u(rng)};
    std::sort(r.begin(), r.end());
    if (r[1] - r[0] < 1e-3 || r[2] - r[1] < 1e-3) continue;
    const double a2 = -(r[0] + r[1] + r[2]);
    const double a1 = r[0] * r[1] + r[1] * r[2] + r[0] * r[2];
    const double a0 = -r[0] * r[1] * r[2];
    const auto got = cubic_roots(a2, a1, a0);
    REQUIRE(got.size() == 3);
    for (int i = 0; i < 3; ++i) CHECK(got[i] == doctest::Approx(r[i]).epsilon(1e-9).scale(1.0));
    ++tested;
  }
}

TEST_CASE("cubic with one real root") {
  // (x - 1.5)(x^2 + x + 2)
  const auto got = cubic_roots(-0.5, 0.5, -3.0);
  REQUIRE(got.size() == 1);
  CHECK(got[0] == doctest::Approx(1.5).epsilon(1e-14));
  // Triple root at 2.
  const auto triple = cubic_roots(-6.0, 12.0, -8.0);
  REQUIRE_FALSE(triple.empty());
  for (double x : triple) CHECK(x == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("ring radii agree with an independent sign scan") {
  const FlowParameters params{0.1, 1.0};
  const RingConstants c{1, 1, 1};
  const RingBounds b = ring_bounds(c, params);
  const auto oracle = scan_roots([&](double r) { return G_ring(r, 1, 1, 1, 0.1, 1.0); }, 0.05, 60.0, 1e-3);
  REQUIRE(oracle.size() == 2);
  CHECK(b.r_inner == doctest::Approx(oracle[0]).epsilon(1e-12));
  CHECK(b.r_outer == doctest::Approx(oracle[1]).epsilon(1e-12));
  CHECK(std::abs(ring_discriminant(c, params, b.r_inner)) < 1e-10);
  CHECK(std::abs(ring_discriminant(c, params, b.r_outer)) < 1e-10);
  // The inner radius reads 2.19; the outer one is 25.72 (a figure reading of 26.0 is 1% high).
  CHECK(b.r_inner == doctest::Approx(2.19).epsilon(5e-3));
  CHECK(b.r_outer == doctest::Approx(25.7233).epsilon(1e-5));
}

TEST_CASE("sonic condition and critical depths at the ring edges") {
  const FlowParameters params{0.1, 1.0};
  const RingConstants c{1, 1, 1};
  const RingBounds b = ring_bounds(c, params);
  const double hs = (2 * c.c1 - c.c2 * params.f) / (3 * params.g);
  CHECK(hs == doctest::Approx(0.63333333333333));
  for (auto [r, hc] : {std::pair{b.r_inner, b.hc_inner}, std::pair{b.r_outer, b.hc_outer}}) {
    const double U = c.c3 / (r * hc);
    CHECK(std::abs(U * U - params.g * hc) < 1e-8);
    CHECK(hc <= hs);
    CHECK(ring_depth(c, params, r, Branch::lower) == doctest::Approx(hc).epsilon(1e-6));
  }
}

TEST_CASE("depth slope grows like an inverse square root at the sonic radius") {
  const FlowParameters params{0.1, 1.0};
  const RingConstants c{1, 1, 1};
  const RingBounds b = ring_bounds(c, params);
  auto slope = [&](double delta) {
    const double r = b.r_inner + delta;
    const double h = ring_depth(c, params, r, Branch::lower);
    const CubicCoeffs k = ring_coeffs(c, params, r);
    const CubicCoeffs dk = ring_coeffs_dr(c, params, r);
    return std::abs((dk.phi1 * h * h + dk.phi2) / ((3 * h + 2 * k.phi1) * h));
  };
  const double ratio = slope(1e-8) / slope(1e-6);
  CHECK(ratio == doctest::Approx(10.0).epsilon(0.02));
}

TEST_CASE("ring existence conditions") {
  const FlowParameters params{0.1, 1.0};
  try {
    ring_bounds({0.05, 1, 1}, params);
    FAIL("expected no ring");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::no_ring_exists);
  }
  try {
    ring_bounds({1, 1, 0}, params);
    FAIL("expected invalid params");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_params);
  }
  CHECK_THROWS_AS(ring_depth({1, 1, 1}, params, 1.0, Branch::lower), Error);
}

TEST_CASE("contact ODE residual vanishes for the closed-form constant swirl") {
  const FlowParameters params{1.0, 2.0};
  const double c = 0.7, l0 = 1.0, e0 = 1.5, g = params.g;
  auto eta = [&](double l) { return (l0 * e0 - c * c * (l - l0) / (2 * g)) / l; };
  const std::vector<double> ls{0.6, 0.9, 1.3, 1.8};
  const ContactResidual r = submodel_residual_contact([](double) { return 0.0; },
                                                      [&](double) { return c; }, eta, ls, params);
  CHECK(r.max() < 1e-9);
  // A wrong depth leaves a residual.
  auto bad = [&](double l) { return 1.01 * eta(l); };
  CHECK(submodel_residual_contact([](double) { return 0.0; }, [&](double) { return c; }, bad, ls, params).max() > 1e-3);
}

TEST_CASE("contact ODE residual vanishes for a sine swirl") {
  const FlowParameters params{1.0, 1.0};
  const double l0 = 1.0, e0 = 1.0;
  auto integral = [&](double l) { return (l - l0) / 2 - (std::sin(2 * l) - std::sin(2 * l0)) / 4; };
  auto eta = [&](double l) { return (l0 * e0 - integral(l) / (2 * params.g)) / l; };
  const std::vector<double> ls{0.6, 1.1, 1.7};
  const ContactResidual r = submodel_residual_contact(
      [](double) { return 0.0; }, [](double l) { return std::sin(l); }, eta, ls, params);
  CHECK(r.max() < 1e-9);
}

TEST_CASE("cubic contact class satisfies the reduced ODEs") {
  const FlowParameters params{1.0, 1.0};
  const double c1 = 1.0, c2 = 0.5, c3 = 0.1, g = params.g;
  auto phi = [&](double l) {
    const auto roots = cubic_roots(0.0, c2 * c2 - c1 / l, 2 * g * c3 / l);
    std::vector<double> pos;
    for (double x : roots) if (x > 0) pos.push_back(x);
    return pos.front();
  };
  auto eta = [&](double l) { return c3 / (l * phi(l)); };
  const std::vector<double> ls{0.8, 1.0, 1.2};
  const ContactResidual r =
      submodel_residual_contact(phi, [&](double) { return c2; }, eta, ls, params);
  CHECK(r.max() < 1e-8);
}

TEST_CASE("implicit collapse matches closed-form lifetimes") {
  const FlowParameters params{1.0, 1.0};
  const ImplicitCollapse a(0.0, 1.0, params);
  CHECK(a.blow_up_time() == doctest::Approx(0.6796738189082437).epsilon(1e-10));
  CHECK(a.eta1() == doctest::Approx(1.0).epsilon(1e-14));
  const ImplicitCollapse b(-1.0, 1.0, params);
  CHECK(b.blow_up_time() == doctest::Approx(0.408439141856238).epsilon(1e-10));
  const ImplicitCollapse c(0.5, 1.0, params);
  CHECK(c.blow_up_time() == doctest::Approx(1.0009480735507719).epsilon(1e-10));
  CHECK(c.eta1() == doctest::Approx(0.7927911524016557).epsilon(1e-12));
  CHECK(c.t1() == doctest::Approx(0.24497866312686423).epsilon(1e-10));
  CHECK(c.has_turning_point());
  CHECK_FALSE(a.has_turning_point());
}

TEST_CASE("strain profile of the phi0 = 0 collapse") {
  const ImplicitCollapse ic(0.0, 1.0, FlowParameters{1.0, 1.0});
  for (double eta : {1.0, 1.3, 2.0, 5.0, 40.0}) {
    const double expect = -std::sqrt(std::max(0.0, 2 * eta - 0.25 - 1.75 * std::sqrt(eta)));
    CHECK(ic.phi_hat(eta, false) == doctest::Approx(expect).epsilon(1e-12));
  }
  CHECK(ic.phi_hat(1.0, false) == 0.0);
}

TEST_CASE("implicit collapse agrees with direct integration") {
  const FlowParameters params{1.0, 1.0};
  for (auto [phi0, eta0] : {std::pair{0.0, 1.0}, std::pair{-1.0, 1.0}, std::pair{0.5, 1.0}}) {
    const ImplicitCollapse ic(phi0, eta0, params);
    const CollapseOdeReport r = collapse2_verify_ode(ic);
    CAPTURE(phi0);
    CHECK(r.max_eta_error < 1e-6);
    CHECK(r.max_phi_error < 1e-6);
    CHECK(r.psi_drift < 1e-12);
    CHECK(r.piston_error < 1e-6);
    CHECK(r.eta_monotone_after_turn);
    CHECK(r.turning_point_seen == (phi0 > 0));
  }
}

TEST_CASE("spreading then collapse") {
  const FlowParameters params{1.0, 1.0};
  const ImplicitCollapse ic(0.5, 1.0, params);
  double prev_phi = ic.at(0.0).phi;
  double prev_eta = ic.at(0.0).eta;
  for (int i = 1; i <= 200; ++i) {
    const double t = 0.95 * ic.blow_up_time() * i / 200;
    const auto s = ic.at(t);
    CHECK(s.phi < prev_phi);
    if (t < ic.t1() - 1e-12) CHECK(s.eta < prev_eta);
    if (t > ic.t1() + 0.95 * ic.blow_up_time() / 200) CHECK(s.eta > prev_eta);
    prev_phi = s.phi;
    prev_eta = s.eta;
  }
  // Motion is mirror-symmetric about the turning time.
  const double tt = ic.turning_time();
  CHECK(ic.at(tt - 0.1).eta == doctest::Approx(ic.at(tt + 0.1).eta).epsilon(1e-12));
  CHECK(ic.at(tt - 0.1).phi == doctest::Approx(-ic.at(tt + 0.1).phi).epsilon(1e-10));
  CHECK_THROWS_AS(ic.at(ic.blow_up_time()), Error);
  CHECK(ic.time_of(1.0, true) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(ImplicitCollapse(0.0, -1.0, params), Error);
}
