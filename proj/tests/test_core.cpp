#include "rsw/core.hpp"
#include "rsw/quadrature.hpp"

#include <doctest.h>

using namespace rsw;

namespace {

// u = t x^2, v = sin(y) + x, h = 2 + x y t; derivatives are written out below.
struct Polynomial {
  template <class S>
  Triple<S> operator()(const Triple<S>& p) const {
    using std::sin;
    const S& t = p(0);
    const S& x = p(1);
    const S& y = p(2);
    return Triple<S>(t * x * x, sin(y) + x, 2.0 + x * y * t);
  }
};

FlowField polynomial_field() {
  return FlowField::from_functor(Frame::cartesian, System::rsw, Domain{}, Polynomial{}, "poly");
}

// Solid-body rotation u = -w y, v = w x on a constant depth.
struct SolidBody {
  double w, h;
  template <class S>
  Triple<S> operator()(const Triple<S>& p) const {
    return Triple<S>(-w * p(2), w * p(1), constant<S>(h));
  }
};

}  // namespace

TEST_CASE("analytic gradient equals the hand-derived partials") {
  const FlowField field = polynomial_field();
  const Vec3 p(0.7, -1.3, 0.4);
  const FieldSample s = field.sample(p);
  Mat3 expect;
  expect << p(1) * p(1), 2 * p(0) * p(1), 0,
            0, 1, std::cos(p(2)),
            p(1) * p(2), p(2) * p(0), p(1) * p(0);
  CHECK((s.grad - expect).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(s.value(2) == doctest::Approx(2.0 + p(1) * p(2) * p(0)).epsilon(1e-15));
}

TEST_CASE("finite-difference mode agrees with the analytic gradient") {
  const FlowField field = polynomial_field();
  const Vec3 p(0.7, -1.3, 0.4);
  const FieldSample a = field.sample(p);
  const FieldSample d = field.with_mode(DerivativeMode::finite_difference, 1e-5).sample(p);
  CHECK((a.grad - d.grad).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(field.with_mode(DerivativeMode::finite_difference, 3e-4).fd_step() == 3e-4);
}

TEST_CASE("chain carries a supplied slope through opaque evaluations") {
  const JetVec3 p = seed(Vec3(1.0, 2.0, 3.0));
  const Jet y = chain<Jet>(5.0, 0.25, p(1) * p(2));
  CHECK(y.value() == 5.0);
  CHECK(y.derivatives()(0) == 0.0);
  CHECK(y.derivatives()(1) == doctest::Approx(0.75));
  CHECK(y.derivatives()(2) == doctest::Approx(0.5));
}

TEST_CASE("polar and Cartesian states convert both ways") {
  const PolarPoint p{0.3, 1.7, 2.5};
  const PolarState s{-0.4, 0.9, 1.1};
  const auto [cp, cs] = polar_to_cartesian(p, s);
  CHECK(cp.x == doctest::Approx(1.7 * std::cos(2.5)));
  const auto [pp, ps] = cartesian_to_polar(cp, cs);
  CHECK(pp.r == doctest::Approx(p.r).epsilon(1e-15));
  CHECK(pp.theta == doctest::Approx(p.theta).epsilon(1e-15));
  CHECK(ps.U == doctest::Approx(s.U).epsilon(1e-14));
  CHECK(ps.V == doctest::Approx(s.V).epsilon(1e-14));
  CHECK_THROWS_AS(cartesian_to_polar({0, 0, 0}, {1, 1, 1}), Error);
}

TEST_CASE("polar view of solid-body rotation is purely azimuthal") {
  const FlowField cart =
      FlowField::from_functor(Frame::cartesian, System::rsw, Domain{}, SolidBody{0.3, 2.0}, "solid");
  const FlowField polar = cart.as_polar();
  const FieldSample s = polar.sample(Vec3(0.0, 1.5, 0.8));
  CHECK(std::abs(s.value(0)) < 1e-15);
  CHECK(s.value(1) == doctest::Approx(0.45));
  CHECK(s.grad(1, 1) == doctest::Approx(0.3));  // dV/dr
  CHECK(polar.as_cartesian().eval(Vec3(0.0, 0.2, -0.7))(0) == doctest::Approx(0.21));
}

TEST_CASE("potential vorticity of solid-body rotation is (2w + f)/h") {
  const FlowParameters params{0.8, 1.0};
  const FlowField cart =
      FlowField::from_functor(Frame::cartesian, System::rsw, Domain{}, SolidBody{0.3, 2.0}, "solid");
  CHECK(potential_vorticity(cart, Vec3(0.0, 0.4, -0.2), params) == doctest::Approx((0.6 + 0.8) / 2.0));
  CHECK(potential_vorticity(cart.as_polar(), Vec3(0.0, 0.4, -0.2), params) ==
        doctest::Approx((0.6 + 0.8) / 2.0));
  const Diagnostics d = diagnostics(cart, Vec3(0.0, 1.0, 0.0), params);
  CHECK(d.froude == doctest::Approx(0.3 / std::sqrt(2.0)));
}

TEST_CASE("time windows honour closed ends and guard bands") {
  TimeWindow w{0.0, 1.0, true, false, 0.01};
  CHECK(w.contains(0.0));
  CHECK(w.contains(0.98));
  CHECK_FALSE(w.contains(0.995));
  CHECK_FALSE(w.contains(-1e-12));
  Domain d;
  d.time = w;
  d.radial = [](double t) { return std::pair{0.0, 1.0 + t}; };
  CHECK(d.contains(Frame::polar, Vec3(0.5, 1.4, 0.0)));
  CHECK_FALSE(d.contains(Frame::polar, Vec3(0.5, 1.6, 0.0)));
  CHECK_FALSE(d.contains(Frame::cartesian, Vec3(0.5, 1.2, 1.0)));
  const FlowField f = polynomial_field().with_domain(d);
  CHECK_THROWS_AS(f.eval(Vec3(2.0, 0.1, 0.1)), Error);
}

TEST_CASE("grid nodes run t-major, then a, then b") {
  GridSpec g{Axis{0, 1, 2}, Axis{0, 2, 3}, Axis{5, 6, 2}, false};
  REQUIRE(g.size() == 12);
  CHECK(g.point(0, Domain{}) == Vec3(0, 0, 5));
  CHECK(g.point(1, Domain{}) == Vec3(0, 0, 6));
  CHECK(g.point(2, Domain{}) == Vec3(0, 1, 5));
  CHECK(g.point(6, Domain{}) == Vec3(1, 0, 5));
  Domain d;
  d.radial = [](double t) { return std::pair{1.0, 3.0 + t}; };
  GridSpec frac{Axis{1, 1, 1}, Axis{0, 1, 2}, Axis{0, 0, 1}, true};
  CHECK(frac.point(1, d)(1) == doctest::Approx(4.0));
}

TEST_CASE("flow parameters must be positive") {
  CHECK_NOTHROW(FlowParameters::make(0.1, 9.81));
  CHECK_THROWS_AS(FlowParameters::make(0.0, 1.0), Error);
  CHECK_THROWS_AS(FlowParameters::make(1.0, -1.0), Error);
  try {
    FlowParameters::make(-2.0, 1.0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_params);
  }
}

TEST_CASE("adaptive Gauss-Kronrod handles integrable endpoint singularities") {
  const auto inv_sqrt = quad::gauss_kronrod([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0,
                                            {1e-12, 1e-15, 4000});
  CHECK(inv_sqrt.value == doctest::Approx(2.0).epsilon(1e-10));
  const auto log = quad::gauss_kronrod([](double x) { return std::log(x); }, 0.0, 1.0,
                                       {1e-12, 1e-15, 4000});
  CHECK(log.value == doctest::Approx(-1.0).epsilon(1e-10));
  const auto smooth = quad::gauss_kronrod([](double x) { return std::sin(x); }, 0.0, kPi);
  CHECK(smooth.value == doctest::Approx(2.0).epsilon(1e-13));
  const auto reversed = quad::gauss_kronrod([](double x) { return x * x; }, 1.0, 0.0);
  CHECK(reversed.value == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
}
