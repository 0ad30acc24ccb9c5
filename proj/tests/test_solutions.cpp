#include "rsw/solutions.hpp"
#include "rsw/verify.hpp"

#include <doctest.h>

#include <random>

using namespace rsw;

namespace {

FlowField family(FamilyId id) {
  return make_family(id, default_family_params(id), default_flow_parameters(id));
}

}  // namespace

TEST_CASE("every family solves its system on the default sample") {
  for (FamilyId id : kAllFamilies) {
    const FamilyParams fp = default_family_params(id);
    const FlowParameters params = default_flow_parameters(id);
    const FlowField field = make_family(id, fp, params);
    const GridSpec grid = default_grid(id, fp, params);
    CAPTURE(to_string(id));
    CHECK(grid.size() == 1000);
    CHECK(residual(field, grid, params).max_residual() < 1e-6);
    CHECK(residual(field.with_mode(DerivativeMode::finite_difference), grid, params).max_residual() < 1e-4);
  }
}

TEST_CASE("family names round-trip") {
  for (FamilyId id : kAllFamilies) CHECK(parse_family(to_string(id)) == id);
  CHECK_FALSE(parse_family("tsunami").has_value());
}

TEST_CASE("rest state residual is exactly zero") {
  const FlowParameters params{1.0, 1.0};
  const ResidualReport r = residual(family(FamilyId::rest), default_grid(FamilyId::rest, {}, params), params);
  CHECK(r.max_residual() < 1e-12);
}

TEST_CASE("pulsating cylinder at the start and at the half period") {
  FamilyParams fp;
  fp.alpha = 2;
  fp.h0 = 1;
  const FlowField cyl = make_family(FamilyId::pulsating_cylinder, fp, {1.0, 1.0});
  for (double r : {0.3, 1.0, 1.8}) {
    const Vec3 a = cyl.eval(Vec3(0.0, r, 0.4));
    CHECK(std::abs(a(0)) < 1e-15);
    CHECK(a(1) == doctest::Approx(r / 2));
    CHECK(a(2) == doctest::Approx(2.0));
    const Vec3 b = cyl.eval(Vec3(kPi, r, 0.4));
    CHECK(std::abs(b(0)) < 1e-14);
    CHECK(b(1) == doctest::Approx(-r / 4));
    CHECK(b(2) == doctest::Approx(0.5));
  }
}

TEST_CASE("periodic families repeat after one period") {
  const FlowParameters params{1.0, 1.0};
  for (FamilyId id : {FamilyId::pulsating_cylinder, FamilyId::drop}) {
    const FlowField f = family(id);
    for (double t : {0.3, 2.0, 4.4}) {
      for (double r : {0.1, 0.5, 1.0}) {
        const Vec3 a = f.eval(Vec3(t, r, 0.2));
        const Vec3 b = f.eval(Vec3(t + 2 * kPi / params.f, r, 0.2));
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
      }
    }
  }
}

TEST_CASE("cylinder potential vorticity is f/h0") {
  FamilyParams fp;
  fp.alpha = 3;
  fp.h0 = 1.7;
  const FlowParameters params{0.8, 1.0};
  const FlowField cyl = make_family(FamilyId::pulsating_cylinder, fp, params);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> t(0, 20), r(0.05, 3), th(-kPi, kPi);
  for (int i = 0; i < 100; ++i) {
    CHECK(std::abs(potential_vorticity(cyl, Vec3(t(rng), r(rng), th(rng)), params) - 0.8 / 1.7) < 1e-10);
  }
}

TEST_CASE("drop constants and vanishing edge depth") {
  const FlowParameters params{1.0, 1.0};
  CHECK(drop_l(2.0, params) == doctest::Approx(-1.0 / std::sqrt(6.0)).epsilon(1e-14));
  // Untransported quadratic-swirl member: depth 0.5 at the axis and zero at sqrt(6).
  FamilyParams st;
  st.alpha = 1.0;
  st.h0 = 0.5;
  st.profile = RadialProfile{RadialProfile::Kind::power, drop_l(2.0, params), 2.0};
  const FlowField pre = make_family(FamilyId::stationary_rot_sym, st, params);
  CHECK(pre.eval(Vec3(0, 0, 0))(2) == doctest::Approx(0.5));
  CHECK(std::abs(pre.eval(Vec3(0, std::sqrt(6.0), 0))(2)) < 1e-9);

  const FlowField drop = family(FamilyId::drop);
  CHECK(drop_radius(0.0, 2.0, params) == doctest::Approx(std::sqrt(3.0)));
  for (double t : {0.0, 0.7854, 1.5708, 3.0, kPi, 5.0}) {
    const double rs = drop_radius(t, 2.0, params);
    CHECK(std::abs(drop.eval(Vec3(t, rs, 0.3))(2)) < 1e-9);
    CHECK(drop.eval(Vec3(t, 0.0, 0.0))(2) > drop.eval(Vec3(t, 0.5 * rs, 0.0))(2));
    CHECK_THROWS_AS(drop.eval(Vec3(t, 1.01 * rs, 0.0)), Error);
  }
}

TEST_CASE("ring branches") {
  const FlowParameters params{0.1, 1.0};
  FamilyParams fp = default_family_params(FamilyId::ring);
  const RingBounds b = ring_bounds(fp.ring, params);
  const FlowField lower = make_family(FamilyId::ring, fp, params);
  fp.branch = Branch::upper;
  const FlowField upper = make_family(FamilyId::ring, fp, params);
  bool upper_supercritical_somewhere = false;
  for (int i = 1; i <= 50; ++i) {
    const double r = b.r_inner + (b.r_outer - b.r_inner) * i / 51.0;
    const Vec3 lo = lower.eval(Vec3(0, r, 0));
    const Vec3 up = upper.eval(Vec3(0, r, 0));
    CHECK(lo(2) < up(2));
    CHECK(diagnostics(lower, Vec3(0, r, 0), params).froude > 1.0);
    // The radial Froude number separates the branches.
    CHECK(std::abs(lo(0)) / std::sqrt(params.g * lo(2)) > 1.0);
    CHECK(std::abs(up(0)) / std::sqrt(params.g * up(2)) < 1.0);
    // |q|^2 = 2 C1 - C2 f - 2 g h on both branches.
    for (const Vec3& s : {lo, up}) {
      CHECK(s(0) * s(0) + s(1) * s(1) == doctest::Approx(2 - 0.1 - 2 * s(2)).epsilon(1e-10));
    }
    if (diagnostics(upper, Vec3(0, r, 0), params).froude > 1.0) upper_supercritical_somewhere = true;
  }
  // Near the edges the upper depth drops below (2 C1 - C2 f)/3g, so it is not subcritical throughout.
  CHECK(upper_supercritical_somewhere);
  CHECK_THROWS_AS(lower.eval(Vec3(0, 0.9 * b.r_inner, 0)), Error);
}

TEST_CASE("invalid family parameters are rejected") {
  const FlowParameters params{1.0, 1.0};
  FamilyParams fp;
  fp.h0 = -1;
  CHECK_THROWS_AS(make_family(FamilyId::rest, fp, params), Error);
  fp = default_family_params(FamilyId::pulsating_cylinder);
  fp.alpha = 0;
  CHECK_THROWS_AS(make_family(FamilyId::pulsating_cylinder, fp, params), Error);
  fp = default_family_params(FamilyId::ring);
  fp.ring = {0.05, 1, 1};
  try {
    make_family(FamilyId::ring, fp, FlowParameters{0.1, 1.0});
    FAIL("expected no ring");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::no_ring_exists);
  }
  fp = default_family_params(FamilyId::collapse_scaling);
  fp.eta0 = 0;
  CHECK_THROWS_AS(make_family(FamilyId::collapse_scaling, fp, params), Error);
}

TEST_CASE("validity windows") {
  const FlowField image = family(FamilyId::constant_sw_image);
  CHECK_THROWS_AS(image.eval(Vec3(0.0, 0.1, 0.1)), Error);
  CHECK_THROWS_AS(image.eval(Vec3(2 * kPi, 0.1, 0.1)), Error);
  CHECK_NOTHROW(image.eval(Vec3(1.0, 0.1, 0.1)));
  const FlowField scaling = family(FamilyId::collapse_scaling);
  const double tstar = ImplicitCollapse(0.0, 1.0, {1.0, 1.0}).blow_up_time();
  CHECK_NOTHROW(scaling.eval(Vec3(0.0, 0.6, 0.0)));
  CHECK_THROWS_AS(scaling.eval(Vec3(tstar, 0.6, 0.0)), Error);
  CHECK_THROWS_AS(scaling.eval(Vec3(-0.01, 0.6, 0.0)), Error);
}

TEST_CASE("cylinder trajectory formula and circle data") {
  FamilyParams fp;
  fp.alpha = 2;
  const FlowParameters params{1.0, 1.0};
  const TrajectoryFormula tf = trajectory_formula(FamilyId::pulsating_cylinder, fp, params, 1.0, 0.0);
  REQUIRE(tf.has_circle);
  CHECK(tf.circle_r == doctest::Approx(0.5));
  CHECK(std::hypot(tf.circle_a, tf.circle_b) == doctest::Approx(1.5));
  CHECK(tf.position(0.0).r == doctest::Approx(1.0));
  CHECK(tf.position(kPi).r == doctest::Approx(2.0));
  for (double t : {0.4, 1.9, 3.7, 5.5}) {
    const PolarPoint p = tf.position(t);
    CHECK(std::hypot(p.r * std::cos(p.theta) - tf.circle_a, p.r * std::sin(p.theta) - tf.circle_b) ==
          doctest::Approx(tf.circle_r).epsilon(1e-12));
  }
}

TEST_CASE("still fluid keeps particles in place") {
  FamilyParams fp;
  fp.alpha = 1.0;
  fp.profile = RadialProfile{RadialProfile::Kind::power, 0.0, 1.0};
  const TrajectoryFormula tf =
      trajectory_formula(FamilyId::stationary_rot_sym, fp, {1.0, 1.0}, 0.8, 0.3);
  for (double t : {0.0, 1.0, 10.0}) {
    CHECK(tf.position(t).r == doctest::Approx(0.8));
    CHECK(tf.position(t).theta == doctest::Approx(0.3));
  }
  CHECK_THROWS_AS(trajectory_formula(FamilyId::ring, default_family_params(FamilyId::ring), {0.1, 1.0}, 3, 0), Error);
}

TEST_CASE("drop closure classes") {
  const FamilyParams fp = default_family_params(FamilyId::drop);
  const FlowParameters params{1.0, 1.0};
  const Closure a = closure_condition(fp, params, 1 / std::sqrt(3.0));
  CHECK(a.closed);
  CHECK(a.m == 1);
  CHECK(a.M == 3);
  const Closure b = closure_condition(fp, params, 1 / (2 * std::sqrt(3.0)));
  CHECK(b.closed);
  CHECK(b.m == 1);
  CHECK(b.M == 6);
  CHECK_FALSE(closure_condition(fp, params, std::sqrt(3.0) / kPi).closed);
}

TEST_CASE("depth corruption is visible in the residual") {
  const FamilyParams fp = default_family_params(FamilyId::drop);
  const FlowParameters params{1.0, 1.0};
  const FlowField bad = scaled_depth(make_family(FamilyId::drop, fp, params), 1.01);
  CHECK(residual(bad, default_grid(FamilyId::drop, fp, params), params).max_residual() > 1e-3);
}
