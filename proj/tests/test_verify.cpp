#include "rsw/solutions.hpp"
#include "rsw/verify.hpp"

#include <doctest.h>

using namespace rsw;

TEST_CASE("residual sweep reports its metadata") {
  const FlowParameters params{1.0, 1.0};
  const FamilyParams fp = default_family_params(FamilyId::pulsating_cylinder);
  const FlowField f = make_family(FamilyId::pulsating_cylinder, fp, params);
  const GridSpec g = default_grid(FamilyId::pulsating_cylinder, fp, params, 4);
  const ResidualReport a = residual(f, g, params);
  CHECK(a.samples == 64);
  CHECK(a.frame == Frame::polar);
  CHECK(a.mode == DerivativeMode::analytic);
  CHECK(a.fd_step == 0.0);
  const ResidualReport d = residual(f.with_mode(DerivativeMode::finite_difference, 2e-5), g, params);
  CHECK(d.mode == DerivativeMode::finite_difference);
  CHECK(d.fd_step == 2e-5);
  // Cartesian view of the same solution.
  GridSpec c{g.t, Axis{-1.5, 1.5, 4}, Axis{-1.5, 1.5, 4}, false};
  CHECK(residual_cartesian(f, c, params).max_residual() < 1e-12);
}

TEST_CASE("sweeps outside the window fail loudly") {
  const FlowParameters params{1.0, 1.0};
  const FlowField f = make_family(FamilyId::drop, default_family_params(FamilyId::drop), params);
  GridSpec g{Axis{0, 1, 3}, Axis{0.1, 5, 3}, Axis{0, 1, 2}, false};
  try {
    residual(f, g, params);
    FAIL("expected a window violation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::window_violation);
  }
}

TEST_CASE("thread count does not change the report") {
  const FlowParameters params{1.0, 1.0};
  const FamilyParams fp = default_family_params(FamilyId::collapse_contact);
  const FlowField f = make_family(FamilyId::collapse_contact, fp, params);
  const GridSpec g = default_grid(FamilyId::collapse_contact, fp, params, 6);
  setenv("RSW_THREADS", "1", 1);
  const ResidualReport one = residual(f, g, params);
  setenv("RSW_THREADS", "4", 1);
  const ResidualReport four = residual(f, g, params);
  unsetenv("RSW_THREADS");
  CHECK(one.max == four.max);
  CHECK(one.rms == four.rms);
  CHECK(one.worst_point == four.worst_point);
}

TEST_CASE("special times") {
  const auto s = special_times(0.0, 10.0, FlowParameters{1.0, 1.0});
  REQUIRE(s.size() == 2);
  CHECK(s[0] == doctest::Approx(kPi));
  CHECK(s[1] == doctest::Approx(3 * kPi));
}

TEST_CASE("cylinder particles return after one period") {
  const FlowParameters params{1.0, 1.0};
  const FlowField f = make_family(FamilyId::pulsating_cylinder, default_family_params(FamilyId::pulsating_cylinder), params);
  TrajectoryOptions o;
  o.output_times = {0.0, 2 * kPi};
  o.events = special_times(0, 2 * kPi, params);
  for (double r0 : {0.2, 1.0, 1.7}) {
    const Trajectory tr = integrate_trajectory(f, r0, 0.4, 0.0, 2 * kPi, o);
    REQUIRE(tr.points.size() == 2);
    const PolarPoint e = tr.points.back();
    CHECK(std::hypot(e.r * std::cos(e.theta) - r0 * std::cos(0.4), e.r * std::sin(e.theta) - r0 * std::sin(0.4)) < 1e-8);
  }
}

TEST_CASE("drop particle closes after three periods") {
  const FlowParameters params{1.0, 1.0};
  const FamilyParams fp = default_family_params(FamilyId::drop);
  const FlowField f = make_family(FamilyId::drop, fp, params);
  const double r0 = 1 / std::sqrt(3.0);
  TrajectoryOptions o;
  for (int i = 0; i <= 12; ++i) o.output_times.push_back(6 * kPi * i / 12);
  o.events = special_times(0, 6 * kPi, params);
  const Trajectory tr = integrate_trajectory(f, r0, 0.0, 0.0, 6 * kPi, o);
  const TrajectoryFormula tf = trajectory_formula(FamilyId::drop, fp, params, r0, 0.0);
  for (const PolarPoint& p : tr.points) {
    const PolarPoint q = tf.position(p.t);
    CHECK(std::hypot(p.r * std::cos(p.theta) - q.r * std::cos(q.theta),
                     p.r * std::sin(p.theta) - q.r * std::sin(q.theta)) < 1e-7);
  }
  const PolarPoint e = tr.points.back();
  CHECK(std::hypot(e.r * std::cos(e.theta) - r0, e.r * std::sin(e.theta)) < 1e-6);
  // Half way it is elsewhere.
  const PolarPoint mid = tr.points[6];
  CHECK(std::hypot(mid.r * std::cos(mid.theta) - r0, mid.r * std::sin(mid.theta)) > 0.1);
}

TEST_CASE("a particle at the centre of a fluid at rest stays there") {
  const FlowParameters params{1.0, 1.0};
  const FlowField f = make_family(FamilyId::rest, default_family_params(FamilyId::rest), params);
  TrajectoryOptions o;
  o.output_times = {0.0, 1.0};
  const Trajectory tr = integrate_trajectory(f, 0.0, 0.0, 0.0, 1.0, o);
  REQUIRE(tr.points.size() == 2);
  CHECK(tr.points.back().r == 0.0);
  const FlowField cyl = make_family(FamilyId::constant_sw_image, default_family_params(FamilyId::constant_sw_image), params);
  CHECK_THROWS_AS(integrate_trajectory(cyl, 0.0, 0.0, 1.0, 2.0, o), Error);
}

TEST_CASE("paths that leave the domain throw or are truncated") {
  const FlowParameters params{0.1, 1.0};
  const FamilyParams fp = default_family_params(FamilyId::ring);
  const FlowField ring = make_family(FamilyId::ring, fp, params);
  const RingBounds b = ring_bounds(fp.ring, params);
  const double r0 = b.r_outer - 0.5;
  CHECK_THROWS_AS(integrate_trajectory(ring, r0, 0.0, 0.0, 100.0), Error);
  TrajectoryOptions o;
  o.truncate_on_exit = true;
  const Trajectory tr = integrate_trajectory(ring, r0, 0.0, 0.0, 100.0, o);
  CHECK(tr.exited);
  CHECK(tr.points.back().r == doctest::Approx(b.r_outer).epsilon(1e-3));
}

TEST_CASE("potential vorticity is carried by the fluid") {
  const FlowParameters params{1.0, 1.0};
  for (FamilyId id : {FamilyId::drop, FamilyId::pulsating_cylinder, FamilyId::stationary_rot_sym}) {
    const FlowField f = make_family(id, default_family_params(id), params);
    TrajectoryOptions o;
    o.events = special_times(0, 2 * kPi, params);
    for (double r0 : {0.2, 0.6, 1.1}) {
      const Trajectory tr = integrate_trajectory(f, r0, 0.3, 0.0, 2 * kPi, o);
      CAPTURE(to_string(id));
      CHECK(potential_vorticity_drift(f, tr, params) < 1e-5);
    }
  }
}

TEST_CASE("material circle in the pulsating cylinder") {
  const FlowParameters params{1.0, 1.0};
  const FlowField f = make_family(FamilyId::pulsating_cylinder, default_family_params(FamilyId::pulsating_cylinder), params);
  const MaterialCurve mc = evolve_material_curve(f, 1.0, 0.0, 0.2, 64, {0.0, kPi / 2, 2 * kPi});
  REQUIRE(mc.length.size() == 3);
  CHECK(mc.length[0] == doctest::Approx(2 * kPi * 0.2).epsilon(2e-3));
  CHECK(mc.length[2] == doctest::Approx(mc.length[0]).epsilon(1e-8));
  CHECK(mc.min_spacing[1] > 0);
}

TEST_CASE("finite volumes converge at first order to the cylinder") {
  const FlowParameters params{1.0, 1.0};
  const FlowField f = make_family(FamilyId::pulsating_cylinder, default_family_params(FamilyId::pulsating_cylinder), params);
  FvConfig cfg;
  cfg.meshes = {50, 100};
  cfg.t1 = 0.25 * 2 * kPi;
  const FvResult r = fv_oracle(f, params, cfg);
  REQUIRE(r.rates.size() == 1);
  CHECK(r.min_rate() >= 0.8);
  CHECK(r.runs[1].l1_error < r.runs[0].l1_error);
  FvConfig bad = cfg;
  bad.dt = 1.0;
  try {
    fv_oracle(f, params, bad);
    FAIL("expected a CFL violation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::cfl_violation);
  }
}
