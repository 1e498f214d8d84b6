#include <abphase/errors.hpp>
#include <abphase/sources.hpp>

#include <doctest.h>

#include <cmath>

using namespace abphase;

TEST_CASE("source validation names the field") {
  IdealInfiniteSolenoid s;
  s.radius = -1;
  try {
    validate(CurrentSource{s});
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("radius") != std::string::npos);
  }
  FiniteSolenoid f;
  f.axis_dir = {0, 0, 2};
  CHECK_THROWS_AS(validate(CurrentSource{f}), ValidationError);
  ToroidalCoil t;
  t.minor_radius = 2 * t.major_radius;
  CHECK_THROWS_AS(validate(CurrentSource{t}), ValidationError);
}

TEST_CASE("finite solenoid loops are cell centred") {
  FiniteSolenoid s;
  s.length = 10;
  s.n_loops = 5;
  s.radius = 0.5;
  s.current = 2;
  const auto loops = finite_solenoid_loops(s);
  REQUIRE(loops.size() == 5);
  CHECK(loops.front().center.z == doctest::Approx(-4));
  CHECK(loops.back().center.z == doctest::Approx(4));
  for (const auto& l : loops) {
    CHECK(l.radius == 0.5);
    CHECK(l.current == 2);
  }
}

TEST_CASE("toroid loops sit on the major circle between turns at theta = 0") {
  ToroidalCoil c;
  c.n_turns = 8;
  const auto loops = toroid_loops(c);
  REQUIRE(loops.size() == 8);
  for (const auto& l : loops) {
    CHECK(norm(l.center) == doctest::Approx(c.major_radius));
    CHECK(std::abs(dot(l.normal, l.center)) < 1e-14);
    CHECK(std::abs(l.center.y) > 0.1);
  }
}

TEST_CASE("toroid flux reduces to the thin-coil value") {
  ToroidalCoil c;
  c.major_radius = 1;
  c.minor_radius = 1e-3;
  c.n_turns = 100;
  c.current = 1;
  const auto k = PhysicalConstants::natural();
  const double thin = 100.0 / (2 * kPi) * kPi * 1e-6;
  CHECK(toroid_flux(c, k) == doctest::Approx(thin).epsilon(1e-6));
}

TEST_CASE("circular trajectory sampling") {
  ChargeTrajectory tr;
  tr.path = CircularOrbit{{0, 0, 0}, {0, 0, 1}, 2.0, 4.0, 1};
  const auto s0 = trajectory_sample(tr, 0.0);
  const auto s1 = trajectory_sample(tr, 1.0);
  CHECK(norm(s0.position) == doctest::Approx(2));
  CHECK(dot(cross(s0.position, s1.position), Vec3{0, 0, 1}) > 0);
  CHECK(norm(s0.velocity) == doctest::Approx(2 * kPi * 2 / 4));
  CHECK_THROWS_AS(trajectory_sample(tr, 4.5), ValidationError);
  CHECK_THROWS_AS(trajectory_sample(tr, -0.1), ValidationError);
}

TEST_CASE("polygon trajectory sampling and reversal") {
  ChargeTrajectory tr;
  tr.path = PiecewiseLinearLoop{{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}}, {1.0, 1.0, 2.0}};
  CHECK(tr.period() == doctest::Approx(4.0));
  const auto s = trajectory_sample(tr, 1.5);
  CHECK(norm(s.position - Vec3{1, 0.5, 0}) < 1e-14);
  CHECK(norm(s.velocity - Vec3{0, 1, 0}) < 1e-14);
  const auto bp = trajectory_breakpoints(tr);
  CHECK(bp.size() == 4);
  const auto r = reversed(tr);
  CHECK(r.period() == doctest::Approx(4.0));
  const auto rs = trajectory_sample(r, 0.5);
  CHECK(norm(rs.position - Vec3{0.25, 0.25, 0}) < 1e-14);
}

TEST_CASE("vaidman pair puts the test charge midway") {
  const auto cfg = vaidman_pair(1.0, 2.0, 3.0, 1.0);
  REQUIRE(cfg.external.size() == 2);
  CHECK(norm(cfg.external[0].position + cfg.external[1].position - 2 * cfg.test.position) < 1e-14);
  CHECK(norm(cfg.external[0].position - cfg.test.position) == doctest::Approx(3.0));
}
