#include "oracles.hpp"

#include <abphase/errors.hpp>
#include <abphase/phases.hpp>

#include <doctest.h>

#include <cmath>

using namespace abphase;

namespace {

const PhysicalConstants kNat = PhysicalConstants::natural();

MagneticScenario thin_solenoid(double flux = 1.0, double q = 1.0, double orbit_r = 1.0, int windings = 1) {
  MagneticScenario s;
  s.source = IdealInfiniteSolenoid{{0, 0, 0}, {0, 0, 1}, 0.1, flux};
  s.trajectory.charge = q;
  s.trajectory.path = CircularOrbit{{0, 0, 0}, {0, 0, 1}, orbit_r, 1.0, windings};
  s.constants = kNat;
  return s;
}

MagneticScenario small_toroid(bool threading) {
  MagneticScenario s;
  s.source = ToroidalCoil{{0, 0, 0}, {0, 0, 1}, 1.0, 0.2, 40, 1.0};
  if (threading)
    s.trajectory.path = CircularOrbit{{1, 0, 0}, {0, 1, 0}, 0.5, 1.0, 1};
  else
    s.trajectory.path = CircularOrbit{{0, 0, 0}, {0, 0, 1}, 0.4, 1.0, 1};
  s.constants = kNat;
  return s;
}

MagneticScenario short_solenoid() {
  MagneticScenario s;
  s.source = FiniteSolenoid{{0, 0, 0}, {0, 0, 1}, 1.0, 20.0, 100, 1.0};
  s.trajectory.path = CircularOrbit{{0, 0, 0.2}, {0, 0, 1}, 1.6, 2.0, 1};
  s.constants = kNat;
  return s;
}

QuadratureSpec tol(double rel) {
  QuadratureSpec q;
  q.rel_tol = rel;
  return q;
}

}  // namespace

TEST_CASE("loop integral of A around an ideal solenoid") {
  const auto q = tol(1e-10);
  CHECK(wilson_loop_phase(thin_solenoid(1.0, 1.0, 0.2), q).phase == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(wilson_loop_phase(thin_solenoid(0.7, 1.0, 1.0, 2), q).phase == doctest::Approx(1.4).epsilon(1e-9));

  auto off = thin_solenoid();
  std::get<CircularOrbit>(off.trajectory.path).center = {3, 0, 0};
  CHECK(std::abs(wilson_loop_phase(off, q).phase) < 1e-9);

  // q / hbar scaling in SI units
  auto si = thin_solenoid(2e-15, 1.602176634e-19);
  si.constants = PhysicalConstants::si();
  CHECK(wilson_loop_phase(si, q).phase == doctest::Approx(2e-15 * 1.602176634e-19 / si.constants.hbar).epsilon(1e-9));
}

TEST_CASE("enclosed flux phase") {
  const auto q = tol(1e-9);
  CHECK(flux_phase(thin_solenoid(), q).phase == doctest::Approx(1.0).epsilon(1e-8));

  auto dead = short_solenoid();
  std::get<FiniteSolenoid>(dead.source).current = 0;
  const auto r = flux_phase(dead, q);
  CHECK(r.phase == 0.0);
  CHECK(r.converged);

  // Stokes: surface integral of B against loop integral of A on a real coil.
  const auto s = short_solenoid();
  const auto w = wilson_loop_phase(s, q), f = flux_phase(s, q);
  CHECK(w.converged);
  CHECK(f.converged);
  CHECK(std::abs(w.phase - f.phase) <= 10 * (w.abs_error_estimate + f.abs_error_estimate) + 1e-9 * std::abs(f.phase));
}

TEST_CASE("field overlap reproduces the enclosed flux") {
  const auto q = tol(1e-6);
  const auto r = field_overlap_phase(thin_solenoid(), q);
  CHECK(r.converged);
  CHECK(r.phase == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(r.abs_error_estimate < 1e-4);

  const auto t = small_toroid(true);
  const double flux = toroid_flux(std::get<ToroidalCoil>(t.source), kNat);
  CHECK(field_overlap_phase(t, q).phase == doctest::Approx(flux).epsilon(1e-4));
  CHECK(std::abs(field_overlap_phase(small_toroid(false), q).phase) <= 1e-6 * flux);

  auto touching = thin_solenoid(1.0, 1.0, 0.1);
  CHECK_THROWS_AS(field_overlap_phase(touching, q), GeometryError);

  MagneticScenario loop = thin_solenoid();
  loop.source = CurrentLoop{};
  CHECK_THROWS_AS(field_overlap_phase(loop, q), ValidationError);
}

TEST_CASE("overlap self term is reported on request") {
  const auto r = field_overlap_phase(thin_solenoid(), tol(1e-5), true);
  REQUIRE(r.diagnostics.count("self_term"));
  const double v = r.diagnostics.at("self_term");
  // Thin core: dB is close to its on-axis value across the cross-section.
  const double a = 0.1;
  const double axis = oracle::simpson(
      [](double th) {
        const double z = std::tan(th);
        const double bz = oracle::loop_axis_bz(1, 1, 1, z);
        return bz * bz * (1 + z * z);
      },
      -oracle::pi / 2, oracle::pi / 2, 2000);
  CHECK(v == doctest::Approx(0.5 * oracle::pi * a * a * axis).epsilon(0.03));
  CHECK(r.phase == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("axis reduction") {
  const auto q = tol(1e-12);
  for (double r : {0.5, 1.0, 7.0}) {
    auto s = thin_solenoid(1.3, 0.8, r);
    std::get<CircularOrbit>(s.trajectory.path).period = 0.1 * r;
    const auto res = solenoid_axis_reduction_phase(s, q);
    CHECK(res.phase == doctest::Approx(1.3 * 0.8).epsilon(1e-10));
  }
  // the integral the reduction rests on
  const double two = oracle::simpson([](double th) { return std::cos(th); }, -oracle::pi / 2, oracle::pi / 2, 200);
  CHECK(two == doctest::Approx(2.0).epsilon(1e-8));

  CHECK(solenoid_axis_reduction_phase(thin_solenoid(0.0), q).phase == 0.0);
  auto tilted = thin_solenoid();
  std::get<CircularOrbit>(tilted.trajectory.path).normal = normalized(Vec3{0, 1, 1});
  CHECK_THROWS_AS(solenoid_axis_reduction_phase(tilted, q), GeometryError);
  auto shifted = thin_solenoid();
  std::get<CircularOrbit>(shifted.trajectory.path).center = {0.3, 0, 0};
  CHECK_THROWS_AS(solenoid_axis_reduction_phase(shifted, q), GeometryError);
  auto finite = short_solenoid();
  CHECK_THROWS_AS(solenoid_axis_reduction_phase(finite, q), ValidationError);
}

TEST_CASE("Ampere reduction counts threadings") {
  const auto q = tol(1e-8);
  auto t = small_toroid(true);
  const double flux = toroid_flux(std::get<ToroidalCoil>(t.source), kNat);
  CHECK(ampere_reduction_phase(t, q).phase == doctest::Approx(flux).epsilon(1e-12));
  CHECK(ampere_reduction_phase(small_toroid(false), q).phase == 0.0);
  std::get<CircularOrbit>(t.trajectory.path).windings = 2;
  CHECK(ampere_reduction_phase(t, q).phase == doctest::Approx(2 * flux).epsilon(1e-12));
  // agrees with the flux the loop actually encloses
  const auto f = flux_phase(small_toroid(true), q);
  CHECK(f.phase == doctest::Approx(flux).epsilon(1e-4));
}

TEST_CASE("shell linking on a toroid") {
  QuadratureSpec q = tol(1e-6);
  q.closure_tol = 1e-3;
  q.seed_grid = 16;
  const auto t = small_toroid(true);
  const auto ref = ampere_reduction_phase(t, q);
  const auto r = shell_linking_phase(t, q);
  CHECK(r.converged);
  CHECK(r.phase == doctest::Approx(ref.phase).epsilon(0.01));
  CHECK(std::abs(r.phase - ref.phase) <= r.abs_error_estimate + 1e-3 * ref.phase);
}

TEST_CASE("shell linking on a finite solenoid") {
  QuadratureSpec q = tol(1e-7);
  q.closure_tol = 1e-3;
  q.seed_grid = 16;
  const auto s = short_solenoid();
  const auto f = flux_phase(s, q);
  const auto r = shell_linking_phase(s, q);
  CHECK(r.converged);
  CHECK(r.phase == doctest::Approx(f.phase).epsilon(0.02));
  CHECK(r.diagnostics.at("unclassified_fraction") <= 0.01);

  // Far off to the side only a sliver of return flux passes through the orbit.
  auto far = s;
  far.trajectory.path = CircularOrbit{{6, 0, 0}, {0, 0, 1}, 1.0, 1.0, 1};
  const auto ff = flux_phase(far, q);
  const auto rf = shell_linking_phase(far, q);
  CHECK(std::abs(rf.phase - ff.phase) <= rf.abs_error_estimate + 1e-3 * std::abs(f.phase));
  CHECK(std::abs(rf.phase) < 0.01 * f.phase);

  MagneticScenario ideal = thin_solenoid();
  CHECK_THROWS_AS(shell_linking_phase(ideal, q), ValidationError);
}

TEST_CASE("electric phases for the symmetric pair") {
  // 4 pi eps0 = 1
  const PhysicalConstants k{1.0, 1.0 / (4 * kPi), 1.0};
  ElectricScenario e{vaidman_pair(1, 1, 1, 1), k};
  CHECK(electric_potential_phase(e).phase == doctest::Approx(-2.0).epsilon(1e-14));
  ElectricScenario none{vaidman_pair(1, 0, 1, 1), k};
  CHECK(electric_potential_phase(none).phase == 0.0);
  CHECK(electric_field_overlap_phase(none, tol(1e-6)).phase == 0.0);
  ElectricScenario twice{vaidman_pair(1, 1, 1, 2), k};
  CHECK(electric_potential_phase(twice).phase == doctest::Approx(-4.0).epsilon(1e-14));

  const auto q = tol(1e-6);
  for (double r : {1.0, 3.0}) {
    ElectricScenario s{vaidman_pair(0.5, -2.0, r, 1.5), kNat};
    const double closed = -0.5 * 1.5 * 2 * (-2.0) / (4 * kPi * r);
    CHECK(electric_potential_phase(s).phase == doctest::Approx(closed).epsilon(1e-14));
    const auto f = electric_field_overlap_phase(s, q);
    CHECK(f.converged);
    CHECK(f.phase == doctest::Approx(closed).epsilon(1e-4));
  }
}

TEST_CASE("Coulomb cross energy from the fields") {
  const auto q = tol(1e-7);
  const auto e = coulomb_cross_energy(1, {0, 0, 0}, 1, {1, 0, 0}, kNat, q);
  CHECK(e.analytic == doctest::Approx(1 / (4 * oracle::pi)));
  CHECK(e.product_form == doctest::Approx(oracle::coulomb_energy(1, 1, 1, 1)).epsilon(1e-5));
  CHECK(std::abs(e.product_form - e.subtracted_form) <= 1e-10 * std::abs(e.product_form));
  CHECK(e.tail > 0);
  CHECK(e.tail < 0.05 * e.analytic);

  const auto off = coulomb_cross_energy(2, {0.3, -0.2, 1}, -0.5, {-1, 0.4, 2.5}, kNat, q);
  CHECK(off.product_form == doctest::Approx(oracle::coulomb_energy(1, 2, -0.5, norm(Vec3{1.3, -0.6, -1.5}))).epsilon(1e-5));
  const auto flipped = coulomb_cross_energy(2, {0.3, -0.2, 1}, 0.5, {-1, 0.4, 2.5}, kNat, q);
  CHECK(flipped.product_form == doctest::Approx(-off.product_form).epsilon(1e-9));

  const auto zero = coulomb_cross_energy(1, {0, 0, 0}, 0, {1, 0, 0}, kNat, q);
  CHECK(zero.product_form == 0.0);
  CHECK_THROWS_AS(coulomb_cross_energy(1, {0, 0, 0}, 1, {0, 0, 0}, kNat, q), ValidationError);

  // SI: two elementary charges a nanometre apart
  const auto si = PhysicalConstants::si();
  const double qe = 1.602176634e-19;
  const auto s = coulomb_cross_energy(qe, {0, 0, 0}, qe, {1e-9, 0, 0}, si, q);
  CHECK(s.product_form == doctest::Approx(qe * qe / (4 * oracle::pi * si.eps0 * 1e-9)).epsilon(1e-5));
}

TEST_CASE("Wilson loop is gauge invariant") {
  auto s = short_solenoid();
  const auto q = tol(1e-9);
  const auto base = wilson_loop_phase(s, q);
  for (const auto& g : builtin_gauge_family({0.4, -0.3, 0.5}, 1.2, 3.0)) {
    const auto r = wilson_loop_phase(s, q, g);
    CHECK(std::abs(r.phase - base.phase) <= 10 * q.rel_tol * std::abs(base.phase));
  }
}

TEST_CASE("orientation, winding and charge linearity") {
  const auto q = tol(1e-7);
  const auto base = thin_solenoid(0.9, 1.0);
  for (int w = -2; w <= 2; ++w) {
    const auto s = thin_solenoid(0.9, 1.0, 1.0, w);
    CHECK(wilson_loop_phase(s, q).phase == doctest::Approx(0.9 * w).epsilon(1e-7));
    CHECK(flux_phase(s, q).phase == doctest::Approx(0.9 * w).epsilon(1e-7));
    if (w != 0) CHECK(solenoid_axis_reduction_phase(s, q).phase == doctest::Approx(0.9 * w).epsilon(1e-10));
  }
  auto rev = base;
  rev.trajectory = reversed(base.trajectory);
  CHECK(field_overlap_phase(rev, q).phase == doctest::Approx(-0.9).epsilon(1e-5));
  CHECK(flux_phase(rev, q).phase == doctest::Approx(-0.9).epsilon(1e-7));

  const auto s3 = thin_solenoid(0.9, -3.0);
  CHECK(field_overlap_phase(s3, q).phase == doctest::Approx(-2.7).epsilon(1e-5));
  const auto t = small_toroid(true);
  auto t2 = t;
  t2.source = scaled_current(t.source, 2.5);
  CHECK(field_overlap_phase(t2, q).phase == doctest::Approx(2.5 * field_overlap_phase(t, q).phase).epsilon(1e-6));
}

TEST_CASE("overlap does not depend on the orbit period") {
  const auto q = tol(1e-7);
  const auto s = thin_solenoid(1.0, 1.0, 1.5);
  auto slow = s;
  slow.trajectory = with_period(s.trajectory, 10 * s.trajectory.period());
  CHECK(std::abs(field_overlap_phase(slow, q).phase - field_overlap_phase(s, q).phase) <= 1e-6);
}

TEST_CASE("sign convention: positive charge, flux along +z, counter-clockwise orbit") {
  const auto q = tol(1e-6);
  const auto s = thin_solenoid();
  CHECK(wilson_loop_phase(s, q).phase > 0);
  CHECK(flux_phase(s, q).phase > 0);
  CHECK(field_overlap_phase(s, q).phase > 0);
  CHECK(solenoid_axis_reduction_phase(s, q).phase > 0);
  MagneticScenario t = small_toroid(true);
  // orbit normal chosen so that the toroidal field threads it along +normal
  CHECK(ampere_reduction_phase(t, q).phase > 0);
  CHECK(flux_phase(t, q).phase > 0);
}

TEST_CASE("finite solenoid overlap carries a truncation bound") {
  QuadratureSpec q = tol(1e-6);
  MagneticScenario s;
  s.source = FiniteSolenoid{{0, 0, 0}, {0, 0, 1}, 0.25, 20.0, 400, 1.0};
  s.trajectory.path = CircularOrbit{{0, 0, 0}, {0, 0, 1}, 1.0, 1.0, 1};
  const auto o = field_overlap_phase(s, q);
  const auto f = flux_phase(s, q);
  CHECK(o.diagnostics.count("truncation_estimate"));
  CHECK(std::abs(o.phase - f.phase) <= o.abs_error_estimate + f.abs_error_estimate);
  CHECK(reference_flux(s, q) == doctest::Approx(solenoid_core_flux(std::get<FiniteSolenoid>(s.source), kNat)));
}
