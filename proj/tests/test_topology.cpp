#include "oracles.hpp"

#include <abphase/errors.hpp>
#include <abphase/fields.hpp>
#include <abphase/topology.hpp>

#include <doctest.h>

#include <random>

using namespace abphase;

namespace {

std::vector<Vec3> circle(const Vec3& c, const Vec3& n, double r, int pts, int turns = 1) {
  Vec3 e1, e2;
  orthonormal_basis(normalized(n), e1, e2);
  std::vector<Vec3> out;
  for (int i = 0; i < pts; ++i) {
    const double t = 2 * kPi * turns * i / pts;
    out.push_back(c + r * (std::cos(t) * e1 + std::sin(t) * e2));
  }
  return out;
}

std::vector<Vec3> rigid(const std::vector<Vec3>& c, const Vec3& axis, double angle, const Vec3& shift) {
  std::vector<Vec3> out;
  for (const auto& p : c) out.push_back(rotate_about(p, normalized(axis), angle) + shift);
  return out;
}

}  // namespace

TEST_CASE("winding numbers") {
  const auto ccw = circle({0, 0, 0}, {0, 0, 1}, 1, 64);
  CHECK(winding_number(ccw, {0, 0, 0}, {0, 0, 1}) == 1);
  std::vector<Vec3> cw(ccw.rbegin(), ccw.rend());
  CHECK(winding_number(cw, {0, 0, 0}, {0, 0, 1}) == -1);
  CHECK(winding_number(circle({0, 0, 0}, {0, 0, 1}, 1, 64, 3), {0, 0, 0}, {0, 0, 1}) == 3);
  CHECK(winding_number(ccw, {5, 0, 0}, {0, 0, 1}) == 0);
  // figure eight: lobes around x = +-1, axis through one lobe... and one traversed each way encircling the axis
  std::vector<Vec3> eight;
  for (int i = 0; i < 200; ++i) {
    const double t = 2 * kPi * i / 200;
    eight.push_back({std::sin(t), std::sin(t) * std::cos(t), 0});
  }
  CHECK(winding_number(eight, {0.5, 0, 0}, {0, 0, 1}) + winding_number(eight, {-0.5, 0, 0}, {0, 0, 1}) == 0);
  CHECK(std::abs(winding_number(eight, {0.5, 0, 0}, {0, 0, 1})) == 1);
  CHECK_THROWS_AS(winding_number(ccw, {1, 0, 0}, {0, 0, 1}), GeometryError);
}

TEST_CASE("linking numbers") {
  const auto a = circle({0, 0, 0}, {0, 0, 1}, 1, 100);
  const auto far = circle({5, 0, 0.3}, {0, 0, 1}, 1, 100);
  CHECK(linking_number(a, far) == 0);
  const auto hopf = circle({1, 0, 0}, {0, 1, 0}, 1, 100);
  const int l = linking_number(a, hopf);
  CHECK(std::abs(l) == 1);
  CHECK(linking_number(hopf, a) == l);
  std::vector<Vec3> rev(hopf.rbegin(), hopf.rend());
  CHECK(linking_number(a, rev) == -l);
  CHECK(linking_number(rigid(a, {1, 2, 3}, 0.7, {4, -1, 2}), rigid(hopf, {1, 2, 3}, 0.7, {4, -1, 2})) == l);
  CHECK(linking_number(a, circle({1, 0, 0}, {0, 1, 0}, 0.5, 80, 2)) == 2 * l);
  CHECK_THROWS_AS(linking_number(a, circle({1, 0, 0}, {0, 1, 0}, 0.0 + 1e-16, 3)), GeometryError);
}

TEST_CASE("linking sign agrees with Ampere's law") {
  // Current along a; circulation of its field around b equals mu0 I Lk(a, b).
  const auto a = circle({0, 0, 0}, {0, 0, 1}, 1, 400);
  const auto b = circle({1, 0, 0}, {0, 1, 0}, 0.3, 400);
  PolylineCurrent p;
  p.vertices = a;
  const FieldEvaluator f(p, PhysicalConstants::natural());
  double circ = 0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const Vec3 m = 0.5 * (b[i] + b[(i + 1) % b.size()]);
    circ += dot(f.b(m), b[(i + 1) % b.size()] - b[i]);
  }
  CHECK(circ == doctest::Approx(linking_number(a, b)).epsilon(1e-3));
}

TEST_CASE("simplification keeps linking") {
  const auto a = circle({0, 0, 0}, {0, 0, 1}, 1, 2000);
  const auto b = circle({1, 0, 0}, {0, 1, 0}, 0.5, 50);
  auto tolf = [&](const Vec3& p) {
    double d = 1e300;
    for (const auto& q : b) d = std::min(d, norm(p - q));
    return 0.4 * d;
  };
  const auto s = simplify_closed_polyline(a, tolf);
  CHECK(s.size() < a.size() / 4);
  CHECK(linking_number(s, b) == linking_number(a, b));
}

TEST_CASE("toroid field line closes on a circle") {
  ToroidalCoil t;
  t.major_radius = 1.0;
  t.minor_radius = 0.1;
  t.n_turns = 200;
  QuadratureSpec q;
  q.closure_tol = 1e-6;
  const auto line = trace_field_line(t, {1.02, 0, 0}, PhysicalConstants::natural(), q);
  CHECK(line.closed);
  CHECK(line.closure_gap <= 1e-6 * 1.02);
  CHECK(line.arclength == doctest::Approx(2 * kPi * 1.02).epsilon(1e-3));
  double rmax = 0, rmin = 1e9;
  for (const auto& p : line.points) {
    rmax = std::max(rmax, std::hypot(p.x, p.y));
    rmin = std::min(rmin, std::hypot(p.x, p.y));
  }
  CHECK(rmax - rmin < 1e-3);
}

TEST_CASE("ideal solenoid line runs to the arclength cap") {
  IdealInfiniteSolenoid s;
  QuadratureSpec q;
  q.max_arclength = 20;
  const auto line = trace_field_line(s, {0.2, 0.1, 0}, PhysicalConstants::natural(), q);
  CHECK_FALSE(line.closed);
  CHECK(line.arclength == doctest::Approx(20));
  CHECK(line.points.back().z == doctest::Approx(20));
  CHECK(line.points.back().x == doctest::Approx(0.2));
  CHECK_THROWS_AS(trace_field_line(s, {2, 0, 0}, PhysicalConstants::natural(), q), NumericalError);
}

TEST_CASE("finite solenoid line closes through both ends") {
  FiniteSolenoid s;
  s.radius = 1;
  s.length = 6;
  s.n_loops = 60;
  QuadratureSpec q;
  q.closure_tol = 1e-5;
  const auto k = PhysicalConstants::natural();
  const FieldEvaluator f(s, k);
  const auto line = trace_field_line(f, {0.3, 0, 0}, q);
  REQUIRE(line.closed);
  double zmax = -1e9, zmin = 1e9, rmax = 0;
  for (const auto& p : line.points) {
    zmax = std::max(zmax, p.z);
    zmin = std::min(zmin, p.z);
    rmax = std::max(rmax, std::hypot(p.x, p.y));
  }
  CHECK(zmax > 3);
  CHECK(zmin < -3);
  CHECK(rmax > 1);
  // The line links every turn: circulation is mu0 N I.
  double circ = 0;
  const auto& p = line.points;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Vec3& a = p[i];
    const Vec3& b = p[(i + 1) % p.size()];
    // Simpson on each chord
    circ += dot(f.b(a) + 4 * f.b(0.5 * (a + b)) + f.b(b), b - a) / 6;
  }
  CHECK(circ == doctest::Approx(60.0).epsilon(1e-4));
}
