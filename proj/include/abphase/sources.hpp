#pragma once

#include <abphase/constants.hpp>
#include <abphase/vec3.hpp>

#include <cstddef>
#include <variant>
#include <vector>

namespace abphase {

// Field sources. Lengths in m, currents in A, flux in Wb; directions are unit vectors.

// Field (flux / pi a^2) along axis_dir inside radius a, zero outside.
struct IdealInfiniteSolenoid {
  Vec3 axis_point;
  Vec3 axis_dir{0, 0, 1};
  double radius = 1.0;
  double flux = 1.0;

  bool operator==(const IdealInfiniteSolenoid&) const = default;
};

// n_loops coaxial circular loops, cell-centred over [-L/2, L/2] along the axis.
struct FiniteSolenoid {
  Vec3 center;
  Vec3 axis_dir{0, 0, 1};
  double radius = 1.0;
  double length = 1.0;
  int n_loops = 2;
  double current = 1.0;

  bool operator==(const FiniteSolenoid&) const = default;
};

// n_turns poloidal loops of radius minor_radius centred on the major circle.
// Positive current drives the interior field counter-clockwise about plane_normal.
struct ToroidalCoil {
  Vec3 center;
  Vec3 plane_normal{0, 0, 1};
  double major_radius = 1.0;
  double minor_radius = 0.1;
  int n_turns = 100;
  double current = 1.0;

  bool operator==(const ToroidalCoil&) const = default;
};

// Current circulates counter-clockwise about normal.
struct CurrentLoop {
  Vec3 center;
  Vec3 normal{0, 0, 1};
  double radius = 1.0;
  double current = 1.0;

  bool operator==(const CurrentLoop&) const = default;
};

struct PolylineCurrent {
  std::vector<Vec3> vertices;
  double current = 1.0;
  bool closed = true;

  bool operator==(const PolylineCurrent&) const = default;
};

using CurrentSource =
    std::variant<IdealInfiniteSolenoid, FiniteSolenoid, ToroidalCoil, CurrentLoop, PolylineCurrent>;

void validate(const CurrentSource& source);
double characteristic_size(const CurrentSource& source);
Vec3 source_center(const CurrentSource& source);
// Radius of a ball about source_center holding all current (the core radius
// for the ideal solenoid).
double source_extent(const CurrentSource& source);
CurrentSource scaled_current(const CurrentSource& source, double factor);

std::vector<CurrentLoop> finite_solenoid_loops(const FiniteSolenoid& s);
std::vector<CurrentLoop> toroid_loops(const ToroidalCoil& c);

// Flux of the winding-averaged field mu0 N I / (2 pi rho) through the tube
// cross-section. Reduces to mu0 N I b^2 / 2R for a thin tube.
double toroid_flux(const ToroidalCoil& c, const PhysicalConstants& k);

// Core flux mu0 (N/L) I pi a^2 of the infinitely long solenoid with the same winding density.
double solenoid_core_flux(const FiniteSolenoid& s, const PhysicalConstants& k);

// Test-particle trajectories. Time in s.

// windings = +1 is one counter-clockwise turn about normal during the period;
// negative values run clockwise, zero parks the charge at center + radius * e1.
struct CircularOrbit {
  Vec3 center;
  Vec3 normal{0, 0, 1};
  double radius = 1.0;
  double period = 1.0;
  int windings = 1;

  bool operator==(const CircularOrbit&) const = default;
};

// Closed polygon v0 -> v1 -> ... -> v0 with one duration per edge; uniform speed per edge.
struct PiecewiseLinearLoop {
  std::vector<Vec3> vertices;
  std::vector<double> durations;

  bool operator==(const PiecewiseLinearLoop&) const = default;
};

struct ChargeTrajectory {
  double charge = 1.0;
  std::variant<CircularOrbit, PiecewiseLinearLoop> path;

  double period() const;
  bool operator==(const ChargeTrajectory&) const = default;
};

struct TrajectorySample {
  Vec3 position;
  Vec3 velocity;
};

void validate(const ChargeTrajectory& tr);
TrajectorySample trajectory_sample(const ChargeTrajectory& tr, double t);
// Times in [0, T] where the velocity may jump, including both ends, ascending.
std::vector<double> trajectory_breakpoints(const ChargeTrajectory& tr);
// Spatial image as a closed polygon (first vertex not repeated).
std::vector<Vec3> trajectory_polyline(const ChargeTrajectory& tr, std::size_t points_per_turn = 256);
Vec3 trajectory_centroid(const ChargeTrajectory& tr);
ChargeTrajectory reversed(const ChargeTrajectory& tr);
ChargeTrajectory with_period(const ChargeTrajectory& tr, double period);
ChargeTrajectory with_charge(const ChargeTrajectory& tr, double q);

// Electrostatic configurations (charges in C).

struct PointCharge {
  double charge = 1.0;
  Vec3 position;

  bool operator==(const PointCharge&) const = default;
};

struct StaticChargeConfig {
  std::vector<PointCharge> external;
  PointCharge test;
  double dwell_time = 1.0;

  bool operator==(const StaticChargeConfig&) const = default;
};

void validate(const StaticChargeConfig& cfg);
// Two charges Q at +-r along y around the test charge q at the origin.
StaticChargeConfig vaidman_pair(double q, double big_q, double r, double dwell_time);

}  // namespace abphase
