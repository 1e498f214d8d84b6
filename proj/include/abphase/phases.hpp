#pragma once

#include <abphase/constants.hpp>
#include <abphase/fields.hpp>
#include <abphase/phase_result.hpp>
#include <abphase/quadrature.hpp>
#include <abphase/sources.hpp>

#include <optional>

namespace abphase {

struct MagneticScenario {
  CurrentSource source;
  ChargeTrajectory trajectory;
  PhysicalConstants constants;
};

struct ElectricScenario {
  StaticChargeConfig config;
  PhysicalConstants constants;
};

// Flux used to normalise magnetic phases: the core flux of the solenoid (or of
// the infinitely long solenoid with the same winding density), the toroid tube
// flux, and the flux through the loop for everything else.
double reference_flux(const MagneticScenario& s, const QuadratureSpec& spec);

// (q / hbar) times the loop integral of A, optionally in a shifted gauge.
PhaseResult wilson_loop_phase(const MagneticScenario& s, const QuadratureSpec& spec,
                              const std::optional<GaugeFunction>& gauge = std::nullopt);

PhaseResult flux_phase(const MagneticScenario& s, const QuadratureSpec& spec);

// (1 / mu0 hbar) int dt int B . dB over the field support, dB being the field
// of the moving test charge. With self_term the magnitude of the neglected
// (1 / 2 mu0 hbar) int dt int dB . dB over the same region is added to the
// diagnostics.
PhaseResult field_overlap_phase(const MagneticScenario& s, const QuadratureSpec& spec, bool self_term = false);

// Thin-solenoid limit: the whole flux tube sits on the axis and only dB_z
// there matters. Needs an ideal solenoid and a coaxial circular orbit.
PhaseResult solenoid_axis_reduction_phase(const MagneticScenario& s, const QuadratureSpec& spec);

// Toroid: the orbit is a current threading the coil, q per linking of the
// orbit with the major circle.
PhaseResult ampere_reduction_phase(const MagneticScenario& s, const QuadratureSpec& spec);

// Sum over traced field lines of their flux times their linking number with the orbit.
PhaseResult shell_linking_phase(const MagneticScenario& s, const QuadratureSpec& spec);

// -(q T / hbar) times the potential of the external charges at the test charge.
PhaseResult electric_potential_phase(const ElectricScenario& s);

// -(T / hbar) eps0 int E_Q . dE over all space.
PhaseResult electric_field_overlap_phase(const ElectricScenario& s, const QuadratureSpec& spec);

struct CoulombEnergy {
  double product_form = 0.0;     // eps0 int E1 . E2
  double subtracted_form = 0.0;  // (eps0 / 2) int (E^2 - E1^2 - E2^2)
  double analytic = 0.0;         // q1 q2 / (4 pi eps0 d)
  double tail = 0.0;             // exact contribution from outside the integration ball
  double error = 0.0;
  std::int64_t n_evals = 0;
  bool converged = false;
};

CoulombEnergy coulomb_cross_energy(double q1, const Vec3& x1, double q2, const Vec3& x2,
                                   const PhysicalConstants& k, const QuadratureSpec& spec);

}  // namespace abphase
