#pragma once

// Azimuthal integrals for circular filaments and finite current sheets in
// units of the radius. Trapezoid sums when the point is far enough from the
// filament for a modest node count, adaptive Gauss-Kronrod otherwise.

namespace abphase::detail {

// Integrals over phi in [0, 2 pi) of 1/d^3, cos/d^3 and cos/d,
// d^2 = rho^2 + 1 + z^2 - 2 rho cos.
struct RingIntegrals {
  double i0 = 0.0, i1 = 0.0, ia = 0.0;
};
RingIntegrals ring_integrals(double rho, double z, double rel_tol);

// Axially integrated sheet field kernels, see simd::sheet_sums.
struct SheetIntegrals {
  double b_rho = 0.0, b_z = 0.0;
};
SheetIntegrals sheet_integrals(double rho, double u_lo, double u_hi, double rel_tol);

// Node count for a periodic trapezoid rule reaching rel_tol when the nearest
// complex singularity sits at imaginary distance eta.
double trapezoid_nodes(double eta, double rel_tol);

}  // namespace abphase::detail
