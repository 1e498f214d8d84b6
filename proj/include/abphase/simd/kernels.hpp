#pragma once

// Data-parallel inner loops of the field evaluators.
//
// Every kernel exists as a scalar reference and, on x86-64, an AVX2+FMA
// variant. The active variant is picked once at runtime from the CPU
// feature bits; ABPHASE_SIMD=scalar|avx2 in the environment overrides it.
// Both variants must agree to rounding (see tests/test_simd_kernels.cpp).

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace abphase::simd {

enum class Level { Scalar, Avx2 };

std::string_view to_string(Level l);
bool level_supported(Level l);
Level detected_level();
Level active_level();
// Test hook; throws if the level is not supported on this machine.
void set_active_level(Level l);

// Circular filament of unit radius in the z=0 plane, point at (rho, 0, z).
// Sums over the trapezoid nodes phi_j with c_j = cos(phi_j), d_j^2 = K - 2 rho c_j,
// K = rho^2 + 1 + z^2:
//   s0 = sum 1/d^3, s1 = sum c/d^3, sa = sum c/d.
struct RingSums {
  double s0 = 0.0;
  double s1 = 0.0;
  double sa = 0.0;
};

// Finite cylindrical current sheet of unit radius, point at (rho, 0, z);
// u_lo = z - z_top, u_hi = z - z_bottom. The axial integral is done in closed
// form; what remains is summed over the azimuthal nodes.
//   b_rho = sum c (1/s_lo - 1/s_hi),  b_z = sum (1 - rho c) F(c)
struct SheetSums {
  double b_rho = 0.0;
  double b_z = 0.0;
};

// Straight segments in structure-of-arrays layout.
struct SegmentBatch {
  std::vector<double> ax, ay, az;
  std::vector<double> bx, by, bz;

  std::size_t size() const { return ax.size(); }
  void push(double x0, double y0, double z0, double x1, double y1, double z1);
};

// Closed-form Biot-Savart field and vector potential of every segment at p,
// for unit current with the mu0/4pi prefactor stripped.
struct SegmentSums {
  double bx = 0.0, by = 0.0, bz = 0.0;
  double ax = 0.0, ay = 0.0, az = 0.0;
};

// cos_table.size() must be a multiple of 4.
RingSums ring_sums(double rho, double z, std::span<const double> cos_table);
SheetSums sheet_sums(double rho, double u_lo, double u_hi, std::span<const double> cos_table);
SegmentSums segment_sums(double px, double py, double pz, const SegmentBatch& segs);

namespace scalar {
RingSums ring_sums(double rho, double z, std::span<const double> cos_table);
SheetSums sheet_sums(double rho, double u_lo, double u_hi, std::span<const double> cos_table);
SegmentSums segment_sums(double px, double py, double pz, const SegmentBatch& segs);
}  // namespace scalar

#if defined(ABPHASE_HAVE_AVX2)
namespace avx2 {
RingSums ring_sums(double rho, double z, std::span<const double> cos_table);
SheetSums sheet_sums(double rho, double u_lo, double u_hi, std::span<const double> cos_table);
SegmentSums segment_sums(double px, double py, double pz, const SegmentBatch& segs);
}  // namespace avx2
#endif

// Trapezoid node tables cos(2 pi j / n) for n on a fixed ladder of multiples
// of 4. Returns the smallest ladder size >= n (capped at max_nodes()).
std::span<const double> cos_nodes(std::size_t n);
std::size_t max_nodes();

}  // namespace abphase::simd
