#include <abphase/simd/kernels.hpp>

#include <cmath>

namespace abphase::simd {

void SegmentBatch::push(double x0, double y0, double z0, double x1, double y1, double z1) {
  ax.push_back(x0);
  ay.push_back(y0);
  az.push_back(z0);
  bx.push_back(x1);
  by.push_back(y1);
  bz.push_back(z1);
}

namespace scalar {

RingSums ring_sums(double rho, double z, std::span<const double> cos_table) {
  const double k = rho * rho + 1.0 + z * z;
  const double two_rho = 2.0 * rho;
  RingSums out;
  for (double c : cos_table) {
    const double q = k - two_rho * c;
    const double inv = 1.0 / std::sqrt(q);
    const double inv3 = inv * inv * inv;
    out.s0 += inv3;
    out.s1 += c * inv3;
    out.sa += c * inv;
  }
  return out;
}

namespace {

// 1/(s (s + u)) with s = sqrt(c2 + u^2), u >= 0.
inline double h_term(double c2, double u) {
  const double s = std::sqrt(c2 + u * u);
  return 1.0 / (s * (s + u));
}

}  // namespace

SheetSums sheet_sums(double rho, double u_lo, double u_hi, std::span<const double> cos_table) {
  const double k = rho * rho + 1.0;
  const double two_rho = 2.0 * rho;
  const double ulo2 = u_lo * u_lo;
  const double uhi2 = u_hi * u_hi;
  const double alo = std::abs(u_lo);
  const double ahi = std::abs(u_hi);
  SheetSums out;
  for (double c : cos_table) {
    const double c2 = k - two_rho * c;
    const double inv_lo = 1.0 / std::sqrt(c2 + ulo2);
    const double inv_hi = 1.0 / std::sqrt(c2 + uhi2);
    double f;
    if (u_lo >= 0.0) {
      f = h_term(c2, alo) - h_term(c2, ahi);
    } else if (u_hi <= 0.0) {
      f = h_term(c2, ahi) - h_term(c2, alo);
    } else {
      f = 2.0 / c2 - h_term(c2, ahi) - h_term(c2, alo);
    }
    out.b_rho += c * (inv_lo - inv_hi);
    out.b_z += (1.0 - rho * c) * f;
  }
  return out;
}

SegmentSums segment_sums(double px, double py, double pz, const SegmentBatch& segs) {
  SegmentSums out;
  const std::size_t n = segs.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double r1x = px - segs.ax[i], r1y = py - segs.ay[i], r1z = pz - segs.az[i];
    const double r2x = px - segs.bx[i], r2y = py - segs.by[i], r2z = pz - segs.bz[i];
    const double dx = segs.bx[i] - segs.ax[i];
    const double dy = segs.by[i] - segs.ay[i];
    const double dz = segs.bz[i] - segs.az[i];
    const double len = std::sqrt(dx * dx + dy * dy + dz * dz);
    const double n1 = std::sqrt(r1x * r1x + r1y * r1y + r1z * r1z);
    const double n2 = std::sqrt(r2x * r2x + r2y * r2y + r2z * r2z);
    const double r12 = r1x * r2x + r1y * r2y + r1z * r2z;
    const double sum = n1 + n2;
    const double fb = sum / (n1 * n2 * (n1 * n2 + r12));
    out.bx += fb * (dy * r1z - dz * r1y);
    out.by += fb * (dz * r1x - dx * r1z);
    out.bz += fb * (dx * r1y - dy * r1x);
    const double fa = std::log((sum + len) / (sum - len)) / len;
    out.ax += fa * dx;
    out.ay += fa * dy;
    out.az += fa * dz;
  }
  return out;
}

}  // namespace scalar
}  // namespace abphase::simd
