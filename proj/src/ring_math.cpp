#include "ring_math.hpp"

#include <abphase/quadrature.hpp>
#include <abphase/simd/kernels.hpp>

#include <cmath>
#include <limits>

namespace abphase::detail {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
// Above this the trapezoid rule loses to adaptive panels clustered at phi = 0.
constexpr double kMaxTrapezoid = 2048;

// acosh(1 + delta) without cancellation.
double acosh1p(double delta) { return std::log1p(delta + std::sqrt(delta * (delta + 2))); }

}  // namespace

double trapezoid_nodes(double eta, double rel_tol) {
  if (!(eta < 1e3)) return 4;
  return std::ceil((std::log(1.0 / rel_tol) + 2.0) / (0.8 * eta));
}

RingIntegrals ring_integrals(double rho, double z, double rel_tol) {
  const double dist2 = (rho - 1) * (rho - 1) + z * z;
  const double eta = rho > 0 ? acosh1p(dist2 / (2 * rho)) : std::numeric_limits<double>::infinity();
  const double n = trapezoid_nodes(eta, rel_tol);
  if (n <= kMaxTrapezoid) {
    const auto nodes = simd::cos_nodes(static_cast<std::size_t>(std::max(n, 8.0)));
    const auto s = simd::ring_sums(rho, z, nodes);
    const double w = kTwoPi / static_cast<double>(nodes.size());
    return {s.s0 * w, s.s1 * w, s.sa * w};
  }
  // Close to the wire: the integrand peaks at phi = 0 with width ~ sqrt(dist2).
  QuadratureSpec q;
  q.rel_tol = rel_tol;
  q.abs_tol = rel_tol / std::sqrt(dist2) * 1e-2;
  q.max_subdivisions = 4000;
  const double d = std::sqrt(dist2);
  const double cuts[] = {d, 10 * d, 100 * d};
  auto r = integrate_1d_vector(
      [&](double phi, std::span<double> o) {
        const double c = std::cos(phi);
        // k - 2 rho c = dist2 + 2 rho (1 - c), the second term via sin^2 to keep digits
        const double sh = std::sin(0.5 * phi);
        const double q2 = dist2 + 4 * rho * sh * sh;
        const double inv = 1 / std::sqrt(q2);
        const double inv3 = inv * inv * inv;
        o[0] = inv3;
        o[1] = c * inv3;
        o[2] = c * inv;
      },
      3, 0.0, kTwoPi / 2, q, cuts);
  return {2 * r.value[0], 2 * r.value[1], 2 * r.value[2]};
}

SheetIntegrals sheet_integrals(double rho, double u_lo, double u_hi, double rel_tol) {
  const bool mixed = u_lo < 0 && u_hi > 0;
  const double u_eff = mixed ? 0.0 : std::min(std::abs(u_lo), std::abs(u_hi));
  const double dist2 = (rho - 1) * (rho - 1) + u_eff * u_eff;
  const double eta = rho > 0 ? acosh1p(dist2 / (2 * rho)) : std::numeric_limits<double>::infinity();
  const double n = trapezoid_nodes(eta, rel_tol);
  if (n <= kMaxTrapezoid) {
    const auto nodes = simd::cos_nodes(static_cast<std::size_t>(std::max(n, 8.0)));
    const auto s = simd::sheet_sums(rho, u_lo, u_hi, nodes);
    const double w = kTwoPi / static_cast<double>(nodes.size());
    return {s.b_rho * w, s.b_z * w};
  }
  QuadratureSpec q;
  q.rel_tol = rel_tol;
  q.abs_tol = rel_tol * 1e-2;
  q.max_subdivisions = 4000;
  const double d = std::sqrt(dist2);
  const double cuts[] = {d, 10 * d, 100 * d};
  auto h = [](double c2, double u) {
    const double s = std::sqrt(c2 + u * u);
    return 1.0 / (s * (s + u));
  };
  auto r = integrate_1d_vector(
      [&](double phi, std::span<double> o) {
        const double c = std::cos(phi);
        const double sh = std::sin(0.5 * phi);
        const double c2 = (rho - 1) * (rho - 1) + 4 * rho * sh * sh;
        const double inv_lo = 1 / std::sqrt(c2 + u_lo * u_lo);
        const double inv_hi = 1 / std::sqrt(c2 + u_hi * u_hi);
        double f;
        if (u_lo >= 0)
          f = h(c2, u_lo) - h(c2, u_hi);
        else if (u_hi <= 0)
          f = h(c2, -u_hi) - h(c2, -u_lo);
        else
          f = 2 / c2 - h(c2, u_hi) - h(c2, -u_lo);
        o[0] = c * (inv_lo - inv_hi);
        o[1] = (1 - rho * c) * f;
      },
      2, 0.0, kTwoPi / 2, q, cuts);
  return {2 * r.value[0], 2 * r.value[1]};
}

}  // namespace abphase::detail
