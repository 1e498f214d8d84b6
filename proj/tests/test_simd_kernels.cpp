#include <abphase/simd/kernels.hpp>

#include <doctest.h>

#include <cmath>
#include <random>

using namespace abphase::simd;

namespace {

bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

// Rounding scale of the sheet sums: term magnitudes plus their sensitivity to
// the rounding of c^2 = rho^2 + 1 - 2 rho c, which dominates near the wall
// (fused and unfused evaluation of c^2 legitimately differ there).
void sheet_scales(double rho, double u_lo, double u_hi, std::span<const double> nodes, double& s_rho, double& s_z) {
  s_rho = s_z = 0;
  for (double c : nodes) {
    const double c2 = rho * rho + 1 - 2 * rho * c;
    const double dc2 = rho * rho + 1 + 2 * rho * std::abs(c);
    const double slo = std::sqrt(c2 + u_lo * u_lo), shi = std::sqrt(c2 + u_hi * u_hi);
    s_rho += std::abs(c) * (1 / slo + 1 / shi + dc2 / (2 * slo * slo * slo) + dc2 / (2 * shi * shi * shi));
    s_z += std::abs(1 - rho * c) * 2 / c2 * (1 + dc2 / c2);
  }
}

}  // namespace

TEST_CASE("node ladder") {
  CHECK(cos_nodes(1).size() == 8);
  CHECK(cos_nodes(8).size() == 8);
  CHECK(cos_nodes(9).size() == 12);
  CHECK(cos_nodes(13).size() == 16);
  CHECK(cos_nodes(1u << 30).size() == max_nodes());
  const auto t = cos_nodes(24);
  CHECK(t[0] == 1.0);
  CHECK(t[6] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(t[12] == doctest::Approx(-1.0));
}

#if defined(ABPHASE_HAVE_AVX2)
TEST_CASE("avx2 kernels agree with the scalar reference") {
  if (!level_supported(Level::Avx2)) return;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> rho(0.0, 3.0), z(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double r = rho(rng), zz = z(rng);
    const auto nodes = cos_nodes(8 + static_cast<std::size_t>(trial % 40) * 4);
    const auto s = scalar::ring_sums(r, zz, nodes);
    const auto v = avx2::ring_sums(r, zz, nodes);
    CHECK(rel_close(s.s0, v.s0, 1e-13));
    CHECK(rel_close(s.s1, v.s1, 1e-12));
    CHECK(rel_close(s.sa, v.sa, 1e-12));

    const double ulo = zz - 1.0, uhi = zz + 1.5;
    const auto a = scalar::sheet_sums(r, ulo, uhi, nodes);
    const auto b = avx2::sheet_sums(r, ulo, uhi, nodes);
    double sr, sz;
    sheet_scales(r, ulo, uhi, nodes, sr, sz);
    CHECK(std::abs(a.b_rho - b.b_rho) <= 1e-13 * sr);
    CHECK(std::abs(a.b_z - b.b_z) <= 1e-13 * sz);
  }
  SegmentBatch segs;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 37; ++i) segs.push(u(rng), u(rng), u(rng), u(rng), u(rng), u(rng));
  for (int trial = 0; trial < 50; ++trial) {
    const double px = 3 * u(rng), py = 3 * u(rng), pz = 3 + u(rng);
    const auto s = scalar::segment_sums(px, py, pz, segs);
    const auto v = avx2::segment_sums(px, py, pz, segs);
    const double bs = std::hypot(s.bx, s.by, s.bz), as = std::hypot(s.ax, s.ay, s.az);
    CHECK(std::abs(s.bx - v.bx) <= 1e-13 * bs);
    CHECK(std::abs(s.by - v.by) <= 1e-13 * bs);
    CHECK(std::abs(s.bz - v.bz) <= 1e-13 * bs);
    CHECK(std::abs(s.ax - v.ax) <= 1e-13 * as);
    CHECK(std::abs(s.ay - v.ay) <= 1e-13 * as);
    CHECK(std::abs(s.az - v.az) <= 1e-13 * as);
  }
}

TEST_CASE("dispatch honours the requested level") {
  const Level before = active_level();
  set_active_level(Level::Scalar);
  CHECK(active_level() == Level::Scalar);
  if (level_supported(Level::Avx2)) {
    set_active_level(Level::Avx2);
    CHECK(active_level() == Level::Avx2);
  }
  set_active_level(before);
}
#endif
