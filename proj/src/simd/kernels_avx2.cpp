#include <abphase/simd/kernels.hpp>

#include <immintrin.h>

#include <cmath>
#include <cstddef>

namespace abphase::simd::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline __m256d h_term(__m256d c2, __m256d u) {
  const __m256d s = _mm256_sqrt_pd(_mm256_fmadd_pd(u, u, c2));
  return _mm256_div_pd(_mm256_set1_pd(1.0), _mm256_mul_pd(s, _mm256_add_pd(s, u)));
}

}  // namespace

RingSums ring_sums(double rho, double z, std::span<const double> cos_table) {
  const __m256d k = _mm256_set1_pd(rho * rho + 1.0 + z * z);
  const __m256d neg_two_rho = _mm256_set1_pd(-2.0 * rho);
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  __m256d sa = _mm256_setzero_pd();
  const double* c_ptr = cos_table.data();
  const std::size_t n = cos_table.size();
  for (std::size_t j = 0; j < n; j += 4) {
    const __m256d c = _mm256_loadu_pd(c_ptr + j);
    const __m256d q = _mm256_fmadd_pd(neg_two_rho, c, k);
    const __m256d inv = _mm256_div_pd(one, _mm256_sqrt_pd(q));
    const __m256d inv3 = _mm256_mul_pd(_mm256_mul_pd(inv, inv), inv);
    s0 = _mm256_add_pd(s0, inv3);
    s1 = _mm256_fmadd_pd(c, inv3, s1);
    sa = _mm256_fmadd_pd(c, inv, sa);
  }
  return {hsum(s0), hsum(s1), hsum(sa)};
}

SheetSums sheet_sums(double rho, double u_lo, double u_hi, std::span<const double> cos_table) {
  const __m256d k = _mm256_set1_pd(rho * rho + 1.0);
  const __m256d neg_two_rho = _mm256_set1_pd(-2.0 * rho);
  const __m256d neg_rho = _mm256_set1_pd(-rho);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d ulo2 = _mm256_set1_pd(u_lo * u_lo);
  const __m256d uhi2 = _mm256_set1_pd(u_hi * u_hi);
  const __m256d alo = _mm256_set1_pd(std::abs(u_lo));
  const __m256d ahi = _mm256_set1_pd(std::abs(u_hi));
  const int mode = u_lo >= 0.0 ? 0 : (u_hi <= 0.0 ? 1 : 2);
  __m256d b_rho = _mm256_setzero_pd();
  __m256d b_z = _mm256_setzero_pd();
  const double* c_ptr = cos_table.data();
  const std::size_t n = cos_table.size();
  for (std::size_t j = 0; j < n; j += 4) {
    const __m256d c = _mm256_loadu_pd(c_ptr + j);
    const __m256d c2 = _mm256_fmadd_pd(neg_two_rho, c, k);
    const __m256d inv_lo = _mm256_div_pd(one, _mm256_sqrt_pd(_mm256_add_pd(c2, ulo2)));
    const __m256d inv_hi = _mm256_div_pd(one, _mm256_sqrt_pd(_mm256_add_pd(c2, uhi2)));
    __m256d f;
    if (mode == 0) {
      f = _mm256_sub_pd(h_term(c2, alo), h_term(c2, ahi));
    } else if (mode == 1) {
      f = _mm256_sub_pd(h_term(c2, ahi), h_term(c2, alo));
    } else {
      f = _mm256_sub_pd(_mm256_sub_pd(_mm256_div_pd(two, c2), h_term(c2, ahi)), h_term(c2, alo));
    }
    b_rho = _mm256_fmadd_pd(c, _mm256_sub_pd(inv_lo, inv_hi), b_rho);
    b_z = _mm256_fmadd_pd(_mm256_fmadd_pd(neg_rho, c, one), f, b_z);
  }
  return {hsum(b_rho), hsum(b_z)};
}

SegmentSums segment_sums(double px, double py, double pz, const SegmentBatch& segs) {
  const std::size_t n = segs.size();
  const std::size_t n4 = n - n % 4;
  const __m256d vpx = _mm256_set1_pd(px);
  const __m256d vpy = _mm256_set1_pd(py);
  const __m256d vpz = _mm256_set1_pd(pz);
  __m256d bx = _mm256_setzero_pd(), by = _mm256_setzero_pd(), bz = _mm256_setzero_pd();
  __m256d ax = _mm256_setzero_pd(), ay = _mm256_setzero_pd(), az = _mm256_setzero_pd();
  alignas(32) double ratio[4];
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d sax = _mm256_loadu_pd(&segs.ax[i]);
    const __m256d say = _mm256_loadu_pd(&segs.ay[i]);
    const __m256d saz = _mm256_loadu_pd(&segs.az[i]);
    const __m256d sbx = _mm256_loadu_pd(&segs.bx[i]);
    const __m256d sby = _mm256_loadu_pd(&segs.by[i]);
    const __m256d sbz = _mm256_loadu_pd(&segs.bz[i]);
    const __m256d r1x = _mm256_sub_pd(vpx, sax), r1y = _mm256_sub_pd(vpy, say), r1z = _mm256_sub_pd(vpz, saz);
    const __m256d r2x = _mm256_sub_pd(vpx, sbx), r2y = _mm256_sub_pd(vpy, sby), r2z = _mm256_sub_pd(vpz, sbz);
    const __m256d dx = _mm256_sub_pd(sbx, sax), dy = _mm256_sub_pd(sby, say), dz = _mm256_sub_pd(sbz, saz);
    const __m256d len = _mm256_sqrt_pd(
        _mm256_fmadd_pd(dx, dx, _mm256_fmadd_pd(dy, dy, _mm256_mul_pd(dz, dz))));
    const __m256d n1 = _mm256_sqrt_pd(
        _mm256_fmadd_pd(r1x, r1x, _mm256_fmadd_pd(r1y, r1y, _mm256_mul_pd(r1z, r1z))));
    const __m256d n2 = _mm256_sqrt_pd(
        _mm256_fmadd_pd(r2x, r2x, _mm256_fmadd_pd(r2y, r2y, _mm256_mul_pd(r2z, r2z))));
    const __m256d r12 =
        _mm256_fmadd_pd(r1x, r2x, _mm256_fmadd_pd(r1y, r2y, _mm256_mul_pd(r1z, r2z)));
    const __m256d sum = _mm256_add_pd(n1, n2);
    const __m256d n12 = _mm256_mul_pd(n1, n2);
    const __m256d fb = _mm256_div_pd(sum, _mm256_mul_pd(n12, _mm256_add_pd(n12, r12)));
    const __m256d cx = _mm256_fmsub_pd(dy, r1z, _mm256_mul_pd(dz, r1y));
    const __m256d cy = _mm256_fmsub_pd(dz, r1x, _mm256_mul_pd(dx, r1z));
    const __m256d cz = _mm256_fmsub_pd(dx, r1y, _mm256_mul_pd(dy, r1x));
    bx = _mm256_fmadd_pd(fb, cx, bx);
    by = _mm256_fmadd_pd(fb, cy, by);
    bz = _mm256_fmadd_pd(fb, cz, bz);
    _mm256_store_pd(ratio, _mm256_div_pd(_mm256_add_pd(sum, len), _mm256_sub_pd(sum, len)));
    // No vector log in the baseline toolchain; four scalar calls per block.
    const __m256d lg = _mm256_set_pd(std::log(ratio[3]), std::log(ratio[2]), std::log(ratio[1]),
                                     std::log(ratio[0]));
    const __m256d fa = _mm256_div_pd(lg, len);
    ax = _mm256_fmadd_pd(fa, dx, ax);
    ay = _mm256_fmadd_pd(fa, dy, ay);
    az = _mm256_fmadd_pd(fa, dz, az);
  }
  SegmentSums out{hsum(bx), hsum(by), hsum(bz), hsum(ax), hsum(ay), hsum(az)};
  if (n4 < n) {
    SegmentBatch tail;
    for (std::size_t i = n4; i < n; ++i)
      tail.push(segs.ax[i], segs.ay[i], segs.az[i], segs.bx[i], segs.by[i], segs.bz[i]);
    const SegmentSums t = scalar::segment_sums(px, py, pz, tail);
    out.bx += t.bx;
    out.by += t.by;
    out.bz += t.bz;
    out.ax += t.ax;
    out.ay += t.ay;
    out.az += t.az;
  }
  return out;
}

}  // namespace abphase::simd::avx2
