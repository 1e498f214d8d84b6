#include <abphase/errors.hpp>
#include <abphase/simd/kernels.hpp>

#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

namespace abphase::simd {

std::string_view to_string(Level l) { return l == Level::Avx2 ? "avx2" : "scalar"; }

bool level_supported(Level l) {
  if (l == Level::Scalar) return true;
#if defined(ABPHASE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Level detected_level() {
  if (const char* env = std::getenv("ABPHASE_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Level::Scalar;
    if (v == "avx2" && level_supported(Level::Avx2)) return Level::Avx2;
  }
  return level_supported(Level::Avx2) ? Level::Avx2 : Level::Scalar;
}

namespace {

std::atomic<Level>& active() {
  static std::atomic<Level> level{detected_level()};
  return level;
}

}  // namespace

Level active_level() { return active().load(std::memory_order_relaxed); }

void set_active_level(Level l) {
  if (!level_supported(l))
    throw ValidationError("SIMD level '" + std::string(to_string(l)) + "' not supported here");
  active().store(l, std::memory_order_relaxed);
}

RingSums ring_sums(double rho, double z, std::span<const double> cos_table) {
#if defined(ABPHASE_HAVE_AVX2)
  if (active_level() == Level::Avx2) return avx2::ring_sums(rho, z, cos_table);
#endif
  return scalar::ring_sums(rho, z, cos_table);
}

SheetSums sheet_sums(double rho, double u_lo, double u_hi, std::span<const double> cos_table) {
#if defined(ABPHASE_HAVE_AVX2)
  if (active_level() == Level::Avx2) return avx2::sheet_sums(rho, u_lo, u_hi, cos_table);
#endif
  return scalar::sheet_sums(rho, u_lo, u_hi, cos_table);
}

SegmentSums segment_sums(double px, double py, double pz, const SegmentBatch& segs) {
#if defined(ABPHASE_HAVE_AVX2)
  if (active_level() == Level::Avx2) return avx2::segment_sums(px, py, pz, segs);
#endif
  return scalar::segment_sums(px, py, pz, segs);
}

namespace {

// 8, 12, 16, 24, 32, 48, ... alternating x1.5 and x4/3, up to 2^20.
constexpr std::size_t kLadderSize = 35;

constexpr std::array<std::size_t, kLadderSize> make_ladder() {
  std::array<std::size_t, kLadderSize> out{};
  std::size_t p = 8;
  for (std::size_t i = 0; i < kLadderSize; i += 2) {
    out[i] = p;
    if (i + 1 < kLadderSize) out[i + 1] = p + p / 2;
    p *= 2;
  }
  return out;
}

constexpr auto kLadder = make_ladder();

struct NodeCache {
  std::array<std::once_flag, kLadderSize> once;
  std::array<std::unique_ptr<std::vector<double>>, kLadderSize> tables;
};

NodeCache& cache() {
  static NodeCache c;
  return c;
}

}  // namespace

std::size_t max_nodes() { return kLadder.back(); }

std::span<const double> cos_nodes(std::size_t n) {
  std::size_t idx = 0;
  while (idx + 1 < kLadderSize && kLadder[idx] < n) ++idx;
  auto& c = cache();
  std::call_once(c.once[idx], [&] {
    const std::size_t m = kLadder[idx];
    auto table = std::make_unique<std::vector<double>>(m);
    for (std::size_t j = 0; j < m; ++j)
      (*table)[j] = std::cos(2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(m));
    c.tables[idx] = std::move(table);
  });
  return *c.tables[idx];
}

}  // namespace abphase::simd
