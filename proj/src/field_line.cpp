#include <abphase/errors.hpp>
#include <abphase/topology.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace abphase {

namespace {

// Dormand-Prince 5(4).
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Underflow {};

// Cubic Hermite between (x0, t0) and (x1, t1) over a step of length h.
Vec3 hermite(const Vec3& x0, const Vec3& t0, const Vec3& x1, const Vec3& t1, double h, double s) {
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * x0 + (s3 - 2 * s2 + s) * h * t0 + (-2 * s3 + 3 * s2) * x1 + (s3 - s2) * h * t1;
}

}  // namespace

FieldLine trace_field_line(const FieldEvaluator& field, const Vec3& seed, const QuadratureSpec& spec, int max_returns) {
  validate(spec);
  const CurrentSource& src = field.source();
  const double size = characteristic_size(src);
  const Vec3 center = source_center(src);
  const double r_close = spec.closure_tol * size;
  const double max_len = spec.max_arclength > 0 ? spec.max_arclength : 1e4 * (size + source_extent(src));

  const Vec3 b0 = field.b(seed);
  const double bmag0 = norm(b0);
  if (!(bmag0 > 1e-300)) throw NumericalError("field magnitude underflow at the seed point");
  const double floor = 1e-14 * bmag0;
  const Vec3 t0 = b0 / bmag0;

  auto dir = [&](const Vec3& x) {
    const Vec3 b = field.b(x);
    const double m = norm(b);
    if (!(m > floor)) throw Underflow{};
    return b / m;
  };
  // Error per unit length, so a full circuit drifts by a fraction of r_close. Far out
  // only the relative position matters and the budget grows with distance.
  const double l_ref = size + source_extent(src);
  auto tol_at = [&](const Vec3& x, double step) {
    return 0.1 * r_close * (step / l_ref) * std::max(1.0, norm(x - center) / l_ref);
  };
  auto hmax_at = [&](const Vec3& x) { return 0.05 * size * std::max(1.0, norm(x - center) / size); };

  FieldLine line;
  line.points.push_back(seed);
  Vec3 x = seed, k1 = t0;
  double h = std::min(0.01 * size, hmax_at(seed));
  double s = 0.0;
  double sigma = 0.0;  // signed distance from the seed plane
  bool left = false;   // went behind the seed plane since the last return
  try {
    while (s < max_len) {
      h = std::min({h, hmax_at(x), max_len - s});
      const Vec3 k2 = dir(x + h * (a21 * k1));
      const Vec3 k3 = dir(x + h * (a31 * k1 + a32 * k2));
      const Vec3 k4 = dir(x + h * (a41 * k1 + a42 * k2 + a43 * k3));
      const Vec3 k5 = dir(x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      const Vec3 k6 = dir(x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      const Vec3 xn = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      const Vec3 k7 = dir(xn);
      const double err = norm(h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7));
      const double tol = tol_at(x, h);
      if (err > tol) {
        h *= std::max(0.2, 0.9 * std::pow(tol / err, 0.2));
        if (h < 1e-14 * size) {
          line.diagnostic = "step size underflow";
          break;
        }
        continue;
      }
      const double sigma_n = dot(xn - seed, t0);
      if (sigma_n < 0) left = true;
      if (left && sigma < 0 && sigma_n >= 0) {
        // Locate the crossing on the step by bisection of the Hermite interpolant.
        double lo = 0, hi = 1;
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (dot(hermite(x, k1, xn, k7, h, mid) - seed, t0) < 0)
            lo = mid;
          else
            hi = mid;
        }
        const Vec3 xc = hermite(x, k1, xn, k7, h, hi);
        const double gap = norm(xc - seed);
        ++line.returns;
        line.closure_gap = gap;
        left = false;
        if (gap <= r_close && dot(dir(xc), t0) > 0.99) {
          line.points.push_back(xc);
          line.arclength = s + hi * h;
          line.closed = true;
          return line;
        }
        // Quasi-periodic lines keep coming back without closing.
        if (line.returns >= max_returns) {
          line.points.push_back(xc);
          line.arclength = s + hi * h;
          line.diagnostic = "stopped at a return without closure";
          return line;
        }
      }
      sigma = sigma_n;
      s += h;
      x = xn;
      k1 = k7;
      line.points.push_back(x);
      h *= std::min(5.0, 0.9 * std::pow(tol / std::max(err, 1e-300), 0.2));
    }
    if (line.diagnostic.empty()) line.diagnostic = "max arclength reached";
  } catch (const Underflow&) {
    std::ostringstream os;
    os << "field magnitude underflow near " << x;
    line.diagnostic = os.str();
  } catch (const SingularityError&) {
    std::ostringstream os;
    os << "line ran into a current filament near " << x;
    line.diagnostic = os.str();
  }
  line.arclength = s;
  return line;
}

FieldLine trace_field_line(const CurrentSource& source, const Vec3& seed, const PhysicalConstants& k,
                           const QuadratureSpec& spec, int max_returns) {
  FieldOptions fo;
  fo.rel_tol = spec.field_rel_tol;
  return trace_field_line(FieldEvaluator(source, k, fo), seed, spec, max_returns);
}

}  // namespace abphase
