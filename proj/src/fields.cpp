#include "ring_math.hpp"

#include <abphase/errors.hpp>
#include <abphase/fields.hpp>
#include <abphase/simd/kernels.hpp>
#include <abphase/topology.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace abphase {

namespace {

struct Ring {
  Vec3 center, normal;
  double radius, current;
};

std::string where(const Vec3& x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 d = b - a;
  const double l2 = norm2(d);
  double t = l2 > 0 ? dot(p - a, d) / l2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm(p - (a + t * d));
}

// Signed level function of the winding surface (negative inside) for sources
// whose field changes abruptly across a known surface.
std::optional<double> support_level(const CurrentSource& src, const Vec3& x) {
  if (const auto* s = std::get_if<FiniteSolenoid>(&src)) {
    const Vec3 d = x - s->center;
    return norm(d - dot(d, s->axis_dir) * s->axis_dir) - s->radius;
  }
  if (const auto* s = std::get_if<IdealInfiniteSolenoid>(&src)) {
    const Vec3 d = x - s->axis_point;
    return norm(d - dot(d, s->axis_dir) * s->axis_dir) - s->radius;
  }
  if (const auto* t = std::get_if<ToroidalCoil>(&src)) {
    const Vec3 d = x - t->center;
    const double z = dot(d, t->plane_normal);
    return std::hypot(norm(d - z * t->plane_normal) - t->major_radius, z) - t->minor_radius;
  }
  return std::nullopt;
}

// First s in (0, 1) where the level function along c + s (x - c) changes sign; 1 if none.
double first_crossing(const CurrentSource& src, const Vec3& c, const Vec3& x) {
  constexpr int n = 64;
  auto g = [&](double s) { return *support_level(src, c + s * (x - c)); };
  double prev = g(0.0);
  for (int i = 1; i <= n; ++i) {
    const double s1 = static_cast<double>(i) / n;
    const double cur = g(s1);
    if ((prev < 0) != (cur < 0)) {
      double lo = static_cast<double>(i - 1) / n, hi = s1;
      const bool lo_neg = prev < 0;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((g(mid) < 0) == lo_neg)
          lo = mid;
        else
          hi = mid;
      }
      return 0.5 * (lo + hi);
    }
    prev = cur;
  }
  return 1.0;
}

}  // namespace

struct FieldEvaluator::Impl {
  CurrentSource source;
  PhysicalConstants k;
  FieldOptions opt;
  double excl = 0.0;

  bool ideal = false;
  IdealInfiniteSolenoid sol;

  std::vector<Ring> rings;

  std::vector<Vec3> seg_a, seg_b;
  simd::SegmentBatch batch;
  double seg_current = 0.0;

  struct RingLocal {
    double rho, z;  // in radius units
    Vec3 rho_hat, phi_hat;
  };

  RingLocal local(const Ring& r, const Vec3& x) const {
    const Vec3 p = x - r.center;
    const double z = dot(p, r.normal);
    const Vec3 w = p - z * r.normal;
    const double rho = norm(w);
    RingLocal out{rho / r.radius, z / r.radius, {}, {}};
    if (rho > 0) {
      out.rho_hat = w / rho;
      out.phi_hat = cross(r.normal, out.rho_hat);
    }
    const double d = r.radius * std::sqrt((out.rho - 1) * (out.rho - 1) + out.z * out.z);
    if (d <= excl) throw SingularityError("field evaluated on a current loop at " + where(x));
    return out;
  }

  void check_segments(const Vec3& x) const {
    for (std::size_t i = 0; i < seg_a.size(); ++i)
      if (point_segment_distance(x, seg_a[i], seg_b[i]) <= excl)
        throw SingularityError("field evaluated on a current segment at " + where(x));
  }

  Vec3 b(const Vec3& x) const {
    if (ideal) {
      const Vec3 p = x - sol.axis_point;
      const Vec3 w = p - dot(p, sol.axis_dir) * sol.axis_dir;
      if (norm2(w) < sol.radius * sol.radius) return (sol.flux / (kPi * sol.radius * sol.radius)) * sol.axis_dir;
      return {};
    }
    Vec3 out;
    for (const auto& r : rings) {
      if (r.current == 0) continue;
      const auto l = local(r, x);
      const auto in = detail::ring_integrals(l.rho, l.z, opt.rel_tol);
      const double pref = k.mu0 * r.current / (4 * kPi * r.radius);
      out += pref * (l.z * in.i1) * l.rho_hat + pref * (in.i0 - l.rho * in.i1) * r.normal;
    }
    if (!seg_a.empty() && seg_current != 0) {
      check_segments(x);
      const auto s = simd::segment_sums(x.x, x.y, x.z, batch);
      out += (k.mu0 * seg_current / (4 * kPi)) * Vec3{s.bx, s.by, s.bz};
    }
    return out;
  }

  Vec3 a(const Vec3& x) const {
    if (ideal) {
      const Vec3 p = x - sol.axis_point;
      const Vec3 w = p - dot(p, sol.axis_dir) * sol.axis_dir;
      const double rho = norm(w);
      if (rho == 0) return {};
      const Vec3 phi_hat = cross(sol.axis_dir, w / rho);
      const double a2 = sol.radius * sol.radius;
      const double mag = rho < sol.radius ? sol.flux * rho / (2 * kPi * a2) : sol.flux / (2 * kPi * rho);
      return mag * phi_hat;
    }
    Vec3 out;
    for (const auto& r : rings) {
      if (r.current == 0) continue;
      const auto l = local(r, x);
      const auto in = detail::ring_integrals(l.rho, l.z, opt.rel_tol);
      out += (k.mu0 * r.current / (4 * kPi) * in.ia) * l.phi_hat;
    }
    if (!seg_a.empty() && seg_current != 0) {
      check_segments(x);
      const auto s = simd::segment_sums(x.x, x.y, x.z, batch);
      out += (k.mu0 * seg_current / (4 * kPi)) * Vec3{s.ax, s.ay, s.az};
    }
    return out;
  }

  double filament_distance(const Vec3& x) const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& r : rings) {
      const Vec3 p = x - r.center;
      const double z = dot(p, r.normal);
      const double rho = norm(p - z * r.normal);
      d = std::min(d, std::hypot(rho - r.radius, z));
    }
    for (std::size_t i = 0; i < seg_a.size(); ++i) d = std::min(d, point_segment_distance(x, seg_a[i], seg_b[i]));
    return d;
  }
};

FieldEvaluator::FieldEvaluator(const CurrentSource& source, const PhysicalConstants& k, FieldOptions opt)
    : impl_(std::make_unique<Impl>()) {
  validate(source);
  if (!(opt.rel_tol > 0) || opt.rel_tol >= 1) throw ValidationError("field rel_tol must lie in (0, 1)");
  if (!(opt.exclusion_radius >= 0)) throw ValidationError("exclusion_radius must be non-negative");
  auto& m = *impl_;
  m.source = source;
  m.k = k;
  m.opt = opt;
  m.excl = opt.exclusion_radius > 0 ? opt.exclusion_radius : 1e-9 * characteristic_size(source);
  auto add_loops = [&](const std::vector<CurrentLoop>& loops) {
    for (const auto& l : loops) m.rings.push_back({l.center, l.normal, l.radius, l.current});
  };
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, IdealInfiniteSolenoid>) {
          m.ideal = true;
          m.sol = s;
        } else if constexpr (std::is_same_v<T, FiniteSolenoid>) {
          add_loops(finite_solenoid_loops(s));
        } else if constexpr (std::is_same_v<T, ToroidalCoil>) {
          add_loops(toroid_loops(s));
        } else if constexpr (std::is_same_v<T, CurrentLoop>) {
          add_loops({s});
        } else {
          const auto& v = s.vertices;
          const std::size_t n = v.size();
          const std::size_t nseg = s.closed ? n : n - 1;
          for (std::size_t i = 0; i < nseg; ++i) {
            const Vec3& p0 = v[i];
            const Vec3& p1 = v[(i + 1) % n];
            m.seg_a.push_back(p0);
            m.seg_b.push_back(p1);
            m.batch.push(p0.x, p0.y, p0.z, p1.x, p1.y, p1.z);
          }
          m.seg_current = s.current;
        }
      },
      source);
}

FieldEvaluator::~FieldEvaluator() = default;
FieldEvaluator::FieldEvaluator(FieldEvaluator&&) noexcept = default;
FieldEvaluator& FieldEvaluator::operator=(FieldEvaluator&&) noexcept = default;

Vec3 FieldEvaluator::b(const Vec3& x) const { return impl_->b(x); }
Vec3 FieldEvaluator::a(const Vec3& x) const { return impl_->a(x); }
double FieldEvaluator::filament_distance(const Vec3& x) const { return impl_->filament_distance(x); }
double FieldEvaluator::exclusion_radius() const { return impl_->excl; }
const CurrentSource& FieldEvaluator::source() const { return impl_->source; }

Vec3 b_field(const CurrentSource& source, const Vec3& x, const PhysicalConstants& k, const FieldOptions& opt) {
  return FieldEvaluator(source, k, opt).b(x);
}

Vec3 vector_potential(const CurrentSource& source, const Vec3& x, const PhysicalConstants& k,
                      const FieldOptions& opt) {
  return FieldEvaluator(source, k, opt).a(x);
}

Vec3 delta_b_moving_charge(double q, const Vec3& x_p, const Vec3& v, const Vec3& x, const PhysicalConstants& k) {
  const Vec3 r = x - x_p;
  const double r2 = norm2(r);
  if (!(r2 > 0)) throw SingularityError("field of a moving charge evaluated at the charge, " + where(x));
  const double inv = 1 / std::sqrt(r2);
  return (k.mu0 / (4 * kPi) * q * inv * inv * inv) * cross(v, r);
}

Vec3 coulomb_field(double q, const Vec3& x_q, const Vec3& x, const PhysicalConstants& k) {
  const Vec3 r = x - x_q;
  const double r2 = norm2(r);
  if (!(r2 > 0)) throw SingularityError("Coulomb field evaluated at the charge, " + where(x));
  const double inv = 1 / std::sqrt(r2);
  return (q / (4 * kPi * k.eps0) * inv * inv * inv) * r;
}

Vec3 e_field_point_charges(const StaticChargeConfig& cfg, const Vec3& x, ChargeSelector which,
                           const PhysicalConstants& k) {
  Vec3 e;
  if (which != ChargeSelector::Test)
    for (const auto& c : cfg.external) e += coulomb_field(c.charge, c.position, x, k);
  if (which != ChargeSelector::External) e += coulomb_field(cfg.test.charge, cfg.test.position, x, k);
  return e;
}

double GaugeFunction::value(const Vec3& x) const {
  const Vec3 y = (x - center) / width;
  double p = 1.0;
  switch (member) {
    case 0: p = 1.0; break;
    case 1: p = y.x; break;
    case 2: p = y.x * y.y; break;
    case 3: p = y.z * y.z - y.x; break;
    case 4: p = 1 + y.x * y.y * y.z; break;
    default: throw ValidationError("gauge member must lie in [0, 4]");
  }
  return amplitude * p * std::exp(-norm2(y));
}

Vec3 GaugeFunction::gradient(const Vec3& x) const {
  const Vec3 y = (x - center) / width;
  double p = 1.0;
  Vec3 dp;
  switch (member) {
    case 0: break;
    case 1: p = y.x; dp = {1, 0, 0}; break;
    case 2: p = y.x * y.y; dp = {y.y, y.x, 0}; break;
    case 3: p = y.z * y.z - y.x; dp = {-1, 0, 2 * y.z}; break;
    case 4: p = 1 + y.x * y.y * y.z; dp = {y.y * y.z, y.x * y.z, y.x * y.y}; break;
    default: throw ValidationError("gauge member must lie in [0, 4]");
  }
  return (amplitude * std::exp(-norm2(y)) / width) * (dp - 2 * p * y);
}

std::vector<GaugeFunction> builtin_gauge_family(const Vec3& center, double width, double amplitude) {
  if (!(width > 0)) throw ValidationError("gauge width must be positive");
  std::vector<GaugeFunction> out;
  for (int m = 0; m < GaugeFunction::kFamilySize; ++m) out.push_back({m, center, width, amplitude});
  return out;
}

Vec3 gauge_shifted_potential(const CurrentSource& source, const Vec3& x, const GaugeFunction& lambda,
                             const PhysicalConstants& k, const FieldOptions& opt) {
  return vector_potential(source, x, k, opt) + lambda.gradient(x);
}

Estimate flux_through_loop(const CurrentSource& source, const ChargeTrajectory& loop, const PhysicalConstants& k,
                           const QuadratureSpec& spec) {
  FieldOptions fo;
  fo.rel_tol = spec.field_rel_tol;
  return flux_through_loop(FieldEvaluator(source, k, fo), loop, spec);
}

Estimate flux_through_loop(const FieldEvaluator& field, const ChargeTrajectory& loop, const QuadratureSpec& spec) {
  validate(loop);
  validate(spec);
  if (const auto* c = std::get_if<CircularOrbit>(&loop.path); c && c->windings == 0) return {0.0, 0.0, 0, true};

  const auto poly = trajectory_polyline(loop);
  const double excl = field.exclusion_radius();
  for (const auto& p : poly)
    if (field.filament_distance(p) <= excl) throw GeometryError("loop intersects a current filament");

  if (const auto* s = std::get_if<IdealInfiniteSolenoid>(&field.source())) {
    // Exact when the loop polygon stays outside the core.
    auto perp = [&](const Vec3& p) {
      const Vec3 d = p - s->axis_point;
      return d - dot(d, s->axis_dir) * s->axis_dir;
    };
    bool outside = true;
    for (std::size_t i = 0; i < poly.size() && outside; ++i)
      if (point_segment_distance({}, perp(poly[i]), perp(poly[(i + 1) % poly.size()])) <= s->radius)
        outside = false;
    if (outside) {
      const int w = winding_number(poly, s->axis_point, s->axis_dir);
      return {w * s->flux, 0.0, static_cast<std::int64_t>(poly.size()), true};
    }
  }

  const Vec3 c = trajectory_centroid(loop);
  const auto cuts = trajectory_breakpoints(loop);
  const double period = loop.period();
  std::vector<double> tcuts;
  if (const auto* o = std::get_if<CircularOrbit>(&loop.path)) {
    const int pieces = 8 * std::abs(o->windings);
    for (int i = 0; i <= pieces; ++i) tcuts.push_back(period * i / pieces);
  } else {
    tcuts = cuts;
  }
  // Box coordinate u in [0, 1] covers s in [0, s*], u in [1, 2] covers [s*, 1],
  // where s* is the first crossing of the winding surface along the ray.
  const bool split = support_level(field.source(), c).has_value();
  // Graded towards the winding surface: between discrete windings the field
  // varies on the scale of the pitch, too fine for the first rule on a whole box.
  const std::vector<double> ucuts =
      split ? std::vector<double>{0, 0.75, 0.9375, 0.984375, 1, 1.015625, 1.0625, 1.25, 2} : std::vector<double>{0, 1};
  std::vector<CubatureBox> boxes;
  for (std::size_t i = 0; i + 1 < tcuts.size(); ++i)
    for (std::size_t j = 0; j + 1 < ucuts.size(); ++j) boxes.push_back({{tcuts[i], ucuts[j]}, {tcuts[i + 1], ucuts[j + 1]}, 0});
  CubatureIntegrand f = [&](std::span<const double> x, std::span<double> out) {
    const auto smp = trajectory_sample(loop, x[0]);
    const Vec3 arm = smp.position - c;
    double s = x[1], jac = 1.0;
    if (split) {
      const double s_star = first_crossing(field.source(), c, smp.position);
      if (x[1] <= 1.0) {
        s = s_star * x[1];
        jac = s_star;
      } else {
        s = s_star + (1 - s_star) * (x[1] - 1);
        jac = 1 - s_star;
      }
    }
    if (jac == 0) {
      out[0] = 0;
      return;
    }
    const Vec3 p = c + s * arm;
    Vec3 b;
    try {
      b = field.b(p);
    } catch (const SingularityError&) {
      throw GeometryError("spanning surface passes through a current filament near " + where(p));
    }
    out[0] = jac * s * dot(b, cross(arm, smp.velocity));
  };
  auto r = cubature(f, 1, boxes, spec);
  return {r.value[0], r.error[0], r.n_evals, r.converged};
}

}  // namespace abphase
