#include <abphase/errors.hpp>
#include <abphase/sources.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace abphase {

namespace {

constexpr double kUnitTol = 1e-12;

void require_unit(const Vec3& v, const char* name) {
  if (!is_finite(v) || std::abs(norm(v) - 1.0) > kUnitTol)
    throw ValidationError(std::string(name) + " must be a unit vector");
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(std::string(name) + " must be positive");
}

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw ValidationError(std::string(name) + " must be finite");
}

}  // namespace

void validate(const CurrentSource& source) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, IdealInfiniteSolenoid>) {
          require_unit(s.axis_dir, "axis_dir");
          require_positive(s.radius, "radius");
          require_finite(s.flux, "flux");
        } else if constexpr (std::is_same_v<T, FiniteSolenoid>) {
          require_unit(s.axis_dir, "axis_dir");
          require_positive(s.radius, "radius");
          require_positive(s.length, "length");
          require_finite(s.current, "current");
          if (s.n_loops < 2) throw ValidationError("n_loops must be at least 2");
        } else if constexpr (std::is_same_v<T, ToroidalCoil>) {
          require_unit(s.plane_normal, "plane_normal");
          require_positive(s.major_radius, "major_radius");
          require_positive(s.minor_radius, "minor_radius");
          require_finite(s.current, "current");
          if (s.minor_radius >= s.major_radius)
            throw ValidationError("minor_radius must be smaller than major_radius");
          if (s.n_turns < 1) throw ValidationError("n_turns must be at least 1");
        } else if constexpr (std::is_same_v<T, CurrentLoop>) {
          require_unit(s.normal, "normal");
          require_positive(s.radius, "radius");
          require_finite(s.current, "current");
        } else {
          require_finite(s.current, "current");
          if (s.vertices.size() < 2) throw ValidationError("vertices: polyline needs at least 2 vertices");
          for (std::size_t i = 0; i + 1 < s.vertices.size(); ++i)
            if (norm(s.vertices[i + 1] - s.vertices[i]) == 0.0)
              throw ValidationError("vertices: repeated consecutive vertex");
        }
      },
      source);
}

double characteristic_size(const CurrentSource& source) {
  return std::visit(
      [](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, IdealInfiniteSolenoid>) {
          return s.radius;
        } else if constexpr (std::is_same_v<T, FiniteSolenoid>) {
          return s.radius;
        } else if constexpr (std::is_same_v<T, ToroidalCoil>) {
          return s.major_radius;
        } else if constexpr (std::is_same_v<T, CurrentLoop>) {
          return s.radius;
        } else {
          Vec3 lo = s.vertices.front(), hi = s.vertices.front();
          for (const auto& v : s.vertices) {
            lo = {std::min(lo.x, v.x), std::min(lo.y, v.y), std::min(lo.z, v.z)};
            hi = {std::max(hi.x, v.x), std::max(hi.y, v.y), std::max(hi.z, v.z)};
          }
          return norm(hi - lo);
        }
      },
      source);
}

Vec3 source_center(const CurrentSource& source) {
  return std::visit(
      [](const auto& s) -> Vec3 {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, IdealInfiniteSolenoid>) {
          return s.axis_point;
        } else if constexpr (std::is_same_v<T, PolylineCurrent>) {
          Vec3 c;
          for (const auto& v : s.vertices) c += v;
          return c / static_cast<double>(s.vertices.size());
        } else {
          return s.center;
        }
      },
      source);
}

double source_extent(const CurrentSource& source) {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, IdealInfiniteSolenoid>) {
          return s.radius;
        } else if constexpr (std::is_same_v<T, FiniteSolenoid>) {
          return std::hypot(s.radius, 0.5 * s.length);
        } else if constexpr (std::is_same_v<T, ToroidalCoil>) {
          return s.major_radius + s.minor_radius;
        } else if constexpr (std::is_same_v<T, CurrentLoop>) {
          return s.radius;
        } else {
          const Vec3 c = source_center(source);
          double r = 0.0;
          for (const auto& v : s.vertices) r = std::max(r, norm(v - c));
          return r;
        }
      },
      source);
}

CurrentSource scaled_current(const CurrentSource& source, double factor) {
  CurrentSource out = source;
  std::visit(
      [factor](auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, IdealInfiniteSolenoid>)
          s.flux *= factor;
        else
          s.current *= factor;
      },
      out);
  return out;
}

std::vector<CurrentLoop> finite_solenoid_loops(const FiniteSolenoid& s) {
  validate(CurrentSource{s});
  std::vector<CurrentLoop> loops;
  loops.reserve(static_cast<std::size_t>(s.n_loops));
  const double pitch = s.length / s.n_loops;
  for (int k = 0; k < s.n_loops; ++k) {
    const double offset = -0.5 * s.length + (k + 0.5) * pitch;
    loops.push_back({s.center + s.axis_dir * offset, s.axis_dir, s.radius, s.current});
  }
  return loops;
}

std::vector<CurrentLoop> toroid_loops(const ToroidalCoil& c) {
  validate(CurrentSource{c});
  Vec3 e1, e2;
  orthonormal_basis(c.plane_normal, e1, e2);
  std::vector<CurrentLoop> loops;
  loops.reserve(static_cast<std::size_t>(c.n_turns));
  // Half-step offset keeps the theta = 0 half-plane midway between turns.
  for (int k = 0; k < c.n_turns; ++k) {
    const double theta = 2.0 * kPi * (k + 0.5) / c.n_turns;
    const Vec3 radial = e1 * std::cos(theta) + e2 * std::sin(theta);
    const Vec3 toroidal = cross(c.plane_normal, radial);
    loops.push_back({c.center + radial * c.major_radius, toroidal, c.minor_radius, c.current});
  }
  return loops;
}

double toroid_flux(const ToroidalCoil& c, const PhysicalConstants& k) {
  // integral of mu0 N I / (2 pi rho) over the circular cross-section
  const double r = c.major_radius, b = c.minor_radius;
  return k.mu0 * c.n_turns * c.current * (r - std::sqrt(r * r - b * b));
}

double solenoid_core_flux(const FiniteSolenoid& s, const PhysicalConstants& k) {
  return k.mu0 * (s.n_loops / s.length) * s.current * kPi * s.radius * s.radius;
}

double ChargeTrajectory::period() const {
  return std::visit(
      [](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, CircularOrbit>)
          return p.period;
        else
          return std::accumulate(p.durations.begin(), p.durations.end(), 0.0);
      },
      path);
}

void validate(const ChargeTrajectory& tr) {
  require_finite(tr.charge, "charge");
  std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, CircularOrbit>) {
          require_unit(p.normal, "normal");
          require_positive(p.radius, "radius");
          require_positive(p.period, "period");
        } else {
          if (p.vertices.size() < 3) throw ValidationError("vertices: loop needs at least 3 vertices");
          if (p.durations.size() != p.vertices.size())
            throw ValidationError("durations: need one duration per edge");
          for (double d : p.durations) require_positive(d, "durations");
          for (std::size_t i = 0; i < p.vertices.size(); ++i)
            if (norm(p.vertices[(i + 1) % p.vertices.size()] - p.vertices[i]) == 0.0)
              throw ValidationError("vertices: degenerate edge");
        }
      },
      tr.path);
}

namespace {

TrajectorySample sample_circle(const CircularOrbit& o, double t) {
  Vec3 e1, e2;
  orthonormal_basis(o.normal, e1, e2);
  const double omega = 2.0 * kPi * o.windings / o.period;
  const double th = omega * t;
  const Vec3 radial = e1 * std::cos(th) + e2 * std::sin(th);
  const Vec3 tangent = e2 * std::cos(th) - e1 * std::sin(th);
  return {o.center + radial * o.radius, tangent * (o.radius * omega)};
}

TrajectorySample sample_polygon(const PiecewiseLinearLoop& p, double t) {
  const std::size_t m = p.vertices.size();
  double t0 = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double d = p.durations[i];
    if (t <= t0 + d || i + 1 == m) {
      const Vec3& a = p.vertices[i];
      const Vec3& b = p.vertices[(i + 1) % m];
      const double s = std::clamp((t - t0) / d, 0.0, 1.0);
      return {a + (b - a) * s, (b - a) / d};
    }
    t0 += d;
  }
  return {p.vertices.front(), {}};
}

}  // namespace

TrajectorySample trajectory_sample(const ChargeTrajectory& tr, double t) {
  const double period = tr.period();
  if (!(t >= 0.0 && t <= period))
    throw ValidationError("trajectory_sample: t outside [0, T]");
  return std::visit(
      [t](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, CircularOrbit>)
          return sample_circle(p, t);
        else
          return sample_polygon(p, t);
      },
      tr.path);
}

std::vector<double> trajectory_breakpoints(const ChargeTrajectory& tr) {
  if (const auto* p = std::get_if<PiecewiseLinearLoop>(&tr.path)) {
    std::vector<double> out{0.0};
    double t = 0.0;
    for (double d : p->durations) {
      t += d;
      out.push_back(t);
    }
    out.back() = tr.period();
    return out;
  }
  return {0.0, tr.period()};
}

std::vector<Vec3> trajectory_polyline(const ChargeTrajectory& tr, std::size_t points_per_turn) {
  if (const auto* p = std::get_if<PiecewiseLinearLoop>(&tr.path)) return p->vertices;
  const auto& o = std::get<CircularOrbit>(tr.path);
  const std::size_t turns = static_cast<std::size_t>(std::abs(o.windings));
  if (turns == 0) return {sample_circle(o, 0.0).position};
  const std::size_t n = std::max<std::size_t>(8, points_per_turn) * turns;
  std::vector<Vec3> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    pts.push_back(sample_circle(o, o.period * static_cast<double>(i) / static_cast<double>(n)).position);
  return pts;
}

Vec3 trajectory_centroid(const ChargeTrajectory& tr) {
  if (const auto* o = std::get_if<CircularOrbit>(&tr.path)) return o->center;
  const auto& p = std::get<PiecewiseLinearLoop>(tr.path);
  Vec3 c;
  for (const auto& v : p.vertices) c += v;
  return c / static_cast<double>(p.vertices.size());
}

ChargeTrajectory reversed(const ChargeTrajectory& tr) {
  ChargeTrajectory out = tr;
  std::visit(
      [](auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, CircularOrbit>) {
          p.windings = -p.windings;
        } else {
          // v0 -> v_{m-1} -> ... -> v1 -> v0; edge i of the new loop is old edge m-1-i.
          std::vector<Vec3> v{p.vertices.front()};
          v.insert(v.end(), p.vertices.rbegin(), p.vertices.rend() - 1);
          std::vector<double> d(p.durations.rbegin(), p.durations.rend());
          p.vertices = std::move(v);
          p.durations = std::move(d);
        }
      },
      out.path);
  return out;
}

ChargeTrajectory with_period(const ChargeTrajectory& tr, double period) {
  ChargeTrajectory out = tr;
  const double scale = period / tr.period();
  std::visit(
      [scale](auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, CircularOrbit>) {
          p.period *= scale;
        } else {
          for (double& d : p.durations) d *= scale;
        }
      },
      out.path);
  return out;
}

ChargeTrajectory with_charge(const ChargeTrajectory& tr, double q) {
  ChargeTrajectory out = tr;
  out.charge = q;
  return out;
}

void validate(const StaticChargeConfig& cfg) {
  require_finite(cfg.test.charge, "test charge");
  require_positive(cfg.dwell_time, "dwell_time");
  for (const auto& c : cfg.external) {
    require_finite(c.charge, "external charge");
    if (!is_finite(c.position)) throw ValidationError("external charge position must be finite");
    if (norm(c.position - cfg.test.position) == 0.0)
      throw ValidationError("external charge coincides with the test charge");
  }
}

StaticChargeConfig vaidman_pair(double q, double big_q, double r, double dwell_time) {
  StaticChargeConfig cfg;
  cfg.test = {q, {0, 0, 0}};
  cfg.external = {{big_q, {0, r, 0}}, {big_q, {0, -r, 0}}};
  cfg.dwell_time = dwell_time;
  validate(cfg);
  return cfg;
}

}  // namespace abphase
