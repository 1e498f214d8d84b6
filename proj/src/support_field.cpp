#include "ring_math.hpp"

#include <abphase/errors.hpp>
#include <abphase/support_field.hpp>

#include <cmath>
#include <limits>

namespace abphase {

std::optional<SupportField> SupportField::for_source(const CurrentSource& s, const PhysicalConstants& k,
                                                     double rel_tol) {
  validate(s);
  SupportField f;
  f.source_ = s;
  f.k_ = k;
  f.rel_tol_ = rel_tol;
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (const auto* sol = std::get_if<IdealInfiniteSolenoid>(&s)) {
    f.domain_ = CylinderDomain{sol->axis_point, sol->axis_dir, sol->radius, -inf, inf};
    f.model_ = "uniform core";
    return f;
  }
  if (const auto* sol = std::get_if<FiniteSolenoid>(&s)) {
    f.domain_ = CylinderDomain{sol->center, sol->axis_dir, sol->radius, -0.5 * sol->length, 0.5 * sol->length};
    f.model_ = "current sheet, interior only";
    f.exact_ = false;
    return f;
  }
  if (const auto* t = std::get_if<ToroidalCoil>(&s)) {
    f.domain_ = TorusTubeDomain{t->center, t->plane_normal, t->major_radius, t->minor_radius};
    f.model_ = "winding-averaged toroid";
    orthonormal_basis(t->plane_normal, f.e1_, f.e2_);
    return f;
  }
  return std::nullopt;
}

bool SupportField::contains(const Vec3& x, double margin) const {
  return std::visit(
      [&](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, IdealInfiniteSolenoid>) {
          const Vec3 d = x - s.axis_point;
          return norm(d - dot(d, s.axis_dir) * s.axis_dir) <= s.radius * (1 + margin);
        } else if constexpr (std::is_same_v<T, FiniteSolenoid>) {
          const Vec3 d = x - s.center;
          const double z = dot(d, s.axis_dir);
          return norm(d - z * s.axis_dir) <= s.radius * (1 + margin) &&
                 std::abs(z) <= 0.5 * s.length + margin * s.radius;
        } else if constexpr (std::is_same_v<T, ToroidalCoil>) {
          const Vec3 d = x - s.center;
          const double z = dot(d, s.plane_normal);
          const double rho = norm(d - z * s.plane_normal);
          return std::hypot(rho - s.major_radius, z) <= s.minor_radius * (1 + margin);
        } else {
          return false;
        }
      },
      source_);
}

Vec3 SupportField::b(const Vec3& x) const {
  if (const auto* sol = std::get_if<IdealInfiniteSolenoid>(&source_)) {
    const Vec3 d = x - sol->axis_point;
    if (norm2(d - dot(d, sol->axis_dir) * sol->axis_dir) < sol->radius * sol->radius)
      return (sol->flux / (kPi * sol->radius * sol->radius)) * sol->axis_dir;
    return {};
  }
  if (const auto* sol = std::get_if<FiniteSolenoid>(&source_)) {
    const Vec3 d = x - sol->center;
    const double z = dot(d, sol->axis_dir);
    const Vec3 w = d - z * sol->axis_dir;
    const double rho = norm(w);
    const double a = sol->radius;
    const auto in = detail::sheet_integrals(rho / a, (z - 0.5 * sol->length) / a, (z + 0.5 * sol->length) / a,
                                            rel_tol_);
    const double pref = k_.mu0 * (sol->n_loops * sol->current / sol->length) / (4 * kPi);
    Vec3 out = (pref * in.b_z) * sol->axis_dir;
    if (rho > 0) out += (pref * in.b_rho / rho) * w;
    return out;
  }
  const auto& t = std::get<ToroidalCoil>(source_);
  const Vec3 d = x - t.center;
  const double z = dot(d, t.plane_normal);
  const Vec3 w = d - z * t.plane_normal;
  const double rho = norm(w);
  if (!(std::hypot(rho - t.major_radius, z) < t.minor_radius)) return {};
  const Vec3 theta_hat = cross(t.plane_normal, w / rho);
  return (k_.mu0 * t.n_turns * t.current / (2 * kPi * rho)) * theta_hat;
}

}  // namespace abphase
