#include <abphase/errors.hpp>
#include <abphase/quadrature.hpp>

#include <cmath>
#include <limits>

namespace abphase {

namespace {

constexpr double kTwoPi = 2 * 3.14159265358979323846;

std::vector<CubatureBox> split_boxes(std::vector<double> lo, std::vector<double> hi, std::size_t dim,
                                     int pieces, int tag) {
  std::vector<CubatureBox> out;
  for (int k = 0; k < pieces; ++k) {
    CubatureBox b{lo, hi, tag};
    const double w = (hi[dim] - lo[dim]) / pieces;
    b.lo[dim] = lo[dim] + k * w;
    b.hi[dim] = k + 1 == pieces ? hi[dim] : lo[dim] + (k + 1) * w;
    out.push_back(std::move(b));
  }
  return out;
}

// Compactified axial coordinate: returns z and dz/ds.
struct AxialMap {
  double lo, hi;
  bool lo_inf, hi_inf;
  AxialMap(double a, double b) : lo(a), hi(b), lo_inf(std::isinf(a)), hi_inf(std::isinf(b)) {}
  double s_lo() const { return lo_inf ? (hi_inf ? -1.0 : -1.0) : (hi_inf ? 0.0 : lo); }
  double s_hi() const { return hi_inf ? 1.0 : (lo_inf ? 0.0 : hi); }
  std::pair<double, double> operator()(double s) const {
    if (lo_inf && hi_inf) {
      const double d = 1 - s * s;
      return {s / d, (1 + s * s) / (d * d)};
    }
    if (hi_inf) {
      const double d = 1 - s;
      return {lo + s / d, 1 / (d * d)};
    }
    if (lo_inf) {
      const double d = 1 + s;
      return {hi + s / d, 1 / (d * d)};
    }
    return {s, 1.0};
  }
};

VectorEstimate ball_pieces(const FieldIntegrand& f, std::size_t m, const BallDomain& d, double eps,
                           const QuadratureSpec& spec) {
  const auto& pts = d.singular_points;
  const std::size_t np = pts.size();
  for (std::size_t i = 0; i < np; ++i) {
    if (norm(pts[i] - d.center) >= d.radius) throw GeometryError("singular point lies outside the ball");
    for (std::size_t j = i + 1; j < np; ++j)
      if (!(norm(pts[i] - pts[j]) > 0)) throw GeometryError("singular points must be distinct");
  }
  std::vector<CubatureBox> boxes;
  for (std::size_t i = 0; i < np; ++i)
    for (auto& b : split_boxes({0.0, -1.0, 0.0}, {1.0, 1.0, kTwoPi}, 2, 4, static_cast<int>(i)))
      for (auto& c : split_boxes(b.lo, b.hi, 1, 2, b.tag)) boxes.push_back(std::move(c));
  TaggedIntegrand g = [&](std::span<const double> x, int tag, std::span<double> out) {
    const Vec3& p = pts[static_cast<std::size_t>(tag)];
    const double mu = x[1], st = std::sqrt(std::max(0.0, 1 - mu * mu));
    const Vec3 dir{st * std::cos(x[2]), st * std::sin(x[2]), mu};
    const Vec3 pc = p - d.center;
    const double b = dot(dir, pc);
    const double rmax = -b + std::sqrt(b * b + d.radius * d.radius - norm2(pc));
    if (rmax <= eps) {
      for (auto& v : out) v = 0.0;
      return;
    }
    const double r = eps + x[0] * (rmax - eps);
    const Vec3 pos = p + r * dir;
    // Shepard weights 1 / sum_k (d_i / d_k)^4: smooth, and they vanish to
    // fourth order at every other singular point.
    double w = 1.0;
    if (np > 1) {
      const double di2 = r * r;
      double den = 0.0;
      for (const auto& q : pts) {
        const double dk2 = norm2(pos - q);
        if (!(dk2 > 0)) {
          den = std::numeric_limits<double>::infinity();
          break;
        }
        den += (di2 / dk2) * (di2 / dk2);
      }
      w = 1.0 / den;
    }
    if (w < 1e-300) {
      for (auto& v : out) v = 0.0;
      return;
    }
    f(pos, out);
    const double jac = w * r * r * (rmax - eps);
    for (auto& v : out) v *= jac;
  };
  return cubature(g, m, boxes, spec);
}

}  // namespace

VectorEstimate integrate_3d(const FieldIntegrand& f, std::size_t m, const Domain3& domain,
                            const QuadratureSpec& spec) {
  validate(spec);
  if (const auto* b = std::get_if<BoxDomain>(&domain)) {
    const Vec3 lo = b->lo, hi = b->hi;
    if (!(hi.x >= lo.x && hi.y >= lo.y && hi.z >= lo.z)) throw ValidationError("box domain has hi < lo");
    std::vector<CubatureBox> boxes{{{lo.x, lo.y, lo.z}, {hi.x, hi.y, hi.z}, 0}};
    CubatureIntegrand g = [&](std::span<const double> x, std::span<double> out) { f(Vec3{x[0], x[1], x[2]}, out); };
    return cubature(g, m, boxes, spec);
  }
  if (const auto* c = std::get_if<CylinderDomain>(&domain)) {
    if (!(c->radius > 0)) throw ValidationError("cylinder radius must be positive");
    if (!(c->z_hi > c->z_lo)) throw ValidationError("cylinder z_hi must exceed z_lo");
    Vec3 e1, e2;
    const Vec3 ax = normalized(c->axis);
    orthonormal_basis(ax, e1, e2);
    const AxialMap zmap(c->z_lo, c->z_hi);
    std::vector<CubatureBox> boxes;
    for (auto& b : split_boxes({0.0, 0.0, zmap.s_lo()}, {c->radius, kTwoPi, zmap.s_hi()}, 1, 4, 0)) {
      if (zmap.lo_inf && zmap.hi_inf)
        for (auto& bb : split_boxes(b.lo, b.hi, 2, 2, 0)) boxes.push_back(std::move(bb));
      else
        boxes.push_back(std::move(b));
    }
    CubatureIntegrand g = [&](std::span<const double> x, std::span<double> out) {
      const auto [z, dz] = zmap(x[2]);
      const Vec3 pos = c->base + x[0] * (std::cos(x[1]) * e1 + std::sin(x[1]) * e2) + z * ax;
      f(pos, out);
      const double jac = x[0] * dz;
      for (auto& v : out) v *= jac;
    };
    return cubature(g, m, boxes, spec);
  }
  if (const auto* t = std::get_if<TorusTubeDomain>(&domain)) {
    if (!(t->minor_radius > 0) || !(t->major_radius > t->minor_radius))
      throw ValidationError("torus needs 0 < minor_radius < major_radius");
    Vec3 e1, e2;
    const Vec3 n = normalized(t->normal);
    orthonormal_basis(n, e1, e2);
    std::vector<CubatureBox> boxes;
    for (auto& b : split_boxes({0.0, 0.0, 0.0}, {t->minor_radius, kTwoPi, kTwoPi}, 2, 8, 0))
      for (auto& bb : split_boxes(b.lo, b.hi, 1, 2, 0)) boxes.push_back(std::move(bb));
    CubatureIntegrand g = [&](std::span<const double> x, std::span<double> out) {
      const double r = x[0], psi = x[1], th = x[2];
      const double rho = t->major_radius + r * std::cos(psi);
      const Vec3 pos = t->center + rho * (std::cos(th) * e1 + std::sin(th) * e2) + r * std::sin(psi) * n;
      f(pos, out);
      const double jac = r * rho;
      for (auto& v : out) v *= jac;
    };
    return cubature(g, m, boxes, spec);
  }
  const auto& ball = std::get<BallDomain>(domain);
  if (!(ball.radius > 0)) throw ValidationError("ball radius must be positive");
  if (ball.singular_points.empty()) {
    std::vector<CubatureBox> boxes = split_boxes({0.0, -1.0, 0.0}, {ball.radius, 1.0, kTwoPi}, 2, 4, 0);
    CubatureIntegrand g = [&](std::span<const double> x, std::span<double> out) {
      const double mu = x[1], st = std::sqrt(std::max(0.0, 1 - mu * mu));
      const Vec3 dir{st * std::cos(x[2]), st * std::sin(x[2]), mu};
      f(ball.center + x[0] * dir, out);
      for (auto& v : out) v *= x[0] * x[0];
    };
    return cubature(g, m, boxes, spec);
  }
  const double eps = spec.exclusion_radius;
  if (!(spec.richardson && eps > 0)) return ball_pieces(f, m, ball, eps, spec);
  // Excluded balls remove O(eps) for 1/r^2 singularities; cancel that term.
  auto full = ball_pieces(f, m, ball, eps, spec);
  auto half = ball_pieces(f, m, ball, 0.5 * eps, spec);
  VectorEstimate out;
  out.value.resize(m);
  out.error.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    out.value[k] = 2 * half.value[k] - full.value[k];
    out.error[k] = 2 * half.error[k] + full.error[k] + 0.25 * std::abs(half.value[k] - full.value[k]);
  }
  out.n_evals = full.n_evals + half.n_evals;
  out.converged = full.converged && half.converged;
  return out;
}

Estimate integrate_3d(const std::function<double(const Vec3&)>& f, const Domain3& domain,
                      const QuadratureSpec& spec) {
  auto r = integrate_3d([&](const Vec3& x, std::span<double> o) { o[0] = f(x); }, 1, domain, spec);
  return Estimate{r.value[0], r.error[0], r.n_evals, r.converged};
}

}  // namespace abphase
