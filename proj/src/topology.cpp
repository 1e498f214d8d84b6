#include <abphase/errors.hpp>
#include <abphase/topology.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace abphase {

namespace {

double seg_point_dist(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 d = b - a;
  const double l2 = norm2(d);
  const double t = l2 > 0 ? std::clamp(dot(p - a, d) / l2, 0.0, 1.0) : 0.0;
  return norm(p - (a + t * d));
}

// Minimum distance between segments p0p1 and q0q1.
double seg_seg_dist(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1) {
  const Vec3 u = p1 - p0, v = q1 - q0, w = p0 - q0;
  const double a = dot(u, u), b = dot(u, v), c = dot(v, v), d = dot(u, w), e = dot(v, w);
  const double den = a * c - b * b;
  double s = 0, t = 0;
  if (den > 1e-14 * a * c) {
    s = std::clamp((b * e - c * d) / den, 0.0, 1.0);
  }
  t = c > 0 ? (b * s + e) / c : 0.0;
  if (t < 0 || t > 1) {
    t = std::clamp(t, 0.0, 1.0);
    s = a > 0 ? std::clamp((b * t - d) / a, 0.0, 1.0) : 0.0;
  }
  const double best = norm((p0 + s * u) - (q0 + t * v));
  return std::min({best, seg_point_dist(p0, q0, q1), seg_point_dist(p1, q0, q1), seg_point_dist(q0, p0, p1),
                   seg_point_dist(q1, p0, p1)});
}

// Signed solid angle / 4 pi contribution of one segment pair
// (exact for straight segments).
double pair_term(const Vec3& p1, const Vec3& p2, const Vec3& p3, const Vec3& p4) {
  const Vec3 r13 = p3 - p1, r14 = p4 - p1, r23 = p3 - p2, r24 = p4 - p2;
  Vec3 n[4] = {cross(r13, r14), cross(r14, r24), cross(r24, r23), cross(r23, r13)};
  for (auto& v : n) {
    const double m = norm(v);
    if (!(m > 0)) return 0.0;  // coplanar pair
    v = v / m;
  }
  double omega = 0.0;
  for (int i = 0; i < 4; ++i) omega += std::asin(std::clamp(dot(n[i], n[(i + 1) % 4]), -1.0, 1.0));
  const double sgn = dot(cross(p4 - p3, p2 - p1), r13);
  if (sgn == 0) return 0.0;
  return (sgn > 0 ? omega : -omega) / (4 * kPi);
}

double gauss_sum(const std::vector<Vec3>& c1, const std::vector<Vec3>& c2) {
  const std::size_t n1 = c1.size(), n2 = c2.size();
  std::vector<double> rows(n1);
  for (std::size_t i = 0; i < n1; ++i) {
    const Vec3& a = c1[i];
    const Vec3& b = c1[(i + 1) % n1];
    std::vector<double> row(n2);
    for (std::size_t j = 0; j < n2; ++j) row[j] = pair_term(a, b, c2[j], c2[(j + 1) % n2]);
    rows[i] = pairwise_sum(row);
  }
  return pairwise_sum(rows);
}

std::vector<Vec3> bisect_all(const std::vector<Vec3>& c) {
  std::vector<Vec3> out;
  out.reserve(2 * c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    out.push_back(c[i]);
    out.push_back(0.5 * (c[i] + c[(i + 1) % c.size()]));
  }
  return out;
}

double extent(const std::vector<Vec3>& c) {
  double r = 0.0;
  for (const auto& p : c) r = std::max(r, norm(p - c.front()));
  return r;
}

}  // namespace

LinkingResult linking_number_detail(const std::vector<Vec3>& c1, const std::vector<Vec3>& c2) {
  if (c1.size() < 3 || c2.size() < 3) throw GeometryError("linking number needs closed polygons of 3+ points");
  const double eps = 1e-12 * std::max(extent(c1), extent(c2));
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c1.size(); ++i)
    for (std::size_t j = 0; j < c2.size(); ++j)
      dmin = std::min(dmin, seg_seg_dist(c1[i], c1[(i + 1) % c1.size()], c2[j], c2[(j + 1) % c2.size()]));
  if (!(dmin > eps)) throw GeometryError("curves intersect; linking number undefined");

  LinkingResult r;
  std::vector<Vec3> a = c1, b = c2;
  for (;;) {
    r.raw = gauss_sum(a, b);
    r.value = static_cast<int>(std::lround(r.raw));
    r.residual = std::abs(r.raw - r.value);
    if (r.residual <= 0.1) return r;
    if (r.refinements == 3) break;
    // Rounding noise from nearly degenerate pairs; finer segments of the coarser curve help.
    if (a.size() <= b.size())
      a = bisect_all(a);
    else
      b = bisect_all(b);
    ++r.refinements;
  }
  throw GeometryError("linking number did not settle to an integer (residual " + std::to_string(r.residual) +
                      "); curves too close or too coarse");
}

int linking_number(const std::vector<Vec3>& c1, const std::vector<Vec3>& c2) {
  return linking_number_detail(c1, c2).value;
}

double winding_angle(const std::vector<Vec3>& loop, const Vec3& axis_point, const Vec3& axis_dir) {
  if (loop.size() < 2) throw GeometryError("winding number needs a closed polygon");
  const Vec3 ax = normalized(axis_dir);
  auto perp = [&](const Vec3& p) {
    const Vec3 d = p - axis_point;
    return d - dot(d, ax) * ax;
  };
  double scale = 0.0;
  for (const auto& p : loop) scale = std::max(scale, norm(perp(p)));
  const double eps = 1e-12 * std::max(scale, 1e-300);
  double total = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Vec3 u = perp(loop[i]), v = perp(loop[(i + 1) % loop.size()]);
    if (seg_point_dist({}, u, v) <= eps) throw GeometryError("loop passes through the axis");
    total += std::atan2(dot(cross(u, v), ax), dot(u, v));
  }
  return total;
}

int winding_number(const std::vector<Vec3>& loop, const Vec3& axis_point, const Vec3& axis_dir) {
  return static_cast<int>(std::lround(winding_angle(loop, axis_point, axis_dir) / (2 * kPi)));
}

std::vector<Vec3> simplify_closed_polyline(const std::vector<Vec3>& pts,
                                           const std::function<double(const Vec3&)>& tolerance) {
  const std::size_t n = pts.size();
  if (n <= 4) return pts;
  // Anchor at the first point and the point farthest from it.
  std::size_t far = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (norm(pts[i] - pts[0]) > norm(pts[far] - pts[0])) far = i;
  if (far == 0) return pts;
  std::vector<double> tol(n);
  for (std::size_t i = 0; i < n; ++i) tol[i] = tolerance(pts[i]);
  std::vector<char> keep(n, 0);
  keep[0] = keep[far] = 1;
  // Index ranges on the closed ring; j == n stands for 0.
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, far}, {far, n}};
  while (!stack.empty()) {
    const auto [i, j] = stack.back();
    stack.pop_back();
    if (j <= i + 1) continue;
    const Vec3& a = pts[i];
    const Vec3& b = pts[j % n];
    std::size_t worst = 0;
    double excess = 0.0;
    for (std::size_t k = i + 1; k < j; ++k) {
      const double e = seg_point_dist(pts[k], a, b) - tol[k];
      if (e > excess || (worst == 0 && e > 0)) {
        excess = e;
        worst = k;
      }
    }
    if (worst != 0) {
      keep[worst] = 1;
      stack.push_back({i, worst});
      stack.push_back({worst, j});
    }
  }
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < n; ++i)
    if (keep[i]) out.push_back(pts[i]);
  if (out.size() < 3) return pts;
  return out;
}

}  // namespace abphase
