#pragma once

#include <abphase/fields.hpp>
#include <abphase/quadrature.hpp>
#include <abphase/vec3.hpp>

#include <functional>
#include <string>
#include <vector>

namespace abphase {

struct FieldLine {
  std::vector<Vec3> points;
  bool closed = false;
  double flux_label = 0.0;
  double arclength = 0.0;
  double closure_gap = 0.0;       // seed distance at the accepted return, or at the last return seen
  int returns = 0;                // same-direction crossings of the seed plane
  std::string diagnostic;         // why tracing stopped when not closed
};

// Integrates dx/ds = B/|B| from seed until the line returns to the seed
// (within closure_tol x the source size, tangent alignment > 0.99) or exceeds
// max_arclength. After max_returns forward crossings of the seed plane without
// closure it stops with the last crossing as its final point. Throws
// NumericalError when |B| underflows at the seed.
FieldLine trace_field_line(const FieldEvaluator& field, const Vec3& seed, const QuadratureSpec& spec,
                           int max_returns = 32);
FieldLine trace_field_line(const CurrentSource& source, const Vec3& seed, const PhysicalConstants& k,
                           const QuadratureSpec& spec, int max_returns = 32);

struct LinkingResult {
  int value = 0;
  double raw = 0.0;       // Gauss integral before rounding
  double residual = 0.0;  // |raw - value|
  int refinements = 0;
};

// Gauss linking number of two closed polygons (first vertex not repeated).
LinkingResult linking_number_detail(const std::vector<Vec3>& c1, const std::vector<Vec3>& c2);
int linking_number(const std::vector<Vec3>& c1, const std::vector<Vec3>& c2);

// Douglas-Peucker on a closed polygon where each dropped point must stay within
// tolerance(p) of the replacing chord. With tolerance below half the distance to
// another curve the simplified polygon is homotopic to the original in that
// curve's complement, so linking numbers are preserved.
std::vector<Vec3> simplify_closed_polyline(const std::vector<Vec3>& pts,
                                           const std::function<double(const Vec3&)>& tolerance);

// Signed number of turns of a closed polygon about an oriented axis.
int winding_number(const std::vector<Vec3>& loop, const Vec3& axis_point, const Vec3& axis_dir);
double winding_angle(const std::vector<Vec3>& loop, const Vec3& axis_point, const Vec3& axis_dir);

}  // namespace abphase
