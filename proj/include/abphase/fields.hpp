#pragma once

#include <abphase/constants.hpp>
#include <abphase/quadrature.hpp>
#include <abphase/sources.hpp>
#include <abphase/vec3.hpp>

#include <memory>
#include <vector>

namespace abphase {

struct FieldOptions {
  double rel_tol = 1e-10;
  // Evaluation closer than this to a filament throws SingularityError.
  // 0 selects 1e-9 x the characteristic source size.
  double exclusion_radius = 0.0;
};

// Prepared evaluator for one source; cheap to call repeatedly and safe to
// share between threads.
class FieldEvaluator {
 public:
  FieldEvaluator(const CurrentSource& source, const PhysicalConstants& k, FieldOptions opt = {});
  ~FieldEvaluator();
  FieldEvaluator(FieldEvaluator&&) noexcept;
  FieldEvaluator& operator=(FieldEvaluator&&) noexcept;

  Vec3 b(const Vec3& x) const;
  Vec3 a(const Vec3& x) const;
  // Distance to the nearest current filament; infinite for the ideal solenoid.
  double filament_distance(const Vec3& x) const;
  double exclusion_radius() const;
  const CurrentSource& source() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Vec3 b_field(const CurrentSource& source, const Vec3& x, const PhysicalConstants& k, const FieldOptions& opt = {});
Vec3 vector_potential(const CurrentSource& source, const Vec3& x, const PhysicalConstants& k,
                      const FieldOptions& opt = {});

// Quasi-static field of a charge q at x_p moving with velocity v.
Vec3 delta_b_moving_charge(double q, const Vec3& x_p, const Vec3& v, const Vec3& x, const PhysicalConstants& k);
// Coulomb field of a point charge.
Vec3 coulomb_field(double q, const Vec3& x_q, const Vec3& x, const PhysicalConstants& k);

enum class ChargeSelector { External, Test, All };
Vec3 e_field_point_charges(const StaticChargeConfig& cfg, const Vec3& x, ChargeSelector which,
                           const PhysicalConstants& k);

// lambda(x) = amplitude * P_member(y) * exp(-|y|^2), y = (x - center) / width.
// Members: 0: 1, 1: y_x, 2: y_x y_y, 3: y_z^2 - y_x, 4: 1 + y_x y_y y_z.
struct GaugeFunction {
  int member = 0;
  Vec3 center;
  double width = 1.0;
  double amplitude = 0.0;

  static constexpr int kFamilySize = 5;

  double value(const Vec3& x) const;
  Vec3 gradient(const Vec3& x) const;
};

std::vector<GaugeFunction> builtin_gauge_family(const Vec3& center, double width, double amplitude);

Vec3 gauge_shifted_potential(const CurrentSource& source, const Vec3& x, const GaugeFunction& lambda,
                             const PhysicalConstants& k, const FieldOptions& opt = {});

// Flux through the closed spatial image of the trajectory (every winding counts),
// over the cone spanned from the loop centroid.
Estimate flux_through_loop(const CurrentSource& source, const ChargeTrajectory& loop, const PhysicalConstants& k,
                           const QuadratureSpec& spec);
Estimate flux_through_loop(const FieldEvaluator& field, const ChargeTrajectory& loop, const QuadratureSpec& spec);

}  // namespace abphase
