#pragma once

#include <abphase/vec3.hpp>

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <variant>
#include <vector>

namespace abphase {

struct QuadratureSpec {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  std::int64_t max_subdivisions = 200000;
  // Outer radius for all-space integrals; 0 picks 50x the source extent.
  double truncation_radius = 0.0;
  // Radius of the balls cut out around declared singular points; 0 keeps them.
  double exclusion_radius = 0.0;
  // Extrapolate the exclusion radius to zero from r and r/2.
  bool richardson = false;

  // Field evaluation (Biot-Savart segment quadrature) relative tolerance.
  double field_rel_tol = 1e-10;

  // Field-line tracing and shell decomposition.
  double closure_tol = 1e-6;
  double max_arclength = 0.0;  // 0: automatic
  int seed_grid = 32;
  double max_unclassified_fraction = 0.01;

  int threads = 1;

  bool operator==(const QuadratureSpec&) const = default;
};

void validate(const QuadratureSpec& spec);

struct Estimate {
  double value = 0.0;
  double error = 0.0;
  std::int64_t n_evals = 0;
  bool converged = false;
};

// Adaptive Gauss-Kronrod (7/15) with global bisection. Infinite limits are
// mapped onto finite ones. Breakpoints inside (a, b) start new panels.
Estimate integrate_1d(const std::function<double(double)>& f, double a, double b,
                      const QuadratureSpec& spec, std::span<const double> breakpoints = {});

// Vector-valued variant; convergence requires every component to meet the tolerance.
struct VectorEstimate {
  std::vector<double> value;
  std::vector<double> error;
  std::int64_t n_evals = 0;
  bool converged = false;
};

using VectorFunction1 = std::function<void(double, std::span<double>)>;
VectorEstimate integrate_1d_vector(const VectorFunction1& f, std::size_t n_out, double a, double b,
                                   const QuadratureSpec& spec, std::span<const double> breakpoints = {});

// Adaptive Genz-Malik (degree 7/5) cubature over a union of boxes in 2 or 3 dimensions.
struct CubatureBox {
  std::vector<double> lo;
  std::vector<double> hi;
  int tag = 0;  // handed to tagged integrands, e.g. to select a coordinate chart
};

using CubatureIntegrand = std::function<void(std::span<const double> x, std::span<double> out)>;

VectorEstimate cubature(const CubatureIntegrand& f, std::size_t n_out, std::span<const CubatureBox> boxes,
                        const QuadratureSpec& spec);

using TaggedIntegrand = std::function<void(std::span<const double> x, int tag, std::span<double> out)>;
VectorEstimate cubature(const TaggedIntegrand& f, std::size_t n_out, std::span<const CubatureBox> boxes,
                        const QuadratureSpec& spec);

// Physical 3D domains.
struct BoxDomain {
  Vec3 lo;
  Vec3 hi;
};

// z measured along axis from base; either limit may be infinite.
struct CylinderDomain {
  Vec3 base;
  Vec3 axis{0, 0, 1};
  double radius = 1.0;
  double z_lo = 0.0;
  double z_hi = 1.0;
};

struct TorusTubeDomain {
  Vec3 center;
  Vec3 normal{0, 0, 1};
  double major_radius = 1.0;
  double minor_radius = 0.1;
};

// Ball; integrable point singularities inside are handled by a smooth
// partition of unity with spherical coordinates centred on each point.
struct BallDomain {
  Vec3 center;
  double radius = 1.0;
  std::vector<Vec3> singular_points;
};

using Domain3 = std::variant<BoxDomain, CylinderDomain, TorusTubeDomain, BallDomain>;

using FieldIntegrand = std::function<void(const Vec3& x, std::span<double> out)>;

VectorEstimate integrate_3d(const FieldIntegrand& f, std::size_t n_out, const Domain3& domain,
                            const QuadratureSpec& spec);
Estimate integrate_3d(const std::function<double(const Vec3&)>& f, const Domain3& domain,
                      const QuadratureSpec& spec);

// Deterministic pairwise summation.
double pairwise_sum(std::span<const double> v);

}  // namespace abphase
