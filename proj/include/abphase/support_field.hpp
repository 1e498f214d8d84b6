#pragma once

#include <abphase/constants.hpp>
#include <abphase/quadrature.hpp>
#include <abphase/sources.hpp>

#include <optional>
#include <string>

namespace abphase {

// Field model restricted to the region where a source's field lives, used by
// the overlap integrals. Winding ripple is averaged out: the solenoid is a
// continuous current sheet and the toroid field is mu0 N I / (2 pi rho) inside
// the tube.
class SupportField {
 public:
  // nullopt for sources without a bounded field region (loops, polylines).
  static std::optional<SupportField> for_source(const CurrentSource& s, const PhysicalConstants& k,
                                                double rel_tol = 1e-10);

  Vec3 b(const Vec3& x) const;
  const Domain3& domain() const { return domain_; }
  const std::string& model() const { return model_; }
  // Whether x lies in the closed support region (plus a relative margin).
  bool contains(const Vec3& x, double margin = 0.0) const;
  // True when B vanishes identically outside the domain.
  bool exact() const { return exact_; }

 private:
  CurrentSource source_;
  PhysicalConstants k_;
  double rel_tol_ = 1e-10;
  Domain3 domain_;
  std::string model_;
  bool exact_ = true;
  Vec3 e1_, e2_;
};

}  // namespace abphase
