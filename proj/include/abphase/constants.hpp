#pragma once

#include <numbers>
#include <string_view>

namespace abphase {

inline constexpr double kPi = std::numbers::pi;

enum class UnitSystem { SI, Natural };

struct PhysicalConstants {
  double mu0 = 1.0;   // T m / A
  double eps0 = 1.0;  // F / m
  double hbar = 1.0;  // J s

  double c() const;

  static PhysicalConstants si();
  static PhysicalConstants natural();
  static PhysicalConstants for_units(UnitSystem u);
};

std::string_view to_string(UnitSystem u);
UnitSystem unit_system_from_string(std::string_view s);

}  // namespace abphase
