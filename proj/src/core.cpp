#include <abphase/constants.hpp>
#include <abphase/errors.hpp>
#include <abphase/phase_result.hpp>

#include <array>
#include <cmath>
#include <string>
#include <utility>

namespace abphase {

double PhysicalConstants::c() const { return 1.0 / std::sqrt(eps0 * mu0); }

PhysicalConstants PhysicalConstants::si() {
  // CODATA 2018.
  return {1.25663706212e-6, 8.8541878128e-12, 1.054571817e-34};
}

PhysicalConstants PhysicalConstants::natural() { return {1.0, 1.0, 1.0}; }

PhysicalConstants PhysicalConstants::for_units(UnitSystem u) {
  return u == UnitSystem::SI ? si() : natural();
}

std::string_view to_string(UnitSystem u) { return u == UnitSystem::SI ? "si" : "natural"; }

UnitSystem unit_system_from_string(std::string_view s) {
  if (s == "si" || s == "SI") return UnitSystem::SI;
  if (s == "natural") return UnitSystem::Natural;
  throw ValidationError("units: expected 'si' or 'natural', got '" + std::string(s) + "'");
}

namespace {

struct MethodName {
  PhaseMethod method;
  std::string_view display;
  std::string_view selector;
};

constexpr std::array<MethodName, 8> kMethodNames{{
    {PhaseMethod::WilsonLoop, "WilsonLoop", "wilson"},
    {PhaseMethod::EnclosedFlux, "EnclosedFlux", "flux"},
    {PhaseMethod::FieldOverlap, "FieldOverlap", "overlap"},
    {PhaseMethod::AxisReduction, "AxisReduction", "axis-reduction"},
    {PhaseMethod::AmpereReduction, "AmpereReduction", "ampere-reduction"},
    {PhaseMethod::ShellLinking, "ShellLinking", "shell-linking"},
    {PhaseMethod::ElectricPotential, "ElectricPotential", "electric-potential"},
    {PhaseMethod::ElectricFieldOverlap, "ElectricFieldOverlap", "electric-overlap"},
}};

}  // namespace

std::string_view to_string(PhaseMethod m) {
  for (const auto& n : kMethodNames)
    if (n.method == m) return n.display;
  return "?";
}

std::string_view selector_name(PhaseMethod m) {
  for (const auto& n : kMethodNames)
    if (n.method == m) return n.selector;
  return "?";
}

PhaseMethod method_from_selector(std::string_view s) {
  for (const auto& n : kMethodNames)
    if (n.selector == s || n.display == s) return n.method;
  throw ValidationError("unknown method selector '" + std::string(s) + "'");
}

double normalized_phase(const PhaseResult& p, double q, double flux, double hbar) {
  if (q == 0.0 || flux == 0.0)
    throw ValidationError("normalized_phase: normalization undefined for zero charge or zero flux");
  return p.phase * hbar / (q * flux);
}

}  // namespace abphase
