#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

namespace abphase {

enum class PhaseMethod {
  WilsonLoop,
  EnclosedFlux,
  FieldOverlap,
  AxisReduction,
  AmpereReduction,
  ShellLinking,
  ElectricPotential,
  ElectricFieldOverlap,
};

std::string_view to_string(PhaseMethod m);
// CLI selector names ("wilson", "flux", "overlap", ...).
std::string_view selector_name(PhaseMethod m);
PhaseMethod method_from_selector(std::string_view s);

// Phase in radians, unwrapped (not reduced mod 2 pi).
struct PhaseResult {
  double phase = 0.0;
  double abs_error_estimate = 0.0;
  PhaseMethod method = PhaseMethod::WilsonLoop;
  std::int64_t n_evaluations = 0;
  bool converged = false;
  std::string note;
  // Named side quantities (self-term magnitude, line counts, ...).
  std::map<std::string, double> diagnostics;
};

// phase * hbar / (q * flux): 1.0 for the textbook Aharonov-Bohm value.
double normalized_phase(const PhaseResult& p, double q, double flux, double hbar);

}  // namespace abphase
