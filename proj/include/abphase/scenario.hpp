#pragma once

#include <abphase/constants.hpp>
#include <abphase/phase_result.hpp>
#include <abphase/quadrature.hpp>
#include <abphase/sources.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace abphase {

enum class ScenarioKind { Magnetic, Electric, EnergyIdentity };

std::string_view to_string(ScenarioKind k);

struct ChargePair {
  double q1 = 1.0;
  Vec3 x1;
  double q2 = 1.0;
  Vec3 x2{1, 0, 0};

  bool operator==(const ChargePair&) const = default;
};

struct SweepSpec {
  std::string parameter;  // dotted path into the scenario file, e.g. "source.length"
  std::vector<double> values;

  bool operator==(const SweepSpec&) const = default;
};

// Electric configurations given as the symmetric pair keep their parameters so
// that sweeps over them move both charges.
struct PairSpec {
  double q = 1.0;
  double big_q = 1.0;
  double separation = 1.0;
  double dwell_time = 1.0;

  bool operator==(const PairSpec&) const = default;
};

struct ScenarioConfig {
  std::string name;
  ScenarioKind kind = ScenarioKind::Magnetic;
  UnitSystem units = UnitSystem::Natural;

  // magnetic
  std::optional<CurrentSource> source;
  std::optional<double> turns_per_length;  // finite solenoid given by winding density
  std::optional<ChargeTrajectory> trajectory;
  // electric
  std::optional<StaticChargeConfig> charges;
  std::optional<PairSpec> pair_spec;
  // energy identity
  std::optional<ChargePair> pair;

  std::vector<std::string> methods;
  QuadratureSpec quadrature;
  std::optional<SweepSpec> sweep;

  bool operator==(const ScenarioConfig&) const = default;
};

// Selectors accepted for a scenario kind.
std::vector<std::string> method_selectors(ScenarioKind kind);

// Strict parse: unknown keys and type mismatches are ValidationErrors naming the
// offending field; syntax errors report origin:line:column.
ScenarioConfig parse_scenario(std::string_view text, const std::string& origin = "<input>");
ScenarioConfig load_scenario(const std::string& path);
std::string serialize_scenario(const ScenarioConfig& cfg);

// Copy of cfg with the numeric field at a dotted path replaced.
ScenarioConfig with_parameter(const ScenarioConfig& cfg, const std::string& path, double value);

struct MethodRun {
  std::string method;  // selector
  PhaseResult result;
  double normalized = 0.0;
  double wall_ms = 0.0;
  std::string error;  // engine failure, empty on success

  bool ok() const { return error.empty() && result.converged; }
};

struct Deviation {
  std::string a, b;
  double value = 0.0;  // |normalized_a - normalized_b|
};

struct RunReport {
  std::string scenario;
  ScenarioKind kind = ScenarioKind::Magnetic;
  // Normalization: q Phi / hbar, the closed-form electric phase, or the Coulomb energy.
  double reference = 0.0;
  std::vector<MethodRun> runs;
  std::vector<Deviation> deviations;

  bool all_converged() const;
};

struct RunOptions {
  bool diagnostics = false;  // adds self-term and line statistics
};

RunReport run_scenario(const ScenarioConfig& cfg, const RunOptions& opt = {});

struct SweepReport {
  std::string scenario;
  std::string parameter;
  std::vector<double> values;
  std::vector<RunReport> runs;
  std::vector<std::string> errors;  // per value, empty when the run went through
  // One line per method: whether |normalized - 1| and the error estimates decrease.
  std::vector<std::string> monotonicity;

  bool all_converged() const;
};

SweepReport run_sweep(const ScenarioConfig& cfg, const RunOptions& opt = {});

}  // namespace abphase
