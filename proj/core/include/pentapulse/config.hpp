#pragma once

// Scenario configuration: a strict JSON schema (see SCHEMA.md) parsed into
// plain values, with every validation problem collected before failing.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pentapulse/adiabaticity.hpp"
#include "pentapulse/core_model.hpp"

namespace pentapulse {

enum class ExperimentKind { eigen, transfer, btransfer, propagate, store, double_store, check_adiabatic };

std::string_view to_string(ExperimentKind k);
ExperimentKind experiment_from_string(std::string_view name);

struct PulseSpec {
  enum class Kind { gaussian, tabulated, off } kind = Kind::off;
  double amplitude = 0.0;
  double width = 1.0;  // a in A exp(-a (tau - tc)^2)
  double center = 0.0;
  std::vector<std::pair<double, double>> samples;

  PulseEnvelope envelope() const;
};

using PulseSpecs = std::array<PulseSpec, kTransitions>;

struct Bound {
  std::optional<double> min;
  std::optional<double> max;
  bool accepts(double v) const;
};

struct ScenarioConfig {
  ExperimentKind experiment = ExperimentKind::eigen;
  SchemeKind scheme = SchemeKind::m_type;
  PulseSpecs pulses;
  /// Either a resonant pattern from one Delta or four explicit values.
  std::optional<double> delta;
  Detuning4 single_photon{};
  Grid grid;
  std::optional<std::array<double, kTransitions>> q;
  bool q_uniform = true;
  Thresholds thresholds;
  double T = 0.0;  // 0: FWHM of the narrowest pulse
  std::string output;

  // transfer
  int initial_level = 1;
  int target_level = 5;
  // eigen
  std::size_t oracle_samples = 0;
  std::uint64_t seed = 1;
  std::size_t stride = 1;
  // propagate
  bool adaptive = true;
  int tau_substeps = 0;
  double lte_tolerance = 1e-4;
  int max_refinement = 6;
  std::vector<double> depths;
  // store / double-store
  std::optional<double> length_factor;  // x_max of the grid = factor * storage length
  std::optional<PulseSpecs> read_pulses;
  std::optional<PulseSpecs> write2, read1, read2;

  bool convergence = true;
  std::map<std::string, Bound> expect;

  PulseSet pulse_set() const;
  static PulseSet pulse_set(const PulseSpecs& specs, const ScenarioConfig& base);
};

/// Parses and validates; throws ConfigError listing every problem.
ScenarioConfig parse_config(const std::string& text);

/// Canonical JSON (sorted keys, two-space indent, shortest round-trip floats).
std::string serialize_config(const ScenarioConfig& config);

/// Replaces the value at a dotted path ("medium.q", "pulses.1.amplitude") in
/// a JSON document and returns the new document. Throws ConfigError when the
/// path does not exist.
std::string override_config_value(const std::string& text, const std::string& path, double value);

}  // namespace pentapulse
