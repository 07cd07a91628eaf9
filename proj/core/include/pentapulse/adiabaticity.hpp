#pragma once

// Dimensionless margins for the single-atom and medium adiabatic regimes.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pentapulse/core_model.hpp"

namespace pentapulse {

enum class Verdict { adiabatic, not_adiabatic, not_applicable };
std::string_view to_string(Verdict v);

struct Thresholds {
  double much_greater = 10.0;  // "x >> 1"
  double much_less = 0.1;      // "x << 1"
};

struct Margin {
  std::string name;
  double value = 0.0;
  bool applicable = true;
  bool pass = false;
};

struct AdiabaticityReport {
  double T = 0.0;
  double delta = 0.0;
  double tau_overlap = 0.0;  // instant of maximal V^4
  std::vector<Margin> margins;
  Verdict verdict = Verdict::not_applicable;
  // Medium-only fields.
  double x = 0.0;
  double x_ad = 0.0;  // length where f1 reaches the "<<1" threshold
  std::vector<std::string> flags;

  /// Margin by name; nullptr if absent.
  const Margin* find(std::string_view name) const;
  double value(std::string_view name) const;
};

/// FWHM of the narrowest nonzero envelope.
double shortest_pulse_duration(const PulseSet& pulses);

/// m1 = |Delta| T, m2 = (Omega_2^2 + Omega_3^2) T / |Delta|, m3 = Omega_1^2 T / |Delta|,
/// g1 = (x2 - x1) T / sqrt(Delta^2 + 4 x2), g2 = sqrt(Delta^2 + 4 x1) T,
/// g3 = x1 T / sqrt(Delta^2 + 4 x1), all at the grid node of maximal V^4.
/// m3 and g3 apply only where V^4 != 0; margins that would divide by Delta = 0
/// are not applicable. Verdict is not_applicable when V^4 vanishes on the grid.
AdiabaticityReport single_atom_margins(const PulseSet& pulses, double T, double delta,
                                       const Grid& grid, const Thresholds& th = {});

/// f1 = (q x / Delta) / (Delta T), f2 = q x / (Omega^2 T), f3 = q x / Delta.
/// Passes iff f1 < much_less. f2 >= 1 raises PUMP_DEPLETION_SCALE and
/// f3 >= 1 raises OPTICAL_LENGTH_SCALE (advisory only).
AdiabaticityReport medium_margins(double q, double x, double delta, double T, double omega2,
                                  const Thresholds& th = {});

}  // namespace pentapulse
