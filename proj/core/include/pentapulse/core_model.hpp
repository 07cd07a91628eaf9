#pragma once

// Domain types shared by every module: level schemes, unit conventions,
// pulse envelopes and the space-time grid.
//
// Everything is dimensionless: times in units of the reference duration T,
// Rabi frequencies and detunings in 1/T, positions in units of the scaled
// length L = Omega_ref^2 T / q.

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace pentapulse {

inline constexpr int kLevels = 5;
inline constexpr int kTransitions = 4;

using Rabi4 = std::array<double, kTransitions>;
using Detuning4 = std::array<double, kTransitions>;

enum class SchemeKind { m_type, extended_lambda };

std::string_view to_string(SchemeKind scheme);
SchemeKind scheme_from_string(std::string_view name);

/// +1 when level i+2 lies above level i+1 (absorption raises the atom),
/// -1 otherwise. M: up, down, up, down. Extended Lambda: up, up, down, down.
std::array<int, kTransitions> transition_orientation(SchemeKind scheme);

/// Multi-photon detunings delta_1..delta_4 (delta_0 = 0 implied) built from
/// the single-photon detunings by walking the ladder:
/// delta_k = delta_{k-1} + orientation_k * Delta_k.
Detuning4 compose_multiphoton_detunings(SchemeKind scheme, const Detuning4& single);

/// All two-photon detunings vanish: delta_2 = 0, delta_3 = delta_1, delta_4 = delta_2.
bool check_two_photon_resonance(const Detuning4& multi, double tol);

/// Single-photon detunings that make every two-photon detuning vanish with
/// delta_1 = delta (equal values for M, alternating (+,-,-,+) for extended Lambda).
Detuning4 resonant_detunings(SchemeKind scheme, double delta);

class ScaledUnits {
 public:
  ScaledUnits(double t_ref, double omega_ref, double q);

  double t_ref() const noexcept { return t_ref_; }
  double omega_ref() const noexcept { return omega_ref_; }
  double q() const noexcept { return q_; }
  /// L = Omega_ref^2 T_ref / q, in the physical length unit implied by q.
  double length_unit() const noexcept { return omega_ref_ * omega_ref_ * t_ref_ / q_; }

  double time_to_scaled(double t) const noexcept { return t / t_ref_; }
  double time_from_scaled(double s) const noexcept { return s * t_ref_; }
  double rate_to_scaled(double w) const noexcept { return w * t_ref_; }
  double rate_from_scaled(double s) const noexcept { return s / t_ref_; }
  double length_to_scaled(double x) const noexcept { return x / length_unit(); }
  double length_from_scaled(double s) const noexcept { return s * length_unit(); }

 private:
  double t_ref_;
  double omega_ref_;
  double q_;
};

struct GaussianShape {
  double amplitude = 0.0;     // 1/T
  double width_factor = 1.0;  // a in A exp(-a (tau - tc)^2)
  double center = 0.0;        // T
};

struct TabulatedShape {
  std::vector<std::pair<double, double>> samples;  // sorted (tau, value)
};

class PulseEnvelope {
 public:
  PulseEnvelope() : shape_(GaussianShape{}) {}
  static PulseEnvelope gaussian(double amplitude, double width_factor, double center = 0.0);
  static PulseEnvelope tabulated(std::vector<std::pair<double, double>> samples);
  static PulseEnvelope off() { return gaussian(0.0, 1.0, 0.0); }

  double operator()(double tau) const noexcept;
  double peak() const noexcept;
  /// Full width at half maximum; 0 for an envelope that is identically zero.
  double fwhm() const;
  bool is_gaussian() const noexcept { return std::holds_alternative<GaussianShape>(shape_); }
  const GaussianShape* as_gaussian() const noexcept { return std::get_if<GaussianShape>(&shape_); }
  const TabulatedShape* as_tabulated() const noexcept { return std::get_if<TabulatedShape>(&shape_); }
  /// Same shape, amplitude multiplied by `factor`.
  PulseEnvelope scaled(double factor) const;
  /// Same shape moved later by `shift`.
  PulseEnvelope shifted(double shift) const;

 private:
  explicit PulseEnvelope(std::variant<GaussianShape, TabulatedShape> s) : shape_(std::move(s)) {}
  std::variant<GaussianShape, TabulatedShape> shape_;
};

struct PulseSet {
  std::array<PulseEnvelope, kTransitions> envelopes;
  Detuning4 detunings{};  // single-photon Delta_1..Delta_4
  SchemeKind scheme = SchemeKind::m_type;

  Rabi4 rabi(double tau) const noexcept;
  Detuning4 multiphoton() const { return compose_multiphoton_detunings(scheme, detunings); }
  bool resonant(double tol = 1e-12) const { return check_two_photon_resonance(multiphoton(), tol); }
  /// Common single-photon detuning magnitude Delta (= delta_1).
  double delta() const { return multiphoton()[0]; }
};

/// Uniform time grid of n_tau nodes on [tau_min, tau_max] and space grid of
/// n_x steps on [0, x_max].
struct Grid {
  double tau_min = -10.0;
  double tau_max = 10.0;
  std::size_t n_tau = 2001;
  double x_max = 0.0;
  std::size_t n_x = 1;

  double dtau() const noexcept { return (tau_max - tau_min) / static_cast<double>(n_tau - 1); }
  double tau(std::size_t k) const noexcept { return tau_min + dtau() * static_cast<double>(k); }
  double dx() const noexcept { return x_max / static_cast<double>(n_x); }
  double x(std::size_t j) const noexcept { return dx() * static_cast<double>(j); }
  std::vector<double> taus() const;

  /// Throws InvalidInput when the grid is malformed.
  void validate() const;
};

inline constexpr double kSupportCutoff = 1e-6;

/// Throws RegimeError unless every nonzero envelope has decayed below
/// kSupportCutoff of its peak at both ends of the time window.
void check_pulses_off_at_edges(const PulseSet& pulses, const Grid& grid);

}  // namespace pentapulse
