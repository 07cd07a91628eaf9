#pragma once

// Four pulses in a one-dimensional medium of five-level atoms, in running
// coordinates (x, tau = t - x/c). Complex envelopes obey
//   dOmega_i/dx = -i q_i s_i b_i conj(b_{i+1}),
// with s_i = +1 when level i+1 lies above level i and -1 otherwise, which is
// equivalent to the balance laws d|Omega_i|^2/dx = s_i q_i d(|b_1|^2+..+|b_i|^2)/dtau.

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "pentapulse/adiabaticity.hpp"
#include "pentapulse/core_model.hpp"
#include "pentapulse/linalg.hpp"
#include "pentapulse/xi_map.hpp"

namespace pentapulse {

struct MediumParams {
  std::array<double, kTransitions> q{};
  SchemeKind scheme = SchemeKind::m_type;

  static MediumParams uniform(double q, SchemeKind scheme);
  void validate() const;
};

/// Field samples of one x-slice: fields[i][k] = Omega_{i+1}(tau_k).
using SliceFields = std::array<std::vector<Complex>, kTransitions>;

struct SliceDiagnostics {
  double truncation = 0.0;        // max |corrector - predictor| over fields
  double balance_residual = 0.0;  // energy-balance residual, relative to the peak |Omega|^2
  std::array<double, kTransitions> detuning_shift{};  // |Omega|^2-weighted phase gradient
  int substeps = 1;               // x-refinement used to reach this slice
};

struct FieldMap {
  std::vector<double> x;    // n_x + 1 nodes
  std::vector<double> tau;  // n_tau nodes
  std::vector<SliceFields> fields;
  /// Atom amplitudes per slice, empty unless requested.
  std::vector<std::vector<Vec5>> atoms;
  /// Atom amplitudes at tau_max per slice (always stored).
  std::vector<Vec5> final_atoms;
  std::vector<SliceDiagnostics> diagnostics;  // entry j describes the step into slice j
  std::optional<AdiabaticityReport> adiabaticity;

  double magnitude(std::size_t j, int transition, std::size_t k) const {
    return std::abs(fields[j][transition - 1][k]);
  }
  /// int |Omega_i(x_j, tau)|^2 dtau by the trapezoid rule.
  double energy(std::size_t j, int transition) const;
  double max_truncation() const;
  double max_balance_residual() const;
};

struct PropagationOptions {
  /// CF4 substeps per tau interval; 0 picks the smallest count with h|H| <= 2.
  int tau_substeps = 0;
  /// Halve the x step until the truncation estimate is below
  /// lte_tolerance times the boundary peak of each field.
  bool adaptive = true;
  double lte_tolerance = 1e-4;
  int max_refinement = 6;
  bool store_atoms = false;
  /// Atom state at tau_min for the slice at x; ground state |1> when unset.
  std::function<Vec5(double)> initial_state;
  /// Boundary fields at x = 0 overriding the envelopes (e.g. a previous output).
  std::optional<SliceFields> boundary_fields;
  /// Called once per accepted slice j with its fields and atom amplitudes.
  std::function<void(std::size_t, const SliceFields&, const std::vector<Vec5>&)> on_slice;
};

/// Method of lines: every x-slice integrates the TDSE across tau with the
/// local fields, fields advance in x by a second-order predictor-corrector.
/// Throws NumericalError with the slice index on non-finite values or
/// runaway truncation estimates.
FieldMap propagate(const PulseSet& boundary, const MediumParams& medium, const Grid& grid,
                   const PropagationOptions& options = {});

/// Integrates one slice; returns amplitudes at every tau node.
std::vector<Vec5> solve_slice(const Detuning4& multiphoton, const SliceFields& fields,
                              const std::vector<double>& tau, const Vec5& initial,
                              int substeps);

/// Maxwell source -i q_i s_i b_i conj(b_{i+1}) per transition and node.
SliceFields maxwell_source(const MediumParams& medium, const std::vector<Vec5>& atoms);

struct SplitOptions {
  bool enforce_medium_margin = true;
  double T = 0.0;  // 0: shortest pulse FWHM
  Thresholds thresholds;
};

/// Omega_1 = Omega_4 = Omega_10(tau), Omega_2 = Omega_0 sin(theta_0(xi)),
/// Omega_3 = Omega_0 cos(theta_0(xi)) with int_xi^tau Omega_0^2 = q x.
/// Beyond the consumed area theta_0 takes its value at tau_min.
/// Throws RegimeError unless Omega_4 = Omega_1, two-photon resonance holds
/// and (when enforced) the medium margin f1 passes at grid.x_max.
FieldMap analytic_split_solution(const PulseSet& boundary, double q, const Grid& grid,
                                 const SplitOptions& options = {});

/// Normalized overlap of |a| and |b| sampled on the same nodes.
double shape_correlation(const std::vector<double>& a, const std::vector<double>& b);

struct DelayFit {
  double delay = 0.0;
  double correlation = 0.0;
};

/// Shift dt maximizing the correlation of |signal(tau)| with reference(tau - dt).
DelayFit best_delay(const std::vector<double>& tau, const std::vector<double>& signal,
                    const std::function<double(double)>& reference, double max_shift);

struct AdiabatonResult {
  FieldMap map;
  std::vector<double> x_probe;  // requested depths
  std::vector<DelayFit> fits;   // per requested depth
  double conservation_residual = 0.0;  // max_x |Omega_2^2 + Omega_3^2 - Omega_0^2|_inf / Omega_0^2(0)
  double length_unit = 1.0;            // L = Omega_0^2(0) T / q with T = 1
};

/// Propagates the boundary to the largest requested depth and fits the probe
/// delay at each depth (in units of T) against the boundary probe.
AdiabatonResult adiabaton_experiment(const PulseSet& boundary, const MediumParams& medium,
                                     const Grid& grid, const std::vector<double>& depths,
                                     const PropagationOptions& options = {});

/// Adiabaton boundary: Omega_1 = Omega_3 = Omega_4 = 30 e^{-0.2 tau^2},
/// Omega_2 = 0.1 e^{-5 tau^2}, resonant Delta = 100.
PulseSet adiabaton_pulses(SchemeKind scheme = SchemeKind::extended_lambda);

/// u/c = 1 / (1 + q c / Omega_3^2) with qc the scaled product; 0 when Omega_3^2 = 0.
double group_velocity(double omega3_sq, double qc);
std::vector<double> group_velocity_profile(const PulseEnvelope& omega3, double qc,
                                           const std::vector<double>& tau);

/// Relative L2 distance of |Omega_i| between two maps over slices j <= j_max.
double relative_l2(const FieldMap& a, const FieldMap& b, int transition, std::size_t j_max);

}  // namespace pentapulse
