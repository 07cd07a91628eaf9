#pragma once

// Writing a weak probe into the spatial coherence of the medium and reading
// it back. Two channels: the five-level channel stores Omega_2 into rho_51
// with controls Omega_1 = Omega_4 and Omega_3; the Lambda channel on levels
// 1-2-3 stores Omega_1 into rho_31 with Omega_2 as control.

#include <optional>
#include <vector>

#include "pentapulse/core_model.hpp"
#include "pentapulse/linalg.hpp"
#include "pentapulse/medium_propagation.hpp"

namespace pentapulse {

enum class StorageChannel { five_level, lambda_123 };

const char* to_string(StorageChannel c);

/// 1-based transition carrying the probe, the control whose area is consumed,
/// and the level that pairs with |1> in the stored coherence.
int probe_transition(StorageChannel c);
int control_transition(StorageChannel c);
int stored_level(StorageChannel c);

struct StorageRecord {
  StorageChannel channel = StorageChannel::five_level;
  std::vector<double> x;
  std::vector<Complex> rho51;  // b_5 conj(b_1) after all pulses are off
  std::vector<Complex> rho31;  // b_3 conj(b_1) after all pulses are off
  std::vector<double> xi;      // asymptotic xi(x), NaN beyond x_max
  std::vector<double> predicted;  // -sin(theta_0(xi)) cos(theta_0(xi)), 0 beyond x_max
  std::vector<double> transmitted;  // probe energy through slice j over the input energy
  double x_max = 0.0;
  double residual_fraction = 0.0;  // transmitted energy at the first node with x >= x_max
  double mapping_error = 0.0;      // max_x | |rho| - |predicted| | for the written channel
  bool partial = false;            // medium shorter than x_max
  std::vector<Vec5> atoms;         // amplitudes at tau_max per x node
  FieldMap map;

  const std::vector<Complex>& stored() const {
    return channel == StorageChannel::five_level ? rho51 : rho31;
  }
};

/// Controls Omega_1 = Omega_4 = 30 e^{-3 tau^2}, Omega_3 = 30 e^{-tau^2},
/// probe Omega_2 = 0.1 e^{-5 tau^2}, resonant Delta = 100.
PulseSet storage_pulses(SchemeKind scheme = SchemeKind::extended_lambda);

/// Lambda-channel write: probe Omega_1 = 0.1 e^{-5 tau^2}, control
/// Omega_2 = 30 e^{-tau^2}, Omega_3 = Omega_4 = 0, resonant Delta = 100.
PulseSet lambda_storage_pulses(SchemeKind scheme = SchemeKind::m_type);

/// int (probe^2 + control^2) dtau of the boundary for the given channel.
AreaIntegral storage_area(const PulseSet& boundary, StorageChannel channel, const Grid& grid);

/// -sin(theta_0) cos(theta_0) with tan(theta_0) = probe / control: the
/// coherence left behind where the boundary instant xi was written.
double stored_coherence(double probe, double control);

/// q x_max = int Omega_0^2 over all times.
double compute_x_max(const PulseSet& boundary, double q, const Grid& grid,
                     StorageChannel channel = StorageChannel::five_level);

/// Runs the full propagator and reads the coherences once all pulses are off.
StorageRecord write_pulse(const PulseSet& boundary, StorageChannel channel,
                          const MediumParams& medium, const Grid& grid,
                          const PropagationOptions& options = {});

/// Pure state b_1|1> + b_3|3> + b_5|5> with b_1 real, reproducing the coherences.
Vec5 reconstruct_state(Complex rho51, Complex rho31);

struct RetrievalResult {
  StorageChannel channel = StorageChannel::five_level;
  FieldMap map;
  std::vector<double> output;  // |probe| at the exit face
  DelayFit fit;                // against the originally stored probe shape
  double output_energy = 0.0;
  double input_energy = 0.0;  // energy of the stored probe at the entrance
  /// Output energy produced by the other stored coherence alone (same
  /// controls, target coherence zeroed) over the output energy.
  double crosstalk = 0.0;
  std::vector<Vec5> atoms;  // amplitudes at tau_max per x node
};

/// Initializes every x node with the reconstructed state of (rho51, rho31) and
/// propagates the read-out controls; the probe leaves at the exit face.
RetrievalResult retrieve(const std::vector<Complex>& rho51, const std::vector<Complex>& rho31,
                         const PulseSet& controls, StorageChannel channel,
                         const PulseEnvelope& stored_probe, const MediumParams& medium,
                         const Grid& grid, const PropagationOptions& options = {});

struct DoubleStorageSchedule {
  PulseSet write1;  // five-level channel
  PulseSet write2;  // Lambda channel
  PulseSet read1;   // controls releasing rho_51
  PulseSet read2;   // control releasing rho_31
};

/// Write and read pulses on the M scheme at Delta = 100.
DoubleStorageSchedule default_double_storage_schedule();

struct DoubleStorageResult {
  StorageRecord write1;
  StorageRecord write2;
  /// Order (1, 2): pulse 1 read first, then pulse 2; order (2, 1) the reverse.
  RetrievalResult order12_first, order12_second;
  RetrievalResult order21_first, order21_second;
  double write1_max_rho31 = 0.0;
  /// Minimum P_1 over (x, tau) nodes where the probe is below the support cut-off.
  double write1_min_p1 = 1.0;
};

/// Throws InvalidInput unless every pulse set of the schedule uses the M scheme.
DoubleStorageResult double_storage_protocol(const DoubleStorageSchedule& schedule,
                                            const MediumParams& medium, const Grid& grid,
                                            const PropagationOptions& options = {});

}  // namespace pentapulse
