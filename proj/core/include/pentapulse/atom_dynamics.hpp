#pragma once

// Single-atom dynamics under a pulse schedule: TDSE integration, STIRAP and
// b-STIRAP transfer experiments, projections onto the dressed states.

#include <vector>

#include "pentapulse/core_model.hpp"
#include "pentapulse/linalg.hpp"

namespace pentapulse {

struct AtomState {
  Vec5 b = Vec5::Zero();

  /// Bare state |level>, level in 1..5.
  static AtomState bare(int level);
  double norm() const { return b.norm(); }
  double population(int level) const { return std::norm(b(level - 1)); }
  /// rho_ij = b_i conj(b_j), 1-based.
  Complex rho(int i, int j) const { return b(i - 1) * std::conj(b(j - 1)); }
};

struct Trajectory {
  std::vector<double> tau;
  std::vector<Vec5> states;

  std::size_t size() const { return tau.size(); }
  double population(std::size_t k, int level) const { return std::norm(states[k](level - 1)); }
  Complex rho(std::size_t k, int i, int j) const {
    return states[k](i - 1) * std::conj(states[k](j - 1));
  }
  double max_population(int level) const;
  /// max_k | |b(tau_k)| - |b(tau_0)| |.
  double norm_drift() const;
};

/// Largest Gershgorin bound of H over the grid nodes.
double max_hamiltonian_norm(const PulseSet& pulses, const Grid& grid);

/// Smallest n_tau with dtau * max|H| < bound on [tau_min, tau_max].
std::size_t required_time_nodes(const PulseSet& pulses, double tau_min, double tau_max,
                                double bound = 0.1);

/// Integrates from grid.tau_min to grid.tau_max, one CF4 step per grid
/// interval. Throws StepSizeError when dtau * max|H| >= 0.1.
Trajectory integrate_tdse(const PulseSet& pulses, const AtomState& initial, const Grid& grid);

/// Evolves from tau_from to tau_to (either direction) in `steps` equal CF4 steps.
AtomState evolve(const PulseSet& pulses, const AtomState& initial, double tau_from,
                 double tau_to, std::size_t steps);

struct TransferResult {
  double fidelity = 0.0;
  double max_p2 = 0.0;
  double max_p3 = 0.0;
  double max_p4 = 0.0;
  double norm_drift = 0.0;
  Trajectory trajectory;
};

/// Default schedule: Omega_3 = 30 e^{-(tau+1)^2} before Omega_2 = 30 e^{-(tau-1)^2},
/// Omega_1 = Omega_4 = 30 e^{-0.25 tau^2}, resonant detunings Delta.
PulseSet default_transfer_pulses(double delta, SchemeKind scheme = SchemeKind::m_type);

/// Grid on [tau_min, tau_max] fine enough for integrate_tdse.
Grid transfer_grid(const PulseSet& pulses, double tau_min, double tau_max);

/// Starts in |1>; fidelity = P5 at the end.
TransferResult stirap_experiment(const PulseSet& pulses, const Grid& grid);
/// Starts in |5>; fidelity = P1 at the end.
TransferResult bstirap_experiment(const PulseSet& pulses, const Grid& grid);
/// Runs from an arbitrary initial state, fidelity = population of `target`.
TransferResult transfer_experiment(const PulseSet& pulses, const Grid& grid,
                                   const AtomState& initial, int target);

enum class DressedBranch { lambda1, lambda2 };

/// |<lambda_k(tau)|psi(tau)>|^2 per node with the closed-form dressed states.
/// Requires two-photon resonance; the Omega_4 = Omega_1 forms are used.
std::vector<double> project_onto_dressed(const Trajectory& traj, const PulseSet& pulses,
                                         DressedBranch which);

}  // namespace pentapulse
