#include "pentapulse/atom_dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "pentapulse/eigenstructure.hpp"
#include "pentapulse/error.hpp"
#include "pentapulse/tdse.hpp"

namespace pentapulse {

namespace {

Field4 to_field(const Rabi4& r) { return {r[0], r[1], r[2], r[3]}; }

constexpr double kStepBound = 0.1;

}  // namespace

AtomState AtomState::bare(int level) {
  if (level < 1 || level > kLevels) throw InvalidInput("bare state level must be in 1..5");
  AtomState s;
  s.b(level - 1) = 1.0;
  return s;
}

double Trajectory::max_population(int level) const {
  double m = 0.0;
  for (std::size_t k = 0; k < states.size(); ++k) m = std::max(m, population(k, level));
  return m;
}

double Trajectory::norm_drift() const {
  if (states.empty()) return 0.0;
  const double n0 = states.front().norm();
  double d = 0.0;
  for (const auto& s : states) d = std::max(d, std::abs(s.norm() - n0));
  return d;
}

double max_hamiltonian_norm(const PulseSet& pulses, const Grid& grid) {
  const auto d = pulses.multiphoton();
  double m = 0.0;
  const double h = grid.dtau();
  for (std::size_t k = 0; k < grid.n_tau; ++k) {
    const double tau = grid.tau(k);
    m = std::max(m, hamiltonian_norm_bound(d, to_field(pulses.rabi(tau))));
    if (k + 1 < grid.n_tau) {
      m = std::max(m, hamiltonian_norm_bound(d, to_field(pulses.rabi(tau + 0.5 * h))));
    }
  }
  return m;
}

std::size_t required_time_nodes(const PulseSet& pulses, double tau_min, double tau_max,
                                double bound) {
  // Norm sampled on a fine probe grid, then the step bound inverted.
  Grid probe{tau_min, tau_max, 20001, 0.0, 1};
  const double norm = max_hamiltonian_norm(pulses, probe);
  const double span = tau_max - tau_min;
  return static_cast<std::size_t>(std::floor(span * norm / bound)) + 2;
}

AtomState evolve(const PulseSet& pulses, const AtomState& initial, double tau_from,
                 double tau_to, std::size_t steps) {
  if (steps == 0) throw InvalidInput("evolve: steps must be >= 1");
  const auto d = pulses.multiphoton();
  const double h = (tau_to - tau_from) / static_cast<double>(steps);
  AtomState s = initial;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = tau_from + h * static_cast<double>(k);
    cf4_step(d, to_field(pulses.rabi(t + kGaussC1 * h)), to_field(pulses.rabi(t + kGaussC2 * h)),
             h, s.b);
  }
  return s;
}

Trajectory integrate_tdse(const PulseSet& pulses, const AtomState& initial, const Grid& grid) {
  grid.validate();
  const double norm = max_hamiltonian_norm(pulses, grid);
  const double h = grid.dtau();
  if (!(h * norm < kStepBound)) {
    const auto need = required_time_nodes(pulses, grid.tau_min, grid.tau_max, kStepBound);
    throw StepSizeError("integrate_tdse: dtau * |H| = " + std::to_string(h * norm) +
                            " >= 0.1; need n_tau >= " + std::to_string(need),
                        static_cast<long>(need));
  }
  const auto d = pulses.multiphoton();
  Trajectory traj;
  traj.tau.resize(grid.n_tau);
  traj.states.resize(grid.n_tau);
  Vec5 b = initial.b;
  traj.tau[0] = grid.tau(0);
  traj.states[0] = b;
  for (std::size_t k = 1; k < grid.n_tau; ++k) {
    const double t = grid.tau(k - 1);
    cf4_step(d, to_field(pulses.rabi(t + kGaussC1 * h)), to_field(pulses.rabi(t + kGaussC2 * h)),
             h, b);
    if (!std::isfinite(b.squaredNorm())) {
      throw NumericalError("integrate_tdse: non-finite amplitudes", static_cast<long>(k));
    }
    traj.tau[k] = grid.tau(k);
    traj.states[k] = b;
  }
  return traj;
}

PulseSet default_transfer_pulses(double delta, SchemeKind scheme) {
  PulseSet p;
  p.scheme = scheme;
  p.detunings = resonant_detunings(scheme, delta);
  p.envelopes[0] = PulseEnvelope::gaussian(30.0, 0.25, 0.0);
  p.envelopes[1] = PulseEnvelope::gaussian(30.0, 1.0, 1.0);
  p.envelopes[2] = PulseEnvelope::gaussian(30.0, 1.0, -1.0);
  p.envelopes[3] = PulseEnvelope::gaussian(30.0, 0.25, 0.0);
  return p;
}

Grid transfer_grid(const PulseSet& pulses, double tau_min, double tau_max) {
  Grid g;
  g.tau_min = tau_min;
  g.tau_max = tau_max;
  // 2% headroom over the bound so rounding never trips the check.
  g.n_tau = static_cast<std::size_t>(
      std::ceil(1.02 * static_cast<double>(required_time_nodes(pulses, tau_min, tau_max))));
  return g;
}

TransferResult transfer_experiment(const PulseSet& pulses, const Grid& grid,
                                   const AtomState& initial, int target) {
  TransferResult r;
  r.trajectory = integrate_tdse(pulses, initial, grid);
  const std::size_t last = r.trajectory.size() - 1;
  r.fidelity = r.trajectory.population(last, target);
  r.max_p2 = r.trajectory.max_population(2);
  r.max_p3 = r.trajectory.max_population(3);
  r.max_p4 = r.trajectory.max_population(4);
  r.norm_drift = r.trajectory.norm_drift();
  return r;
}

TransferResult stirap_experiment(const PulseSet& pulses, const Grid& grid) {
  return transfer_experiment(pulses, grid, AtomState::bare(1), 5);
}

TransferResult bstirap_experiment(const PulseSet& pulses, const Grid& grid) {
  return transfer_experiment(pulses, grid, AtomState::bare(5), 1);
}

std::vector<double> project_onto_dressed(const Trajectory& traj, const PulseSet& pulses,
                                         DressedBranch which) {
  if (!pulses.resonant(1e-12 * std::max(1.0, std::abs(pulses.delta())))) {
    throw RegimeError("project_onto_dressed requires two-photon resonance");
  }
  const double delta = pulses.delta();
  std::vector<double> out(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto r = pulses.rabi(traj.tau[k]);
    const auto angles = mixing_angles(r[0], r[1], r[2], delta);
    const Vec5 v = which == DressedBranch::lambda1 ? dressed_state_lambda1(angles)
                                                   : dressed_state_lambda2(angles);
    out[k] = std::norm(v.dot(traj.states[k]));
  }
  return out;
}

}  // namespace pentapulse
