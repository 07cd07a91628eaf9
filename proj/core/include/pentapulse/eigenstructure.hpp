#pragma once

// Interaction Hamiltonian of the five-level chain, its closed-form spectrum
// under two-photon resonance, and the dressed states |lambda_1>, |lambda_2>
// of the Omega_4 = Omega_1 case.
//
// Eigenvalue labels: lambda_0 = 0; lambda_1, lambda_3 are the roots of
// lambda(lambda - Delta) = x_1 and lambda_2, lambda_4 those of
// lambda(lambda - Delta) = x_2, with lambda_1 = (Delta - sqrt(Delta^2 + 4 x_1)) / 2
// and lambda_3 = Delta - lambda_1 (same pattern for 2, 4).

#include <array>
#include <vector>

#include "pentapulse/core_model.hpp"
#include "pentapulse/linalg.hpp"

namespace pentapulse {

using Spectrum5 = std::array<double, kLevels>;

/// H = diag(0, d1..d4) with -Omega_i at (i, i+1) and -conj(Omega_i) at (i+1, i).
Mat5 build_hamiltonian(const Detuning4& multiphoton, const Rabi4& rabi);
Mat5 build_hamiltonian(const Detuning4& multiphoton, const Field4& rabi);
Mat5 build_hamiltonian(const PulseSet& pulses, double tau);

/// Gershgorin bound on the spectral norm of H.
double hamiltonian_norm_bound(const Detuning4& multiphoton, const Field4& rabi);

struct CharPolyParams {
  double omega_s2 = 0.0;  // sum of Omega_i^2
  double v4 = 0.0;        // Omega_2^2 Omega_4^2 + Omega_1^2 Omega_3^2 + Omega_1^2 Omega_4^2
  double x1 = 0.0;        // smaller root of x^2 - omega_s2 x + v4
  double x2 = 0.0;
};

CharPolyParams char_poly_params(const Rabi4& rabi);

/// lambda (y^2 - Omega_s^2 y + V^4) with y = lambda (lambda - Delta).
double char_poly(double lambda, const CharPolyParams& p, double delta);
/// Coefficients of char_poly, highest power first.
std::array<double, 6> char_poly_coefficients(const CharPolyParams& p, double delta);

/// The two roots of lambda^2 - Delta lambda - x = 0 as (lower label, upper label):
/// ((Delta - s)/2, (Delta + s)/2), s = sqrt(Delta^2 + 4x), evaluated without cancellation.
std::array<double, 2> quadratic_pair(double delta, double x);

/// Labeled eigenvalues lambda_0..lambda_4 for arbitrary nonnegative Rabi
/// frequencies under two-photon resonance with delta_1 = delta_3 = Delta.
Spectrum5 eigenvalues_general(const Rabi4& rabi, double delta);

/// Omega_4 = Omega_1 special case.
Spectrum5 eigenvalues_special(double omega1, double omega2, double omega3, double delta);

struct MixingAngles {
  double theta = 0.0;  // tan(theta) = Omega_2 / Omega_3, in [0, pi/2]
  double phi1 = 0.0;   // tan(Phi_1) = -lambda_1 / Omega_1
  double phi2 = 0.0;   // tan(Phi_2) = -lambda_2 / Omega_1
  double phi = 0.0;    // tan(Phi) = -(Omega / Omega_1) cos(Phi_2)
  double omega = 0.0;  // sqrt(Omega_2^2 + Omega_3^2)
};

MixingAngles mixing_angles(double omega1, double omega2, double omega3, double delta);

/// cos(theta)(cos(Phi_1)|1> + sin(Phi_1)|2>) - sin(theta)(cos(Phi_1)|5> + sin(Phi_1)|4>).
/// No |3> component.
Vec5 dressed_state_lambda1(const MixingAngles& a);

/// cos(Phi) sin(theta)(cos(Phi_2)|1> + sin(Phi_2)|2>) - sin(Phi)|3>
///   + cos(Phi) cos(theta)(cos(Phi_2)|5> + sin(Phi_2)|4>).
Vec5 dressed_state_lambda2(const MixingAngles& a);

/// Jacobi eigenpairs, ascending.
EigenPairs numeric_eigensolve(const Mat5& h);

/// Instantaneous eigensystem with eigenvectors stored as columns in label order.
struct EigenSystem {
  double tau = 0.0;
  Spectrum5 lambda{};
  Mat5 vectors = Mat5::Zero();
  MixingAngles mixing;
};

/// Follows the five adiabatic branches across the grid. Eigenvalues come from
/// the closed form; eigenvectors from the numeric solver, matched to the
/// previous node by maximal overlap with the overlap made real positive.
/// Nodes where branches are degenerate (all fields off) inherit the projection
/// of the neighbouring nondegenerate vectors onto the degenerate subspace.
/// Throws RegimeError off resonance and NumericalError("degenerate crossing")
/// if overlap matching disagrees with the branch labels.
std::vector<EigenSystem> track_eigenvectors(const PulseSet& pulses, const Grid& grid);

}  // namespace pentapulse
