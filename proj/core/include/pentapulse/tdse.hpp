#pragma once

// Fourth-order commutator-free Magnus propagator for i db/dtau = H(tau) b.
// One step of size h uses H at the two Gauss nodes t + c1 h, t + c2 h:
//   b <- exp(-i h (a2 H1 + a1 H2)) exp(-i h (a1 H1 + a2 H2)) b.
// Each factor is a Hermitian tridiagonal matrix; a diagonal phase gauge makes
// it real symmetric and it is exponentiated through its eigen-decomposition,
// so every step is unitary to rounding and the scheme is time-symmetric.

#include <cmath>

#include "pentapulse/core_model.hpp"
#include "pentapulse/linalg.hpp"

namespace pentapulse {

inline const double kGaussC1 = 0.5 - std::sqrt(3.0) / 6.0;
inline const double kGaussC2 = 0.5 + std::sqrt(3.0) / 6.0;
inline const double kCf4A1 = 0.25 + std::sqrt(3.0) / 6.0;
inline const double kCf4A2 = 0.25 - std::sqrt(3.0) / 6.0;

/// b <- exp(-i h M) b, M = diag(0, diag_scale * d) - offdiag(off), Hermitian.
void apply_tridiagonal_exponential(const Detuning4& d, double diag_scale, const Field4& off,
                                   double h, Vec5& b);

/// One CF4 step; w1, w2 are the Rabi fields at the Gauss nodes.
void cf4_step(const Detuning4& d, const Field4& w1, const Field4& w2, double h, Vec5& b);

}  // namespace pentapulse
