#pragma once

#include <array>
#include <complex>

#include <Eigen/Core>

namespace pentapulse {

using Complex = std::complex<double>;
using Mat5 = Eigen::Matrix<Complex, 5, 5>;
using Vec5 = Eigen::Matrix<Complex, 5, 1>;
using RealVec5 = Eigen::Matrix<double, 5, 1>;
using RealMat5 = Eigen::Matrix<double, 5, 5>;

/// Complex Rabi frequencies on the four transitions.
using Field4 = std::array<Complex, 4>;

/// Eigenpairs of a 5x5 Hermitian matrix, eigenvalues ascending and
/// eigenvectors stored as columns.
struct EigenPairs {
  RealVec5 values;
  Mat5 vectors;
  int sweeps = 0;
};

/// Cyclic Jacobi diagonalization of a Hermitian 5x5 matrix. Each eigenvector
/// is phase-fixed so that its first component above 1e-12 is real positive.
/// Throws NumericalError if |H - H^dagger| exceeds 1e-12 max(1, |H|_max).
EigenPairs jacobi_eigensolve(const Mat5& h);

/// Eigen-decomposition of a real symmetric tridiagonal 5x5 matrix by implicit
/// QL iteration. `diag` has 5 entries and `off[k]` couples k and k+1.
/// Eigenvalues are not sorted.
struct TridiagonalEigen {
  RealVec5 values;
  RealMat5 vectors;  // columns
};
TridiagonalEigen tridiagonal_eigensolve(const std::array<double, 5>& diag,
                                        const std::array<double, 4>& off);

/// Maximum absolute entry.
double max_abs(const Mat5& m);

}  // namespace pentapulse
