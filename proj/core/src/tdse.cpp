#include "pentapulse/tdse.hpp"

namespace pentapulse {

void apply_tridiagonal_exponential(const Detuning4& d, double diag_scale, const Field4& off,
                                   double h, Vec5& b) {
  // M(k, k+1) = -off[k] = r_k e^{i phi_k}; G = diag(e^{i chi}) with
  // chi_{k+1} = chi_k - phi_k makes G^+ M G real with nonnegative couplings.
  std::array<double, 5> diag{0.0, diag_scale * d[0], diag_scale * d[1], diag_scale * d[2],
                             diag_scale * d[3]};
  std::array<double, 4> r{};
  std::array<Complex, 5> gauge;
  gauge[0] = 1.0;
  for (int k = 0; k < 4; ++k) {
    const Complex m = -off[k];
    r[k] = std::abs(m);
    const Complex unit = r[k] > 0.0 ? m / r[k] : Complex(1.0, 0.0);
    gauge[k + 1] = gauge[k] * std::conj(unit);
  }
  const auto eig = tridiagonal_eigensolve(diag, r);

  Vec5 c;
  for (int k = 0; k < 5; ++k) c(k) = std::conj(gauge[k]) * b(k);
  Vec5 y;
  for (int j = 0; j < 5; ++j) {
    Complex s = 0.0;
    for (int k = 0; k < 5; ++k) s += eig.vectors(k, j) * c(k);
    const double ph = -h * eig.values(j);
    y(j) = s * Complex(std::cos(ph), std::sin(ph));
  }
  for (int k = 0; k < 5; ++k) {
    Complex s = 0.0;
    for (int j = 0; j < 5; ++j) s += eig.vectors(k, j) * y(j);
    b(k) = gauge[k] * s;
  }
}

void cf4_step(const Detuning4& d, const Field4& w1, const Field4& w2, double h, Vec5& b) {
  Field4 first, second;
  for (int k = 0; k < 4; ++k) {
    first[k] = kCf4A1 * w1[k] + kCf4A2 * w2[k];
    second[k] = kCf4A2 * w1[k] + kCf4A1 * w2[k];
  }
  // a1 + a2 = 1/2: each factor carries half the diagonal.
  apply_tridiagonal_exponential(d, 0.5, first, h, b);
  apply_tridiagonal_exponential(d, 0.5, second, h, b);
}

}  // namespace pentapulse
