#include <algorithm>
#include <cmath>
#include <numeric>

#include "pentapulse/error.hpp"
#include "pentapulse/linalg.hpp"

namespace pentapulse {

double max_abs(const Mat5& m) {
  double v = 0.0;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) v = std::max(v, std::abs(m(i, j)));
  return v;
}

namespace {

double off_diagonal_norm2(const Mat5& a) {
  double s = 0.0;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      if (i != j) s += std::norm(a(i, j));
  return s;
}

void fix_phase(Vec5& v) {
  for (int k = 0; k < 5; ++k) {
    const double mag = std::abs(v(k));
    if (mag > 1e-12) {
      v *= std::conj(v(k)) / mag;
      v(k) = Complex(mag, 0.0);
      return;
    }
  }
}

}  // namespace

EigenPairs jacobi_eigensolve(const Mat5& h) {
  const double scale = std::max(1.0, max_abs(h));
  const double herm = max_abs(h - h.adjoint());
  if (herm > 1e-12 * scale) {
    throw NumericalError("jacobi_eigensolve: matrix is not Hermitian (|H - H^+| = " +
                         std::to_string(herm) + ")");
  }

  Mat5 a = 0.5 * (h + h.adjoint());
  Mat5 v = Mat5::Identity();
  const double total = a.squaredNorm();
  const double eps2 = 1e-32 * std::max(total, 1e-300);

  int sweep = 0;
  for (; sweep < 60; ++sweep) {
    if (off_diagonal_norm2(a) <= eps2) break;
    for (int p = 0; p < 4; ++p) {
      for (int q = p + 1; q < 5; ++q) {
        const Complex apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag == 0.0) continue;

        // Rotate the phase of basis vector q so that a(p, q) becomes real.
        const Complex e = apq / mag;  // e^{i phi}
        const Complex ec = std::conj(e);
        a.col(q) *= ec;
        a.row(q) *= e;
        v.col(q) *= ec;
        a(p, q) = Complex(mag, 0.0);
        a(q, p) = Complex(mag, 0.0);

        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double theta = (aqq - app) / (2.0 * mag);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        for (int k = 0; k < 5; ++k) {
          const Complex akp = a(k, p);
          const Complex akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < 5; ++k) {
          const Complex apk = a(p, k);
          const Complex aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (int k = 0; k < 5; ++k) {
          const Complex vkp = v(k, p);
          const Complex vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (off_diagonal_norm2(a) > 1e-20 * std::max(total, 1e-300)) {
    throw NumericalError("jacobi_eigensolve: no convergence after 60 sweeps");
  }

  std::array<int, 5> order;
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return a(i, i).real() < a(j, j).real(); });

  EigenPairs out;
  out.sweeps = sweep;
  for (int k = 0; k < 5; ++k) {
    out.values(k) = a(order[k], order[k]).real();
    Vec5 col = v.col(order[k]);
    fix_phase(col);
    out.vectors.col(k) = col;
  }
  return out;
}

TridiagonalEigen tridiagonal_eigensolve(const std::array<double, 5>& diag,
                                        const std::array<double, 4>& off) {
  constexpr int n = 5;
  constexpr double eps = 1e-16;
  std::array<double, n> d = diag;
  std::array<double, n> e{off[0], off[1], off[2], off[3], 0.0};
  RealMat5 z = RealMat5::Identity();

  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m = l;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == 60) throw NumericalError("tridiagonal_eigensolve: QL iteration did not converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? std::abs(r) : -std::abs(r)));
        double s = 1.0;
        double c = 1.0;
        double p = 0.0;
        int i = m - 1;
        for (; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          for (int k = 0; k < n; ++k) {
            f = z(k, i + 1);
            z(k, i + 1) = s * z(k, i) + c * f;
            z(k, i) = c * z(k, i) - s * f;
          }
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }

  TridiagonalEigen out;
  for (int k = 0; k < n; ++k) out.values(k) = d[k];
  out.vectors = z;
  return out;
}

}  // namespace pentapulse
