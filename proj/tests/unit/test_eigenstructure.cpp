#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "pentapulse/atom_dynamics.hpp"
#include "pentapulse/eigenstructure.hpp"
#include "pentapulse/error.hpp"
#include "pentapulse/linalg.hpp"

using namespace pentapulse;

namespace {

constexpr std::uint64_t kSeed = 0x5eed0001;

Detuning4 resonant(double delta) { return {delta, 0.0, delta, 0.0}; }

std::array<double, 5> sorted(Spectrum5 s) {
  std::sort(s.begin(), s.end());
  return s;
}

double rel_error(const std::array<double, 5>& a, const std::array<double, 5>& b) {
  double scale = 1.0, e = 0.0;
  for (double v : b) scale = std::max(scale, std::abs(v));
  for (int i = 0; i < 5; ++i) e = std::max(e, std::abs(a[i] - b[i]));
  return e / scale;
}

oracle::CMat to_oracle(const Mat5& h) { return h; }

}  // namespace

TEST_CASE("hamiltonian structure") {
  CHECK(build_hamiltonian(Detuning4{}, Rabi4{}).isZero(0.0));
  const Mat5 h = build_hamiltonian(resonant(4.0), Rabi4{1.0, 0.0, 0.0, 0.0});
  CHECK(h(0, 1) == Complex(-1.0));
  CHECK(h(1, 0) == Complex(-1.0));
  CHECK(h(1, 1) == Complex(4.0));
  CHECK(h(2, 2) == Complex(0.0));
  CHECK(h(3, 3) == Complex(4.0));
  CHECK(h(2, 3) == Complex(0.0));
  const Mat5 m = build_hamiltonian(compose_multiphoton_detunings(SchemeKind::m_type, {3, 3, 3, 3}), Rabi4{});
  for (int i = 0; i < 5; ++i) CHECK(m(i, i).real() == std::array<double, 5>{0, 3, 0, 3, 0}[i]);
}

TEST_CASE("closed-form spectrum: special cases") {
  const double D = 7.0;
  CHECK(eigenvalues_general({0, 0, 0, 0}, D) == Spectrum5{0, 0, 0, D, D});

  const auto a = eigenvalues_general({1, 1, 1, 1}, 0.0);
  const auto p = char_poly_params({1, 1, 1, 1});
  CHECK(p.x1 == doctest::Approx(1.0));
  CHECK(p.x2 == doctest::Approx(3.0));
  CHECK(a[0] == 0.0);
  CHECK(a[1] == doctest::Approx(-1.0));
  CHECK(a[3] == doctest::Approx(1.0));
  CHECK(a[2] == doctest::Approx(-std::sqrt(3.0)));
  CHECK(a[4] == doctest::Approx(std::sqrt(3.0)));
  CHECK(rel_error(sorted(a), oracle::eigenvalues(oracle::hamiltonian({0, 0, 0, 0}, {1, 1, 1, 1}))) < 1e-14);

  const auto lam = eigenvalues_special(0.0, 3.0, 4.0, 0.0);
  CHECK(lam[0] == 0.0);
  CHECK(lam[1] == doctest::Approx(0.0));
  CHECK(lam[2] == doctest::Approx(-5.0));
  CHECK(lam[3] == doctest::Approx(0.0));
  CHECK(lam[4] == doctest::Approx(5.0));
  CHECK(eigenvalues_special(0, 0, 0, D) == Spectrum5{0, 0, 0, D, D});

  const auto l1 = eigenvalues_special(1.0, 1.0, 1.0, 0.0);
  CHECK(l1[1] == doctest::Approx(-1.0));
  CHECK(l1[3] == doctest::Approx(1.0));
  CHECK(l1[2] == doctest::Approx(-std::sqrt(3.0)));
  CHECK(l1[4] == doctest::Approx(std::sqrt(3.0)));
}

TEST_CASE("general spectrum reduces to the special one when Omega_4 = Omega_1") {
  auto g = oracle::rng(kSeed);
  std::uniform_real_distribution<double> om(0.0, 50.0), de(-100.0, 100.0);
  for (int n = 0; n < 2000; ++n) {
    const double o1 = om(g), o2 = om(g), o3 = om(g), d = de(g);
    const auto a = eigenvalues_general({o1, o2, o3, o1}, d);
    const auto b = eigenvalues_special(o1, o2, o3, d);
    for (int i = 0; i < 5; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-13).scale(1.0));
  }
}

TEST_CASE("quadratic pair avoids cancellation") {
  // lambda^2 - D lambda - x = 0 with x << D^2: lower root -x/D (1 - x/D^2 + ...).
  const double D = 1e8, x = 1.0;
  const auto r = quadratic_pair(D, x);
  CHECK(r[0] == doctest::Approx(-x / D * (1.0 - x / (D * D))).epsilon(1e-15));
  CHECK(r[1] == doctest::Approx(D + x / D));
  const auto n = quadratic_pair(-D, x);
  CHECK(n[1] == doctest::Approx(x / D).epsilon(1e-15));
}

TEST_CASE("random spectra agree with an independent eigensolver and obey the identities") {
  auto g = oracle::rng(kSeed + 1);
  std::uniform_real_distribution<double> om(0.0, 50.0), de(-100.0, 100.0);
  double worst = 0.0;
  for (int n = 0; n < 2000; ++n) {
    const Rabi4 r{om(g), om(g), om(g), om(g)};
    const double d = de(g);
    const auto a = eigenvalues_general(r, d);
    worst = std::max(worst, rel_error(sorted(a), oracle::eigenvalues(oracle::hamiltonian(resonant(d), r))));
    CHECK(a[0] == 0.0);
    CHECK(std::abs(a[1] + a[3] - d) <= 1e-10 * std::max(1.0, std::abs(d)));
    CHECK(std::abs(a[2] + a[4] - d) <= 1e-10 * std::max(1.0, std::abs(d)));
    const auto p = char_poly_params(r);
    CHECK(p.omega_s2 * p.omega_s2 - 4.0 * p.v4 >= 0.0);
    const double scale = std::pow(std::max({1.0, std::abs(a[2]), std::abs(a[4])}), 5);
    for (double l : a) CHECK(std::abs(char_poly(l, p, d)) <= 1e-9 * scale);
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("characteristic polynomial roots as a secondary oracle") {
  const auto p = char_poly_params({1, 1, 1, 1});
  const auto roots = oracle::polynomial_roots(char_poly_coefficients(p, 0.0), 3.0);
  REQUIRE(roots.size() == 5);
  const auto num = numeric_eigensolve(build_hamiltonian(resonant(0.0), Rabi4{1, 1, 1, 1}));
  for (int i = 0; i < 5; ++i) CHECK(num.values(i) == doctest::Approx(roots[i]).scale(1.0).epsilon(1e-10));
}

TEST_CASE("jacobi solver: diagonal and two-level cases") {
  Mat5 d = Mat5::Zero();
  const std::array<double, 5> diag{3.0, -1.0, 2.0, 0.5, -4.0};
  for (int i = 0; i < 5; ++i) d(i, i) = diag[i];
  const auto e = numeric_eigensolve(d);
  auto s = diag;
  std::sort(s.begin(), s.end());
  for (int i = 0; i < 5; ++i) {
    CHECK(e.values(i) == s[i]);
    CHECK(e.vectors.col(i).cwiseAbs().maxCoeff() == doctest::Approx(1.0));
  }
  const double D = 3.0, o = 2.0;
  const auto t = numeric_eigensolve(build_hamiltonian({D, 0.0, 0.0, 0.0}, Rabi4{o, 0, 0, 0}));
  const double lo = 0.5 * (D - std::sqrt(D * D + 4 * o * o)), hi = 0.5 * (D + std::sqrt(D * D + 4 * o * o));
  CHECK(t.values(0) == doctest::Approx(lo));
  CHECK(t.values(4) == doctest::Approx(hi));
}

TEST_CASE("mixing angles") {
  CHECK(mixing_angles(1.0, 2.0, 2.0, 5.0).theta == doctest::Approx(M_PI / 4));
  CHECK(mixing_angles(1.0, 0.0, 2.0, 5.0).theta == 0.0);
  // Delta >> Omega_1: lambda_1 ~ -Omega_1^2/Delta, Phi_1 ~ Omega_1/Delta.
  const auto a = mixing_angles(1.0, 0.0, 0.0, 1e4);
  CHECK(a.phi1 == doctest::Approx(1e-4).epsilon(1e-6));
}

TEST_CASE("dressed states: frozen values and eigen residuals") {
  MixingAngles a;
  CHECK((dressed_state_lambda1(a) - Vec5(1, 0, 0, 0, 0)).norm() == 0.0);
  a.theta = M_PI / 2;
  CHECK((dressed_state_lambda1(a) - Vec5(0, 0, 0, 0, -1)).norm() < 1e-15);
  a.theta = M_PI / 4;
  a.phi1 = M_PI / 6;
  const double r3 = std::sqrt(3.0) / 2;
  const Vec5 expect = Vec5(r3, 0.5, 0.0, -0.5, -r3) / std::sqrt(2.0);
  CHECK((dressed_state_lambda1(a) - expect).norm() < 1e-15);

  MixingAngles b;
  b.theta = M_PI / 2;
  b.phi2 = 0.3;
  b.phi = -0.2;
  const Vec5 v2 = dressed_state_lambda2(b);
  const Vec5 e2 = Vec5(std::cos(b.phi) * std::cos(b.phi2), std::cos(b.phi) * std::sin(b.phi2), -std::sin(b.phi), 0, 0);
  CHECK((v2 - e2).norm() < 1e-15);

  // Omega_2 = Omega_3 = 0: no |3> component.
  const auto m = mixing_angles(2.0, 0.0, 0.0, 5.0);
  CHECK(dressed_state_lambda2(m)(2) == Complex(0.0));

  auto g = oracle::rng(kSeed + 2);
  std::uniform_real_distribution<double> om(0.0, 50.0), de(-100.0, 100.0);
  for (int n = 0; n < 2000; ++n) {
    const double o1 = om(g), o2 = om(g), o3 = om(g), d = de(g);
    const Mat5 h = build_hamiltonian(resonant(d), Rabi4{o1, o2, o3, o1});
    const auto lam = eigenvalues_special(o1, o2, o3, d);
    const auto ang = mixing_angles(o1, o2, o3, d);
    const Vec5 v1 = dressed_state_lambda1(ang), w2 = dressed_state_lambda2(ang);
    const double hn = max_abs(h);
    CHECK(v1(2) == Complex(0.0));
    CHECK((h * v1 - lam[1] * v1).cwiseAbs().maxCoeff() < 1e-9 * hn);
    CHECK((h * w2 - lam[2] * w2).cwiseAbs().maxCoeff() < 1e-9 * hn);
    Eigen::SelfAdjointEigenSolver<oracle::CMat> es(to_oracle(h));
    double best = 0.0;
    for (int i = 0; i < 5; ++i) {
      if (std::abs(es.eigenvalues()(i) - lam[2]) < 1e-9 * std::max(1.0, hn)) {
        best = std::max(best, std::abs(es.eigenvectors().col(i).dot(w2)));
      }
    }
    // Skip the rare degenerate draws where the eigenvector is not unique.
    bool degenerate = false;
    for (int i = 0; i < 5; ++i) {
      if (i != 2 && std::abs(lam[i] - lam[2]) < 1e-6 * std::max(1.0, hn)) degenerate = true;
    }
    if (!degenerate) CHECK(best > 1.0 - 1e-8);
  }
}

TEST_CASE("eigenvalue tracking over the transfer schedules") {
  const double D = 10.0;
  const PulseSet forward = default_transfer_pulses(D);
  PulseSet swapped = forward;
  std::swap(swapped.envelopes[1], swapped.envelopes[2]);
  const Grid g{-8.0, 8.0, 801};
  const auto a = track_eigenvectors(forward, g);
  const auto b = track_eigenvectors(swapped, g);
  for (const auto* sys : {&a, &b}) {
    for (std::size_t k = 0; k < sys->size(); ++k) CHECK((*sys)[k].lambda[0] == 0.0);
    for (const auto* s : {&sys->front(), &sys->back()}) {
      CHECK(s->lambda[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
      CHECK(s->lambda[2] == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
      CHECK(s->lambda[3] == doctest::Approx(D).epsilon(1e-9));
      CHECK(s->lambda[4] == doctest::Approx(D).epsilon(1e-9));
    }
    for (std::size_t k = 1; k < sys->size(); ++k) {
      for (int c = 0; c < 5; ++c) {
        const Complex ov = (*sys)[k - 1].vectors.col(c).dot((*sys)[k].vectors.col(c));
        CHECK(std::abs(ov) > 0.9);
      }
    }
  }
  // lambda_1, lambda_2 split from 0 inside the overlap.
  const auto& mid = a[400];
  CHECK(mid.lambda[1] < -1.0);
  CHECK(mid.lambda[2] < mid.lambda[1]);
  // With Omega_1 = Omega_4 the spectrum is symmetric under Omega_2 <-> Omega_3;
  // only the mixing angle theta changes.
  double diff = 0.0, dtheta = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    for (int c = 0; c < 5; ++c) diff = std::max(diff, std::abs(a[k].lambda[c] - b[k].lambda[c]));
    dtheta = std::max(dtheta, std::abs(a[k].mixing.theta - b[k].mixing.theta));
  }
  CHECK(diff < 1e-9 * (1.0 + D));
  CHECK(dtheta > 1.0);
}

TEST_CASE("tracking refuses detunings off two-photon resonance") {
  PulseSet p = default_transfer_pulses(10.0);
  p.detunings[1] += 1.0;
  CHECK_THROWS_AS(track_eigenvectors(p, Grid{-8.0, 8.0, 101}), RegimeError);
}
