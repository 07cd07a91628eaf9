#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "pentapulse/error.hpp"
#include "pentapulse/light_storage.hpp"

using namespace pentapulse;

namespace {

const MediumParams kMedium = MediumParams::uniform(900.0, SchemeKind::extended_lambda);

Grid write_grid(const PulseSet& p, double factor = 1.02) {
  Grid g{-6.0, 6.0, 601, 0.0, 200};
  g.x_max = factor * compute_x_max(p, 900.0, g);
  return g;
}

PropagationOptions fixed_steps() {
  PropagationOptions o;
  o.adaptive = false;
  return o;
}

double max_abs(const std::vector<Complex>& v) {
  double m = 0.0;
  for (const auto& z : v) m = std::max(m, std::abs(z));
  return m;
}

}  // namespace

TEST_CASE("stored coherence from the mixing angle") {
  CHECK(stored_coherence(1.0, 1.0) == doctest::Approx(-0.5));
  CHECK(stored_coherence(0.0, 1.0) == 0.0);
  CHECK(stored_coherence(0.1, 30.0) == doctest::Approx(-0.1 * 30.0 / (900.0 + 0.01)));
}

TEST_CASE("storage length: quadrature oracle for the Gaussian shapes") {
  const PulseSet p = storage_pulses();
  const double expected = oracle::gaussian_square_area(30.0, 1.0) + oracle::gaussian_square_area(0.1, 5.0);
  CHECK(expected == doctest::Approx(1127.988).epsilon(1e-6));
  CHECK(900.0 * compute_x_max(p, 900.0, Grid{-6.0, 6.0, 1201}) == doctest::Approx(expected).epsilon(1e-7));
}

TEST_CASE("storage length: trapezoidal control with an exact area") {
  // Omega_0^2 = A on [0, 2] with linear ramps of the amplitude over 0.5 on each side:
  // int = A (2 + 2 * 0.5 / 3).
  const double a = 4.0;
  PulseSet p = storage_pulses();
  p.envelopes[1] = PulseEnvelope::off();
  p.envelopes[2] = PulseEnvelope::tabulated({{-0.5, 0.0}, {0.0, a}, {2.0, a}, {2.5, 0.0}});
  const double q = 3.0;
  CHECK(compute_x_max(p, q, Grid{-2.0, 4.0, 601}) == doctest::Approx(a * a * (2.0 + 1.0 / 3.0) / q).epsilon(1e-5));
}

TEST_CASE("storage length ignores Omega_1 and Omega_4") {
  PulseSet p = storage_pulses();
  const Grid g{-6.0, 6.0, 1201};
  const double x0 = compute_x_max(p, 900.0, g);
  p.envelopes[0] = p.envelopes[0].scaled(2.0);
  p.envelopes[3] = p.envelopes[3].scaled(2.0);
  CHECK(compute_x_max(p, 900.0, g) == x0);
  CHECK_THROWS_AS(compute_x_max(p, 0.0, g), InvalidInput);
}

TEST_CASE("state reconstruction") {
  const Complex r51(-0.2, 0.1), r31(0.05, 0.0);
  const Vec5 b = reconstruct_state(r51, r31);
  CHECK(b.norm() == doctest::Approx(1.0));
  CHECK(b(0).imag() == 0.0);
  CHECK(std::abs(b(4) * std::conj(b(0)) - r51) < 1e-15);
  CHECK(std::abs(b(2) * std::conj(b(0)) - r31) < 1e-15);
  CHECK_THROWS_AS(reconstruct_state(Complex(0.4, 0.0), Complex(0.35, 0.0)), InvalidInput);
}

TEST_CASE("write: mapping, monotone consumption and linearity") {
  const PulseSet p = storage_pulses();
  const Grid g = write_grid(p);
  const auto r = write_pulse(p, StorageChannel::five_level, kMedium, g, fixed_steps());
  CHECK_FALSE(r.partial);
  CHECK(r.mapping_error < 0.02);
  for (std::size_t j = 1; j < r.transmitted.size(); ++j) {
    CHECK(r.transmitted[j] <= r.transmitted[j - 1] * (1.0 + 1e-6));
  }

  PulseSet half = p;
  half.envelopes[1] = p.envelopes[1].scaled(0.5);
  const auto h = write_pulse(half, StorageChannel::five_level, kMedium, g, fixed_steps());
  CHECK(max_abs(h.rho51) == doctest::Approx(0.5 * max_abs(r.rho51)).epsilon(0.01));

  PulseSet tiny = p;
  tiny.envelopes[1] = p.envelopes[1].scaled(1e-4);
  CHECK(max_abs(write_pulse(tiny, StorageChannel::five_level, kMedium, g, fixed_steps()).rho51) < 1e-5);
}

TEST_CASE("retrieval of zero coherence gives no output") {
  PulseSet controls = storage_pulses();
  controls.envelopes[1] = PulseEnvelope::off();
  const Grid g = write_grid(storage_pulses());
  const std::vector<Complex> zero(g.n_x + 1, Complex(0.0));
  const auto r = retrieve(zero, zero, controls, StorageChannel::five_level, storage_pulses().envelopes[1], kMedium, g,
                          fixed_steps());
  CHECK(r.output_energy == 0.0);
  CHECK(r.crosstalk == 0.0);
}

TEST_CASE("double storage needs the M scheme") {
  auto s = default_double_storage_schedule();
  s.write1.scheme = SchemeKind::extended_lambda;
  CHECK_THROWS_AS(double_storage_protocol(s, MediumParams::uniform(900.0, SchemeKind::m_type), Grid{-6, 6, 101, 1.0, 2}),
                  InvalidInput);
  CHECK_THROWS_AS(double_storage_protocol(default_double_storage_schedule(), kMedium, Grid{-6, 6, 101, 1.0, 2}),
                  InvalidInput);
}

TEST_CASE("storage channels") {
  CHECK(probe_transition(StorageChannel::five_level) == 2);
  CHECK(control_transition(StorageChannel::five_level) == 3);
  CHECK(stored_level(StorageChannel::five_level) == 5);
  CHECK(probe_transition(StorageChannel::lambda_123) == 1);
  CHECK(control_transition(StorageChannel::lambda_123) == 2);
  CHECK(stored_level(StorageChannel::lambda_123) == 3);
}

TEST_CASE("a weaker read-out control releases a longer pulse") {
  const PulseSet p = storage_pulses();
  const Grid g = write_grid(p);
  const auto w = write_pulse(p, StorageChannel::five_level, kMedium, g, fixed_steps());
  PulseSet full = p;
  full.envelopes[1] = PulseEnvelope::off();
  PulseSet weak = full;
  weak.envelopes[2] = full.envelopes[2].scaled(0.5);
  auto width = [&](const RetrievalResult& r) {
    double m0 = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t k = 0; k < r.output.size(); ++k) {
      const double e = r.output[k] * r.output[k], t = r.map.tau[k];
      m0 += e;
      m1 += e * t;
      m2 += e * t * t;
    }
    return std::sqrt(m2 / m0 - (m1 / m0) * (m1 / m0));
  };
  const auto a = retrieve(w.rho51, w.rho31, full, StorageChannel::five_level, p.envelopes[1], kMedium, g, fixed_steps());
  const auto b = retrieve(w.rho51, w.rho31, weak, StorageChannel::five_level, p.envelopes[1], kMedium, g, fixed_steps());
  CHECK(a.output_energy > 0.0);
  CHECK(width(b) > width(a));
}

TEST_CASE("stored peak approaches xi = 0 as the write is slowed") {
  // Offset of the stored maximum from xi = 0, in units of the stretch factor.
  auto offset = [](double s) {
    PulseSet p = storage_pulses();
    for (auto& e : p.envelopes) {
      const auto g = *e.as_gaussian();
      e = PulseEnvelope::gaussian(g.amplitude, g.width_factor / (s * s), g.center * s);
    }
    Grid g{-6.0 * s, 6.0 * s, static_cast<std::size_t>(1440 * s) + 1, 0.0, 300};
    g.x_max = 1.02 * compute_x_max(p, 900.0, g);
    PropagationOptions o;
    o.max_refinement = 8;
    const auto r = write_pulse(p, StorageChannel::five_level, kMedium, g, o);
    std::size_t peak = 0;
    for (std::size_t j = 0; j < r.x.size(); ++j) {
      if (std::abs(r.rho51[j]) > std::abs(r.rho51[peak])) peak = j;
    }
    return std::abs(r.xi[peak]) / s;
  };
  const double o1 = offset(1.0), o2 = offset(2.0);
  CHECK(o2 < 0.5 * o1);
  CHECK(o2 < 0.25);
}
