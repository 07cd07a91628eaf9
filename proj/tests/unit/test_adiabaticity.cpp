#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "pentapulse/adiabaticity.hpp"
#include "pentapulse/atom_dynamics.hpp"
#include "pentapulse/error.hpp"

using namespace pentapulse;

namespace {

PulseSet coincident(double amplitude, double delta) {
  PulseSet p;
  p.detunings = resonant_detunings(SchemeKind::m_type, delta);
  for (auto& e : p.envelopes) e = PulseEnvelope::gaussian(amplitude, 1.0, 0.0);
  return p;
}

const Grid kGrid{-8.0, 8.0, 1601};

}  // namespace

TEST_CASE("single-atom margins at coinciding peaks") {
  const auto r = single_atom_margins(coincident(30.0, 10.0), 1.0, 10.0, kGrid);
  CHECK(r.tau_overlap == doctest::Approx(0.0).scale(1.0));
  CHECK(r.value("m1") == doctest::Approx(10.0));
  CHECK(r.value("m2") == doctest::Approx(180.0));
  CHECK(r.value("m3") == doctest::Approx(90.0));
  // x1 = 900, x2 = 2700 for Omega_4 = Omega_1 = Omega_2 = Omega_3 = 30.
  CHECK(r.value("g1") == doctest::Approx(1800.0 / std::sqrt(100.0 + 4 * 2700.0)));
  CHECK(r.value("g2") == doctest::Approx(std::sqrt(100.0 + 4 * 900.0)));
  CHECK(r.value("g3") == doctest::Approx(900.0 / std::sqrt(100.0 + 4 * 900.0)));
  // m1 = 10 sits on the threshold, not above it.
  CHECK_FALSE(r.find("m1")->pass);
  CHECK(r.verdict == Verdict::not_adiabatic);
}

TEST_CASE("a four times longer interaction time is adiabatic, a tiny detuning is not") {
  const auto slow = single_atom_margins(default_transfer_pulses(20.0), 4.0, 20.0, kGrid);
  CHECK(slow.verdict == Verdict::adiabatic);
  const auto r = single_atom_margins(coincident(30.0, 0.1), 1.0, 0.1, kGrid);
  CHECK(r.value("m1") == doctest::Approx(0.1));
  CHECK(r.verdict == Verdict::not_adiabatic);
}

TEST_CASE("fields off: verdict not applicable") {
  PulseSet p;
  p.detunings = resonant_detunings(SchemeKind::m_type, 10.0);
  const auto r = single_atom_margins(p, 1.0, 10.0, kGrid);
  CHECK(r.value("m2") == 0.0);
  CHECK(r.value("m3") == 0.0);
  CHECK(r.verdict == Verdict::not_applicable);
}

TEST_CASE("zero detuning marks divided margins not applicable") {
  const auto r = single_atom_margins(coincident(1.0, 0.0), 1.0, 0.0, kGrid);
  CHECK_FALSE(r.find("m2")->applicable);
  CHECK_FALSE(r.find("m3")->applicable);
  for (const auto& m : r.margins) CHECK(std::isfinite(m.value));
}

TEST_CASE("m-margins scale with the detuning") {
  auto g = oracle::rng(77);
  std::uniform_real_distribution<double> u(1.0, 50.0);
  for (int n = 0; n < 200; ++n) {
    const double d = u(g), k = 1.0 + u(g) / 10.0;
    const PulseSet p = default_transfer_pulses(d);
    const auto a = single_atom_margins(p, 1.0, d, kGrid);
    const auto b = single_atom_margins(p, 1.0, k * d, kGrid);
    CHECK(b.value("m1") == doctest::Approx(k * a.value("m1")));
    CHECK(b.value("m2") == doctest::Approx(a.value("m2") / k));
    CHECK(b.value("m3") == doctest::Approx(a.value("m3") / k));
  }
}

TEST_CASE("medium margins") {
  const auto zero = medium_margins(1.0, 0.0, 3.0, 2.0, 5.0);
  for (const auto& m : zero.margins) CHECK(m.value == 0.0);
  CHECK(zero.verdict == Verdict::adiabatic);

  // Delta T = 100 and q x = Delta.
  const auto r = medium_margins(100.0, 1.0, 100.0, 1.0, 900.0);
  CHECK(r.value("f1") == doctest::Approx(0.01));
  CHECK(r.value("f3") == doctest::Approx(1.0));
  CHECK(r.verdict == Verdict::adiabatic);
  CHECK(r.x_ad == doctest::Approx(10.0));

  const auto pump = medium_margins(900.0, 1.0, 100.0, 1.0, 900.0);
  CHECK(pump.value("f2") == doctest::Approx(1.0));
  CHECK(std::find(pump.flags.begin(), pump.flags.end(), "PUMP_DEPLETION_SCALE") != pump.flags.end());
  CHECK_THROWS_AS(medium_margins(1.0, -1.0, 1.0, 1.0, 1.0), InvalidInput);
}

TEST_CASE("medium factors are linear in x") {
  const auto a = medium_margins(900.0, 0.3, 100.0, 1.0, 900.0);
  const auto b = medium_margins(900.0, 0.9, 100.0, 1.0, 900.0);
  for (const char* n : {"f1", "f2", "f3"}) CHECK(b.value(n) == doctest::Approx(3.0 * a.value(n)));
}

TEST_CASE("shortest pulse duration is the narrowest FWHM") {
  PulseSet p;
  p.envelopes[0] = PulseEnvelope::gaussian(1.0, 1.0);
  p.envelopes[2] = PulseEnvelope::gaussian(1.0, 4.0);
  CHECK(shortest_pulse_duration(p) == doctest::Approx(2.0 * std::sqrt(std::log(2.0) / 4.0)));
  CHECK_THROWS_AS(shortest_pulse_duration(PulseSet{}), InvalidInput);
}
