#include "pentapulse/adiabaticity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pentapulse/eigenstructure.hpp"
#include "pentapulse/error.hpp"

namespace pentapulse {

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::adiabatic:
      return "ADIABATIC";
    case Verdict::not_adiabatic:
      return "NOT_ADIABATIC";
    case Verdict::not_applicable:
      return "NOT_APPLICABLE";
  }
  return "UNKNOWN";
}

const Margin* AdiabaticityReport::find(std::string_view name) const {
  for (const auto& m : margins)
    if (m.name == name) return &m;
  return nullptr;
}

double AdiabaticityReport::value(std::string_view name) const {
  const auto* m = find(name);
  return m ? m->value : std::numeric_limits<double>::quiet_NaN();
}

double shortest_pulse_duration(const PulseSet& pulses) {
  double t = std::numeric_limits<double>::infinity();
  for (const auto& env : pulses.envelopes) {
    if (env.peak() > 0.0) t = std::min(t, env.fwhm());
  }
  if (!std::isfinite(t)) throw InvalidInput("all pulses are off; no pulse duration defined");
  return t;
}

AdiabaticityReport single_atom_margins(const PulseSet& pulses, double T, double delta,
                                       const Grid& grid, const Thresholds& th) {
  if (!(T > 0.0)) throw InvalidInput("single_atom_margins: T must be > 0");
  grid.validate();

  double best_v4 = -1.0;
  double best_tau = grid.tau_min;
  for (std::size_t k = 0; k < grid.n_tau; ++k) {
    const double tau = grid.tau(k);
    const double v4 = char_poly_params(pulses.rabi(tau)).v4;
    if (v4 > best_v4) {
      best_v4 = v4;
      best_tau = tau;
    }
  }

  AdiabaticityReport r;
  r.T = T;
  r.delta = delta;
  r.tau_overlap = best_tau;
  const auto rabi = pulses.rabi(best_tau);
  const auto p = char_poly_params(rabi);
  const bool overlap = p.v4 > 0.0;
  const double ad = std::abs(delta);
  const double big = th.much_greater;

  auto add = [&](std::string name, double value, bool applicable) {
    r.margins.push_back({std::move(name), value, applicable, applicable && value > big});
  };
  add("m1", ad * T, true);
  add("m2", ad > 0.0 ? (rabi[1] * rabi[1] + rabi[2] * rabi[2]) * T / ad : 0.0, ad > 0.0);
  add("m3", ad > 0.0 ? rabi[0] * rabi[0] * T / ad : 0.0, ad > 0.0 && overlap);
  const double s1 = std::sqrt(delta * delta + 4.0 * p.x1);
  const double s2 = std::sqrt(delta * delta + 4.0 * p.x2);
  add("g1", s2 > 0.0 ? (p.x2 - p.x1) * T / s2 : 0.0, s2 > 0.0);
  add("g2", s1 * T, true);
  add("g3", s1 > 0.0 ? p.x1 * T / s1 : 0.0, s1 > 0.0 && overlap);

  if (!overlap) {
    r.verdict = Verdict::not_applicable;
  } else {
    const bool all = std::all_of(r.margins.begin(), r.margins.end(),
                                 [](const Margin& m) { return !m.applicable || m.pass; });
    r.verdict = all ? Verdict::adiabatic : Verdict::not_adiabatic;
  }
  return r;
}

AdiabaticityReport medium_margins(double q, double x, double delta, double T, double omega2,
                                  const Thresholds& th) {
  if (!(x >= 0.0)) throw InvalidInput("medium_margins: x must be >= 0");
  if (!(T > 0.0)) throw InvalidInput("medium_margins: T must be > 0");
  AdiabaticityReport r;
  r.T = T;
  r.delta = delta;
  r.x = x;
  const double ad = std::abs(delta);
  const double qx = q * x;
  const double f1 = ad > 0.0 ? qx / (ad * ad * T) : (qx > 0.0 ? INFINITY : 0.0);
  const double f2 = omega2 > 0.0 ? qx / (omega2 * T) : (qx > 0.0 ? INFINITY : 0.0);
  const double f3 = ad > 0.0 ? qx / ad : (qx > 0.0 ? INFINITY : 0.0);
  r.margins.push_back({"f1", f1, true, f1 < th.much_less});
  r.margins.push_back({"f2", f2, true, f2 < 1.0});
  r.margins.push_back({"f3", f3, true, f3 < 1.0});
  r.x_ad = q > 0.0 ? th.much_less * ad * ad * T / q : INFINITY;
  if (f2 >= 1.0) r.flags.emplace_back("PUMP_DEPLETION_SCALE");
  if (f3 >= 1.0) r.flags.emplace_back("OPTICAL_LENGTH_SCALE");
  r.verdict = f1 < th.much_less ? Verdict::adiabatic : Verdict::not_adiabatic;
  return r;
}

}  // namespace pentapulse
