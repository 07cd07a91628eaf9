#include "pentapulse/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pentapulse/error.hpp"

namespace pentapulse {

std::string_view to_string(SchemeKind scheme) {
  switch (scheme) {
    case SchemeKind::m_type:
      return "M_TYPE";
    case SchemeKind::extended_lambda:
      return "EXTENDED_LAMBDA";
  }
  return "UNKNOWN";
}

SchemeKind scheme_from_string(std::string_view name) {
  if (name == "M_TYPE") return SchemeKind::m_type;
  if (name == "EXTENDED_LAMBDA") return SchemeKind::extended_lambda;
  throw InvalidInput("unknown scheme '" + std::string(name) +
                     "' (expected M_TYPE or EXTENDED_LAMBDA)");
}

std::array<int, kTransitions> transition_orientation(SchemeKind scheme) {
  if (scheme == SchemeKind::m_type) return {+1, -1, +1, -1};
  return {+1, +1, -1, -1};
}

Detuning4 compose_multiphoton_detunings(SchemeKind scheme, const Detuning4& single) {
  const auto orient = transition_orientation(scheme);
  Detuning4 multi{};
  double acc = 0.0;
  for (int i = 0; i < kTransitions; ++i) {
    acc += orient[i] * single[i];
    multi[i] = acc;
  }
  return multi;
}

bool check_two_photon_resonance(const Detuning4& d, double tol) {
  return std::abs(d[1]) <= tol && std::abs(d[2] - d[0]) <= tol && std::abs(d[3] - d[1]) <= tol;
}

Detuning4 resonant_detunings(SchemeKind scheme, double delta) {
  if (scheme == SchemeKind::m_type) return {delta, delta, delta, delta};
  return {delta, -delta, -delta, delta};
}

ScaledUnits::ScaledUnits(double t_ref, double omega_ref, double q)
    : t_ref_(t_ref), omega_ref_(omega_ref), q_(q) {
  if (!(t_ref > 0.0) || !(omega_ref > 0.0) || !(q > 0.0)) {
    throw InvalidInput("ScaledUnits requires T_ref > 0, Omega_ref > 0 and q > 0");
  }
}

PulseEnvelope PulseEnvelope::gaussian(double amplitude, double width_factor, double center) {
  if (!(amplitude >= 0.0)) throw InvalidInput("amplitude must be >= 0");
  if (!(width_factor > 0.0)) throw InvalidInput("width_factor must be > 0");
  return PulseEnvelope(GaussianShape{amplitude, width_factor, center});
}

PulseEnvelope PulseEnvelope::tabulated(std::vector<std::pair<double, double>> samples) {
  if (samples.empty()) throw InvalidInput("tabulated envelope needs at least one sample");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!(samples[i].second >= 0.0)) throw InvalidInput("tabulated envelope values must be >= 0");
    if (i > 0 && !(samples[i].first > samples[i - 1].first)) {
      throw InvalidInput("tabulated envelope times must be strictly increasing");
    }
  }
  return PulseEnvelope(TabulatedShape{std::move(samples)});
}

double PulseEnvelope::operator()(double tau) const noexcept {
  if (const auto* g = std::get_if<GaussianShape>(&shape_)) {
    const double s = tau - g->center;
    return g->amplitude * std::exp(-g->width_factor * s * s);
  }
  const auto& s = std::get<TabulatedShape>(shape_).samples;
  if (tau < s.front().first || tau > s.back().first) return 0.0;
  auto hi = std::lower_bound(s.begin(), s.end(), tau,
                             [](const auto& p, double t) { return p.first < t; });
  if (hi->first == tau) return hi->second;
  auto lo = hi - 1;
  const double w = (tau - lo->first) / (hi->first - lo->first);
  return lo->second + w * (hi->second - lo->second);
}

double PulseEnvelope::peak() const noexcept {
  if (const auto* g = std::get_if<GaussianShape>(&shape_)) return g->amplitude;
  double m = 0.0;
  for (const auto& [t, v] : std::get<TabulatedShape>(shape_).samples) m = std::max(m, v);
  return m;
}

double PulseEnvelope::fwhm() const {
  if (const auto* g = std::get_if<GaussianShape>(&shape_)) {
    if (g->amplitude == 0.0) return 0.0;
    return 2.0 * std::sqrt(std::log(2.0) / g->width_factor);
  }
  const auto& s = std::get<TabulatedShape>(shape_).samples;
  const double half = 0.5 * peak();
  if (half == 0.0) return 0.0;
  // First and last crossings of the half level on the piecewise-linear curve.
  auto crossing = [&](std::size_t i) {
    const auto& [t0, v0] = s[i];
    const auto& [t1, v1] = s[i + 1];
    return t0 + (half - v0) * (t1 - t0) / (v1 - v0);
  };
  double left = s.front().first;
  double right = s.back().first;
  if (s.front().second < half) {
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
      if (s[i].second < half && s[i + 1].second >= half) {
        left = crossing(i);
        break;
      }
    }
  }
  if (s.back().second < half) {
    for (std::size_t i = s.size() - 1; i-- > 0;) {
      if (s[i].second >= half && s[i + 1].second < half) {
        right = crossing(i);
        break;
      }
    }
  }
  return right - left;
}

PulseEnvelope PulseEnvelope::scaled(double factor) const {
  if (const auto* g = std::get_if<GaussianShape>(&shape_)) {
    return gaussian(g->amplitude * factor, g->width_factor, g->center);
  }
  auto samples = std::get<TabulatedShape>(shape_).samples;
  for (auto& p : samples) p.second *= factor;
  return tabulated(std::move(samples));
}

PulseEnvelope PulseEnvelope::shifted(double shift) const {
  if (const auto* g = std::get_if<GaussianShape>(&shape_)) {
    return gaussian(g->amplitude, g->width_factor, g->center + shift);
  }
  auto samples = std::get<TabulatedShape>(shape_).samples;
  for (auto& p : samples) p.first += shift;
  return tabulated(std::move(samples));
}

Rabi4 PulseSet::rabi(double tau) const noexcept {
  return {envelopes[0](tau), envelopes[1](tau), envelopes[2](tau), envelopes[3](tau)};
}

std::vector<double> Grid::taus() const {
  std::vector<double> t(n_tau);
  for (std::size_t k = 0; k < n_tau; ++k) t[k] = tau(k);
  return t;
}

void Grid::validate() const {
  if (!(tau_min < tau_max)) throw InvalidInput("grid: tau_min must be < tau_max");
  if (n_tau < 2) throw InvalidInput("grid: n_tau must be >= 2");
  if (n_x < 1) throw InvalidInput("grid: n_x must be >= 1");
  if (!(x_max >= 0.0)) throw InvalidInput("grid: x_max must be >= 0");
}

void check_pulses_off_at_edges(const PulseSet& pulses, const Grid& grid) {
  for (int i = 0; i < kTransitions; ++i) {
    const auto& env = pulses.envelopes[i];
    const double peak = env.peak();
    if (peak == 0.0) continue;
    const double limit = kSupportCutoff * peak;
    if (env(grid.tau_min) > limit || env(grid.tau_max) > limit) {
      throw RegimeError("pulse " + std::to_string(i + 1) +
                        " has not decayed below 1e-6 of its peak at the time-window edges");
    }
  }
}

}  // namespace pentapulse
