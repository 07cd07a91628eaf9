#include "pentapulse/medium_propagation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pentapulse/eigenstructure.hpp"
#include "pentapulse/error.hpp"
#include "pentapulse/tdse.hpp"

namespace pentapulse {

MediumParams MediumParams::uniform(double q, SchemeKind scheme) {
  MediumParams m;
  m.q = {q, q, q, q};
  m.scheme = scheme;
  return m;
}

void MediumParams::validate() const {
  for (double v : q) {
    if (!(v >= 0.0)) throw InvalidInput("propagation constants must be >= 0");
  }
}

double FieldMap::energy(std::size_t j, int transition) const {
  const auto& f = fields[j][transition - 1];
  double e = 0.0;
  for (std::size_t k = 1; k < f.size(); ++k) {
    e += 0.5 * (tau[k] - tau[k - 1]) * (std::norm(f[k]) + std::norm(f[k - 1]));
  }
  return e;
}

double FieldMap::max_truncation() const {
  double m = 0.0;
  for (const auto& d : diagnostics) m = std::max(m, d.truncation);
  return m;
}

double FieldMap::max_balance_residual() const {
  double m = 0.0;
  for (const auto& d : diagnostics) m = std::max(m, d.balance_residual);
  return m;
}

namespace {

// h |H| per CF4 substep. The constant diagonal is exponentiated exactly, so
// the error is driven by the pulse variation; slice results at 2.0 agree with
// ten-fold finer substepping to better than 1e-6.
constexpr double kSliceStepBound = 2.0;

// Cubic Lagrange interpolation of node values at fractional node position p
// measured from `base` (nodes base..base+3).
struct Cubic {
  std::size_t base;
  double w[4];
};

Cubic cubic_weights(double pos, std::size_t n) {
  // pos: fractional index in [0, n-1].
  std::size_t k = static_cast<std::size_t>(std::floor(pos));
  if (k >= n - 1) k = n - 2;
  std::size_t base = k >= 1 ? k - 1 : 0;
  if (base + 3 > n - 1) base = n - 4;
  const double p = pos - static_cast<double>(base);
  Cubic c;
  c.base = base;
  c.w[0] = -(p - 1.0) * (p - 2.0) * (p - 3.0) / 6.0;
  c.w[1] = p * (p - 2.0) * (p - 3.0) / 2.0;
  c.w[2] = -p * (p - 1.0) * (p - 3.0) / 2.0;
  c.w[3] = p * (p - 1.0) * (p - 2.0) / 6.0;
  return c;
}

Field4 interpolate(const SliceFields& f, const Cubic& c) {
  Field4 out;
  for (int i = 0; i < kTransitions; ++i) {
    const auto& v = f[i];
    out[i] = c.w[0] * v[c.base] + c.w[1] * v[c.base + 1] + c.w[2] * v[c.base + 2] +
             c.w[3] * v[c.base + 3];
  }
  return out;
}

SliceFields sample_boundary(const PulseSet& p, const std::vector<double>& tau) {
  SliceFields f;
  for (int i = 0; i < kTransitions; ++i) {
    f[i].resize(tau.size());
    for (std::size_t k = 0; k < tau.size(); ++k) f[i][k] = p.envelopes[i](tau[k]);
  }
  return f;
}

double slice_norm_bound(const Detuning4& d, const SliceFields& f) {
  double m = 0.0;
  for (std::size_t k = 0; k < f[0].size(); ++k) {
    m = std::max(m, hamiltonian_norm_bound(d, {f[0][k], f[1][k], f[2][k], f[3][k]}));
  }
  return m;
}

bool all_finite(const SliceFields& f) {
  for (const auto& v : f)
    for (const auto& z : v)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

// Populations summed up to level i+1 for i = 0..3, their tau-derivative by
// fourth-order central differences (second order at the ends).
std::array<std::vector<double>, kTransitions> ladder_flux(const std::vector<Vec5>& atoms,
                                                           double dtau) {
  const std::size_t n = atoms.size();
  std::array<std::vector<double>, kTransitions> cum;
  for (int i = 0; i < kTransitions; ++i) {
    cum[i].resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      double s = 0.0;
      for (int l = 0; l <= i; ++l) s += std::norm(atoms[k](l));
      cum[i][k] = s;
    }
  }
  std::array<std::vector<double>, kTransitions> flux;
  for (int i = 0; i < kTransitions; ++i) {
    flux[i].assign(n, 0.0);
    const auto& c = cum[i];
    for (std::size_t k = 0; k < n; ++k) {
      if (k >= 2 && k + 2 < n) {
        flux[i][k] = (c[k - 2] - 8.0 * c[k - 1] + 8.0 * c[k + 1] - c[k + 2]) / (12.0 * dtau);
      } else if (k >= 1 && k + 1 < n) {
        flux[i][k] = (c[k + 1] - c[k - 1]) / (2.0 * dtau);
      } else if (k == 0) {
        flux[i][k] = (c[1] - c[0]) / dtau;
      } else {
        flux[i][k] = (c[k] - c[k - 1]) / dtau;
      }
    }
  }
  return flux;
}

std::array<double, kTransitions> phase_gradients(const SliceFields& f, double dtau) {
  std::array<double, kTransitions> out{};
  for (int i = 0; i < kTransitions; ++i) {
    double num = 0.0, den = 0.0;
    const auto& v = f[i];
    for (std::size_t k = 1; k + 1 < v.size(); ++k) {
      num += (std::conj(v[k]) * (v[k + 1] - v[k - 1])).imag() / (2.0 * dtau);
      den += std::norm(v[k]);
    }
    out[i] = den > 0.0 ? num / den : 0.0;
  }
  return out;
}

}  // namespace

std::vector<Vec5> solve_slice(const Detuning4& d, const SliceFields& fields,
                              const std::vector<double>& tau, const Vec5& initial,
                              int substeps) {
  const std::size_t n = tau.size();
  if (n < 4) throw InvalidInput("solve_slice needs at least 4 time nodes");
  const double dtau = (tau.back() - tau.front()) / static_cast<double>(n - 1);
  const double h = dtau / substeps;
  std::vector<Vec5> out(n);
  Vec5 b = initial;
  out[0] = b;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    for (int m = 0; m < substeps; ++m) {
      const double p0 = static_cast<double>(k) + (m + kGaussC1) / substeps;
      const double p1 = static_cast<double>(k) + (m + kGaussC2) / substeps;
      cf4_step(d, interpolate(fields, cubic_weights(p0, n)),
               interpolate(fields, cubic_weights(p1, n)), h, b);
    }
    out[k + 1] = b;
  }
  return out;
}

SliceFields maxwell_source(const MediumParams& medium, const std::vector<Vec5>& atoms) {
  const auto orient = transition_orientation(medium.scheme);
  SliceFields s;
  for (int i = 0; i < kTransitions; ++i) {
    s[i].resize(atoms.size());
    const Complex factor(0.0, -medium.q[i] * orient[i]);
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      s[i][k] = factor * atoms[k](i) * std::conj(atoms[k](i + 1));
    }
  }
  return s;
}

FieldMap propagate(const PulseSet& boundary, const MediumParams& medium, const Grid& grid,
                   const PropagationOptions& options) {
  grid.validate();
  medium.validate();
  if (boundary.scheme != medium.scheme) {
    throw InvalidInput("propagate: boundary and medium use different level schemes");
  }
  if (grid.n_tau < 4) throw InvalidInput("propagate: n_tau must be >= 4");
  if (!options.boundary_fields) check_pulses_off_at_edges(boundary, grid);

  FieldMap map;
  map.tau = grid.taus();
  map.x.resize(grid.n_x + 1);
  for (std::size_t j = 0; j <= grid.n_x; ++j) map.x[j] = grid.x(j);
  map.fields.resize(grid.n_x + 1);
  map.final_atoms.resize(grid.n_x + 1);
  map.diagnostics.resize(grid.n_x + 1);
  if (options.store_atoms) map.atoms.resize(grid.n_x + 1);

  map.fields[0] = options.boundary_fields ? *options.boundary_fields
                                          : sample_boundary(boundary, map.tau);
  for (const auto& v : map.fields[0]) {
    if (v.size() != grid.n_tau) throw InvalidInput("propagate: boundary field length mismatch");
  }

  const auto d = boundary.multiphoton();
  const double dtau = grid.dtau();
  int substeps = options.tau_substeps;
  if (substeps <= 0) {
    const double norm = 1.5 * slice_norm_bound(d, map.fields[0]);
    substeps = std::max(1, static_cast<int>(std::ceil(dtau * norm / kSliceStepBound)));
  }

  std::array<double, kTransitions> tol{};
  double max_peak = 0.0;
  for (int i = 0; i < kTransitions; ++i) {
    double p = 0.0;
    for (const auto& z : map.fields[0][i]) p = std::max(p, std::abs(z));
    tol[i] = p;
    max_peak = std::max(max_peak, p);
  }
  for (auto& t : tol) t = options.lte_tolerance * std::max(t, 1e-3 * max_peak);

  auto ground = []() {
    Vec5 b = Vec5::Zero();
    b(0) = 1.0;
    return b;
  };
  auto init = [&](double x) { return options.initial_state ? options.initial_state(x) : ground(); };
  auto solve = [&](const SliceFields& f, double x) {
    return solve_slice(d, f, map.tau, init(x), substeps);
  };

  std::vector<Vec5> atoms = solve(map.fields[0], 0.0);
  map.diagnostics[0].detuning_shift = phase_gradients(map.fields[0], dtau);

  const double dx = grid.dx();
  const auto orient = transition_orientation(medium.scheme);
  for (std::size_t j = 0; j < grid.n_x; ++j) {
    const double x0 = map.x[j];
    const SliceFields& f0 = map.fields[j];
    const SliceFields s0 = maxwell_source(medium, atoms);

    SliceFields accepted;
    double accepted_est = 0.0;
    int used = 1;
    const int max_level = options.adaptive ? options.max_refinement : 0;
    for (int level = 0; level <= max_level; ++level) {
      const int pieces = 1 << level;
      const double h = dx / pieces;
      SliceFields f = f0;
      SliceFields s = s0;
      double est = 0.0;
      bool ok = true;
      for (int piece = 0; piece < pieces; ++piece) {
        const double xa = x0 + h * piece;
        if (piece > 0) s = maxwell_source(medium, solve(f, xa));
        SliceFields pred = f;
        for (int i = 0; i < kTransitions; ++i)
          for (std::size_t k = 0; k < grid.n_tau; ++k) pred[i][k] += h * s[i][k];
        const SliceFields s1 = maxwell_source(medium, solve(pred, xa + h));
        for (int i = 0; i < kTransitions; ++i) {
          double e = 0.0;
          for (std::size_t k = 0; k < grid.n_tau; ++k) {
            const Complex corr = f[i][k] + 0.5 * h * (s[i][k] + s1[i][k]);
            e = std::max(e, std::abs(corr - pred[i][k]));
            f[i][k] = corr;
          }
          est = std::max(est, e);
          if (e > tol[i]) ok = false;
        }
      }
      if (!all_finite(f)) {
        throw NumericalError("propagate: non-finite field at slice " + std::to_string(j + 1),
                             static_cast<long>(j + 1));
      }
      accepted = std::move(f);
      accepted_est = est;
      used = pieces;
      if (ok) break;
    }
    if (accepted_est > 0.1 * std::max(max_peak, 1e-300)) {
      throw NumericalError("propagate: truncation estimate " + std::to_string(accepted_est) +
                               " runs away at slice " + std::to_string(j + 1),
                           static_cast<long>(j + 1));
    }

    std::vector<Vec5> next_atoms = solve(accepted, map.x[j + 1]);

    SliceDiagnostics& diag = map.diagnostics[j + 1];
    diag.truncation = accepted_est;
    diag.substeps = used;
    diag.detuning_shift = phase_gradients(accepted, dtau);
    {
      const auto j0 = ladder_flux(atoms, dtau);
      const auto j1 = ladder_flux(next_atoms, dtau);
      double r = 0.0;
      for (int i = 0; i < kTransitions; ++i) {
        const double scale = 2.0 * std::max(tol[i] / options.lte_tolerance, 1e-300);
        for (std::size_t k = 0; k < grid.n_tau; ++k) {
          const double lhs = (std::norm(accepted[i][k]) - std::norm(f0[i][k])) / dx;
          const double rhs = orient[i] * medium.q[i] * 0.5 * (j0[i][k] + j1[i][k]);
          r = std::max(r, std::abs(lhs - rhs) * dx / scale);
        }
      }
      diag.balance_residual = r;
    }

    if (options.on_slice) options.on_slice(j, map.fields[j], atoms);
    map.final_atoms[j] = atoms.back();
    if (options.store_atoms) map.atoms[j] = std::move(atoms);
    map.fields[j + 1] = std::move(accepted);
    atoms = std::move(next_atoms);
  }
  if (options.on_slice) options.on_slice(grid.n_x, map.fields[grid.n_x], atoms);
  map.final_atoms[grid.n_x] = atoms.back();
  if (options.store_atoms) map.atoms[grid.n_x] = std::move(atoms);
  return map;
}

FieldMap analytic_split_solution(const PulseSet& boundary, double q, const Grid& grid,
                                 const SplitOptions& options) {
  grid.validate();
  const auto taus = grid.taus();
  for (double t : taus) {
    const double a = boundary.envelopes[0](t), b = boundary.envelopes[3](t);
    if (std::abs(a - b) > 1e-12 * std::max(1.0, std::max(a, b))) {
      throw RegimeError("analytic split solution requires Omega_4 = Omega_1 at the boundary");
    }
  }
  if (!boundary.resonant(1e-12 * std::max(1.0, std::abs(boundary.delta())))) {
    throw RegimeError("analytic split solution requires two-photon resonance");
  }
  if (options.enforce_medium_margin) {
    const double T = options.T > 0.0 ? options.T : shortest_pulse_duration(boundary);
    double omega2 = 0.0;
    for (double t : taus) {
      const double a = boundary.envelopes[1](t), b = boundary.envelopes[2](t);
      omega2 = std::max(omega2, a * a + b * b);
    }
    const auto report = medium_margins(q, grid.x_max, boundary.delta(), T, omega2, options.thresholds);
    if (report.verdict != Verdict::adiabatic) {
      throw RegimeError("analytic split solution outside the adiabatic medium length: f1 = " +
                        std::to_string(report.value("f1")) + " at x = " +
                        std::to_string(grid.x_max) + " (x_ad = " + std::to_string(report.x_ad) + ")");
    }
  }

  const auto area = AreaIntegral::omega0_squared(boundary, grid);
  auto theta0 = [&](double t) {
    return std::atan2(boundary.envelopes[1](t), boundary.envelopes[2](t));
  };
  const double theta_start = theta0(grid.tau_min);

  FieldMap map;
  map.tau = taus;
  map.x.resize(grid.n_x + 1);
  map.fields.resize(grid.n_x + 1);
  map.diagnostics.resize(grid.n_x + 1);
  map.final_atoms.assign(grid.n_x + 1, Vec5::Zero());
  for (std::size_t j = 0; j <= grid.n_x; ++j) {
    map.x[j] = grid.x(j);
    auto& f = map.fields[j];
    for (auto& v : f) v.resize(taus.size());
    for (std::size_t k = 0; k < taus.size(); ++k) {
      const double t = taus[k];
      const double w1 = boundary.envelopes[0](t);
      const double a = boundary.envelopes[1](t), b = boundary.envelopes[2](t);
      const double omega0 = std::hypot(a, b);
      const auto xi = area.solve(q * map.x[j], t);
      const double th = xi ? theta0(*xi) : theta_start;
      f[0][k] = w1;
      f[1][k] = omega0 * std::sin(th);
      f[2][k] = omega0 * std::cos(th);
      f[3][k] = w1;
    }
  }
  return map;
}

double shape_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t k = 0; k < a.size() && k < b.size(); ++k) {
    ab += a[k] * b[k];
    aa += a[k] * a[k];
    bb += b[k] * b[k];
  }
  if (aa == 0.0 || bb == 0.0) return aa == bb ? 1.0 : 0.0;
  return ab / std::sqrt(aa * bb);
}

DelayFit best_delay(const std::vector<double>& tau, const std::vector<double>& signal,
                    const std::function<double(double)>& reference, double max_shift) {
  auto corr = [&](double dt) {
    std::vector<double> r(tau.size());
    for (std::size_t k = 0; k < tau.size(); ++k) r[k] = reference(tau[k] - dt);
    return shape_correlation(signal, r);
  };
  const double step = tau.size() > 1 ? (tau.back() - tau.front()) / static_cast<double>(tau.size() - 1) : 1.0;
  double best = -std::numeric_limits<double>::infinity();
  double best_dt = 0.0;
  for (double dt = -max_shift; dt <= max_shift + 0.5 * step; dt += step) {
    const double c = corr(dt);
    if (c > best) {
      best = c;
      best_dt = dt;
    }
  }
  // Golden-section refinement inside the bracketing cells.
  double lo = best_dt - step, hi = best_dt + step;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c1 = hi - g * (hi - lo), c2 = lo + g * (hi - lo);
  double f1 = corr(c1), f2 = corr(c2);
  for (int it = 0; it < 60 && hi - lo > 1e-10; ++it) {
    if (f1 > f2) {
      hi = c2;
      c2 = c1;
      f2 = f1;
      c1 = hi - g * (hi - lo);
      f1 = corr(c1);
    } else {
      lo = c1;
      c1 = c2;
      f1 = f2;
      c2 = lo + g * (hi - lo);
      f2 = corr(c2);
    }
  }
  const double mid = 0.5 * (lo + hi);
  const double fm = corr(mid);
  if (fm >= best) return {mid, fm};
  return {best_dt, best};
}

PulseSet adiabaton_pulses(SchemeKind scheme) {
  PulseSet p;
  p.scheme = scheme;
  p.detunings = resonant_detunings(scheme, 100.0);
  p.envelopes[0] = PulseEnvelope::gaussian(30.0, 0.2, 0.0);
  p.envelopes[1] = PulseEnvelope::gaussian(0.1, 5.0, 0.0);
  p.envelopes[2] = PulseEnvelope::gaussian(30.0, 0.2, 0.0);
  p.envelopes[3] = PulseEnvelope::gaussian(30.0, 0.2, 0.0);
  return p;
}

AdiabatonResult adiabaton_experiment(const PulseSet& boundary, const MediumParams& medium,
                                     const Grid& grid, const std::vector<double>& depths,
                                     const PropagationOptions& options) {
  AdiabatonResult r;
  const double omega0_sq = std::pow(boundary.envelopes[1](0.0), 2) + std::pow(boundary.envelopes[2](0.0), 2);
  r.length_unit = medium.q[1] > 0.0 ? omega0_sq / medium.q[1] : 0.0;
  r.map = propagate(boundary, medium, grid, options);
  r.x_probe = depths;
  const double span = grid.tau_max - grid.tau_min;
  const auto& probe = boundary.envelopes[1];
  for (double depth : depths) {
    std::size_t j = 0;
    for (std::size_t m = 1; m < r.map.x.size(); ++m) {
      if (std::abs(r.map.x[m] - depth) < std::abs(r.map.x[j] - depth)) j = m;
    }
    std::vector<double> sig(r.map.tau.size());
    for (std::size_t k = 0; k < sig.size(); ++k) sig[k] = r.map.magnitude(j, 2, k);
    r.fits.push_back(best_delay(r.map.tau, sig, [&](double t) { return probe(t); }, 0.5 * span));
  }
  double res = 0.0;
  for (std::size_t j = 0; j < r.map.x.size(); ++j) {
    for (std::size_t k = 0; k < r.map.tau.size(); ++k) {
      const double t = r.map.tau[k];
      const double ref = std::pow(boundary.envelopes[1](t), 2) + std::pow(boundary.envelopes[2](t), 2);
      const double now = std::norm(r.map.fields[j][1][k]) + std::norm(r.map.fields[j][2][k]);
      res = std::max(res, std::abs(now - ref));
    }
  }
  r.conservation_residual = omega0_sq > 0.0 ? res / omega0_sq : 0.0;
  return r;
}

double group_velocity(double omega3_sq, double qc) {
  if (!(omega3_sq > 0.0)) return 0.0;
  if (std::isinf(omega3_sq)) return 1.0;
  return 1.0 / (1.0 + qc / omega3_sq);
}

std::vector<double> group_velocity_profile(const PulseEnvelope& omega3, double qc,
                                           const std::vector<double>& tau) {
  std::vector<double> u(tau.size());
  for (std::size_t k = 0; k < tau.size(); ++k) {
    const double w = omega3(tau[k]);
    u[k] = group_velocity(w * w, qc);
  }
  return u;
}

double relative_l2(const FieldMap& a, const FieldMap& b, int transition, std::size_t j_max) {
  double num = 0.0, den = 0.0;
  const std::size_t jm = std::min({j_max, a.fields.size() - 1, b.fields.size() - 1});
  for (std::size_t j = 0; j <= jm; ++j) {
    for (std::size_t k = 0; k < a.tau.size(); ++k) {
      const double x = a.magnitude(j, transition, k);
      const double y = b.magnitude(j, transition, k);
      num += (x - y) * (x - y);
      den += y * y;
    }
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace pentapulse
