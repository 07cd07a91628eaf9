#include "pentapulse/light_storage.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "pentapulse/error.hpp"

namespace pentapulse {

const char* to_string(StorageChannel c) {
  return c == StorageChannel::five_level ? "five_level" : "lambda_123";
}

int probe_transition(StorageChannel c) { return c == StorageChannel::five_level ? 2 : 1; }
int control_transition(StorageChannel c) { return c == StorageChannel::five_level ? 3 : 2; }
int stored_level(StorageChannel c) { return c == StorageChannel::five_level ? 5 : 3; }

namespace {

double trapezoid(const std::vector<double>& tau, const std::vector<double>& f2) {
  double e = 0.0;
  for (std::size_t k = 1; k < tau.size(); ++k) e += 0.5 * (tau[k] - tau[k - 1]) * (f2[k] + f2[k - 1]);
  return e;
}

double envelope_energy(const PulseEnvelope& env, const std::vector<double>& tau) {
  std::vector<double> f2(tau.size());
  for (std::size_t k = 0; k < tau.size(); ++k) f2[k] = env(tau[k]) * env(tau[k]);
  return trapezoid(tau, f2);
}

double field_energy(const std::vector<Complex>& f, const std::vector<double>& tau) {
  std::vector<double> f2(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) f2[k] = std::norm(f[k]);
  return trapezoid(tau, f2);
}

}  // namespace

double stored_coherence(double probe, double control) {
  const double th = std::atan2(probe, control);
  return -std::sin(th) * std::cos(th);
}

PulseSet storage_pulses(SchemeKind scheme) {
  PulseSet p;
  p.scheme = scheme;
  p.detunings = resonant_detunings(scheme, 100.0);
  p.envelopes[0] = PulseEnvelope::gaussian(30.0, 3.0, 0.0);
  p.envelopes[1] = PulseEnvelope::gaussian(0.1, 5.0, 0.0);
  p.envelopes[2] = PulseEnvelope::gaussian(30.0, 1.0, 0.0);
  p.envelopes[3] = PulseEnvelope::gaussian(30.0, 3.0, 0.0);
  return p;
}

PulseSet lambda_storage_pulses(SchemeKind scheme) {
  PulseSet p;
  p.scheme = scheme;
  p.detunings = resonant_detunings(scheme, 100.0);
  p.envelopes[0] = PulseEnvelope::gaussian(0.1, 5.0, 0.0);
  p.envelopes[1] = PulseEnvelope::gaussian(30.0, 1.0, 0.0);
  p.envelopes[2] = PulseEnvelope::off();
  p.envelopes[3] = PulseEnvelope::off();
  return p;
}

AreaIntegral storage_area(const PulseSet& boundary, StorageChannel channel, const Grid& grid) {
  constexpr int refine = 4;
  const std::size_t n = (grid.n_tau - 1) * refine + 1;
  const double h = (grid.tau_max - grid.tau_min) / static_cast<double>(n - 1);
  const auto& probe = boundary.envelopes[probe_transition(channel) - 1];
  const auto& control = boundary.envelopes[control_transition(channel) - 1];
  std::vector<double> t(n), f(n);
  for (std::size_t k = 0; k < n; ++k) {
    t[k] = grid.tau_min + h * static_cast<double>(k);
    const double a = probe(t[k]), b = control(t[k]);
    f[k] = a * a + b * b;
  }
  return AreaIntegral(std::move(t), std::move(f));
}

double compute_x_max(const PulseSet& boundary, double q, const Grid& grid, StorageChannel channel) {
  if (!(q > 0.0)) throw InvalidInput("compute_x_max: q must be > 0");
  return storage_area(boundary, channel, grid).total() / q;
}

StorageRecord write_pulse(const PulseSet& boundary, StorageChannel channel,
                          const MediumParams& medium, const Grid& grid,
                          const PropagationOptions& options) {
  const int p = probe_transition(channel);
  const double q = medium.q[p - 1];
  StorageRecord r;
  r.channel = channel;
  r.map = propagate(boundary, medium, grid, options);
  r.x = r.map.x;
  r.atoms = r.map.final_atoms;
  r.x_max = compute_x_max(boundary, q, grid, channel);
  r.partial = grid.x_max < r.x_max;

  const auto area = storage_area(boundary, channel, grid);
  const auto& probe = boundary.envelopes[p - 1];
  const auto& control = boundary.envelopes[control_transition(channel) - 1];
  const std::size_t n = r.x.size();
  r.rho51.resize(n);
  r.rho31.resize(n);
  r.xi.resize(n);
  r.predicted.resize(n);
  r.transmitted.resize(n);
  const double e0 = r.map.energy(0, p);
  const int level = stored_level(channel);
  double worst = 0.0;
  r.residual_fraction = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t j = 0; j < n; ++j) {
    const Vec5& b = r.atoms[j];
    r.rho51[j] = b(4) * std::conj(b(0));
    r.rho31[j] = b(2) * std::conj(b(0));
    const auto xi = r.x[j] > 0.0 ? area.solve_asymptotic(q * r.x[j]) : std::nullopt;
    if (xi) {
      r.xi[j] = *xi;
      r.predicted[j] = stored_coherence(probe(*xi), control(*xi));
    } else {
      r.xi[j] = std::numeric_limits<double>::quiet_NaN();
      r.predicted[j] = 0.0;
    }
    const Complex rho = level == 5 ? r.rho51[j] : r.rho31[j];
    worst = std::max(worst, std::abs(std::abs(rho) - std::abs(r.predicted[j])));
    r.transmitted[j] = e0 > 0.0 ? r.map.energy(j, p) / e0 : 0.0;
    if (std::isnan(r.residual_fraction) && r.x[j] >= r.x_max) r.residual_fraction = r.transmitted[j];
  }
  if (std::isnan(r.residual_fraction)) r.residual_fraction = r.transmitted.back();
  r.mapping_error = worst;
  return r;
}

Vec5 reconstruct_state(Complex rho51, Complex rho31) {
  const double s = std::norm(rho51) + std::norm(rho31);
  if (s > 0.25 * (1.0 + 1e-12)) {
    throw InvalidInput("reconstruct_state: |rho_51|^2 + |rho_31|^2 exceeds 1/4");
  }
  const double p1 = 0.5 * (1.0 + std::sqrt(std::max(0.0, 1.0 - 4.0 * s)));
  const double b1 = std::sqrt(p1);
  Vec5 b = Vec5::Zero();
  b(0) = b1;
  b(2) = rho31 / b1;
  b(4) = rho51 / b1;
  return b;
}

RetrievalResult retrieve(const std::vector<Complex>& rho51, const std::vector<Complex>& rho31,
                         const PulseSet& controls, StorageChannel channel,
                         const PulseEnvelope& stored_probe, const MediumParams& medium,
                         const Grid& grid, const PropagationOptions& options) {
  if (rho51.size() != grid.n_x + 1 || rho31.size() != grid.n_x + 1) {
    throw InvalidInput("retrieve: coherence profiles must match the x grid");
  }
  const double dx = grid.dx();
  auto with_state = [&](const std::vector<Complex>& r51, const std::vector<Complex>& r31) {
    PropagationOptions o = options;
    o.initial_state = [&r51, &r31, dx, n = grid.n_x](double x) {
      // Coherences are interpolated linearly between x nodes.
      const double pos = std::clamp(x / dx, 0.0, static_cast<double>(n));
      const auto j = std::min(static_cast<std::size_t>(pos), n > 0 ? n - 1 : 0);
      const double w = n > 0 ? pos - static_cast<double>(j) : 0.0;
      const std::size_t j1 = std::min(j + 1, n);
      return reconstruct_state((1.0 - w) * r51[j] + w * r51[j1], (1.0 - w) * r31[j] + w * r31[j1]);
    };
    return o;
  };

  // The wrong coherence alone, read by the same controls, gives the part of
  // the output that belongs to the other stored pulse.
  const bool five = channel == StorageChannel::five_level;
  const std::vector<Complex> zeros(rho51.size(), Complex(0.0, 0.0));
  const auto& wrong = five ? rho31 : rho51;
  const bool has_wrong = std::any_of(wrong.begin(), wrong.end(), [](Complex c) { return c != 0.0; });
  std::future<FieldMap> wrong_run;
  if (has_wrong) {
    wrong_run = std::async(std::launch::async, [&] {
      return propagate(controls, medium, grid, five ? with_state(zeros, rho31) : with_state(rho51, zeros));
    });
  }

  RetrievalResult r;
  r.channel = channel;
  r.map = propagate(controls, medium, grid, with_state(rho51, rho31));
  r.atoms = r.map.final_atoms;
  const int p = probe_transition(channel);
  const std::size_t exit = grid.n_x;
  const auto& out = r.map.fields[exit][p - 1];
  r.output.resize(out.size());
  for (std::size_t k = 0; k < out.size(); ++k) r.output[k] = std::abs(out[k]);
  r.output_energy = field_energy(out, r.map.tau);
  r.input_energy = envelope_energy(stored_probe, r.map.tau);
  const double span = grid.tau_max - grid.tau_min;
  r.fit = best_delay(r.map.tau, r.output, [&](double t) { return stored_probe(t); }, 0.5 * span);

  if (has_wrong) {
    const FieldMap m = wrong_run.get();
    const double leak = field_energy(m.fields[exit][p - 1], m.tau);
    r.crosstalk = r.output_energy > 0.0 ? leak / r.output_energy
                                        : (leak > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  }
  return r;
}

DoubleStorageSchedule default_double_storage_schedule() {
  DoubleStorageSchedule s;
  s.write1 = storage_pulses(SchemeKind::m_type);
  s.write2 = lambda_storage_pulses(SchemeKind::m_type);
  s.read1 = s.write1;
  s.read1.envelopes[1] = PulseEnvelope::off();
  s.read2 = s.write2;
  s.read2.envelopes[0] = PulseEnvelope::off();
  return s;
}

DoubleStorageResult double_storage_protocol(const DoubleStorageSchedule& schedule,
                                            const MediumParams& medium, const Grid& grid,
                                            const PropagationOptions& options) {
  for (const PulseSet* p : {&schedule.write1, &schedule.write2, &schedule.read1, &schedule.read2}) {
    if (p->scheme != SchemeKind::m_type) {
      throw InvalidInput("double storage is defined for the M scheme only");
    }
  }
  if (medium.scheme != SchemeKind::m_type) {
    throw InvalidInput("double storage is defined for the M scheme only");
  }

  DoubleStorageResult r;
  const double probe_peak = schedule.write1.envelopes[1].peak();
  PropagationOptions w1 = options;
  w1.on_slice = [&](std::size_t, const SliceFields& f, const std::vector<Vec5>& atoms) {
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      if (std::abs(f[1][k]) < kSupportCutoff * probe_peak) {
        r.write1_min_p1 = std::min(r.write1_min_p1, std::norm(atoms[k](0)));
      }
    }
  };
  r.write1 = write_pulse(schedule.write1, StorageChannel::five_level, medium, grid, w1);
  for (const auto& c : r.write1.rho31) r.write1_max_rho31 = std::max(r.write1_max_rho31, std::abs(c));

  PropagationOptions w2 = options;
  const auto& first = r.write1.atoms;
  const double dx = grid.dx();
  w2.initial_state = [&](double x) {
    const double pos = std::clamp(x / dx, 0.0, static_cast<double>(grid.n_x));
    const auto j = std::min(static_cast<std::size_t>(pos), grid.n_x > 0 ? grid.n_x - 1 : 0);
    const double w = grid.n_x > 0 ? pos - static_cast<double>(j) : 0.0;
    const std::size_t j1 = std::min(j + 1, grid.n_x);
    Vec5 b = (1.0 - w) * first[j] + w * first[j1];
    return Vec5(b / b.norm());
  };
  r.write2 = write_pulse(schedule.write2, StorageChannel::lambda_123, medium, grid, w2);

  const auto& rho51 = r.write2.rho51;
  const auto& rho31 = r.write2.rho31;
  const PulseEnvelope& probe1 = schedule.write1.envelopes[1];
  const PulseEnvelope& probe2 = schedule.write2.envelopes[0];

  auto order = [&](bool one_first, RetrievalResult& a, RetrievalResult& b) {
    const auto first_channel = one_first ? StorageChannel::five_level : StorageChannel::lambda_123;
    const auto second_channel = one_first ? StorageChannel::lambda_123 : StorageChannel::five_level;
    a = retrieve(rho51, rho31, one_first ? schedule.read1 : schedule.read2, first_channel,
                 one_first ? probe1 : probe2, medium, grid, options);
    std::vector<Complex> r51(a.atoms.size()), r31(a.atoms.size());
    for (std::size_t j = 0; j < a.atoms.size(); ++j) {
      r51[j] = a.atoms[j](4) * std::conj(a.atoms[j](0));
      r31[j] = a.atoms[j](2) * std::conj(a.atoms[j](0));
    }
    b = retrieve(r51, r31, one_first ? schedule.read2 : schedule.read1, second_channel,
                 one_first ? probe2 : probe1, medium, grid, options);
  };
  auto f12 = std::async(std::launch::async,
                        [&] { order(true, r.order12_first, r.order12_second); });
  order(false, r.order21_first, r.order21_second);
  f12.get();
  return r;
}

}  // namespace pentapulse
