#include "pentapulse/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "pentapulse/adiabaticity.hpp"
#include "pentapulse/atom_dynamics.hpp"
#include "pentapulse/eigenstructure.hpp"
#include "pentapulse/error.hpp"
#include "pentapulse/light_storage.hpp"
#include "pentapulse/medium_propagation.hpp"
#include "pentapulse/serialization.hpp"

namespace pentapulse {

using json = nlohmann::json;

namespace {

constexpr std::array<std::pair<Command, std::string_view>, 6> kCommandNames{{
    {Command::eigen, "eigen"},
    {Command::transfer, "transfer"},
    {Command::propagate, "propagate"},
    {Command::store, "store"},
    {Command::double_store, "double-store"},
    {Command::check_adiabatic, "check-adiabatic"},
}};

json num(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

json report_json(const AdiabaticityReport& r) {
  json j = json::object();
  j["T"] = num(r.T);
  j["delta"] = num(r.delta);
  j["verdict"] = std::string(to_string(r.verdict));
  json m = json::array();
  for (const auto& g : r.margins) {
    m.push_back({{"name", g.name}, {"value", num(g.value)}, {"applicable", g.applicable}, {"pass", g.pass}});
  }
  j["margins"] = m;
  if (!r.flags.empty() || r.x != 0.0 || r.x_ad != 0.0) {
    j["x"] = num(r.x);
    j["x_ad"] = num(r.x_ad);
    j["flags"] = r.flags;
  } else {
    j["tau_overlap"] = num(r.tau_overlap);
  }
  return j;
}

using Metrics = std::map<std::string, double>;

struct Context {
  const ScenarioConfig& cfg;
  std::filesystem::path out;
  RunOutcome outcome;
  json summary = json::object();
  Metrics metrics;

  void write_csv(const std::string& name, const CsvTable& t) {
    const auto p = out / name;
    write_text_file(p, t.to_string());
    outcome.files.push_back(p);
  }
};

double pulse_duration(const ScenarioConfig& c, const PulseSet& p) {
  return c.T > 0.0 ? c.T : shortest_pulse_duration(p);
}

double max_omega0_sq(const PulseSet& p, const Grid& g) {
  double m = 0.0;
  for (double t : g.taus()) {
    const double a = p.envelopes[1](t), b = p.envelopes[2](t);
    m = std::max(m, a * a + b * b);
  }
  return m;
}

MediumParams medium_of(const ScenarioConfig& c) {
  if (!c.q) throw InvalidInput("medium.q is required for this experiment");
  MediumParams m;
  m.q = *c.q;
  m.scheme = c.scheme;
  return m;
}

PropagationOptions options_of(const ScenarioConfig& c) {
  PropagationOptions o;
  o.adaptive = c.adaptive;
  o.tau_substeps = c.tau_substeps;
  o.lte_tolerance = c.lte_tolerance;
  o.max_refinement = c.max_refinement;
  return o;
}

json adiabaticity_block(const ScenarioConfig& c, const PulseSet& p, const Grid& g) {
  json j = json::object();
  const double T = pulse_duration(c, p);
  j["single_atom"] = report_json(single_atom_margins(p, T, p.delta(), g, c.thresholds));
  if (c.q) {
    j["medium"] = report_json(
        medium_margins((*c.q)[1], g.x_max, p.delta(), T, max_omega0_sq(p, g), c.thresholds));
  }
  return j;
}

// ---------------------------------------------------------------- eigen

void run_eigen(Context& ctx) {
  const auto& c = ctx.cfg;
  const PulseSet p = c.pulse_set();
  c.grid.validate();
  const auto sys = track_eigenvectors(p, c.grid);
  const auto d = p.multiphoton();
  const double delta = p.delta();

  CsvTable t;
  std::vector<double> tau, w[4], lam[5], numv[5], th, p1, p2, ph, r1, r2;
  double worst_rel = 0.0, worst_res = 0.0, worst_l0 = 0.0, worst_sum = 0.0;
  for (std::size_t k = 0; k < sys.size(); ++k) {
    const auto& s = sys[k];
    const auto r = p.rabi(s.tau);
    const Mat5 h = build_hamiltonian(d, r);
    const auto eig = numeric_eigensolve(h);
    auto a = s.lambda;
    std::array<double, 5> sorted{};
    std::copy(a.begin(), a.end(), sorted.begin());
    std::sort(sorted.begin(), sorted.end());
    double scale = 1.0;
    for (int i = 0; i < 5; ++i) scale = std::max(scale, std::abs(eig.values(i)));
    for (int i = 0; i < 5; ++i) worst_rel = std::max(worst_rel, std::abs(sorted[i] - eig.values(i)) / scale);
    worst_l0 = std::max(worst_l0, std::abs(a[0]));
    worst_sum = std::max({worst_sum, std::abs(a[1] + a[3] - delta), std::abs(a[2] + a[4] - delta)});
    const double hn = std::max(1e-300, max_abs(h));
    double res1 = std::numeric_limits<double>::quiet_NaN(), res2 = res1;
    if (std::abs(r[0] - r[3]) <= 1e-12 * std::max(1.0, r[0])) {
      const Vec5 v1 = dressed_state_lambda1(s.mixing);
      const Vec5 v2 = dressed_state_lambda2(s.mixing);
      res1 = (h * v1 - a[1] * v1).cwiseAbs().maxCoeff() / hn;
      res2 = (h * v2 - a[2] * v2).cwiseAbs().maxCoeff() / hn;
      worst_res = std::max({worst_res, res1, res2});
    }
    if (k % c.stride != 0 && k + 1 != sys.size()) continue;
    tau.push_back(s.tau);
    for (int i = 0; i < 4; ++i) w[i].push_back(r[i]);
    for (int i = 0; i < 5; ++i) {
      lam[i].push_back(a[i]);
      numv[i].push_back(eig.values(i));
    }
    th.push_back(s.mixing.theta);
    p1.push_back(s.mixing.phi1);
    p2.push_back(s.mixing.phi2);
    ph.push_back(s.mixing.phi);
    r1.push_back(res1);
    r2.push_back(res2);
  }
  t.add("tau", tau);
  for (int i = 0; i < 4; ++i) t.add("omega" + std::to_string(i + 1), w[i]);
  for (int i = 0; i < 5; ++i) t.add("lambda" + std::to_string(i), lam[i]);
  for (int i = 0; i < 5; ++i) t.add("numeric" + std::to_string(i), numv[i]);
  t.add("theta", th);
  t.add("phi1", p1);
  t.add("phi2", p2);
  t.add("phi", ph);
  t.add("residual_lambda1", r1);
  t.add("residual_lambda2", r2);
  ctx.write_csv("eigen.csv", t);

  ctx.metrics["max_eigen_rel_error"] = worst_rel;
  ctx.metrics["max_dressed_residual"] = worst_res;
  ctx.metrics["max_abs_lambda0"] = worst_l0;
  ctx.metrics["max_sum_rule_error"] = worst_sum;
  const auto& first = sys.front().lambda;
  const auto& last = sys.back().lambda;
  ctx.summary["endpoint_spectrum"] = {{"start", std::vector<double>(first.begin(), first.end())},
                                      {"end", std::vector<double>(last.begin(), last.end())}};

  if (c.oracle_samples > 0) {
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> om(0.0, 50.0), de(-100.0, 100.0);
    double worst = 0.0;
    for (std::size_t n = 0; n < c.oracle_samples; ++n) {
      const Rabi4 r{om(rng), om(rng), om(rng), om(rng)};
      const double dd = de(rng);
      auto a = eigenvalues_general(r, dd);
      std::sort(a.begin(), a.end());
      const auto e = numeric_eigensolve(
          build_hamiltonian(compose_multiphoton_detunings(c.scheme, resonant_detunings(c.scheme, dd)), r));
      double scale = 1.0;
      for (int i = 0; i < 5; ++i) scale = std::max(scale, std::abs(e.values(i)));
      for (int i = 0; i < 5; ++i) worst = std::max(worst, std::abs(a[i] - e.values(i)) / scale);
    }
    ctx.metrics["oracle_max_rel_error"] = worst;
    ctx.summary["oracle"] = {{"samples", c.oracle_samples}, {"seed", c.seed}};
  }
  ctx.summary["grid_convergence"] = {{"applicable", false},
                                     {"reason", "eigenvalues are evaluated pointwise in closed form"}};
}

// ---------------------------------------------------------------- transfer

void run_transfer(Context& ctx) {
  const auto& c = ctx.cfg;
  const PulseSet p = c.pulse_set();
  c.grid.validate();
  check_pulses_off_at_edges(p, c.grid);
  const auto res = transfer_experiment(p, c.grid, AtomState::bare(c.initial_level), c.target_level);
  const auto& tr = res.trajectory;

  CsvTable t;
  t.add("tau", tr.tau);
  for (int l = 1; l <= kLevels; ++l) {
    std::vector<double> v(tr.size());
    for (std::size_t k = 0; k < tr.size(); ++k) v[k] = tr.population(k, l);
    t.add("P" + std::to_string(l), v);
  }
  std::vector<double> nrm(tr.size());
  for (std::size_t k = 0; k < tr.size(); ++k) nrm[k] = tr.states[k].norm();
  t.add("norm", nrm);
  if (p.resonant(1e-12 * std::max(1.0, std::abs(p.delta())))) {
    t.add("P_lambda1", project_onto_dressed(tr, p, DressedBranch::lambda1));
    t.add("P_lambda2", project_onto_dressed(tr, p, DressedBranch::lambda2));
  }
  ctx.write_csv("populations.csv", t);

  ctx.metrics["fidelity"] = res.fidelity;
  ctx.metrics["max_p2"] = res.max_p2;
  ctx.metrics["max_p3"] = res.max_p3;
  ctx.metrics["max_p4"] = res.max_p4;
  ctx.metrics["norm_drift"] = res.norm_drift;
  ctx.summary["initial_level"] = c.initial_level;
  ctx.summary["target_level"] = c.target_level;

  if (c.convergence) {
    Grid fine = c.grid;
    fine.n_tau = 2 * c.grid.n_tau - 1;
    const auto ref = transfer_experiment(p, fine, AtomState::bare(c.initial_level), c.target_level);
    ctx.summary["grid_convergence"] = {{"applicable", true},
                                       {"reference_n_tau", fine.n_tau},
                                       {"fidelity_change", num(std::abs(ref.fidelity - res.fidelity))}};
  } else {
    ctx.summary["grid_convergence"] = {{"applicable", false}, {"reason", "disabled in config"}};
  }
}

// ---------------------------------------------------------------- propagate

std::size_t nearest_slice(const std::vector<double>& x, double depth) {
  std::size_t j = 0;
  for (std::size_t m = 1; m < x.size(); ++m) {
    if (std::abs(x[m] - depth) < std::abs(x[j] - depth)) j = m;
  }
  return j;
}

CsvTable slice_table(const FieldMap& map, std::size_t j, const std::vector<Vec5>& atoms) {
  CsvTable t;
  t.add("tau", map.tau);
  const std::size_t n = map.tau.size();
  for (int i = 0; i < kTransitions; ++i) {
    std::vector<double> a(n);
    for (std::size_t k = 0; k < n; ++k) a[k] = std::abs(map.fields[j][i][k]);
    t.add("abs_omega" + std::to_string(i + 1), a);
  }
  for (int i = 0; i < kTransitions; ++i) {
    std::vector<double> a(n);
    for (std::size_t k = 0; k < n; ++k) a[k] = std::arg(map.fields[j][i][k]);
    t.add("phase_omega" + std::to_string(i + 1), a);
  }
  for (int l = 0; l < kLevels; ++l) {
    std::vector<double> a(n);
    for (std::size_t k = 0; k < n; ++k) a[k] = std::norm(atoms[k](l));
    t.add("P" + std::to_string(l + 1), a);
  }
  std::vector<double> r51r(n), r51i(n), r31r(n), r31i(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Complex a = atoms[k](4) * std::conj(atoms[k](0));
    const Complex b = atoms[k](2) * std::conj(atoms[k](0));
    r51r[k] = a.real();
    r51i[k] = a.imag();
    r31r[k] = b.real();
    r31i[k] = b.imag();
  }
  t.add("re_rho51", r51r);
  t.add("im_rho51", r51i);
  t.add("re_rho31", r31r);
  t.add("im_rho31", r31i);
  return t;
}

void run_propagate(Context& ctx) {
  const auto& c = ctx.cfg;
  const PulseSet p = c.pulse_set();
  const MediumParams m = medium_of(c);
  c.grid.validate();

  const auto x_nodes = [&] {
    std::vector<double> x(c.grid.n_x + 1);
    for (std::size_t j = 0; j <= c.grid.n_x; ++j) x[j] = c.grid.x(j);
    return x;
  }();
  std::vector<std::size_t> wanted;
  for (double depth : c.depths) wanted.push_back(nearest_slice(x_nodes, depth));
  wanted.push_back(c.grid.n_x);
  std::map<std::size_t, std::vector<Vec5>> captured;
  PropagationOptions o = options_of(c);
  o.on_slice = [&](std::size_t j, const SliceFields&, const std::vector<Vec5>& atoms) {
    if (std::find(wanted.begin(), wanted.end(), j) != wanted.end()) captured[j] = atoms;
  };

  std::vector<double> depths = c.depths;
  const auto res = adiabaton_experiment(p, m, c.grid, depths, o);
  const FieldMap& map = res.map;

  for (std::size_t j : wanted) {
    ctx.write_csv("slice_" + std::to_string(j) + ".csv", slice_table(map, j, captured.at(j)));
  }
  {
    CsvTable t;
    t.add("x", map.x);
    for (int i = 1; i <= kTransitions; ++i) {
      std::vector<double> e(map.x.size());
      for (std::size_t j = 0; j < map.x.size(); ++j) e[j] = map.energy(j, i);
      t.add("energy_omega" + std::to_string(i), e);
    }
    std::vector<double> tr, bal, sub, cons;
    std::array<std::vector<double>, kTransitions> shift;
    const double o0 = std::pow(p.envelopes[1](0.0), 2) + std::pow(p.envelopes[2](0.0), 2);
    for (std::size_t j = 0; j < map.x.size(); ++j) {
      const auto& dg = map.diagnostics[j];
      tr.push_back(dg.truncation);
      bal.push_back(dg.balance_residual);
      sub.push_back(dg.substeps);
      for (int i = 0; i < kTransitions; ++i) shift[i].push_back(dg.detuning_shift[i]);
      double worst = 0.0;
      for (std::size_t k = 0; k < map.tau.size(); ++k) {
        const double t0 = map.tau[k];
        const double ref = std::pow(p.envelopes[1](t0), 2) + std::pow(p.envelopes[2](t0), 2);
        const double now = std::norm(map.fields[j][1][k]) + std::norm(map.fields[j][2][k]);
        worst = std::max(worst, std::abs(now - ref));
      }
      cons.push_back(o0 > 0.0 ? worst / o0 : 0.0);
    }
    t.add("truncation", tr);
    t.add("balance_residual", bal);
    t.add("x_substeps", sub);
    for (int i = 0; i < kTransitions; ++i) t.add("detuning_shift" + std::to_string(i + 1), shift[i]);
    t.add("conservation_residual", cons);
    ctx.write_csv("x_profile.csv", t);
  }

  json fits = json::array();
  for (std::size_t i = 0; i < res.fits.size(); ++i) {
    const std::size_t j = nearest_slice(map.x, c.depths[i]);
    const double expected = res.length_unit > 0.0 ? map.x[j] / res.length_unit : 0.0;
    fits.push_back({{"depth", num(c.depths[i])},
                    {"x", num(map.x[j])},
                    {"delay", num(res.fits[i].delay)},
                    {"correlation", num(res.fits[i].correlation)},
                    {"expected_delay", num(expected)}});
    const std::string idx = "[" + std::to_string(i) + "]";
    ctx.metrics["delay" + idx] = res.fits[i].delay;
    ctx.metrics["correlation" + idx] = res.fits[i].correlation;
    if (expected > 0.0) ctx.metrics["delay_ratio" + idx] = res.fits[i].delay / expected;
  }
  ctx.summary["fits"] = fits;
  ctx.summary["length_unit"] = num(res.length_unit);
  ctx.metrics["conservation_residual"] = res.conservation_residual;
  ctx.metrics["max_truncation"] = map.max_truncation();
  ctx.metrics["max_balance_residual"] = map.max_balance_residual();
  double shift = 0.0;
  for (const auto& dg : map.diagnostics) {
    shift = std::max({shift, std::abs(dg.detuning_shift[1]), std::abs(dg.detuning_shift[2])});
  }
  ctx.metrics["max_probe_control_detuning_shift"] = shift;
  {
    std::vector<double> e(kTransitions);
    for (int i = 1; i <= kTransitions; ++i) {
      const double e0 = map.energy(0, i);
      ctx.metrics["exit_energy_ratio[" + std::to_string(i) + "]"] =
          e0 > 0.0 ? map.energy(map.x.size() - 1, i) / e0 : 0.0;
    }
  }

  // Analytic split solution over the part of the run with q x / Delta <= 1.
  const double delta = std::abs(p.delta());
  const double q = m.q[1];
  if (q > 0.0 && delta > 0.0) {
    const auto j_max = std::min<std::size_t>(
        c.grid.n_x, static_cast<std::size_t>(std::floor(delta / q / c.grid.dx() + 1e-9)));
    json split = json::object();
    if (j_max >= 1) {
      Grid g = c.grid;
      g.n_x = j_max;
      g.x_max = c.grid.dx() * static_cast<double>(j_max);
      SplitOptions so;
      so.enforce_medium_margin = false;
      so.T = c.T;
      so.thresholds = c.thresholds;
      try {
        const FieldMap an = analytic_split_solution(p, q, g, so);
        json l2 = json::array();
        for (int i = 1; i <= kTransitions; ++i) {
          const double v = relative_l2(map, an, i, j_max);
          l2.push_back(num(v));
          ctx.metrics["split_l2[" + std::to_string(i) + "]"] = v;
        }
        split["x_limit"] = num(g.x_max);
        split["relative_l2"] = l2;
      } catch (const RegimeError& e) {
        split["refused"] = e.what();
      }
    } else {
      split["refused"] = "no slice with q x / Delta <= 1";
    }
    ctx.summary["analytic_split"] = split;
  }

  if (c.convergence) {
    // Halving n_x alone can land on the same refined step, so the reference
    // tightens the step control instead: four times smaller tolerance, or
    // twice the fixed slice count without adaptivity.
    PropagationOptions ro = options_of(c);
    Grid rg = c.grid;
    if (ro.adaptive) {
      ro.lte_tolerance /= 4.0;
    } else {
      rg.n_x *= 2;
    }
    const FieldMap ref = propagate(p, m, rg, ro);
    double num2 = 0.0, den2 = 0.0;
    for (int i = 0; i < kTransitions; ++i) {
      for (std::size_t k = 0; k < map.tau.size(); ++k) {
        num2 += std::norm(map.fields.back()[i][k] - ref.fields.back()[i][k]);
        den2 += std::norm(ref.fields.back()[i][k]);
      }
    }
    ctx.summary["grid_convergence"] = {{"applicable", true},
                                       {"reference", ro.adaptive ? "lte_tolerance / 4" : "2 n_x"},
                                       {"exit_rel_l2", num(den2 > 0.0 ? std::sqrt(num2 / den2) : 0.0)}};
  } else {
    ctx.summary["grid_convergence"] = {{"applicable", false}, {"reason", "disabled in config"}};
  }
}

// ---------------------------------------------------------------- storage

Grid storage_grid(const ScenarioConfig& c, const PulseSet& p, const MediumParams& m,
                  StorageChannel channel) {
  Grid g = c.grid;
  if (c.length_factor) {
    g.x_max = *c.length_factor * compute_x_max(p, m.q[probe_transition(channel) - 1], g, channel);
  }
  if (!(g.x_max > 0.0)) throw InvalidInput("storage needs grid.x_max > 0 or storage.length_factor");
  g.validate();
  return g;
}

CsvTable coherence_table(const StorageRecord& r) {
  CsvTable t;
  t.add("x", r.x);
  std::vector<double> a, b, cc, d;
  for (std::size_t j = 0; j < r.x.size(); ++j) {
    a.push_back(r.rho51[j].real());
    b.push_back(r.rho51[j].imag());
    cc.push_back(r.rho31[j].real());
    d.push_back(r.rho31[j].imag());
  }
  t.add("re_rho51", a);
  t.add("im_rho51", b);
  t.add("re_rho31", cc);
  t.add("im_rho31", d);
  t.add("rho_predicted", r.predicted);
  t.add("xi", r.xi);
  t.add("transmitted_fraction", r.transmitted);
  return t;
}

CsvTable retrieval_table(const RetrievalResult& r, const PulseEnvelope& stored) {
  CsvTable t;
  t.add("tau", r.map.tau);
  std::vector<double> in(r.map.tau.size());
  for (std::size_t k = 0; k < in.size(); ++k) in[k] = stored(r.map.tau[k]);
  t.add("stored_probe", in);
  for (int i = 0; i < kTransitions; ++i) {
    std::vector<double> a(r.map.tau.size());
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = std::abs(r.map.fields.back()[i][k]);
    t.add("exit_abs_omega" + std::to_string(i + 1), a);
  }
  return t;
}

double max_coherence_change(const StorageRecord& fine, const StorageRecord& coarse) {
  double d = 0.0;
  for (std::size_t j = 0; j < coarse.x.size() && 2 * j < fine.x.size(); ++j) {
    d = std::max({d, std::abs(fine.rho51[2 * j] - coarse.rho51[j]),
                  std::abs(fine.rho31[2 * j] - coarse.rho31[j])});
  }
  return d;
}

json retrieval_json(const RetrievalResult& r) {
  return {{"channel", to_string(r.channel)},
          {"correlation", num(r.fit.correlation)},
          {"delay", num(r.fit.delay)},
          {"output_energy", num(r.output_energy)},
          {"input_energy", num(r.input_energy)},
          {"crosstalk", num(r.crosstalk)}};
}

void run_store(Context& ctx) {
  const auto& c = ctx.cfg;
  const PulseSet p = c.pulse_set();
  const MediumParams m = medium_of(c);
  const auto channel = StorageChannel::five_level;
  const Grid g = storage_grid(c, p, m, channel);
  const double q = m.q[1];
  const auto rec = write_pulse(p, channel, m, g, options_of(c));
  ctx.write_csv("storage.csv", coherence_table(rec));

  PulseSet controls = p;
  if (c.read_pulses) {
    controls = ScenarioConfig::pulse_set(*c.read_pulses, c);
  } else {
    controls.envelopes[1] = PulseEnvelope::off();
  }
  const auto ret = retrieve(rec.rho51, rec.rho31, controls, channel, p.envelopes[1], m, g, options_of(c));
  ctx.write_csv("retrieval.csv", retrieval_table(ret, p.envelopes[1]));

  PulseSet doubled = p;
  doubled.envelopes[0] = p.envelopes[0].scaled(2.0);
  doubled.envelopes[3] = p.envelopes[3].scaled(2.0);
  const double xm2 = compute_x_max(doubled, q, g, channel);
  double max31 = 0.0;
  for (const auto& z : rec.rho31) max31 = std::max(max31, std::abs(z));

  ctx.summary["x_max"] = num(rec.x_max);
  ctx.summary["medium_length"] = num(g.x_max);
  ctx.summary["partial"] = rec.partial;
  ctx.summary["retrieval"] = retrieval_json(ret);
  ctx.metrics["q_x_max"] = q * rec.x_max;
  ctx.metrics["residual_fraction"] = rec.residual_fraction;
  ctx.metrics["mapping_error"] = rec.mapping_error;
  ctx.metrics["max_rho31"] = max31;
  ctx.metrics["x_max_change_doubled_controls"] = std::abs(xm2 - rec.x_max) / rec.x_max;
  ctx.metrics["retrieval_correlation"] = ret.fit.correlation;
  ctx.metrics["retrieval_energy_ratio"] = ret.input_energy > 0.0 ? ret.output_energy / ret.input_energy : 0.0;
  ctx.metrics["crosstalk"] = ret.crosstalk;
  bool monotone = true;
  for (std::size_t j = 1; j < rec.transmitted.size(); ++j) {
    if (rec.transmitted[j] > rec.transmitted[j - 1] * (1.0 + 1e-9)) monotone = false;
  }
  ctx.summary["monotone_consumption"] = monotone;

  if (c.convergence && g.n_x >= 2 && g.n_x % 2 == 0) {
    Grid coarse = g;
    coarse.n_x = g.n_x / 2;
    const auto cr = write_pulse(p, channel, m, coarse, options_of(c));
    ctx.summary["grid_convergence"] = {{"applicable", true},
                                       {"coarse_n_x", coarse.n_x},
                                       {"max_coherence_change", num(max_coherence_change(rec, cr))}};
  } else {
    ctx.summary["grid_convergence"] = {
        {"applicable", false},
        {"reason", c.convergence ? "n_x must be even for the halved-grid rerun" : "disabled in config"}};
  }
}

void run_double_store(Context& ctx) {
  const auto& c = ctx.cfg;
  if (c.scheme != SchemeKind::m_type) throw InvalidInput("double storage is defined for the M scheme only");
  const MediumParams m = medium_of(c);
  DoubleStorageSchedule s = default_double_storage_schedule();
  s.write1 = c.pulse_set();
  if (c.write2) s.write2 = ScenarioConfig::pulse_set(*c.write2, c);
  if (c.read1) s.read1 = ScenarioConfig::pulse_set(*c.read1, c);
  if (c.read2) s.read2 = ScenarioConfig::pulse_set(*c.read2, c);
  const Grid g = storage_grid(c, s.write1, m, StorageChannel::five_level);
  const auto r = double_storage_protocol(s, m, g, options_of(c));

  ctx.write_csv("write1.csv", coherence_table(r.write1));
  ctx.write_csv("write2.csv", coherence_table(r.write2));
  ctx.write_csv("order12_first.csv", retrieval_table(r.order12_first, s.write1.envelopes[1]));
  ctx.write_csv("order12_second.csv", retrieval_table(r.order12_second, s.write2.envelopes[0]));
  ctx.write_csv("order21_first.csv", retrieval_table(r.order21_first, s.write2.envelopes[0]));
  ctx.write_csv("order21_second.csv", retrieval_table(r.order21_second, s.write1.envelopes[1]));

  ctx.summary["x_max"] = num(r.write1.x_max);
  ctx.summary["medium_length"] = num(g.x_max);
  ctx.summary["order12"] = {retrieval_json(r.order12_first), retrieval_json(r.order12_second)};
  ctx.summary["order21"] = {retrieval_json(r.order21_first), retrieval_json(r.order21_second)};
  ctx.metrics["write1_max_rho31"] = r.write1_max_rho31;
  ctx.metrics["write1_min_p1"] = r.write1_min_p1;
  ctx.metrics["write1_mapping_error"] = r.write1.mapping_error;
  ctx.metrics["write1_residual_fraction"] = r.write1.residual_fraction;
  ctx.metrics["write2_mapping_error"] = r.write2.mapping_error;
  ctx.metrics["write2_residual_fraction"] = r.write2.residual_fraction;
  double max51 = 0.0, max31 = 0.0;
  for (std::size_t j = 0; j < r.write2.x.size(); ++j) {
    max51 = std::max(max51, std::abs(r.write2.rho51[j]));
    max31 = std::max(max31, std::abs(r.write2.rho31[j]));
  }
  ctx.metrics["write2_max_rho51"] = max51;
  ctx.metrics["write2_max_rho31"] = max31;
  const std::array<std::pair<const char*, const RetrievalResult*>, 4> all{{
      {"order12_first", &r.order12_first},
      {"order12_second", &r.order12_second},
      {"order21_first", &r.order21_first},
      {"order21_second", &r.order21_second},
  }};
  double min_corr = 1.0, max_xt = 0.0;
  for (const auto& [name, rr] : all) {
    ctx.metrics[std::string(name) + "_correlation"] = rr->fit.correlation;
    ctx.metrics[std::string(name) + "_crosstalk"] = rr->crosstalk;
    min_corr = std::min(min_corr, rr->fit.correlation);
    max_xt = std::max(max_xt, rr->crosstalk);
  }
  ctx.metrics["min_retrieval_correlation"] = min_corr;
  ctx.metrics["max_crosstalk"] = max_xt;

  if (c.convergence && g.n_x >= 2 && g.n_x % 2 == 0) {
    Grid coarse = g;
    coarse.n_x = g.n_x / 2;
    const auto cr = write_pulse(s.write1, StorageChannel::five_level, m, coarse, options_of(c));
    ctx.summary["grid_convergence"] = {{"applicable", true},
                                       {"stage", "write1"},
                                       {"coarse_n_x", coarse.n_x},
                                       {"max_coherence_change", num(max_coherence_change(r.write1, cr))}};
  } else {
    ctx.summary["grid_convergence"] = {
        {"applicable", false},
        {"reason", c.convergence ? "n_x must be even for the halved-grid rerun" : "disabled in config"}};
  }
}

// ---------------------------------------------------------------- check-adiabatic

void run_check(Context& ctx) {
  const auto& c = ctx.cfg;
  const PulseSet p = c.pulse_set();
  c.grid.validate();
  const double T = pulse_duration(c, p);
  const auto single = single_atom_margins(p, T, p.delta(), c.grid, c.thresholds);
  bool ok = single.verdict == Verdict::adiabatic;
  for (const auto& g : single.margins) ctx.metrics[g.name] = g.value;
  if (c.q) {
    const auto med = medium_margins((*c.q)[1], c.grid.x_max, p.delta(), T, max_omega0_sq(p, c.grid), c.thresholds);
    ok = ok && med.verdict == Verdict::adiabatic;
    for (const auto& g : med.margins) ctx.metrics[g.name] = g.value;
    ctx.metrics["x_ad"] = med.x_ad;
  }
  ctx.summary["verdict"] = ok ? "ADIABATIC" : "NOT_ADIABATIC";
  Grid coarse = c.grid;
  coarse.n_tau = (c.grid.n_tau + 1) / 2;
  if (coarse.n_tau >= 2) {
    const auto cs = single_atom_margins(p, T, p.delta(), coarse, c.thresholds);
    double change = 0.0;
    for (const auto& g : single.margins) {
      const Margin* h = cs.find(g.name);
      if (h && std::isfinite(g.value) && std::isfinite(h->value) && g.value != 0.0) {
        change = std::max(change, std::abs(h->value - g.value) / std::abs(g.value));
      }
    }
    ctx.summary["grid_convergence"] = {{"applicable", true},
                                       {"coarse_n_tau", coarse.n_tau},
                                       {"max_margin_rel_change", num(change)}};
  }
  if (!ok) {
    ctx.outcome.exit_code = exit_code::regime_refusal;
    ctx.outcome.message = "not adiabatic";
  }
}

bool command_accepts(Command cmd, ExperimentKind e) {
  switch (cmd) {
    case Command::eigen: return e == ExperimentKind::eigen;
    case Command::transfer: return e == ExperimentKind::transfer || e == ExperimentKind::btransfer;
    case Command::propagate: return e == ExperimentKind::propagate;
    case Command::store: return e == ExperimentKind::store;
    case Command::double_store: return e == ExperimentKind::double_store;
    case Command::check_adiabatic: return true;
  }
  return false;
}

void write_error(const std::filesystem::path& out, const RunOutcome& o, long index) {
  json j = {{"exit_code", o.exit_code}, {"error", o.message}};
  if (index >= 0) j["slice_index"] = index;
  try {
    write_text_file(out / "error.json", j.dump(2) + "\n");
  } catch (const std::exception&) {
  }
}

}  // namespace

std::string_view to_string(Command c) {
  for (const auto& [k, n] : kCommandNames) {
    if (k == c) return n;
  }
  return "unknown";
}

Command command_from_string(std::string_view name) {
  for (const auto& [k, n] : kCommandNames) {
    if (n == name) return k;
  }
  throw InvalidInput("unknown command '" + std::string(name) + "'");
}

RunOutcome run_scenario(const ScenarioConfig& config, Command command,
                        const std::filesystem::path& out_dir) {
  Context ctx{config, out_dir, {}, json::object(), {}};
  long index = -1;
  if (!command_accepts(command, config.experiment)) {
    ctx.outcome.exit_code = exit_code::malformed_config;
    ctx.outcome.message = "command '" + std::string(to_string(command)) +
                          "' cannot run experiment '" + std::string(to_string(config.experiment)) + "'";
    return ctx.outcome;
  }
  try {
    const PulseSet p = config.pulse_set();
    ctx.summary["command"] = std::string(to_string(command));
    ctx.summary["experiment"] = std::string(to_string(config.experiment));
    ctx.summary["scheme"] = std::string(to_string(config.scheme));
    ctx.summary["adiabaticity"] = adiabaticity_block(config, p, config.grid);
    switch (command) {
      case Command::eigen: run_eigen(ctx); break;
      case Command::transfer: run_transfer(ctx); break;
      case Command::propagate: run_propagate(ctx); break;
      case Command::store: run_store(ctx); break;
      case Command::double_store: run_double_store(ctx); break;
      case Command::check_adiabatic: run_check(ctx); break;
    }
  } catch (const ConfigError& e) {
    ctx.outcome.exit_code = exit_code::malformed_config;
    ctx.outcome.message = e.what();
  } catch (const InvalidInput& e) {
    ctx.outcome.exit_code = exit_code::malformed_config;
    ctx.outcome.message = e.what();
  } catch (const RegimeError& e) {
    ctx.outcome.exit_code = exit_code::regime_refusal;
    ctx.outcome.message = e.what();
  } catch (const NumericalError& e) {
    ctx.outcome.exit_code = exit_code::numerical_failure;
    ctx.outcome.message = e.what();
    index = e.index();
  } catch (const std::exception& e) {
    ctx.outcome.exit_code = exit_code::numerical_failure;
    ctx.outcome.message = e.what();
  }
  const bool failed = ctx.outcome.exit_code != exit_code::ok &&
                      !(command == Command::check_adiabatic && ctx.outcome.exit_code == exit_code::regime_refusal &&
                        ctx.summary.contains("verdict"));
  if (failed) {
    write_error(out_dir, ctx.outcome, index);
    return ctx.outcome;
  }

  json metrics = json::object();
  for (const auto& [k, v] : ctx.metrics) metrics[k] = num(v);
  ctx.summary["metrics"] = metrics;
  json expect = json::object();
  bool all = true;
  for (const auto& [name, b] : config.expect) {
    json e = json::object();
    if (b.min) e["min"] = *b.min;
    if (b.max) e["max"] = *b.max;
    const auto it = ctx.metrics.find(name);
    const bool pass = it != ctx.metrics.end() && b.accepts(it->second);
    e["value"] = it != ctx.metrics.end() ? num(it->second) : json(nullptr);
    e["pass"] = pass;
    all = all && pass;
    expect[name] = e;
  }
  ctx.summary["expect"] = expect;
  ctx.summary["expectations_met"] = all;
  ctx.outcome.expectations_met = all;
  ctx.outcome.summary = ctx.summary.dump(2) + "\n";
  try {
    write_text_file(out_dir / "summary.json", ctx.outcome.summary);
    ctx.outcome.files.push_back(out_dir / "summary.json");
  } catch (const std::exception& e) {
    ctx.outcome.exit_code = exit_code::numerical_failure;
    ctx.outcome.message = e.what();
    return ctx.outcome;
  }
  if (ctx.outcome.message.empty()) {
    ctx.outcome.message = all ? "ok" : "ok (embedded expectations not met)";
  }
  return ctx.outcome;
}

RunOutcome run_scenario_text(const std::string& text, Command command,
                             const std::filesystem::path& out_dir) {
  try {
    return run_scenario(parse_config(text), command, out_dir);
  } catch (const ConfigError& e) {
    RunOutcome o;
    o.exit_code = exit_code::malformed_config;
    for (const auto& p : e.problems()) o.message += p + "\n";
    return o;
  }
}

SweepSpec parse_sweep(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos || colon == 0) {
    throw ConfigError({"sweep must look like path:start:stop:count or path:v1,v2,..."});
  }
  SweepSpec s;
  s.path = spec.substr(0, colon);
  const std::string rest = spec.substr(colon + 1);
  auto to_d = [&](const std::string& t) {
    try {
      std::size_t used = 0;
      const double v = std::stod(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      throw ConfigError({"sweep value '" + t + "' is not a number"});
    }
  };
  std::vector<std::string> parts;
  {
    std::string cur;
    for (char ch : rest) {
      if (ch == ':') {
        parts.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    parts.push_back(cur);
  }
  if (parts.size() == 3) {
    const double a = to_d(parts[0]), b = to_d(parts[1]);
    const double n = to_d(parts[2]);
    if (n < 1 || n != std::floor(n)) throw ConfigError({"sweep count must be a positive integer"});
    const auto cnt = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i < cnt; ++i) {
      s.values.push_back(cnt == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(cnt - 1));
    }
  } else if (parts.size() == 1) {
    std::stringstream ss(parts[0]);
    std::string tok;
    while (std::getline(ss, tok, ',')) s.values.push_back(to_d(tok));
  } else {
    throw ConfigError({"sweep must look like path:start:stop:count or path:v1,v2,..."});
  }
  if (s.values.empty()) throw ConfigError({"sweep has no values"});
  return s;
}

RunOutcome run_sweep(const std::string& text, Command command, const std::filesystem::path& out_dir,
                     const SweepSpec& sweep) {
  const std::size_t n = sweep.values.size();
  std::vector<std::string> texts(n);
  for (std::size_t i = 0; i < n; ++i) texts[i] = override_config_value(text, sweep.path, sweep.values[i]);

  std::vector<RunOutcome> results(n);
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(n, std::thread::hardware_concurrency()));
  std::vector<std::future<void>> pool;
  std::atomic<std::size_t> next{0};
  for (std::size_t w = 0; w < workers; ++w) {
    pool.push_back(std::async(std::launch::async, [&] {
      for (std::size_t i = next++; i < n; i = next++) {
        results[i] = run_scenario_text(texts[i], command, out_dir / ("sweep_" + std::to_string(i)));
      }
    }));
  }
  for (auto& f : pool) f.get();

  RunOutcome all;
  json runs = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    runs.push_back({{"index", i},
                    {"value", num(sweep.values[i])},
                    {"directory", "sweep_" + std::to_string(i)},
                    {"exit_code", results[i].exit_code},
                    {"message", results[i].message}});
    all.exit_code = std::max(all.exit_code, results[i].exit_code);
    all.expectations_met = all.expectations_met && results[i].expectations_met;
  }
  json s = {{"parameter", sweep.path}, {"runs", runs}};
  all.summary = s.dump(2) + "\n";
  write_text_file(out_dir / "sweep.json", all.summary);
  all.files.push_back(out_dir / "sweep.json");
  all.message = "sweep of " + std::to_string(n) + " runs";
  return all;
}

}  // namespace pentapulse
