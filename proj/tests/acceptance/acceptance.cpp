// One PASS/FAIL line per acceptance criterion; exits non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pentapulse/atom_dynamics.hpp"
#include "pentapulse/eigenstructure.hpp"
#include "pentapulse/light_storage.hpp"
#include "pentapulse/medium_propagation.hpp"
#include "pentapulse/scenario.hpp"

using namespace pentapulse;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 20240601;

// Tolerances and budgets.
constexpr double kEigenRelTol = 1e-9;
constexpr double kSumRuleTol = 1e-10;
constexpr double kResidualTol = 1e-9;
constexpr double kStirapFidelity = 0.99;
constexpr double kStirapMaxP3 = 0.01;
constexpr double kNormDrift = 1e-8;
constexpr double kBstirapFidelity = 0.98;
constexpr double kRoundTrip = 0.97;
constexpr double kDelayBand = 0.05;
constexpr double kAdiabatonCorrelation = 0.99;
constexpr double kConservation = 0.02;
constexpr double kSplitL2 = 0.02;
constexpr double kLeak = 0.01;
constexpr double kMappingLinf = 0.02;
constexpr double kXmaxRel = 0.01;
constexpr double kXmaxInvariance = 0.005;
constexpr double kRho31Max = 1e-3;
constexpr double kMinP1 = 0.99;
constexpr double kRetrievalCorrelation = 0.95;
constexpr double kCrosstalk = 0.05;
constexpr double kOrderLo = 1.7, kOrderHi = 2.3;
constexpr double kReversal = 1e-6;

struct Check {
  bool ok = true;
  std::string detail;
  void require(bool cond, const std::string& what) {
    ok = ok && cond;
    if (!detail.empty()) detail += "; ";
    detail += what + (cond ? "" : " [x]");
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int failures = 0;

void report(int id, const char* name, const std::function<Check()>& body, double budget_s) {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  try {
    c = body();
  } catch (const std::exception& e) {
    c.ok = false;
    c.detail = std::string("threw: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0.0) c.require(secs < budget_s, "runtime " + fmt("%.1f", secs) + " s < " + fmt("%.0f", budget_s) + " s");
  if (!c.ok) ++failures;
  std::printf("Criterion %d %s: %s (%s)\n", id, c.ok ? "PASS" : "FAIL", name, c.detail.c_str());
  std::fflush(stdout);
}

double scale_of(const std::array<double, 5>& v) {
  double s = 1.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

double inf_norm(const Mat5& h) {
  double n = 0.0;
  for (int i = 0; i < 5; ++i) n = std::max(n, h.row(i).cwiseAbs().sum());
  return n;
}

Check eigen_oracle() {
  auto g = oracle::rng(kSeed);
  std::uniform_real_distribution<double> om(0.0, 50.0), de(-100.0, 100.0);
  double worst = 0.0, worst_ext = 0.0;
  for (int n = 0; n < 10000; ++n) {
    const Rabi4 r{om(g), om(g), om(g), om(g)};
    const double d = de(g);
    auto a = eigenvalues_general(r, d);
    std::sort(a.begin(), a.end());
    const Mat5 h = build_hamiltonian(Detuning4{d, 0.0, d, 0.0}, r);
    const auto num = numeric_eigensolve(h);
    std::array<double, 5> nv{};
    for (int i = 0; i < 5; ++i) nv[i] = num.values(i);
    const auto ext = oracle::eigenvalues(oracle::hamiltonian({d, 0.0, d, 0.0}, {r[0], r[1], r[2], r[3]}));
    for (int i = 0; i < 5; ++i) {
      worst = std::max(worst, std::abs(a[i] - nv[i]) / scale_of(nv));
      worst_ext = std::max(worst_ext, std::abs(a[i] - ext[i]) / scale_of(ext));
    }
  }
  Check c;
  c.require(worst < kEigenRelTol, "max rel error vs in-repo solver " + fmt("%.2e", worst));
  c.require(worst_ext < kEigenRelTol, "vs independent solver " + fmt("%.2e", worst_ext));
  return c;
}

Check identities() {
  auto g = oracle::rng(kSeed + 1);
  std::uniform_real_distribution<double> om(0.0, 50.0), de(-100.0, 100.0);
  double min_disc = INFINITY, sum_err = 0.0, l0 = 0.0;
  for (int n = 0; n < 100000; ++n) {
    const Rabi4 r{om(g), om(g), om(g), om(g)};
    const double d = de(g);
    const auto p = char_poly_params(r);
    min_disc = std::min(min_disc, p.omega_s2 * p.omega_s2 - 4.0 * p.v4);
    const auto a = eigenvalues_general(r, d);
    sum_err = std::max({sum_err, std::abs(a[1] + a[3] - d), std::abs(a[2] + a[4] - d)});
    l0 = std::max(l0, std::abs(a[0]));
  }
  Check c;
  c.require(min_disc >= 0.0, "min(Omega_s^4 - 4V^4) " + fmt("%.3g", min_disc));
  c.require(sum_err <= kSumRuleTol, "sum rule error " + fmt("%.2e", sum_err));
  c.require(l0 == 0.0, "max |lambda_0| " + fmt("%.1g", l0));
  return c;
}

Check dressed_residuals() {
  auto g = oracle::rng(kSeed + 2);
  std::uniform_real_distribution<double> om(0.0, 50.0), de(-100.0, 100.0);
  double worst = 0.0, comp3 = 0.0;
  for (int n = 0; n < 10000; ++n) {
    const double o1 = om(g), o2 = om(g), o3 = om(g), d = de(g);
    const Mat5 h = build_hamiltonian(Detuning4{d, 0.0, d, 0.0}, Rabi4{o1, o2, o3, o1});
    const auto lam = eigenvalues_special(o1, o2, o3, d);
    const auto ang = mixing_angles(o1, o2, o3, d);
    const Vec5 v1 = dressed_state_lambda1(ang), v2 = dressed_state_lambda2(ang);
    const double hn = inf_norm(h);
    worst = std::max(worst, (h * v1 - lam[1] * v1).cwiseAbs().maxCoeff() / hn);
    worst = std::max(worst, (h * v2 - lam[2] * v2).cwiseAbs().maxCoeff() / hn);
    comp3 = std::max(comp3, std::abs(v1(2)));
  }
  Check c;
  c.require(worst < kResidualTol, "max residual / |H| " + fmt("%.2e", worst));
  c.require(comp3 == 0.0, "max |<3|lambda_1>| " + fmt("%.1g", comp3));
  return c;
}

Check stirap() {
  const PulseSet p = default_transfer_pulses(20.0);
  const auto r = stirap_experiment(p, transfer_grid(p, -10.0, 10.0));
  Check c;
  c.require(r.fidelity >= kStirapFidelity, "P5 " + fmt("%.4f", r.fidelity));
  c.require(r.max_p3 <= kStirapMaxP3, "max P3 " + fmt("%.4f", r.max_p3));
  c.require(r.norm_drift <= kNormDrift, "norm drift " + fmt("%.1e", r.norm_drift));
  return c;
}

Check bstirap() {
  const PulseSet p = default_transfer_pulses(20.0);
  const Grid g = transfer_grid(p, -10.0, 10.0);
  const auto b = bstirap_experiment(p, g);
  const auto fwd = stirap_experiment(p, g);
  AtomState mid;
  mid.b = fwd.trajectory.states.back();
  const auto back = transfer_experiment(p, g, mid, 1);
  Check c;
  c.require(b.fidelity >= kBstirapFidelity, "P1 " + fmt("%.4f", b.fidelity));
  c.require(back.fidelity >= kRoundTrip, "round trip P1 " + fmt("%.4f", back.fidelity));
  return c;
}

const Grid kAdiabatonGrid{-10.0, 10.0, 2001, 2.0, 200};

AdiabatonResult& adiabaton() {
  static AdiabatonResult r = [] {
    const PulseSet p = adiabaton_pulses();
    const auto m = MediumParams::uniform(900.0, SchemeKind::extended_lambda);
    const double L = (std::pow(p.envelopes[1](0.0), 2) + std::pow(p.envelopes[2](0.0), 2)) / 900.0;
    return adiabaton_experiment(p, m, kAdiabatonGrid, {L, 2.0 * L});
  }();
  return r;
}

Check adiabaton_check() {
  const auto& r = adiabaton();
  Check c;
  const double d1 = r.fits[0].delay, d2 = r.fits[1].delay;
  c.require(std::abs(d1 - 1.0) <= kDelayBand, "delay at L " + fmt("%.3f", d1));
  c.require(r.fits[0].correlation >= kAdiabatonCorrelation, "correlation at L " + fmt("%.3f", r.fits[0].correlation));
  c.require(std::abs(d2 - 2.0) <= 2.0 * kDelayBand, "delay at 2L " + fmt("%.3f", d2));
  c.require(r.conservation_residual <= kConservation, "conservation " + fmt("%.2e", r.conservation_residual));
  return c;
}

Check split_check() {
  const auto& r = adiabaton();
  const PulseSet p = adiabaton_pulses();
  const double dx = kAdiabatonGrid.dx();
  const auto j_max = static_cast<std::size_t>(std::floor(100.0 / 900.0 / dx + 1e-9));
  Grid g = kAdiabatonGrid;
  g.n_x = j_max;
  g.x_max = dx * static_cast<double>(j_max);
  SplitOptions o;
  o.enforce_medium_margin = false;
  const auto an = analytic_split_solution(p, 900.0, g, o);
  Check c;
  c.detail = "numeric run shared with criterion 6";
  for (int i = 1; i <= kTransitions; ++i) {
    const double l2 = relative_l2(r.map, an, i, j_max);
    c.require(l2 < kSplitL2, "L2 field " + std::to_string(i) + " " + fmt("%.2e", l2));
  }
  return c;
}

Check storage_check() {
  const PulseSet p = storage_pulses();
  const auto m = MediumParams::uniform(900.0, SchemeKind::extended_lambda);
  Grid g{-6.0, 6.0, 1201, 0.0, 800};
  const double xm = compute_x_max(p, 900.0, g);
  g.x_max = 1.02 * xm;
  PropagationOptions o;
  o.adaptive = false;
  const auto r = write_pulse(p, StorageChannel::five_level, m, g, o);
  auto f = [&](double t) { return std::pow(p.envelopes[1](t), 2) + std::pow(p.envelopes[2](t), 2); };
  const double quad = oracle::simpson(f, -6.0, 6.0, 24000);
  PulseSet doubled = p;
  doubled.envelopes[0] = p.envelopes[0].scaled(2.0);
  doubled.envelopes[3] = p.envelopes[3].scaled(2.0);
  const double change = std::abs(compute_x_max(doubled, 900.0, g) - xm) / xm;
  Check c;
  c.require(r.residual_fraction < kLeak, "leak beyond x_max " + fmt("%.4f", r.residual_fraction));
  c.require(r.mapping_error < kMappingLinf, "mapping Linf " + fmt("%.4f", r.mapping_error));
  c.require(std::abs(900.0 * xm - quad) / quad < kXmaxRel,
            "q x_max " + fmt("%.3f", 900.0 * xm) + " vs quadrature " + fmt("%.3f", quad));
  c.require(change < kXmaxInvariance, "x_max change under doubled Omega_1,4 " + fmt("%.1e", change));
  return c;
}

Check double_storage_check() {
  const auto s = default_double_storage_schedule();
  const auto m = MediumParams::uniform(900.0, SchemeKind::m_type);
  Grid g{-6.0, 6.0, 1201, 0.0, 800};
  g.x_max = 1.02 * compute_x_max(s.write1, 900.0, g);
  PropagationOptions o;
  o.adaptive = false;
  const auto r = double_storage_protocol(s, m, g, o);
  Check c;
  c.require(r.write1_max_rho31 < kRho31Max, "write 1 max|rho31| " + fmt("%.2e", r.write1_max_rho31));
  c.require(r.write1_min_p1 >= kMinP1, "write 1 min P1 " + fmt("%.4f", r.write1_min_p1));
  const std::array<std::pair<const char*, const RetrievalResult*>, 4> all{{
      {"(1,2) first", &r.order12_first},
      {"(1,2) second", &r.order12_second},
      {"(2,1) first", &r.order21_first},
      {"(2,1) second", &r.order21_second},
  }};
  for (const auto& [name, rr] : all) {
    c.require(rr->fit.correlation >= kRetrievalCorrelation,
              std::string(name) + " correlation " + fmt("%.3f", rr->fit.correlation));
    c.require(rr->crosstalk < kCrosstalk, std::string(name) + " cross-talk " + fmt("%.3f", rr->crosstalk));
  }
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Every file under a and b, compared byte for byte.
bool same_tree(const fs::path& a, const fs::path& b, std::string& why) {
  std::vector<fs::path> fa, fb;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (e.is_regular_file()) fa.push_back(fs::relative(e.path(), a));
  }
  for (const auto& e : fs::recursive_directory_iterator(b)) {
    if (e.is_regular_file()) fb.push_back(fs::relative(e.path(), b));
  }
  std::sort(fa.begin(), fa.end());
  std::sort(fb.begin(), fb.end());
  if (fa != fb || fa.empty()) {
    why = "file lists differ";
    return false;
  }
  for (const auto& f : fa) {
    if (slurp(a / f) != slurp(b / f)) {
      why = f.string() + " differs";
      return false;
    }
  }
  return true;
}

Check hygiene() {
  Check c;
  {
    const PulseSet p = adiabaton_pulses();
    const auto m = MediumParams::uniform(900.0, SchemeKind::extended_lambda);
    PropagationOptions o;
    o.adaptive = false;
    std::vector<SliceFields> exit;
    for (std::size_t n : {100u, 200u, 400u}) exit.push_back(propagate(p, m, Grid{-10.0, 10.0, 2001, 0.25, n}, o).fields.back());
    double e1 = 0.0, e2 = 0.0;
    for (int i = 0; i < kTransitions; ++i) {
      for (std::size_t k = 0; k < exit[0][i].size(); ++k) {
        e1 += std::norm(exit[0][i][k] - exit[1][i][k]);
        e2 += std::norm(exit[1][i][k] - exit[2][i][k]);
      }
    }
    const double order = 0.5 * std::log2(e1 / e2);
    c.require(order >= kOrderLo && order <= kOrderHi, "x order " + fmt("%.3f", order));
  }
  {
    const PulseSet p = default_transfer_pulses(20.0);
    AtomState s0;
    s0.b << Complex(0.5, 0.2), 0.3, Complex(0.0, -0.4), 0.1, Complex(0.6, 0.1);
    s0.b.normalize();
    const std::size_t steps = transfer_grid(p, -10.0, 10.0).n_tau - 1;
    const auto fwd = evolve(p, s0, -10.0, 10.0, steps);
    const auto back = evolve(p, fwd, 10.0, -10.0, steps);
    const double err = (back.b - s0.b).norm();
    c.require(err < kReversal, "TDSE reversal " + fmt("%.1e", err));
  }
  {
    const fs::path root = fs::temp_directory_path() / "pentapulse_acceptance_determinism";
    fs::remove_all(root);
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(PENTAPULSE_SCENARIO_DIR)) {
      if (e.path().extension() == ".json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    int identical = 0;
    for (const auto& f : files) {
      const std::string text = slurp(f);
      const auto cfg = parse_config(text);
      Command cmd = Command::eigen;
      switch (cfg.experiment) {
        case ExperimentKind::eigen: cmd = Command::eigen; break;
        case ExperimentKind::transfer:
        case ExperimentKind::btransfer: cmd = Command::transfer; break;
        case ExperimentKind::propagate: cmd = Command::propagate; break;
        case ExperimentKind::store: cmd = Command::store; break;
        case ExperimentKind::double_store: cmd = Command::double_store; break;
        case ExperimentKind::check_adiabatic: cmd = Command::check_adiabatic; break;
      }
      const auto stem = f.stem().string();
      const auto a = run_scenario_text(text, cmd, root / stem / "run1");
      const auto b = run_scenario_text(text, cmd, root / stem / "run2");
      std::string why;
      const bool same = a.exit_code == b.exit_code && same_tree(root / stem / "run1", root / stem / "run2", why);
      if (same) ++identical;
      else c.require(false, stem + " not deterministic: " + why);
    }
    c.require(identical == static_cast<int>(files.size()),
              std::to_string(identical) + "/" + std::to_string(files.size()) + " scenarios byte-identical");
  }
  return c;
}

}  // namespace

int main() {
  report(1, "eigenvalue oracle equivalence", eigen_oracle, 10.0);
  report(2, "algebraic identities", identities, 5.0);
  report(3, "dressed-state residuals", dressed_residuals, 10.0);
  report(4, "STIRAP transfer", stirap, 5.0);
  report(5, "b-STIRAP transfer and round trip", bstirap, 10.0);
  report(6, "adiabaton delay and conservation", adiabaton_check, 120.0);
  report(7, "analytic vs numeric propagation", split_check, 120.0);
  report(8, "storage", storage_check, 180.0);
  report(9, "double storage", double_storage_check, 300.0);
  report(10, "numerics hygiene", hygiene, 0.0);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
