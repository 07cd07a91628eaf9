#include "pentapulse/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"
#include "pentapulse/error.hpp"

namespace pentapulse {

using json = nlohmann::json;

namespace {

constexpr std::array<std::pair<ExperimentKind, std::string_view>, 7> kExperimentNames{{
    {ExperimentKind::eigen, "eigen"},
    {ExperimentKind::transfer, "transfer"},
    {ExperimentKind::btransfer, "btransfer"},
    {ExperimentKind::propagate, "propagate"},
    {ExperimentKind::store, "store"},
    {ExperimentKind::double_store, "double-store"},
    {ExperimentKind::check_adiabatic, "check-adiabatic"},
}};

std::string path_join(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

// Collects problems while walking the document.
class Reader {
 public:
  std::vector<std::string> problems;

  void fail(const std::string& where, const std::string& what) {
    problems.push_back(where.empty() ? what : where + ": " + what);
  }

  bool object(const json& j, const std::string& where) {
    if (!j.is_object()) {
      fail(where, "must be an object");
      return false;
    }
    return true;
  }

  void allow(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
    if (!j.is_object()) return;
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : j.items()) {
      if (!ok.count(k)) fail(where, "unknown key '" + k + "'");
    }
  }

  const json* get(const json& j, const std::string& where, const char* key, bool required) {
    if (!j.is_object()) return nullptr;
    const auto it = j.find(key);
    if (it == j.end()) {
      if (required) fail(where, std::string("missing required key '") + key + "'");
      return nullptr;
    }
    return &*it;
  }

  std::optional<double> number(const json& j, const std::string& where, const char* key,
                               bool required) {
    const json* v = get(j, where, key, required);
    if (!v) return std::nullopt;
    if (!v->is_number()) {
      fail(path_join(where, key), "must be a number");
      return std::nullopt;
    }
    const double d = v->get<double>();
    if (!std::isfinite(d)) {
      fail(path_join(where, key), "must be finite");
      return std::nullopt;
    }
    return d;
  }

  std::optional<long long> integer(const json& j, const std::string& where, const char* key,
                                   bool required) {
    const json* v = get(j, where, key, required);
    if (!v) return std::nullopt;
    if (!v->is_number_integer()) {
      fail(path_join(where, key), "must be an integer");
      return std::nullopt;
    }
    return v->get<long long>();
  }

  std::optional<bool> boolean(const json& j, const std::string& where, const char* key) {
    const json* v = get(j, where, key, false);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) {
      fail(path_join(where, key), "must be true or false");
      return std::nullopt;
    }
    return v->get<bool>();
  }

  std::optional<std::string> string(const json& j, const std::string& where, const char* key,
                                    bool required) {
    const json* v = get(j, where, key, required);
    if (!v) return std::nullopt;
    if (!v->is_string()) {
      fail(path_join(where, key), "must be a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  std::optional<PulseSpec> pulse(const json& j, const std::string& where) {
    if (!object(j, where)) return std::nullopt;
    PulseSpec p;
    const auto kind = string(j, where, "kind", true);
    if (!kind) return std::nullopt;
    if (*kind == "off") {
      allow(j, where, {"kind"});
      p.kind = PulseSpec::Kind::off;
      return p;
    }
    if (*kind == "gaussian") {
      allow(j, where, {"kind", "amplitude", "width", "center"});
      p.kind = PulseSpec::Kind::gaussian;
      const auto a = number(j, where, "amplitude", true);
      const auto w = number(j, where, "width", true);
      const auto c = number(j, where, "center", false);
      if (a && *a < 0.0) fail(where, "amplitude must be ≥ 0");
      if (w && !(*w > 0.0)) fail(where, "width must be > 0");
      if (!a || !w) return std::nullopt;
      p.amplitude = *a;
      p.width = *w;
      p.center = c.value_or(0.0);
      return p;
    }
    if (*kind == "tabulated") {
      allow(j, where, {"kind", "samples"});
      p.kind = PulseSpec::Kind::tabulated;
      const json* s = get(j, where, "samples", true);
      if (!s) return std::nullopt;
      if (!s->is_array() || s->size() < 2) {
        fail(path_join(where, "samples"), "must be an array of at least two [tau, value] pairs");
        return std::nullopt;
      }
      bool ok = true;
      for (std::size_t i = 0; i < s->size(); ++i) {
        const json& e = (*s)[i];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
          fail(path_join(where, "samples[" + std::to_string(i) + "]"), "must be [tau, value]");
          ok = false;
          continue;
        }
        const double t = e[0].get<double>(), v = e[1].get<double>();
        if (v < 0.0) {
          fail(path_join(where, "samples[" + std::to_string(i) + "]"), "value must be ≥ 0");
          ok = false;
        }
        if (!p.samples.empty() && !(t > p.samples.back().first)) {
          fail(path_join(where, "samples"), "tau must be strictly increasing");
          ok = false;
        }
        p.samples.emplace_back(t, v);
      }
      if (!ok) return std::nullopt;
      return p;
    }
    fail(path_join(where, "kind"), "must be one of gaussian, tabulated, off");
    return std::nullopt;
  }

  std::optional<PulseSpecs> pulses(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != kTransitions) {
      fail(where, "must be an array of four pulse objects (Omega_1..Omega_4)");
      return std::nullopt;
    }
    PulseSpecs out;
    bool ok = true;
    for (int i = 0; i < kTransitions; ++i) {
      auto p = pulse(j[static_cast<std::size_t>(i)], where + "[" + std::to_string(i) + "]");
      if (p) {
        out[i] = *p;
      } else {
        ok = false;
      }
    }
    if (!ok) return std::nullopt;
    return out;
  }
};

json pulse_json(const PulseSpec& p) {
  json j = json::object();
  switch (p.kind) {
    case PulseSpec::Kind::off:
      j["kind"] = "off";
      break;
    case PulseSpec::Kind::gaussian:
      j["kind"] = "gaussian";
      j["amplitude"] = p.amplitude;
      j["width"] = p.width;
      j["center"] = p.center;
      break;
    case PulseSpec::Kind::tabulated: {
      j["kind"] = "tabulated";
      json s = json::array();
      for (const auto& [t, v] : p.samples) s.push_back(json::array({t, v}));
      j["samples"] = s;
      break;
    }
  }
  return j;
}

json pulses_json(const PulseSpecs& ps) {
  json a = json::array();
  for (const auto& p : ps) a.push_back(pulse_json(p));
  return a;
}

}  // namespace

std::string_view to_string(ExperimentKind k) {
  for (const auto& [kind, name] : kExperimentNames) {
    if (kind == k) return name;
  }
  return "unknown";
}

ExperimentKind experiment_from_string(std::string_view name) {
  for (const auto& [kind, n] : kExperimentNames) {
    if (n == name) return kind;
  }
  throw InvalidInput("unknown experiment '" + std::string(name) + "'");
}

PulseEnvelope PulseSpec::envelope() const {
  switch (kind) {
    case Kind::gaussian:
      return PulseEnvelope::gaussian(amplitude, width, center);
    case Kind::tabulated:
      return PulseEnvelope::tabulated(samples);
    case Kind::off:
      break;
  }
  return PulseEnvelope::off();
}

bool Bound::accepts(double v) const {
  if (std::isnan(v)) return false;
  if (min && v < *min) return false;
  if (max && v > *max) return false;
  return true;
}

PulseSet ScenarioConfig::pulse_set(const PulseSpecs& specs, const ScenarioConfig& base) {
  PulseSet p;
  p.scheme = base.scheme;
  p.detunings = base.delta ? resonant_detunings(base.scheme, *base.delta) : base.single_photon;
  for (int i = 0; i < kTransitions; ++i) p.envelopes[i] = specs[i].envelope();
  return p;
}

PulseSet ScenarioConfig::pulse_set() const { return pulse_set(pulses, *this); }

ScenarioConfig parse_config(const std::string& text) {
  json doc;
  const bool blank = std::all_of(text.begin(), text.end(),
                                 [](unsigned char c) { return std::isspace(c) != 0; });
  if (blank) {
    doc = json::object();
  } else {
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError({std::string("malformed JSON: ") + e.what()});
    }
  }
  Reader r;
  ScenarioConfig c;
  if (!r.object(doc, "document")) throw ConfigError(r.problems);
  r.allow(doc, "", {"experiment", "scheme", "pulses", "detunings", "grid", "medium", "thresholds",
                    "output", "transfer", "eigen", "propagation", "storage", "schedule",
                    "expect", "convergence"});

  if (const auto e = r.string(doc, "", "experiment", true)) {
    try {
      c.experiment = experiment_from_string(*e);
    } catch (const InvalidInput& ex) {
      r.fail("experiment", ex.what());
    }
  }
  if (const auto s = r.string(doc, "", "scheme", true)) {
    try {
      c.scheme = scheme_from_string(*s);
    } catch (const InvalidInput& ex) {
      r.fail("scheme", ex.what());
    }
  }
  if (const json* p = r.get(doc, "", "pulses", true)) {
    if (auto ps = r.pulses(*p, "pulses")) c.pulses = *ps;
  }
  if (const json* d = r.get(doc, "", "detunings", true); d && r.object(*d, "detunings")) {
    r.allow(*d, "detunings", {"delta", "single_photon"});
    const bool has_delta = d->contains("delta");
    const bool has_single = d->contains("single_photon");
    if (has_delta == has_single) {
      r.fail("detunings", "give exactly one of 'delta' or 'single_photon'");
    } else if (has_delta) {
      c.delta = r.number(*d, "detunings", "delta", true);
    } else {
      const json& s = (*d)["single_photon"];
      if (!s.is_array() || s.size() != kTransitions ||
          !std::all_of(s.begin(), s.end(), [](const json& v) { return v.is_number(); })) {
        r.fail("detunings.single_photon", "must be an array of four numbers");
      } else {
        for (int i = 0; i < kTransitions; ++i) c.single_photon[i] = s[static_cast<std::size_t>(i)].get<double>();
      }
    }
  }
  if (const json* g = r.get(doc, "", "grid", true); g && r.object(*g, "grid")) {
    r.allow(*g, "grid", {"tau_min", "tau_max", "n_tau", "x_max", "n_x"});
    const auto a = r.number(*g, "grid", "tau_min", true);
    const auto b = r.number(*g, "grid", "tau_max", true);
    const auto n = r.integer(*g, "grid", "n_tau", true);
    const auto xm = r.number(*g, "grid", "x_max", false);
    const auto nx = r.integer(*g, "grid", "n_x", false);
    if (a) c.grid.tau_min = *a;
    if (b) c.grid.tau_max = *b;
    if (n) {
      if (*n < 2) r.fail("grid.n_tau", "must be ≥ 2");
      else c.grid.n_tau = static_cast<std::size_t>(*n);
    }
    if (xm) {
      if (*xm < 0.0) r.fail("grid.x_max", "must be ≥ 0");
      else c.grid.x_max = *xm;
    }
    if (nx) {
      if (*nx < 1) r.fail("grid.n_x", "must be ≥ 1");
      else c.grid.n_x = static_cast<std::size_t>(*nx);
    }
    if (a && b && !(*a < *b)) r.fail("grid", "tau_min must be < tau_max");
  }
  if (const json* m = r.get(doc, "", "medium", false); m && r.object(*m, "medium")) {
    r.allow(*m, "medium", {"q"});
    if (const json* q = r.get(*m, "medium", "q", true)) {
      std::array<double, kTransitions> v{};
      bool ok = true;
      if (q->is_number()) {
        v.fill(q->get<double>());
      } else if (q->is_array() && q->size() == kTransitions &&
                 std::all_of(q->begin(), q->end(), [](const json& e) { return e.is_number(); })) {
        c.q_uniform = false;
        for (int i = 0; i < kTransitions; ++i) v[i] = (*q)[static_cast<std::size_t>(i)].get<double>();
      } else {
        r.fail("medium.q", "must be a number or an array of four numbers");
        ok = false;
      }
      if (ok && std::any_of(v.begin(), v.end(), [](double x) { return !(x >= 0.0); })) {
        r.fail("medium.q", "propagation constants must be ≥ 0");
        ok = false;
      }
      if (ok) c.q = v;
    }
  }
  if (const json* t = r.get(doc, "", "thresholds", false); t && r.object(*t, "thresholds")) {
    r.allow(*t, "thresholds", {"much_greater", "much_less", "T"});
    if (const auto v = r.number(*t, "thresholds", "much_greater", false)) {
      if (!(*v > 0.0)) r.fail("thresholds.much_greater", "must be > 0");
      c.thresholds.much_greater = *v;
    }
    if (const auto v = r.number(*t, "thresholds", "much_less", false)) {
      if (!(*v > 0.0)) r.fail("thresholds.much_less", "must be > 0");
      c.thresholds.much_less = *v;
    }
    if (const auto v = r.number(*t, "thresholds", "T", false)) {
      if (!(*v >= 0.0)) r.fail("thresholds.T", "must be ≥ 0");
      c.T = *v;
    }
  }
  if (const auto o = r.string(doc, "", "output", false)) c.output = *o;
  if (const json* t = r.get(doc, "", "transfer", false); t && r.object(*t, "transfer")) {
    r.allow(*t, "transfer", {"initial_level", "target_level"});
    const auto i = r.integer(*t, "transfer", "initial_level", false);
    const auto f = r.integer(*t, "transfer", "target_level", false);
    if (i) {
      if (*i < 1 || *i > kLevels) r.fail("transfer.initial_level", "must be in 1..5");
      c.initial_level = static_cast<int>(*i);
    }
    if (f) {
      if (*f < 1 || *f > kLevels) r.fail("transfer.target_level", "must be in 1..5");
      c.target_level = static_cast<int>(*f);
    }
  } else if (c.experiment == ExperimentKind::btransfer) {
    c.initial_level = 5;
    c.target_level = 1;
  }
  if (const json* e = r.get(doc, "", "eigen", false); e && r.object(*e, "eigen")) {
    r.allow(*e, "eigen", {"oracle_samples", "seed", "stride"});
    if (const auto v = r.integer(*e, "eigen", "oracle_samples", false)) {
      if (*v < 0) r.fail("eigen.oracle_samples", "must be ≥ 0");
      else c.oracle_samples = static_cast<std::size_t>(*v);
    }
    if (const auto v = r.integer(*e, "eigen", "seed", false)) {
      if (*v < 0) r.fail("eigen.seed", "must be ≥ 0");
      else c.seed = static_cast<std::uint64_t>(*v);
    }
    if (const auto v = r.integer(*e, "eigen", "stride", false)) {
      if (*v < 1) r.fail("eigen.stride", "must be ≥ 1");
      else c.stride = static_cast<std::size_t>(*v);
    }
  }
  if (const json* p = r.get(doc, "", "propagation", false); p && r.object(*p, "propagation")) {
    r.allow(*p, "propagation", {"adaptive", "tau_substeps", "lte_tolerance", "max_refinement", "depths"});
    if (const auto v = r.boolean(*p, "propagation", "adaptive")) c.adaptive = *v;
    if (const auto v = r.integer(*p, "propagation", "tau_substeps", false)) {
      if (*v < 0) r.fail("propagation.tau_substeps", "must be ≥ 0");
      c.tau_substeps = static_cast<int>(*v);
    }
    if (const auto v = r.number(*p, "propagation", "lte_tolerance", false)) {
      if (!(*v > 0.0)) r.fail("propagation.lte_tolerance", "must be > 0");
      c.lte_tolerance = *v;
    }
    if (const auto v = r.integer(*p, "propagation", "max_refinement", false)) {
      if (*v < 0 || *v > 16) r.fail("propagation.max_refinement", "must be in 0..16");
      c.max_refinement = static_cast<int>(*v);
    }
    if (const json* d = r.get(*p, "propagation", "depths", false)) {
      if (!d->is_array() || !std::all_of(d->begin(), d->end(), [](const json& e) { return e.is_number(); })) {
        r.fail("propagation.depths", "must be an array of numbers");
      } else {
        for (const auto& e : *d) {
          if (e.get<double>() < 0.0) r.fail("propagation.depths", "depths must be ≥ 0");
          c.depths.push_back(e.get<double>());
        }
      }
    }
  }
  if (const json* s = r.get(doc, "", "storage", false); s && r.object(*s, "storage")) {
    r.allow(*s, "storage", {"length_factor", "read_pulses"});
    if (const auto v = r.number(*s, "storage", "length_factor", false)) {
      if (!(*v > 0.0)) r.fail("storage.length_factor", "must be > 0");
      c.length_factor = *v;
    }
    if (const json* p = r.get(*s, "storage", "read_pulses", false)) {
      c.read_pulses = r.pulses(*p, "storage.read_pulses");
    }
  }
  if (const json* s = r.get(doc, "", "schedule", false); s && r.object(*s, "schedule")) {
    r.allow(*s, "schedule", {"write2", "read1", "read2"});
    if (const json* p = r.get(*s, "schedule", "write2", true)) c.write2 = r.pulses(*p, "schedule.write2");
    if (const json* p = r.get(*s, "schedule", "read1", true)) c.read1 = r.pulses(*p, "schedule.read1");
    if (const json* p = r.get(*s, "schedule", "read2", true)) c.read2 = r.pulses(*p, "schedule.read2");
  }
  if (const auto v = r.boolean(doc, "", "convergence")) c.convergence = *v;
  if (const json* e = r.get(doc, "", "expect", false); e && r.object(*e, "expect")) {
    for (const auto& [name, b] : e->items()) {
      const std::string where = "expect." + name;
      if (!r.object(b, where)) continue;
      r.allow(b, where, {"min", "max"});
      Bound bound;
      bound.min = r.number(b, where, "min", false);
      bound.max = r.number(b, where, "max", false);
      if (!bound.min && !bound.max) r.fail(where, "needs 'min' or 'max'");
      c.expect[name] = bound;
    }
  }

  const bool needs_medium = c.experiment == ExperimentKind::propagate ||
                            c.experiment == ExperimentKind::store ||
                            c.experiment == ExperimentKind::double_store;
  if (needs_medium && !c.q && doc.contains("experiment")) {
    r.fail("medium", "required for experiment '" + std::string(to_string(c.experiment)) + "'");
  }
  if (c.experiment == ExperimentKind::propagate && doc.contains("grid") && !(c.grid.x_max > 0.0)) {
    r.fail("grid.x_max", "must be > 0 for propagate");
  }
  if (c.experiment == ExperimentKind::double_store && c.scheme != SchemeKind::m_type &&
      doc.contains("scheme")) {
    r.fail("scheme", "double storage is defined for the M scheme only");
  }
  if (!r.problems.empty()) throw ConfigError(r.problems);
  return c;
}

std::string serialize_config(const ScenarioConfig& c) {
  json j = json::object();
  j["experiment"] = std::string(to_string(c.experiment));
  j["scheme"] = std::string(to_string(c.scheme));
  j["pulses"] = pulses_json(c.pulses);
  if (c.delta) {
    j["detunings"] = {{"delta", *c.delta}};
  } else {
    j["detunings"] = {{"single_photon", c.single_photon}};
  }
  j["grid"] = {{"tau_min", c.grid.tau_min}, {"tau_max", c.grid.tau_max}, {"n_tau", c.grid.n_tau},
               {"x_max", c.grid.x_max}, {"n_x", c.grid.n_x}};
  if (c.q) {
    if (c.q_uniform) j["medium"] = {{"q", (*c.q)[0]}};
    else j["medium"] = {{"q", *c.q}};
  }
  j["thresholds"] = {{"much_greater", c.thresholds.much_greater},
                     {"much_less", c.thresholds.much_less},
                     {"T", c.T}};
  if (!c.output.empty()) j["output"] = c.output;
  j["transfer"] = {{"initial_level", c.initial_level}, {"target_level", c.target_level}};
  j["eigen"] = {{"oracle_samples", c.oracle_samples}, {"seed", c.seed}, {"stride", c.stride}};
  j["propagation"] = {{"adaptive", c.adaptive},
                      {"tau_substeps", c.tau_substeps},
                      {"lte_tolerance", c.lte_tolerance},
                      {"max_refinement", c.max_refinement},
                      {"depths", c.depths}};
  if (c.length_factor || c.read_pulses) {
    json s = json::object();
    if (c.length_factor) s["length_factor"] = *c.length_factor;
    if (c.read_pulses) s["read_pulses"] = pulses_json(*c.read_pulses);
    j["storage"] = s;
  }
  if (c.write2 && c.read1 && c.read2) {
    j["schedule"] = {{"write2", pulses_json(*c.write2)},
                     {"read1", pulses_json(*c.read1)},
                     {"read2", pulses_json(*c.read2)}};
  }
  j["convergence"] = c.convergence;
  json e = json::object();
  for (const auto& [name, b] : c.expect) {
    json bj = json::object();
    if (b.min) bj["min"] = *b.min;
    if (b.max) bj["max"] = *b.max;
    e[name] = bj;
  }
  if (!e.empty()) j["expect"] = e;
  return j.dump(2) + "\n";
}

std::string override_config_value(const std::string& text, const std::string& path, double value) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("malformed JSON: ") + e.what()});
  }
  json* node = &doc;
  std::size_t start = 0;
  std::string leaf;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (node->is_object() && node->contains(key)) {
      node = &(*node)[key];
    } else if (node->is_array() && !key.empty() &&
               std::all_of(key.begin(), key.end(), [](unsigned char ch) { return std::isdigit(ch) != 0; }) &&
               std::stoul(key) < node->size()) {
      node = &(*node)[std::stoul(key)];
    } else {
      throw ConfigError({"sweep parameter '" + path + "' does not exist in the config"});
    }
    leaf = key;
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  static const std::set<std::string> integer_keys{"n_tau",  "n_x",          "seed",          "oracle_samples",
                                                  "stride", "tau_substeps", "max_refinement", "initial_level",
                                                  "target_level"};
  if (!node->is_number()) throw ConfigError({"sweep parameter '" + path + "' is not a number"});
  if (integer_keys.count(leaf) != 0) {
    if (value != std::floor(value)) {
      throw ConfigError({"sweep parameter '" + path + "' needs integer values"});
    }
    *node = static_cast<long long>(value);
  } else {
    *node = value;
  }
  return doc.dump(2) + "\n";
}

}  // namespace pentapulse
