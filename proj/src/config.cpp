#include "rydthz/config.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

namespace rydthz {

namespace {

using nlohmann::json;
using constants::kTwoPi;

constexpr const char* kFieldKeys[kNumLevels] = {"a1", "a2", "a3",
                                                "t", "a4", "s"};

// Tracks consumed keys of one object so that leftovers can be reported with
// their full path.
class Section {
 public:
  Section(const json& node, std::string path)
      : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) {
      throw ConfigError(path_ + ": expected an object");
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  double number(const char* key, double fallback) {
    const json* v = child(key);
    if (v == nullptr) return fallback;
    if (!v->is_number()) throw ConfigError(join(key) + ": expected a number");
    return v->get<double>();
  }

  std::int64_t integer(const char* key, std::int64_t fallback) {
    const json* v = child(key);
    if (v == nullptr) return fallback;
    if (!v->is_number_integer()) {
      throw ConfigError(join(key) + ": expected an integer");
    }
    return v->get<std::int64_t>();
  }

  bool boolean(const char* key, bool fallback) {
    const json* v = child(key);
    if (v == nullptr) return fallback;
    if (!v->is_boolean()) throw ConfigError(join(key) + ": expected a bool");
    return v->get<bool>();
  }

  std::string text(const char* key, const std::string& fallback) {
    const json* v = child(key);
    if (v == nullptr) return fallback;
    if (!v->is_string()) throw ConfigError(join(key) + ": expected a string");
    return v->get<std::string>();
  }

  std::string join(const char* key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& item : node_.items()) {
      if (seen_.find(item.key()) == seen_.end()) {
        throw ConfigError(path_ + "." + item.key() + ": unknown key");
      }
    }
  }

  const std::string& path() const { return path_; }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void require_positive(double v, const std::string& path) {
  if (!(v > 0.0)) throw ConfigError(path + ": must be > 0");
}

void require_nonnegative(double v, const std::string& path) {
  if (v < 0.0) throw ConfigError(path + ": must be >= 0");
}

void parse_scheme(const json& node, const std::string& path,
                  SchemeConfig& out) {
  Section s(node, path);
  if (const json* f = s.child("frequencies_hz")) {
    Section fs(*f, s.join("frequencies_hz"));
    out.nu_a1_hz = fs.number("a1", out.nu_a1_hz);
    out.nu_a2_hz = fs.number("a2", out.nu_a2_hz);
    out.nu_a3_hz = fs.number("a3", out.nu_a3_hz);
    out.nu_t_hz = fs.number("t", out.nu_t_hz);
    out.nu_a4_hz = fs.number("a4", out.nu_a4_hz);
    fs.finish();
    require_positive(out.nu_a1_hz, fs.join("a1"));
    require_positive(out.nu_a2_hz, fs.join("a2"));
    require_positive(out.nu_a3_hz, fs.join("a3"));
    require_positive(out.nu_t_hz, fs.join("t"));
    require_positive(out.nu_a4_hz, fs.join("a4"));
  }
  if (const json* d = s.child("dipoles_cm")) {
    Section ds(*d, s.join("dipoles_cm"));
    for (int i = 0; i < kNumLevels; ++i) {
      out.dipoles_cm[i] = ds.number(kFieldKeys[i], out.dipoles_cm[i]);
      require_positive(out.dipoles_cm[i], ds.join(kFieldKeys[i]));
    }
    ds.finish();
  }
  if (const json* d = s.child("decay_over_2pi_hz")) {
    if (!d->is_array()) {
      throw ConfigError(s.join("decay_over_2pi_hz") + ": expected an array");
    }
    out.decays.clear();
    int index = 0;
    for (const auto& entry : *d) {
      const std::string epath =
          s.join("decay_over_2pi_hz") + "[" + std::to_string(index++) + "]";
      Section es(entry, epath);
      SchemeConfig::Decay decay;
      decay.from = static_cast<int>(es.integer("from", -1));
      decay.to = static_cast<int>(es.integer("to", -1));
      decay.rate_over_2pi_hz = es.number("rate", 0.0);
      es.finish();
      if (decay.from < 0 || decay.from >= kNumLevels || decay.to < 0 ||
          decay.to >= kNumLevels || decay.from == decay.to) {
        throw ConfigError(epath + ": invalid level indices");
      }
      require_nonnegative(decay.rate_over_2pi_hz, epath + ".rate");
      out.decays.push_back(decay);
    }
  }
  out.rydberg_dephasing_over_2pi_hz =
      s.number("rydberg_dephasing_over_2pi_hz",
               out.rydberg_dephasing_over_2pi_hz);
  require_nonnegative(out.rydberg_dephasing_over_2pi_hz,
                      s.join("rydberg_dephasing_over_2pi_hz"));
  if (const json* d = s.child("dephasing_over_2pi_hz")) {
    if (!d->is_array()) {
      throw ConfigError(s.join("dephasing_over_2pi_hz") +
                        ": expected an array");
    }
    out.extra_dephasing.clear();
    int index = 0;
    for (const auto& entry : *d) {
      const std::string epath = s.join("dephasing_over_2pi_hz") + "[" +
                                std::to_string(index++) + "]";
      Section es(entry, epath);
      SchemeConfig::Dephasing item;
      item.i = static_cast<int>(es.integer("i", -1));
      item.j = static_cast<int>(es.integer("j", -1));
      item.rate_over_2pi_hz = es.number("rate", 0.0);
      es.finish();
      if (item.i < 0 || item.i >= kNumLevels || item.j < 0 ||
          item.j >= kNumLevels || item.i == item.j) {
        throw ConfigError(epath + ": invalid level indices");
      }
      require_nonnegative(item.rate_over_2pi_hz, epath + ".rate");
      out.extra_dephasing.push_back(item);
    }
  }
  s.finish();
}

void parse_vapor(const json& node, const std::string& path, VaporSpec& out) {
  Section s(node, path);
  out.temperature = s.number("temperature_k", out.temperature);
  out.mass = s.number("mass_kg", out.mass);
  out.density = s.number("density_m3", out.density);
  s.finish();
  require_positive(out.temperature, s.join("temperature_k"));
  require_positive(out.mass, s.join("mass_kg"));
  require_positive(out.density, s.join("density_m3"));
}

void parse_fields(const json& node, const std::string& path,
                  std::array<FieldConfig, kNumLevels>& out) {
  Section s(node, path);
  for (int i = 0; i < kNumLevels; ++i) {
    if (const json* f = s.child(kFieldKeys[i])) {
      Section fs(*f, s.join(kFieldKeys[i]));
      out[i].rabi_over_2pi_hz =
          fs.number("rabi_over_2pi_hz", out[i].rabi_over_2pi_hz);
      out[i].phase_rad = fs.number("phase_rad", out[i].phase_rad);
      out[i].detuning_over_2pi_hz =
          fs.number("detuning_over_2pi_hz", out[i].detuning_over_2pi_hz);
      fs.finish();
      require_nonnegative(out[i].rabi_over_2pi_hz,
                          fs.join("rabi_over_2pi_hz"));
    }
  }
  s.finish();
}

VelocityRule rule_from_text(const std::string& text, const std::string& path) {
  if (text == "gauss_hermite") return VelocityRule::kGaussHermite;
  if (text == "uniform") return VelocityRule::kUniform;
  if (text == "composite") return VelocityRule::kComposite;
  throw ConfigError(path + ": expected \"gauss_hermite\", \"uniform\" or "
                    "\"composite\"");
}

const char* rule_to_text(VelocityRule rule) {
  switch (rule) {
    case VelocityRule::kGaussHermite: return "gauss_hermite";
    case VelocityRule::kUniform: return "uniform";
    case VelocityRule::kComposite: return "composite";
  }
  return "gauss_hermite";
}

}  // namespace

ExperimentConfig default_config() {
  ExperimentConfig c;
  // Level ladder: D1 probe at 795 nm, Rydberg excitation at ~477 nm, the
  // 62.3 GHz microwave and 0.107 THz legs, stimulated 482 nm return, and the
  // 780 nm signal closing the loop onto the ground state.
  c.scheme.nu_a1_hz = 377.1074e12;
  c.scheme.nu_a2_hz = 628.9298539e12;
  c.scheme.nu_a3_hz = 62.3e9;
  c.scheme.nu_t_hz = 0.107e12;
  c.scheme.nu_a4_hz = 621.9760539e12;
  c.scheme.dipoles_cm = {2.54e-29, 2.0e-31, 2.5e-26, 1.5e-26, 2.5e-31,
                         2.5e-29};
  c.scheme.decays = {{1, 0, 6.0e6}, {5, 0, 6.0e6}, {2, 1, 1.0e4},
                     {3, 1, 1.0e4}, {4, 5, 1.0e4}};
  c.scheme.rydberg_dephasing_over_2pi_hz = 1.0e6;

  c.vapor.temperature = 393.0;
  c.vapor.mass = 1.4432e-25;
  c.vapor.density = 1.0e18;

  c.fields[field_index(FieldLabel::kA1)] = {6.0e6, 0.0, -5.2e6};
  c.fields[field_index(FieldLabel::kA2)] = {8.0e6, 0.0, 0.0};
  c.fields[field_index(FieldLabel::kA3)] = {10.0e6, 0.0, 0.0};
  c.fields[field_index(FieldLabel::kT)] = {1.0e3, 0.0, 0.0};
  c.fields[field_index(FieldLabel::kA4)] = {10.0e6, 0.0, 0.0};
  c.fields[field_index(FieldLabel::kS)] = {0.0, 0.0, 0.0};

  c.geometry.length_m = 5.0e-3;
  c.geometry.s_eff_m2 = 1.0e-6;
  c.geometry.thz_tilt_rad = 0.0;

  c.detector.eta_qe = 0.043;
  c.detector.eta_loss = 0.11;
  c.detector.dark_rate_hz = 2000.0;
  c.detector.dead_time_s = 3.2e-8;

  // The driven vapor has velocity-space structure far below the thermal
  // scale; the composite rule resolves it at tractable node counts.
  c.quadrature.rule = VelocityRule::kComposite;
  c.quadrature.n_nodes = 1501;
  c.quadrature.v_max_in_u = 5.0;
  c.quadrature.v_inner_m_s = 130.0;

  c.sweep.variable = "delta_t";
  c.sweep.start = -80.0e6;
  c.sweep.stop = 80.0e6;
  c.sweep.points = 161;
  c.sweep.scale = "linear";
  c.sweep.outer_values = {1.0e6, 2.0e6, 3.0e6, 4.0e6,  6.0e6,
                          8.0e6, 1.2e7, 1.8e7, 2.7e7, 2.9e7};

  c.monte_carlo.source = "coherent";
  c.monte_carlo.rate_hz = 1.0e6;
  c.monte_carlo.coherence_time_s = 1.0e-6;
  c.monte_carlo.duration_s = 1.0;
  c.monte_carlo.bin_width_s = 5.0e-8;
  c.monte_carlo.tau_max_s = 2.0e-6;
  c.monte_carlo.resolution_s = 1.6e-8;
  c.monte_carlo.apply_detector = true;
  c.monte_carlo.efficiency = 1.0;

  c.seed = 12345;
  return c;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: expected an object");

  // A run manifest embeds the effective config under "config".
  if (doc.contains("config") && doc["config"].is_object()) {
    return parse_config(doc["config"].dump());
  }

  ExperimentConfig c = default_config();
  Section root(doc, "config");
  if (const json* n = root.child("scheme")) parse_scheme(*n, "scheme", c.scheme);
  if (const json* n = root.child("vapor")) parse_vapor(*n, "vapor", c.vapor);
  if (const json* n = root.child("fields")) parse_fields(*n, "fields", c.fields);
  if (const json* n = root.child("geometry")) {
    Section s(*n, "geometry");
    c.geometry.length_m = s.number("length_m", c.geometry.length_m);
    c.geometry.s_eff_m2 = s.number("s_eff_m2", c.geometry.s_eff_m2);
    c.geometry.thz_tilt_rad = s.number("thz_tilt_rad",
                                       c.geometry.thz_tilt_rad);
    s.finish();
    require_nonnegative(c.geometry.length_m, s.join("length_m"));
    require_positive(c.geometry.s_eff_m2, s.join("s_eff_m2"));
  }
  if (const json* n = root.child("detector")) {
    Section s(*n, "detector");
    c.detector.eta_qe = s.number("eta_qe", c.detector.eta_qe);
    c.detector.eta_loss = s.number("eta_loss", c.detector.eta_loss);
    c.detector.dark_rate_hz = s.number("dark_rate_hz",
                                       c.detector.dark_rate_hz);
    c.detector.dead_time_s = s.number("dead_time_s", c.detector.dead_time_s);
    s.finish();
    if (c.detector.eta_qe < 0.0 || c.detector.eta_qe > 1.0) {
      throw ConfigError(s.join("eta_qe") + ": must be within [0, 1]");
    }
    if (c.detector.eta_loss < 0.0 || c.detector.eta_loss > 1.0) {
      throw ConfigError(s.join("eta_loss") + ": must be within [0, 1]");
    }
    require_nonnegative(c.detector.dark_rate_hz, s.join("dark_rate_hz"));
    require_nonnegative(c.detector.dead_time_s, s.join("dead_time_s"));
  }
  if (const json* n = root.child("quadrature")) {
    Section s(*n, "quadrature");
    c.quadrature.rule = rule_from_text(
        s.text("rule", rule_to_text(c.quadrature.rule)), s.join("rule"));
    c.quadrature.n_nodes = static_cast<int>(
        s.integer("n_nodes", c.quadrature.n_nodes));
    c.quadrature.v_max_in_u = s.number("v_max_in_u",
                                       c.quadrature.v_max_in_u);
    c.quadrature.v_inner_m_s = s.number("v_inner_m_s",
                                        c.quadrature.v_inner_m_s);
    s.finish();
    if (c.quadrature.n_nodes < 1) {
      throw ConfigError(s.join("n_nodes") + ": must be >= 1");
    }
    require_positive(c.quadrature.v_max_in_u, s.join("v_max_in_u"));
    require_positive(c.quadrature.v_inner_m_s, s.join("v_inner_m_s"));
  }
  if (const json* n = root.child("sweep")) {
    Section s(*n, "sweep");
    c.sweep.variable = s.text("variable", c.sweep.variable);
    c.sweep.start = s.number("start", c.sweep.start);
    c.sweep.stop = s.number("stop", c.sweep.stop);
    c.sweep.points = static_cast<int>(s.integer("points", c.sweep.points));
    c.sweep.scale = s.text("scale", c.sweep.scale);
    if (const json* v = s.child("outer_values")) {
      if (!v->is_array()) {
        throw ConfigError(s.join("outer_values") + ": expected an array");
      }
      c.sweep.outer_values.clear();
      for (const auto& item : *v) {
        if (!item.is_number()) {
          throw ConfigError(s.join("outer_values") + ": expected numbers");
        }
        c.sweep.outer_values.push_back(item.get<double>());
      }
    }
    s.finish();
    if (c.sweep.variable != "delta_t" && c.sweep.variable != "delta_1") {
      throw ConfigError(s.join("variable") +
                        ": expected \"delta_t\" or \"delta_1\"");
    }
    if (c.sweep.scale != "linear" && c.sweep.scale != "log") {
      throw ConfigError(s.join("scale") + ": expected \"linear\" or \"log\"");
    }
    if (c.sweep.points < 2) {
      throw ConfigError(s.join("points") + ": must be >= 2");
    }
    if (!(c.sweep.start < c.sweep.stop)) {
      throw ConfigError(s.join("start") + ": must be < sweep.stop");
    }
  }
  if (const json* n = root.child("response_sweep")) {
    Section s(*n, "response_sweep");
    c.response_sweep.rabi_t_start_over_2pi_hz = s.number(
        "rabi_t_start_over_2pi_hz", c.response_sweep.rabi_t_start_over_2pi_hz);
    c.response_sweep.rabi_t_stop_over_2pi_hz = s.number(
        "rabi_t_stop_over_2pi_hz", c.response_sweep.rabi_t_stop_over_2pi_hz);
    c.response_sweep.points =
        static_cast<int>(s.integer("points", c.response_sweep.points));
    c.response_sweep.n_nodes =
        static_cast<int>(s.integer("n_nodes", c.response_sweep.n_nodes));
    c.response_sweep.v_inner_m_s =
        s.number("v_inner_m_s", c.response_sweep.v_inner_m_s);
    s.finish();
    if (c.response_sweep.n_nodes < 1) {
      throw ConfigError(s.join("n_nodes") + ": must be >= 1");
    }
    require_positive(c.response_sweep.v_inner_m_s, s.join("v_inner_m_s"));
    require_positive(c.response_sweep.rabi_t_start_over_2pi_hz,
                     s.join("rabi_t_start_over_2pi_hz"));
    if (!(c.response_sweep.rabi_t_stop_over_2pi_hz >
          c.response_sweep.rabi_t_start_over_2pi_hz)) {
      throw ConfigError(s.join("rabi_t_stop_over_2pi_hz") +
                        ": must exceed the start value");
    }
    if (c.response_sweep.points < 4) {
      throw ConfigError(s.join("points") + ": must be >= 4");
    }
  }
  if (const json* n = root.child("monte_carlo")) {
    Section s(*n, "monte_carlo");
    c.monte_carlo.source = s.text("source", c.monte_carlo.source);
    c.monte_carlo.rate_hz = s.number("rate_hz", c.monte_carlo.rate_hz);
    c.monte_carlo.coherence_time_s =
        s.number("coherence_time_s", c.monte_carlo.coherence_time_s);
    c.monte_carlo.duration_s = s.number("duration_s",
                                        c.monte_carlo.duration_s);
    c.monte_carlo.bin_width_s = s.number("bin_width_s",
                                         c.monte_carlo.bin_width_s);
    c.monte_carlo.tau_max_s = s.number("tau_max_s", c.monte_carlo.tau_max_s);
    c.monte_carlo.resolution_s = s.number("resolution_s",
                                          c.monte_carlo.resolution_s);
    c.monte_carlo.apply_detector = s.boolean("apply_detector",
                                             c.monte_carlo.apply_detector);
    c.monte_carlo.efficiency = s.number("efficiency",
                                        c.monte_carlo.efficiency);
    s.finish();
    if (c.monte_carlo.source != "coherent" &&
        c.monte_carlo.source != "thermal") {
      throw ConfigError(s.join("source") +
                        ": expected \"coherent\" or \"thermal\"");
    }
    require_nonnegative(c.monte_carlo.rate_hz, s.join("rate_hz"));
    require_positive(c.monte_carlo.coherence_time_s,
                     s.join("coherence_time_s"));
    require_nonnegative(c.monte_carlo.duration_s, s.join("duration_s"));
    require_positive(c.monte_carlo.bin_width_s, s.join("bin_width_s"));
    require_positive(c.monte_carlo.tau_max_s, s.join("tau_max_s"));
    require_positive(c.monte_carlo.resolution_s, s.join("resolution_s"));
    if (c.monte_carlo.efficiency < 0.0 || c.monte_carlo.efficiency > 1.0) {
      throw ConfigError(s.join("efficiency") + ": must be within [0, 1]");
    }
  }
  if (const json* n = root.child("propagation")) {
    Section s(*n, "propagation");
    c.propagation.ode_rtol = s.number("ode_rtol", c.propagation.ode_rtol);
    c.propagation.ode_atol = s.number("ode_atol", c.propagation.ode_atol);
    c.propagation.loss_s_per_m = s.number("loss_s_per_m",
                                          c.propagation.loss_s_per_m);
    c.propagation.loss_t_per_m = s.number("loss_t_per_m",
                                          c.propagation.loss_t_per_m);
    c.propagation.input_flux_per_s = s.number(
        "input_flux_per_s", c.propagation.input_flux_per_s);
    s.finish();
    require_positive(c.propagation.ode_rtol, s.join("ode_rtol"));
    require_positive(c.propagation.ode_atol, s.join("ode_atol"));
    require_nonnegative(c.propagation.loss_s_per_m, s.join("loss_s_per_m"));
    require_nonnegative(c.propagation.loss_t_per_m, s.join("loss_t_per_m"));
    require_positive(c.propagation.input_flux_per_s,
                     s.join("input_flux_per_s"));
  }
  if (const json* n = root.child("seed")) {
    if (!n->is_number_unsigned()) {
      throw ConfigError("config.seed: expected a non-negative integer");
    }
    c.seed = n->get<std::uint64_t>();
  }
  root.finish();

  // Cross-field validation happens in the builders; run them now so a bad
  // document fails at parse time with a clear message.
  c.build_scheme().validate();
  c.build_fields();
  return c;
}

LevelScheme ExperimentConfig::build_scheme() const {
  LevelScheme s;
  s.roles = {LevelRole::kGround,       LevelRole::kIntermediate,
             LevelRole::kRydberg,      LevelRole::kRydberg,
             LevelRole::kRydberg,      LevelRole::kIntermediate};
  const double nu_s = signal_frequency(scheme.nu_t_hz, scheme.nu_a1_hz,
                                       scheme.nu_a2_hz, scheme.nu_a3_hz,
                                       scheme.nu_a4_hz);
  s.loop[0] = {0, 1, +1, kTwoPi * scheme.nu_a1_hz, scheme.dipoles_cm[0]};
  s.loop[1] = {1, 2, +1, kTwoPi * scheme.nu_a2_hz, scheme.dipoles_cm[1]};
  s.loop[2] = {2, 3, +1, kTwoPi * scheme.nu_a3_hz, scheme.dipoles_cm[2]};
  s.loop[3] = {3, 4, +1, kTwoPi * scheme.nu_t_hz, scheme.dipoles_cm[3]};
  s.loop[4] = {5, 4, -1, kTwoPi * scheme.nu_a4_hz, scheme.dipoles_cm[4]};
  s.loop[5] = {0, 5, -1, kTwoPi * nu_s, scheme.dipoles_cm[5]};
  for (const auto& d : scheme.decays) {
    s.decays.push_back({d.from, d.to, kTwoPi * d.rate_over_2pi_hz});
  }
  const double ryd = kTwoPi * scheme.rydberg_dephasing_over_2pi_hz;
  for (int i = 0; i < kNumLevels; ++i) {
    for (int j = 0; j < kNumLevels; ++j) {
      if (i == j) continue;
      const bool touches_rydberg = s.roles[i] == LevelRole::kRydberg ||
                                   s.roles[j] == LevelRole::kRydberg;
      if (touches_rydberg) s.dephasing(i, j) = ryd;
    }
  }
  for (const auto& d : scheme.extra_dephasing) {
    s.dephasing(d.i, d.j) = kTwoPi * d.rate_over_2pi_hz;
    s.dephasing(d.j, d.i) = kTwoPi * d.rate_over_2pi_hz;
  }
  return s;
}

std::vector<DriveField> ExperimentConfig::build_fields() const {
  const double nu_s = signal_frequency(scheme.nu_t_hz, scheme.nu_a1_hz,
                                       scheme.nu_a2_hz, scheme.nu_a3_hz,
                                       scheme.nu_a4_hz);
  const double nus[kNumLevels] = {scheme.nu_a1_hz, scheme.nu_a2_hz,
                                  scheme.nu_a3_hz, scheme.nu_t_hz,
                                  scheme.nu_a4_hz, nu_s};
  std::vector<DriveField> out;
  out.reserve(kNumLevels);
  for (int i = 0; i < kNumLevels; ++i) {
    const FieldConfig& fc = fields[i];
    const Complex rabi = kTwoPi * fc.rabi_over_2pi_hz *
                         std::exp(Complex(0.0, fc.phase_rad));
    Vec3d direction(0.0, 0.0, 1.0);
    if (i == field_index(FieldLabel::kT) && geometry.thz_tilt_rad != 0.0) {
      direction = Vec3d(std::sin(geometry.thz_tilt_rad), 0.0,
                        std::cos(geometry.thz_tilt_rad));
    }
    out.push_back(make_drive_field(static_cast<FieldLabel>(i), rabi,
                                   kTwoPi * fc.detuning_over_2pi_hz, nus[i],
                                   direction));
  }
  return out;
}

DetectorSpec ExperimentConfig::build_detector() const {
  DetectorSpec d;
  d.eta_qe = detector.eta_qe;
  d.eta_loss = detector.eta_loss;
  d.dark_rate = detector.dark_rate_hz;
  d.dead_time = detector.dead_time_s;
  d.s_eff = geometry.s_eff_m2;
  d.nu_thz = scheme.nu_t_hz;
  d.validate();
  return d;
}

MixingConfig ExperimentConfig::build_mixing() const {
  return make_mixing_config(build_scheme(), build_fields(), vapor,
                            geometry.length_m, geometry.s_eff_m2,
                            propagation.loss_s_per_m,
                            propagation.loss_t_per_m);
}

AveragingOptions ExperimentConfig::averaging_options() const {
  AveragingOptions a;
  a.rule = quadrature.rule;
  a.n_nodes = quadrature.n_nodes;
  a.v_max_in_u = quadrature.v_max_in_u;
  a.v_inner = quadrature.v_inner_m_s;
  return a;
}

std::string canonical_json(const ExperimentConfig& c) {
  json doc;
  json& scheme = doc["scheme"];
  scheme["frequencies_hz"] = {{"a1", c.scheme.nu_a1_hz},
                              {"a2", c.scheme.nu_a2_hz},
                              {"a3", c.scheme.nu_a3_hz},
                              {"t", c.scheme.nu_t_hz},
                              {"a4", c.scheme.nu_a4_hz}};
  json dipoles;
  for (int i = 0; i < kNumLevels; ++i) {
    dipoles[kFieldKeys[i]] = c.scheme.dipoles_cm[i];
  }
  scheme["dipoles_cm"] = dipoles;
  json decays = json::array();
  for (const auto& d : c.scheme.decays) {
    decays.push_back(
        {{"from", d.from}, {"to", d.to}, {"rate", d.rate_over_2pi_hz}});
  }
  scheme["decay_over_2pi_hz"] = decays;
  scheme["rydberg_dephasing_over_2pi_hz"] =
      c.scheme.rydberg_dephasing_over_2pi_hz;
  json extra = json::array();
  for (const auto& d : c.scheme.extra_dephasing) {
    extra.push_back({{"i", d.i}, {"j", d.j}, {"rate", d.rate_over_2pi_hz}});
  }
  scheme["dephasing_over_2pi_hz"] = extra;

  doc["vapor"] = {{"temperature_k", c.vapor.temperature},
                  {"mass_kg", c.vapor.mass},
                  {"density_m3", c.vapor.density}};
  json fields;
  for (int i = 0; i < kNumLevels; ++i) {
    fields[kFieldKeys[i]] = {
        {"rabi_over_2pi_hz", c.fields[i].rabi_over_2pi_hz},
        {"phase_rad", c.fields[i].phase_rad},
        {"detuning_over_2pi_hz", c.fields[i].detuning_over_2pi_hz}};
  }
  doc["fields"] = fields;
  doc["geometry"] = {{"length_m", c.geometry.length_m},
                     {"s_eff_m2", c.geometry.s_eff_m2},
                     {"thz_tilt_rad", c.geometry.thz_tilt_rad}};
  doc["detector"] = {{"eta_qe", c.detector.eta_qe},
                     {"eta_loss", c.detector.eta_loss},
                     {"dark_rate_hz", c.detector.dark_rate_hz},
                     {"dead_time_s", c.detector.dead_time_s}};
  doc["quadrature"] = {{"rule", rule_to_text(c.quadrature.rule)},
                       {"n_nodes", c.quadrature.n_nodes},
                       {"v_max_in_u", c.quadrature.v_max_in_u},
                       {"v_inner_m_s", c.quadrature.v_inner_m_s}};
  doc["sweep"] = {{"variable", c.sweep.variable},
                  {"start", c.sweep.start},
                  {"stop", c.sweep.stop},
                  {"points", c.sweep.points},
                  {"scale", c.sweep.scale},
                  {"outer_values", c.sweep.outer_values}};
  doc["response_sweep"] = {
      {"rabi_t_start_over_2pi_hz", c.response_sweep.rabi_t_start_over_2pi_hz},
      {"rabi_t_stop_over_2pi_hz", c.response_sweep.rabi_t_stop_over_2pi_hz},
      {"points", c.response_sweep.points},
      {"n_nodes", c.response_sweep.n_nodes},
      {"v_inner_m_s", c.response_sweep.v_inner_m_s}};
  doc["monte_carlo"] = {
      {"source", c.monte_carlo.source},
      {"rate_hz", c.monte_carlo.rate_hz},
      {"coherence_time_s", c.monte_carlo.coherence_time_s},
      {"duration_s", c.monte_carlo.duration_s},
      {"bin_width_s", c.monte_carlo.bin_width_s},
      {"tau_max_s", c.monte_carlo.tau_max_s},
      {"resolution_s", c.monte_carlo.resolution_s},
      {"apply_detector", c.monte_carlo.apply_detector},
      {"efficiency", c.monte_carlo.efficiency}};
  doc["propagation"] = {{"ode_rtol", c.propagation.ode_rtol},
                        {"ode_atol", c.propagation.ode_atol},
                        {"loss_s_per_m", c.propagation.loss_s_per_m},
                        {"loss_t_per_m", c.propagation.loss_t_per_m},
                        {"input_flux_per_s", c.propagation.input_flux_per_s}};
  doc["seed"] = c.seed;
  return doc.dump(2) + "\n";
}

}  // namespace rydthz
