#include "macroent/config.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "macroent/errors.hpp"

namespace macroent {

using nlohmann::json;

namespace {

// Typed access to one JSON object, remembering which keys were read so that
// leftovers can be reported as unknown fields.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(fmt::format("{}: expected an object", label()));
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) throw ConfigError(fmt::format("missing required field '{}'", field(key)));
    return j_.at(key);
  }

  double number(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_number()) throw ConfigError(fmt::format("field '{}' must be a number", field(key)));
    return v.get<double>();
  }

  double number(const std::string& key, double fallback) {
    return has(key) ? number(key) : (used_.insert(key), fallback);
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const auto& v = raw(key);
    if (!v.is_number_unsigned()) {
      throw ConfigError(fmt::format("field '{}' must be a nonnegative integer", field(key)));
    }
    return v.get<std::uint64_t>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const auto& v = raw(key);
    if (!v.is_string()) throw ConfigError(fmt::format("field '{}' must be a string", field(key)));
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    if (!has(key)) return {};
    const auto& v = raw(key);
    if (!v.is_array()) throw ConfigError(fmt::format("field '{}' must be an array", field(key)));
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) {
        throw ConfigError(fmt::format("field '{}[{}]' must be a number", field(key), i));
      }
      out.push_back(v[i].get<double>());
    }
    return out;
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!used_.count(key)) throw ConfigError(fmt::format("unknown field '{}'", field(key)));
    }
  }

 private:
  std::string label() const { return path_.empty() ? "config" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

// Any ConfigError thrown while validating gets the owning section prefixed.
template <typename Fn>
void with_context(const std::string& context, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", context, e.what()));
  }
}

ApparatusConfig parse_apparatus(const json& j) {
  Section s(j, "apparatus");
  ApparatusConfig a;
  a.wavelength_m = s.number("wavelength_m");
  a.linewidth_hz = s.number("linewidth_hz");
  a.beam_area_m2 = s.number("beam_area_m2");
  a.photon_number = s.number("photon_number");
  a.detuning_hz = s.number("detuning_hz");
  {
    const auto& f = s.raw("hyperfine_f");
    if (!f.is_number_integer()) throw ConfigError("field 'apparatus.hyperfine_f' must be an integer");
    a.hyperfine_f = f.get<int>();
  }
  a.atom_number = s.number("atom_number");
  a.polarization_p = s.number("polarization_p");
  a.t2_s = s.number("t2_s", a.t2_s);
  a.larmor_hz = s.number("larmor_hz", a.larmor_hz);
  a.pulse_duration_s = s.number("pulse_duration_s", a.pulse_duration_s);
  a.delay_s = s.number("delay_s", a.delay_s);
  a.shot_noise_var = s.number("shot_noise_var", a.shot_noise_var);
  a.tech_noise_coeff = s.number("tech_noise_coeff", a.tech_noise_coeff);
  s.finish();
  return a;
}

DecoherenceConfig parse_decoherence(const json& j) {
  Section s(j, "decoherence");
  DecoherenceConfig d;
  if (s.has("t2_s")) {
    const auto& v = s.raw("t2_s");
    if (v.is_null()) {
      d.t2_s = std::numeric_limits<double>::infinity();
    } else if (v.is_number()) {
      d.t2_s = v.get<double>();
    } else {
      throw ConfigError("field 'decoherence.t2_s' must be a number or null");
    }
  }
  if (s.has("diffusion_rate_per_s")) d.diffusion_rate_per_s = s.number("diffusion_rate_per_s");
  if (s.has("diffusion_calibration")) {
    Section c(s.raw("diffusion_calibration"), "decoherence.diffusion_calibration");
    DiffusionCalibrationSpec spec;
    spec.v_anti = c.number("v_anti");
    spec.xi_initial = c.number("xi_initial");
    spec.t_zero_s = c.number("t_zero_s");
    c.finish();
    d.diffusion_calibration = spec;
  }
  d.v_anti = s.number("v_anti", d.v_anti);
  d.loss_between_cells = s.number("loss_between_cells", d.loss_between_cells);
  s.finish();
  return d;
}

McSettings parse_monte_carlo(const json& j) {
  Section s(j, "monte_carlo");
  McSettings m;
  m.n_runs = s.unsigned_integer("n_runs", m.n_runs);
  m.master_seed = s.unsigned_integer("master_seed", m.master_seed);
  m.mode = parse_mc_mode(s.text("mode", to_string(m.mode)));
  m.threads = static_cast<unsigned>(s.unsigned_integer("threads", m.threads));
  s.finish();
  return m;
}

SweepConfig parse_sweep(const json& j) {
  Section s(j, "sweep");
  SweepConfig w;
  w.jx = s.numbers("jx");
  if (s.has("atoms")) {
    const auto& v = s.raw("atoms");
    if (!v.is_array()) throw ConfigError("field 'sweep.atoms' must be an array");
    for (std::size_t i = 0; i < v.size(); ++i) {
      Section pair(v[i], fmt::format("sweep.atoms[{}]", i));
      const double n = pair.number("atom_number");
      const double p = pair.number("polarization_p");
      pair.finish();
      w.atoms.emplace_back(n, p);
    }
  }
  w.tau_s = s.numbers("tau_s");
  s.finish();
  return w;
}

OutputConfig parse_output(const json& j) {
  Section s(j, "output");
  OutputConfig o;
  o.directory = s.text("directory", "");
  const auto format = s.text("format", "csv");
  if (format == "csv") {
    o.format = OutputFormat::csv;
  } else if (format == "json") {
    o.format = OutputFormat::json;
  } else {
    throw ConfigError(fmt::format("field 'output.format' must be csv or json (got '{}')", format));
  }
  s.finish();
  return o;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::vector<double> SweepConfig::jx_values() const {
  std::vector<double> out = jx;
  for (const auto& [n, p] : atoms) out.push_back(mean_spin(n, p));
  return out;
}

McMode parse_mc_mode(const std::string& name) {
  if (name == "analytic") return McMode::analytic;
  if (name == "waveform") return McMode::waveform;
  throw ConfigError(fmt::format("unknown Monte Carlo mode '{}' (analytic|waveform)", name));
}

std::string to_string(McMode mode) { return mode == McMode::analytic ? "analytic" : "waveform"; }

ApparatusConfig RunConfig::resolved_apparatus() const {
  ApparatusConfig a = apparatus;
  if (operating_point) {
    a.shot_noise_var = shot_var_for_eta(apparatus, mean_spin(apparatus.atom_number,
                                                             apparatus.polarization_p),
                                        operating_point->eta_theory);
  }
  return a;
}

DecoherenceParams RunConfig::resolved_decoherence() const {
  DecoherenceParams p;
  p.t2_s = decoherence.t2_s.value_or(apparatus.t2_s);
  p.v_anti = decoherence.v_anti;
  p.loss_between_cells = decoherence.loss_between_cells;
  if (decoherence.diffusion_rate_per_s) {
    p.diffusion_rate = *decoherence.diffusion_rate_per_s;
  } else if (decoherence.diffusion_calibration) {
    const auto& c = *decoherence.diffusion_calibration;
    const auto cal = calibrate_diffusion(c.v_anti, c.xi_initial, c.t_zero_s);
    p.diffusion_rate = cal.rate_per_s;
    p.v_anti = cal.v_anti;
  }
  return p;
}

void RunConfig::validate() const {
  with_context("apparatus", [&] { apparatus.validate(); });
  if (operating_point) {
    with_context("operating_point.eta_theory", [&] { (void)resolved_apparatus(); });
  }
  if (decoherence.diffusion_rate_per_s && decoherence.diffusion_calibration) {
    throw ConfigError(
        "decoherence: give either diffusion_rate_per_s or diffusion_calibration, not both");
  }
  with_context("decoherence", [&] { resolved_decoherence().validate(); });
  if (monte_carlo.n_runs < 2) {
    throw ConfigError(fmt::format("monte_carlo.n_runs must be >= 2 (got {})", monte_carlo.n_runs));
  }
  if (monte_carlo.threads < 1) throw ConfigError("monte_carlo.threads must be >= 1");
  with_context("sweep", [&] {
    for (double jx : sweep.jx) {
      if (!(jx >= 0.0) || !std::isfinite(jx)) {
        throw ConfigError(fmt::format("jx values must be finite and >= 0 (got {})", jx));
      }
    }
    for (const auto& [n, p] : sweep.atoms) {
      if (!(n >= 0.0) || !(p > 0.0 && p <= 1.0)) {
        throw ConfigError(fmt::format("atoms entry ({}, {}) is out of range", n, p));
      }
    }
    for (double tau : sweep.tau_s) {
      if (!(tau >= 0.0) || !std::isfinite(tau)) {
        throw ConfigError(fmt::format("tau_s values must be finite and >= 0 (got {})", tau));
      }
    }
  });
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("malformed JSON: {}", e.what()));
  }
  Section root(j, "");
  RunConfig c;
  c.apparatus = parse_apparatus(root.raw("apparatus"));
  if (root.has("operating_point")) {
    Section op(root.raw("operating_point"), "operating_point");
    c.operating_point = OperatingPoint{op.number("eta_theory")};
    op.finish();
  }
  if (root.has("decoherence")) c.decoherence = parse_decoherence(root.raw("decoherence"));
  if (root.has("monte_carlo")) c.monte_carlo = parse_monte_carlo(root.raw("monte_carlo"));
  if (root.has("sweep")) c.sweep = parse_sweep(root.raw("sweep"));
  if (root.has("output")) c.output = parse_output(root.raw("output"));
  if (root.has("analysis")) {
    Section an(root.raw("analysis"), "analysis");
    c.fidelity_formula = parse_fidelity_formula(an.text("fidelity_formula", "reconstructed"));
    an.finish();
  }
  root.finish();
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string serialize_config(const RunConfig& c) {
  const auto& a = c.apparatus;
  json j;
  j["apparatus"] = {{"wavelength_m", a.wavelength_m},
                    {"linewidth_hz", a.linewidth_hz},
                    {"beam_area_m2", a.beam_area_m2},
                    {"photon_number", a.photon_number},
                    {"detuning_hz", a.detuning_hz},
                    {"hyperfine_f", a.hyperfine_f},
                    {"atom_number", a.atom_number},
                    {"polarization_p", a.polarization_p},
                    {"t2_s", a.t2_s},
                    {"larmor_hz", a.larmor_hz},
                    {"pulse_duration_s", a.pulse_duration_s},
                    {"delay_s", a.delay_s},
                    {"shot_noise_var", a.shot_noise_var},
                    {"tech_noise_coeff", a.tech_noise_coeff}};
  if (c.operating_point) j["operating_point"] = {{"eta_theory", c.operating_point->eta_theory}};

  json d = json::object();
  if (c.decoherence.t2_s) d["t2_s"] = number_or_null(*c.decoherence.t2_s);
  if (c.decoherence.diffusion_rate_per_s) {
    d["diffusion_rate_per_s"] = *c.decoherence.diffusion_rate_per_s;
  }
  if (c.decoherence.diffusion_calibration) {
    const auto& cal = *c.decoherence.diffusion_calibration;
    d["diffusion_calibration"] = {
        {"v_anti", cal.v_anti}, {"xi_initial", cal.xi_initial}, {"t_zero_s", cal.t_zero_s}};
  }
  d["v_anti"] = c.decoherence.v_anti;
  d["loss_between_cells"] = c.decoherence.loss_between_cells;
  j["decoherence"] = d;

  j["monte_carlo"] = {{"n_runs", c.monte_carlo.n_runs},
                      {"master_seed", c.monte_carlo.master_seed},
                      {"mode", to_string(c.monte_carlo.mode)},
                      {"threads", c.monte_carlo.threads}};

  json atoms = json::array();
  for (const auto& [n, p] : c.sweep.atoms) {
    atoms.push_back({{"atom_number", n}, {"polarization_p", p}});
  }
  j["sweep"] = {{"jx", c.sweep.jx}, {"atoms", atoms}, {"tau_s", c.sweep.tau_s}};
  j["output"] = {{"directory", c.output.directory},
                 {"format", c.output.format == OutputFormat::csv ? "csv" : "json"}};
  j["analysis"] = {{"fidelity_formula", to_string(c.fidelity_formula)}};
  return j.dump(2) + "\n";
}

}  // namespace macroent
