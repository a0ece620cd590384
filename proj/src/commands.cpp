#include "macroent/commands.hpp"

#include <fmt/format.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <variant>

#include "macroent/errors.hpp"

namespace macroent {

using nlohmann::json;

namespace {

using Cell = std::variant<double, bool, std::string>;

// Rows of named cells, rendered as CSV or as a JSON array of objects.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  std::string render(OutputFormat format) const {
    if (format == OutputFormat::json) {
      json out = json::array();
      for (const auto& row : rows) {
        json obj = json::object();
        for (std::size_t i = 0; i < row.size(); ++i) {
          std::visit(
              [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, double>) {
                  obj[columns[i]] = std::isfinite(v) ? json(v) : json(nullptr);
                } else {
                  obj[columns[i]] = v;
                }
              },
              row[i]);
        }
        out.push_back(obj);
      }
      return out.dump(2) + "\n";
    }
    std::string out;
    for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
    out += '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out += ',';
        std::visit(
            [&](const auto& v) {
              using T = std::decay_t<decltype(v)>;
              if constexpr (std::is_same_v<T, double>) {
                out += format_real(v);
              } else if constexpr (std::is_same_v<T, bool>) {
                out += v ? "true" : "false";
              } else {
                out += v;
              }
            },
            row[i]);
      }
      out += '\n';
    }
    return out;
  }
};

double operating_jx(const ApparatusConfig& a) { return mean_spin(a.atom_number, a.polarization_p); }

ReportInputs report_inputs(const DerivedParams& d, double delta_epr, double delta_css,
                           FidelityFormula formula) {
  ReportInputs in;
  in.delta_epr = delta_epr;
  in.delta_css = delta_css;
  in.shot_var = d.shot_var;
  in.jx = d.jx;
  in.fidelity_formula = formula;
  // Atomic part of the difference variance, in units of the CSS line, against
  // its value for independent CSS measurements.
  const double eta = d.shot_var / delta_css;
  in.v_corr = delta_epr / delta_css - 2.0 * eta;
  in.v_uncorr = 2.0 - 2.0 * eta;
  return in;
}

}  // namespace

std::string format_real(double value) { return fmt::format("{:.17g}", value); }

double css_reference(const DerivedParams& derived, const ApparatusConfig& apparatus) {
  return derived.delta_css + apparatus.tech_noise_coeff * derived.jx * derived.jx;
}

std::string output_file_name(const std::string& command, OutputFormat format) {
  if (command == "entangle") return "entangle.json";
  if (command == "params") return format == OutputFormat::json ? "params.json" : "params.txt";
  return command + (format == OutputFormat::json ? ".json" : ".csv");
}

std::string cmd_params(const RunConfig& config) {
  const auto apparatus = config.resolved_apparatus();
  const auto d = derive(apparatus);
  const std::vector<std::pair<std::string, double>> fields = {
      {"sigma_m2", d.sigma_m2},    {"alpha", d.alpha}, {"kappa", d.kappa},
      {"jx", d.jx},                {"shot_var", d.shot_var}, {"a2", d.a2},
      {"eta_theory", d.eta_theory}, {"delta_css", css_reference(d, apparatus)}};
  if (config.output.format == OutputFormat::json) {
    json j = json::object();
    for (const auto& [k, v] : fields) j[k] = v;
    return j.dump(2) + "\n";
  }
  std::string out;
  for (const auto& [k, v] : fields) out += fmt::format("{} = {}\n", k, format_real(v));
  return out;
}

std::string cmd_fig2(const RunConfig& config) {
  const auto jx = config.sweep.jx_values();
  if (jx.empty()) throw ConfigError("fig2 needs sweep.jx or sweep.atoms");
  const auto apparatus = config.resolved_apparatus();
  const auto points = css_noise_sweep(jx, apparatus, config.monte_carlo);
  const auto fit = fit_css_line(points);
  Table t{{"jx", "delta_total", "delta_stderr", "css_line_fit", "residual"}, {}};
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    t.rows.push_back(
        {p.jx, p.delta, p.std_error, fit.intercept + fit.slope * p.jx, fit.residuals[i]});
  }
  t.rows.push_back({std::string("intercept"), fit.intercept, fit.intercept_stderr, std::string(),
                    std::string()});
  t.rows.push_back(
      {std::string("slope"), fit.slope, fit.slope_stderr, std::string(), std::string()});
  return t.render(config.output.format);
}

std::string cmd_fig3(const RunConfig& config) {
  const auto apparatus = config.resolved_apparatus();
  auto jx = config.sweep.jx_values();
  if (jx.empty()) jx.push_back(operating_jx(apparatus));
  const auto decoherence = config.resolved_decoherence();
  Table t{{"jx", "ratio_epr", "ratio_epr_stderr", "ratio_floor", "ratio_shot", "witness",
           "xi_operational", "xi_exper", "fidelity"},
          {}};
  for (std::size_t k = 0; k < jx.size(); ++k) {
    McSettings mc = config.monte_carlo;
    mc.master_seed = derive_seed(config.monte_carlo.master_seed, k);
    const auto r = run_entangle_verify(apparatus, jx[k], apparatus.delay_s, decoherence, mc);
    const double css = css_reference(r.derived, apparatus);
    const auto rep =
        build_report(report_inputs(r.derived, r.delta_epr, css, config.fidelity_formula));
    t.rows.push_back({jx[k], r.delta_epr / css, r.delta_epr_stderr / css,
                      2.0 * r.derived.shot_var / css, r.derived.shot_var / css,
                      rep.witness_entangled, rep.xi_operational, rep.xi_exper,
                      rep.fidelity.value_or(std::nan(""))});
  }
  return t.render(config.output.format);
}

std::string cmd_lifetime(const RunConfig& config) {
  if (config.sweep.tau_s.empty()) throw ConfigError("lifetime needs sweep.tau_s");
  const auto apparatus = config.resolved_apparatus();
  const auto d = derive(apparatus);
  const auto decoherence = config.resolved_decoherence();
  auto initial = css_pair(d.jx);
  if (apparatus.tech_noise_coeff > 0.0) {
    initial = add_classical_spin_noise(initial, apparatus.tech_noise_coeff * d.jx / (2.0 * d.kappa));
  }
  const auto prepared = run_pulse(initial, PulseKind::entangling, d.a2,
                                  decoherence.loss_between_cells, expected_readout())
                            .state;
  const double css = css_reference(d, apparatus);
  Table t{{"tau_s", "xi_state", "xi_exper", "ratio_epr", "witness"}, {}};
  for (double tau : config.sweep.tau_s) {
    const auto delayed = decohere(prepared, tau, decoherence);
    const auto pred = predicted_delta_epr(d, delayed);
    const auto ex = xi_exper(pred.delta_epr, css, d.shot_var);
    t.rows.push_back({tau, state_xi(delayed), ex.xi_exper, pred.delta_epr / css,
                      witness_photocurrent(pred.delta_epr, css)});
  }
  return t.render(config.output.format);
}

std::string cmd_entangle(const RunConfig& config) {
  const auto apparatus = config.resolved_apparatus();
  const auto decoherence = config.resolved_decoherence();
  const double jx = operating_jx(apparatus);
  const auto r = run_entangle_verify(apparatus, jx, apparatus.delay_s, decoherence,
                                     config.monte_carlo);
  const double css = css_reference(r.derived, apparatus);
  const auto rep = build_report(report_inputs(r.derived, r.delta_epr, css, config.fidelity_formula));
  json j = {{"jx", rep.jx},
            {"tau_s", apparatus.delay_s},
            {"delta_epr", rep.delta_epr},
            {"delta_epr_stderr", r.delta_epr_stderr},
            {"delta_epr_predicted", r.predicted.delta_epr},
            {"delta_css", rep.delta_css},
            {"shot_var", rep.shot_var},
            {"witness_entangled", rep.witness_entangled},
            {"xi_operational", rep.xi_operational},
            {"eta_exper", rep.eta_exper},
            {"xi_exper", rep.xi_exper},
            {"eta_theory", rep.eta_theory},
            {"xi_state", r.state_xi},
            {"n_runs", config.monte_carlo.n_runs},
            {"master_seed", config.monte_carlo.master_seed},
            {"mode", to_string(config.monte_carlo.mode)},
            {"fidelity_formula", to_string(config.fidelity_formula)}};
  j["correlation_degree"] = rep.correlation_degree ? json(*rep.correlation_degree) : json(nullptr);
  j["fidelity"] = rep.fidelity ? json(*rep.fidelity) : json(nullptr);
  return j.dump(2) + "\n";
}

}  // namespace macroent
