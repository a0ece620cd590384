#include "macroent/analysis.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "macroent/errors.hpp"

namespace macroent {

namespace {

void check_css_inputs(double delta_css, double shot_var) {
  if (!std::isfinite(delta_css) || !std::isfinite(shot_var) || !(shot_var >= 0.0)) {
    throw ConfigError("reference variances must be finite and nonnegative");
  }
  if (!(delta_css > shot_var)) {
    throw NumericalError(fmt::format(
        "no atomic signal: Delta(Jx) = {} does not exceed the shot noise {}", delta_css, shot_var));
  }
}

}  // namespace

bool witness_spin(double var_sum_z, double var_sum_y, double jx) {
  return var_sum_z + var_sum_y < 2.0 * jx;
}

bool witness_photocurrent(double delta_epr, double delta_css) { return delta_epr < delta_css; }

double xi_operational(double delta_epr, double delta_css, double shot_var) {
  check_css_inputs(delta_css, shot_var);
  return 1.0 - (delta_epr - shot_var) / (delta_css - shot_var);
}

EtaXi xi_exper(double delta_epr, double delta_css, double shot_var) {
  check_css_inputs(delta_css, shot_var);
  const double eta = (delta_epr - shot_var) / delta_css;
  return {eta, 1.0 - eta};
}

double correlation_degree(double v_corr, double v_uncorr) {
  if (!(v_uncorr > 0.0)) {
    throw ConfigError(fmt::format("correlation degree: v_uncorr must be positive (got {})", v_uncorr));
  }
  return 1.0 - v_corr / v_uncorr;
}

DiffusionCalibration calibrate_diffusion(double v_anti, double xi_initial, double t_zero_s) {
  if (!(xi_initial > 0.0 && xi_initial < 1.0)) {
    throw ConfigError(fmt::format("xi_initial must lie in (0, 1) (got {})", xi_initial));
  }
  if (!(t_zero_s > 0.0) || !std::isfinite(t_zero_s)) {
    throw ConfigError(fmt::format("t_zero_s must be positive (got {})", t_zero_s));
  }
  if (!(v_anti >= 1.0) || !std::isfinite(v_anti)) {
    throw ConfigError(fmt::format("v_anti must be at least 1 (got {})", v_anti));
  }
  return {xi_initial / t_zero_s, v_anti};
}

FidelityFormula parse_fidelity_formula(const std::string& name) {
  if (name == "reconstructed") return FidelityFormula::reconstructed;
  if (name == "pure_epr") return FidelityFormula::pure_epr;
  throw ConfigError(fmt::format("unknown fidelity formula '{}' (reconstructed|pure_epr)", name));
}

std::string to_string(FidelityFormula formula) {
  return formula == FidelityFormula::reconstructed ? "reconstructed" : "pure_epr";
}

double teleport_fidelity(double v_epr_normalized, double eta_theory, FidelityFormula formula) {
  if (formula == FidelityFormula::pure_epr) return 1.0 / (1.0 + v_epr_normalized);
  return 1.0 / (1.0 + v_epr_normalized + eta_theory);
}

EntanglementReport build_report(const ReportInputs& in) {
  EntanglementReport r;
  r.delta_epr = in.delta_epr;
  r.delta_css = in.delta_css;
  r.shot_var = in.shot_var;
  r.jx = in.jx;
  r.witness_entangled = witness_photocurrent(in.delta_epr, in.delta_css);
  r.xi_operational = xi_operational(in.delta_epr, in.delta_css, in.shot_var);
  const auto ex = xi_exper(in.delta_epr, in.delta_css, in.shot_var);
  r.eta_exper = ex.eta_exper;
  r.xi_exper = ex.xi_exper;
  r.eta_theory = in.shot_var / in.delta_css;
  if (in.v_corr && in.v_uncorr) r.correlation_degree = correlation_degree(*in.v_corr, *in.v_uncorr);
  if (in.with_fidelity) {
    r.fidelity = teleport_fidelity(std::max(r.eta_exper, 0.0), r.eta_theory, in.fidelity_formula);
  }
  return r;
}

}  // namespace macroent
