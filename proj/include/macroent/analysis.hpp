#pragma once

// Witnesses, degrees of entanglement and derived figures of merit.

#include <optional>
#include <string>

namespace macroent {

/// Var(Jz12) + Var(Jy12) < 2 Jx (strict).
bool witness_spin(double var_sum_z, double var_sum_y, double jx);

/// Delta_EPR < Delta(Jx) (strict).
bool witness_photocurrent(double delta_epr, double delta_css);

/// 1 - (Delta_EPR - dS^2) / (Delta(Jx) - dS^2). Unclamped.
double xi_operational(double delta_epr, double delta_css, double shot_var);

struct EtaXi {
  double eta_exper = 0.0;
  double xi_exper = 0.0;
};

/// eta_exper = (Delta_EPR - dS^2) / Delta(Jx), xi_exper = 1 - eta_exper.
EtaXi xi_exper(double delta_epr, double delta_css, double shot_var);

/// 1 - v_corr / v_uncorr.
double correlation_degree(double v_corr, double v_uncorr);

struct DiffusionCalibration {
  /// Growth of the squeezed variance, CSS units per second.
  double rate_per_s = 0.0;
  /// Saturation ceiling, CSS units.
  double v_anti = 0.0;
};

/// Linear model V(t) = (1 - xi_initial) + D t reaching 1 at t_zero.
DiffusionCalibration calibrate_diffusion(double v_anti, double xi_initial, double t_zero_s);

enum class FidelityFormula {
  /// F = 1 / (1 + V + eta_theory)
  reconstructed,
  /// F = 1 / (1 + V)
  pure_epr,
};

FidelityFormula parse_fidelity_formula(const std::string& name);
std::string to_string(FidelityFormula formula);

double teleport_fidelity(double v_epr_normalized, double eta_theory,
                         FidelityFormula formula = FidelityFormula::reconstructed);

struct ReportInputs {
  double delta_epr = 0.0;
  double delta_css = 0.0;
  double shot_var = 0.0;
  double jx = 0.0;
  std::optional<double> v_corr;
  std::optional<double> v_uncorr;
  bool with_fidelity = true;
  FidelityFormula fidelity_formula = FidelityFormula::reconstructed;
};

struct EntanglementReport {
  double delta_epr = 0.0;
  double delta_css = 0.0;
  double shot_var = 0.0;
  bool witness_entangled = false;
  double xi_operational = 0.0;
  double eta_exper = 0.0;
  double xi_exper = 0.0;
  double eta_theory = 0.0;
  std::optional<double> correlation_degree;
  std::optional<double> fidelity;
  double jx = 0.0;
};

/// eta_theory is taken as dS^2 / Delta(Jx); the fidelity uses V = eta_exper.
EntanglementReport build_report(const ReportInputs& inputs);

}  // namespace macroent
