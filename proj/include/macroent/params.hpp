#pragma once

// Apparatus configuration and the dimensionless couplings derived from it.
//
// Frequencies (linewidth, detuning, Larmor) are in Hz; the coupling depends on
// linewidth / detuning only, so the 2*pi convention cancels.

namespace macroent {

struct ApparatusConfig {
  double wavelength_m = 852e-9;
  double linewidth_hz = 5e6;
  double beam_area_m2 = 2e-4;
  double photon_number = 1e13;
  double detuning_hz = 700e6;
  int hyperfine_f = 4;
  double atom_number = 8.75e11;
  double polarization_p = 1.0;
  double t2_s = 0.03;
  double larmor_hz = 325e3;
  double pulse_duration_s = 0.45e-3;
  double delay_s = 0.5e-3;
  /// Shot-noise variance of the probe (detector units, both quadratures).
  double shot_noise_var = 1.0;
  /// Classical spin-noise coefficient: adds tech_noise_coeff * Jx^2 to the
  /// CSS variance line.
  double tech_noise_coeff = 0.0;

  /// Throws ConfigError naming the first offending field.
  void validate() const;
  bool operator==(const ApparatusConfig&) const = default;
};

struct DerivedParams {
  double sigma_m2 = 0.0;
  double alpha = 0.0;
  double kappa = 0.0;
  double jx = 0.0;
  double shot_var = 0.0;
  /// Measurement strength a^2 = 2 kappa Jx / shot_var.
  double a2 = 0.0;
  double eta_theory = 0.0;
  /// Ideal CSS line value shot_var + 2 kappa Jx.
  double delta_css = 0.0;
};

/// sigma = lambda^2 / (2 pi).
double resonant_cross_section(double wavelength_m);

/// alpha = sigma * gamma * n / (4 F A Delta).
double alpha_coupling(const ApparatusConfig& config);

/// Jx = 4 N p.
double mean_spin(double atom_number, double polarization_p);

DerivedParams derive(const ApparatusConfig& config);

/// Same coupling constants, evaluated at an explicit Jx instead of 4 N p.
/// `jx` may be zero (no atoms: shot noise only).
DerivedParams derive_at(const ApparatusConfig& config, double jx);

/// Shot-noise variance that places the operating point at eta_theory for the
/// given Jx.
double shot_var_for_eta(const ApparatusConfig& config, double jx, double eta_theory);

}  // namespace macroent
