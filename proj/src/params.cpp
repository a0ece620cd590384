#include "macroent/params.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

#include "macroent/errors.hpp"

namespace macroent {

namespace {

void require_positive(double value, const char* field) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ConfigError(fmt::format("apparatus.{} must be a positive finite number (got {})", field,
                                  value));
  }
}

}  // namespace

void ApparatusConfig::validate() const {
  require_positive(wavelength_m, "wavelength_m");
  require_positive(linewidth_hz, "linewidth_hz");
  require_positive(beam_area_m2, "beam_area_m2");
  require_positive(photon_number, "photon_number");
  if (detuning_hz == 0.0) throw ConfigError("apparatus.detuning_hz is zero (coupling diverges)");
  require_positive(detuning_hz, "detuning_hz");
  if (hyperfine_f <= 0) throw ConfigError("apparatus.hyperfine_f must be a positive integer");
  require_positive(atom_number, "atom_number");
  if (!(polarization_p > 0.0 && polarization_p <= 1.0)) {
    throw ConfigError(fmt::format("apparatus.polarization_p must lie in (0, 1] (got {})",
                                  polarization_p));
  }
  require_positive(t2_s, "t2_s");
  require_positive(larmor_hz, "larmor_hz");
  require_positive(pulse_duration_s, "pulse_duration_s");
  require_positive(delay_s, "delay_s");
  require_positive(shot_noise_var, "shot_noise_var");
  if (!(tech_noise_coeff >= 0.0) || !std::isfinite(tech_noise_coeff)) {
    throw ConfigError("apparatus.tech_noise_coeff must be >= 0");
  }
}

double resonant_cross_section(double wavelength_m) {
  if (!(wavelength_m > 0.0)) {
    throw ConfigError(fmt::format("wavelength must be positive (got {})", wavelength_m));
  }
  return wavelength_m * wavelength_m / (2.0 * std::numbers::pi);
}

double alpha_coupling(const ApparatusConfig& c) {
  if (c.detuning_hz == 0.0) throw ConfigError("zero detuning: Faraday coupling diverges");
  return resonant_cross_section(c.wavelength_m) * c.linewidth_hz * c.photon_number /
         (4.0 * c.hyperfine_f * c.beam_area_m2 * c.detuning_hz);
}

double mean_spin(double atom_number, double polarization_p) {
  return 4.0 * atom_number * polarization_p;
}

DerivedParams derive_at(const ApparatusConfig& config, double jx) {
  config.validate();
  if (!(jx >= 0.0) || !std::isfinite(jx)) {
    throw ConfigError(fmt::format("Jx must be nonnegative (got {})", jx));
  }
  DerivedParams d;
  d.sigma_m2 = resonant_cross_section(config.wavelength_m);
  d.alpha = alpha_coupling(config);
  d.kappa = 0.5 * d.alpha * d.alpha;
  d.jx = jx;
  d.shot_var = config.shot_noise_var;
  d.a2 = 2.0 * d.kappa * jx / d.shot_var;
  d.eta_theory = 1.0 / (1.0 + d.a2);
  d.delta_css = d.shot_var + 2.0 * d.kappa * jx;
  return d;
}

DerivedParams derive(const ApparatusConfig& config) {
  config.validate();
  return derive_at(config, mean_spin(config.atom_number, config.polarization_p));
}

double shot_var_for_eta(const ApparatusConfig& config, double jx, double eta_theory) {
  if (!(eta_theory > 0.0 && eta_theory < 1.0)) {
    throw ConfigError("target eta_theory must lie in (0, 1)");
  }
  const double alpha = alpha_coupling(config);
  return alpha * alpha * jx * eta_theory / (1.0 - eta_theory);
}

}  // namespace macroent
