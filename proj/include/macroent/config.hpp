#pragma once

// Run configuration: a single JSON document with SI-suffixed field names.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "macroent/analysis.hpp"
#include "macroent/detection.hpp"
#include "macroent/params.hpp"
#include "macroent/protocol.hpp"

namespace macroent {

struct DiffusionCalibrationSpec {
  double v_anti = 3.0;
  double xi_initial = 0.65;
  double t_zero_s = 1.2e-3;

  bool operator==(const DiffusionCalibrationSpec&) const = default;
};

struct DecoherenceConfig {
  /// nullopt: inherit apparatus.t2_s. +inf: channel disabled (JSON null).
  std::optional<double> t2_s;
  /// Exactly one of the two diffusion settings may be present.
  std::optional<double> diffusion_rate_per_s;
  std::optional<DiffusionCalibrationSpec> diffusion_calibration;
  double v_anti = 3.0;
  double loss_between_cells = 0.0;

  bool operator==(const DecoherenceConfig&) const = default;
};

/// Places the operating point: shot_noise_var is set so that eta_theory holds
/// at Jx = 4 N p.
struct OperatingPoint {
  double eta_theory = 0.35;

  bool operator==(const OperatingPoint&) const = default;
};

struct SweepConfig {
  std::vector<double> jx;
  /// (atom_number, polarization_p) pairs, converted with Jx = 4 N p.
  std::vector<std::pair<double, double>> atoms;
  std::vector<double> tau_s;

  /// jx entries followed by the converted atom pairs.
  std::vector<double> jx_values() const;
  bool operator==(const SweepConfig&) const = default;
};

enum class OutputFormat { csv, json };

struct OutputConfig {
  std::string directory;
  OutputFormat format = OutputFormat::csv;

  bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
  ApparatusConfig apparatus;
  std::optional<OperatingPoint> operating_point;
  DecoherenceConfig decoherence;
  McSettings monte_carlo;
  SweepConfig sweep;
  OutputConfig output;
  FidelityFormula fidelity_formula = FidelityFormula::reconstructed;

  /// Apparatus with the operating point applied.
  ApparatusConfig resolved_apparatus() const;
  /// Decoherence parameters with inheritance and calibration applied.
  DecoherenceParams resolved_decoherence() const;
  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

/// Throws ConfigError with the offending field path (or the JSON parse
/// position) in the message.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& config);

McMode parse_mc_mode(const std::string& name);
std::string to_string(McMode mode);

}  // namespace macroent
