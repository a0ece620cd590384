#pragma once

// CLI commands. Each returns the text that the front end prints or writes.

#include <string>

#include "macroent/config.hpp"

namespace macroent {

/// 17 significant digits, the CSV/number format of every command.
std::string format_real(double value);

/// Reference line Delta(Jx) including classical spin noise.
double css_reference(const DerivedParams& derived, const ApparatusConfig& apparatus);

/// Derived couplings at Jx = 4 N p; "key = value" lines or a JSON object.
std::string cmd_params(const RunConfig& config);

/// CSS noise sweep with its line fit (CSV).
std::string cmd_fig2(const RunConfig& config);

/// Entangle-verify sweep normalized to Delta(Jx) at delay apparatus.delay_s (CSV).
std::string cmd_fig3(const RunConfig& config);

/// Degree of entanglement against the delay, from the covariance pipeline (CSV).
std::string cmd_lifetime(const RunConfig& config);

/// Full report at the operating point (JSON).
std::string cmd_entangle(const RunConfig& config);

/// Default output file name for a command ("fig2.csv", "entangle.json", ...).
std::string output_file_name(const std::string& command, OutputFormat format);

}  // namespace macroent
