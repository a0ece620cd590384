#pragma once

// Measurement-chain emulation: photocurrent synthesis, lock-in demodulation,
// repeated-run variance estimation and CSS-line fitting, plus the Monte Carlo
// drivers that run them against the protocol engine.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "macroent/params.hpp"
#include "macroent/protocol.hpp"

namespace macroent {

struct WaveformConfig {
  double sample_rate_hz = 16 * 325e3;
  double pulse_duration_s = 0.45e-3;
  double larmor_hz = 325e3;
  std::uint64_t rng_seed = 0;

  /// Default sampling: 16 samples per Larmor period.
  static WaveformConfig from_apparatus(const ApparatusConfig& apparatus, std::uint64_t seed);

  /// Throws ConfigError on a Nyquist-margin or pulse-length violation.
  void validate() const;
  /// Samples in the pulse, truncated to a whole number of Larmor periods.
  std::size_t num_samples() const;
  double dt() const { return 1.0 / sample_rate_hz; }
};

/// Rotating-frame spin values seen by one pulse.
struct AtomicDraw {
  double jz12 = 0.0;
  double jy12 = 0.0;
};

/// Lock-in outputs as amplitudes: a pure A cos(Omega t) gives (A, 0).
struct Quadratures {
  double cos_component = 0.0;
  double sin_component = 0.0;
};

/// Per-sample shot-noise standard deviation. Chosen so that the spectral
/// (rms, amplitude / sqrt 2) quadratures of pure noise have variance
/// shot_var / 2 each.
double shot_noise_sample_sd(const DerivedParams& derived, const WaveformConfig& wf);

/// s(t) = shot noise + alpha (Jz12 cos(Omega t) + Jy12 sin(Omega t)).
std::vector<double> synthesize_photocurrent(const AtomicDraw& atomic_draw,
                                            const DerivedParams& derived,
                                            const WaveformConfig& wf, std::uint64_t rng_seed);

/// Noise-free variant, used to check the signal path.
std::vector<double> synthesize_signal(const AtomicDraw& atomic_draw, const DerivedParams& derived,
                                      const WaveformConfig& wf);

/// c = (2/T) sum s cos(Omega t) dt, s = (2/T) sum s sin(Omega t) dt.
Quadratures lockin_demodulate(std::span<const double> series, const WaveformConfig& wf);

/// Amplitude quadratures -> the rms spectral components the variances refer to.
inline Quadratures spectral_components(const Quadratures& q) {
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  return {q.cos_component * inv_sqrt2, q.sin_component * inv_sqrt2};
}

struct VarianceEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_runs = 0;
};

/// Unbiased sample variance (one-pass Welford) with Gaussian stderr
/// value * sqrt(2 / n).
VarianceEstimate estimate_variance(std::span<const double> samples);

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double intercept_stderr = 0.0;
  double slope_stderr = 0.0;
  std::vector<double> residuals;
};

struct SweepPoint {
  double jx = 0.0;
  double delta = 0.0;
  double std_error = 0.0;
};

/// Ordinary least squares delta = intercept + slope * jx.
LineFit fit_css_line(std::span<const SweepPoint> points);

enum class McMode { analytic, waveform };

struct McSettings {
  std::size_t n_runs = 10000;
  std::uint64_t master_seed = 1;
  McMode mode = McMode::analytic;
  /// Worker threads; results do not depend on this.
  unsigned threads = 1;

  bool operator==(const McSettings&) const = default;
};

/// Readout that realizes the records through the waveform chain: the atomic
/// part is drawn from the coupled state, the shot noise is synthesized, and
/// the lock-in output is converted back to canonical units.
Readout waveform_readout(const DerivedParams& derived, const WaveformConfig& wf,
                         std::uint64_t rng_seed);

/// Fresh-CSS single-pulse variance Var(cos) + Var(sin), detector units, at
/// each Jx (Jx = 0 means no atoms).
std::vector<SweepPoint> css_noise_sweep(std::span<const double> jx_list,
                                        const ApparatusConfig& apparatus,
                                        const McSettings& settings);

struct EntangleVerifyResult {
  DerivedParams derived;
  VarianceEstimate cos_diff;
  VarianceEstimate sin_diff;
  double delta_epr = 0.0;
  double delta_epr_stderr = 0.0;
  DeltaEprPrediction predicted;
  /// Degree of entanglement of the conditional state after the delay.
  double state_xi = 0.0;
};

/// Per run: CSS, entangling pulse, decoherence over `tau_s`, verifying pulse.
/// Delta_EPR = Var(cos_I - cos_II) + Var(sin_I - sin_II).
EntangleVerifyResult run_entangle_verify(const ApparatusConfig& apparatus, double jx,
                                         double tau_s, const DecoherenceParams& decoherence,
                                         const McSettings& settings);

/// Runs fn(i) for i in [0, n) on `threads` workers. fn must only write to
/// slot i of its output.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace macroent
