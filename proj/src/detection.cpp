#include "macroent/detection.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

#include "macroent/errors.hpp"

namespace macroent {

WaveformConfig WaveformConfig::from_apparatus(const ApparatusConfig& apparatus,
                                              std::uint64_t seed) {
  return WaveformConfig{16.0 * apparatus.larmor_hz, apparatus.pulse_duration_s,
                        apparatus.larmor_hz, seed};
}

void WaveformConfig::validate() const {
  if (!(larmor_hz > 0.0) || !(sample_rate_hz > 0.0) || !(pulse_duration_s > 0.0)) {
    throw ConfigError("waveform rates and duration must be positive");
  }
  if (sample_rate_hz < 8.0 * larmor_hz) {
    throw ConfigError(fmt::format("sample rate {} Hz is below 8x the Larmor frequency {} Hz",
                                  sample_rate_hz, larmor_hz));
  }
  if (pulse_duration_s * larmor_hz < 20.0) {
    throw ConfigError(fmt::format("pulse covers {:.3g} Larmor periods; at least 20 are needed",
                                  pulse_duration_s * larmor_hz));
  }
}

std::size_t WaveformConfig::num_samples() const {
  const double periods = std::floor(pulse_duration_s * larmor_hz);
  return static_cast<std::size_t>(std::llround(periods * sample_rate_hz / larmor_hz));
}

double shot_noise_sample_sd(const DerivedParams& derived, const WaveformConfig& wf) {
  // Amplitude quadrature of white noise: Var = 2 sigma^2 / N; the rms
  // component is half that, and must equal shot_var / 2.
  return std::sqrt(static_cast<double>(wf.num_samples()) * derived.shot_var / 2.0);
}

std::vector<double> synthesize_signal(const AtomicDraw& atomic_draw, const DerivedParams& derived,
                                      const WaveformConfig& wf) {
  wf.validate();
  const std::size_t n = wf.num_samples();
  const double omega = 2.0 * std::numbers::pi * wf.larmor_hz;
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * wf.dt();
    s[i] = derived.alpha * (atomic_draw.jz12 * std::cos(omega * t) +
                            atomic_draw.jy12 * std::sin(omega * t));
  }
  return s;
}

std::vector<double> synthesize_photocurrent(const AtomicDraw& atomic_draw,
                                            const DerivedParams& derived,
                                            const WaveformConfig& wf, std::uint64_t rng_seed) {
  auto s = synthesize_signal(atomic_draw, derived, wf);
  const double sd = shot_noise_sample_sd(derived, wf);
  if (sd > 0.0) {
    Rng rng(rng_seed);
    for (auto& v : s) v += sd * rng.normal();
  }
  return s;
}

Quadratures lockin_demodulate(std::span<const double> series, const WaveformConfig& wf) {
  if (series.empty()) throw ConfigError("lock-in: empty series");
  if (series.size() != wf.num_samples()) {
    throw ConfigError(fmt::format("lock-in: series has {} samples, config expects {}",
                                  series.size(), wf.num_samples()));
  }
  const double omega = 2.0 * std::numbers::pi * wf.larmor_hz;
  const double dt = wf.dt();
  const double total = static_cast<double>(series.size()) * dt;
  double c = 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double t = static_cast<double>(i) * dt;
    c += series[i] * std::cos(omega * t);
    s += series[i] * std::sin(omega * t);
  }
  return {2.0 / total * c * dt, 2.0 / total * s * dt};
}

VarianceEstimate estimate_variance(std::span<const double> samples) {
  if (samples.size() < 2) throw ConfigError("variance estimate needs at least two samples");
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t n = 0;
  for (double x : samples) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }
  const double value = m2 / static_cast<double>(n - 1);
  return {value, value * std::sqrt(2.0 / static_cast<double>(n)), n};
}

LineFit fit_css_line(std::span<const SweepPoint> points) {
  if (points.size() < 2) throw NumericalError("line fit needs at least two points");
  const double n = static_cast<double>(points.size());
  double xbar = 0.0;
  double ybar = 0.0;
  for (const auto& p : points) {
    xbar += p.jx;
    ybar += p.delta;
  }
  xbar /= n;
  ybar /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& p : points) {
    sxx += (p.jx - xbar) * (p.jx - xbar);
    sxy += (p.jx - xbar) * (p.delta - ybar);
  }
  if (!(sxx > 0.0) || sxx <= 1e-24 * xbar * xbar * n) {
    throw NumericalError("line fit needs at least two distinct Jx values");
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  double ssr = 0.0;
  for (const auto& p : points) {
    const double r = p.delta - (fit.intercept + fit.slope * p.jx);
    fit.residuals.push_back(r);
    ssr += r * r;
  }
  if (points.size() > 2) {
    const double s2 = ssr / (n - 2.0);
    fit.slope_stderr = std::sqrt(s2 / sxx);
    fit.intercept_stderr = std::sqrt(s2 * (1.0 / n + xbar * xbar / sxx));
  } else {
    fit.slope_stderr = fit.intercept_stderr = std::numeric_limits<double>::quiet_NaN();
  }
  return fit;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  for (unsigned w = 0; w < threads; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += threads) fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  if (error) std::rethrow_exception(error);
}

Readout waveform_readout(const DerivedParams& derived, const WaveformConfig& wf,
                         std::uint64_t rng_seed) {
  return [derived, wf, rng_seed](const Vector& mean, const Matrix& cov) {
    Rng rng(rng_seed);
    // The records are shot noise (vacuum variance on each channel, independent
    // of everything else) plus the atomic signal.
    const Matrix atomic_cov = cov - kVacuumVariance * Matrix::Identity(2, 2);
    const Vector signal = sample_gaussian(mean, atomic_cov, rng);
    const double shot_sd = std::sqrt(derived.shot_var);
    AtomicDraw draw;
    if (derived.alpha > 0.0) {
      draw.jz12 = std::sqrt(2.0) * shot_sd * signal(0) / derived.alpha;
      draw.jy12 = std::sqrt(2.0) * shot_sd * signal(1) / derived.alpha;
    }
    const auto series = synthesize_photocurrent(draw, derived, wf, rng.engine()());
    const auto q = spectral_components(lockin_demodulate(series, wf));
    return std::array<double, 2>{q.cos_component / shot_sd, q.sin_component / shot_sd};
  };
}

namespace {

Readout make_readout(const McSettings& settings, const DerivedParams& derived,
                     const WaveformConfig& wf, std::uint64_t seed) {
  if (settings.mode == McMode::waveform) return waveform_readout(derived, wf, seed);
  return sampled_readout(seed);
}

void check_runs(const McSettings& settings, std::size_t minimum) {
  if (settings.n_runs < minimum) {
    throw ConfigError(fmt::format("Monte Carlo needs at least {} runs (got {})", minimum,
                                  settings.n_runs));
  }
}

// Initial pair for one Jx; Jx = 0 uses a nominal CSS that the zero-strength
// pulse never reads.
ProtocolState initial_pair(const DerivedParams& derived, const ApparatusConfig& apparatus) {
  if (derived.jx == 0.0) return css_pair(1.0);
  auto state = css_pair(derived.jx);
  if (apparatus.tech_noise_coeff > 0.0) {
    state = add_classical_spin_noise(state,
                                     apparatus.tech_noise_coeff * derived.jx / (2.0 * derived.kappa));
  }
  return state;
}

}  // namespace

std::vector<SweepPoint> css_noise_sweep(std::span<const double> jx_list,
                                        const ApparatusConfig& apparatus,
                                        const McSettings& settings) {
  check_runs(settings, 2);
  std::vector<SweepPoint> out;
  for (std::size_t k = 0; k < jx_list.size(); ++k) {
    const auto derived = derive_at(apparatus, jx_list[k]);
    const auto initial = initial_pair(derived, apparatus);
    const auto wf = WaveformConfig::from_apparatus(apparatus, 0);
    if (settings.mode == McMode::waveform) wf.validate();
    const std::uint64_t point_seed = derive_seed(settings.master_seed, k);
    std::vector<double> cos_values(settings.n_runs);
    std::vector<double> sin_values(settings.n_runs);
    parallel_for(settings.n_runs, settings.threads, [&](std::size_t i) {
      const auto readout = make_readout(settings, derived, wf, derive_seed(point_seed, i));
      const auto r = run_pulse(initial, PulseKind::entangling, derived.a2, 0.0, readout);
      const double shot_sd = std::sqrt(derived.shot_var);
      cos_values[i] = shot_sd * r.record.cos_value;
      sin_values[i] = shot_sd * r.record.sin_value;
    });
    const auto vc = estimate_variance(cos_values);
    const auto vs = estimate_variance(sin_values);
    out.push_back({derived.jx, vc.value + vs.value, std::hypot(vc.std_error, vs.std_error)});
  }
  return out;
}

EntangleVerifyResult run_entangle_verify(const ApparatusConfig& apparatus, double jx,
                                         double tau_s, const DecoherenceParams& decoherence,
                                         const McSettings& settings) {
  check_runs(settings, 100);
  decoherence.validate();
  if (!(jx > 0.0)) throw ConfigError("entangle-verify needs Jx > 0");
  EntangleVerifyResult result;
  result.derived = derive_at(apparatus, jx);
  const auto& d = result.derived;
  const double loss = decoherence.loss_between_cells;
  const auto initial = initial_pair(d, apparatus);
  const auto wf = WaveformConfig::from_apparatus(apparatus, 0);
  if (settings.mode == McMode::waveform) wf.validate();

  {
    auto prepared = run_pulse(initial, PulseKind::entangling, d.a2, loss, expected_readout());
    auto delayed = decohere(prepared.state, tau_s, decoherence);
    result.predicted = predicted_delta_epr(d, delayed);
    result.state_xi = state_xi(delayed);
  }

  std::vector<double> cos_diff(settings.n_runs);
  std::vector<double> sin_diff(settings.n_runs);
  const double shot_sd = std::sqrt(d.shot_var);
  parallel_for(settings.n_runs, settings.threads, [&](std::size_t i) {
    const std::uint64_t run_seed = derive_seed(settings.master_seed, i);
    const auto first = run_pulse(initial, PulseKind::entangling, d.a2, loss,
                                 make_readout(settings, d, wf, derive_seed(run_seed, 0)));
    const auto delayed = decohere(first.state, tau_s, decoherence);
    const auto second = run_pulse(delayed, PulseKind::verifying, d.a2, loss,
                                  make_readout(settings, d, wf, derive_seed(run_seed, 1)));
    cos_diff[i] = shot_sd * (first.record.cos_value - second.record.cos_value);
    sin_diff[i] = shot_sd * (first.record.sin_value - second.record.sin_value);
  });
  result.cos_diff = estimate_variance(cos_diff);
  result.sin_diff = estimate_variance(sin_diff);
  result.delta_epr = result.cos_diff.value + result.sin_diff.value;
  result.delta_epr_stderr = std::hypot(result.cos_diff.std_error, result.sin_diff.std_error);
  return result;
}

}  // namespace macroent
