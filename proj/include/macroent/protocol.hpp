#pragma once

// Pulse-sequence engine for two oppositely polarized spin ensembles.
//
// Atomic modes, in canonical units:
//   atom1: X1 = Jz1 / sqrt(Jx),  P1 =  Jy1 / sqrt(Jx)
//   atom2: X2 = Jz2 / sqrt(Jx),  P2 = -Jy2 / sqrt(Jx)   (Jx2 = -Jx)
// so Jz1 + Jz2 = sqrt(Jx) (X1 + X2) and Jy1 + Jy2 = sqrt(Jx) (P1 - P2). The two
// measured sums commute.
//
// Light records are in shot-normalized canonical units: a vacuum quadrature
// has variance 1/2, and multiplying by sqrt(shot_var) gives detector units.

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "macroent/gaussian.hpp"
#include "macroent/params.hpp"

namespace macroent {

inline const std::string kAtom1 = "atom1";
inline const std::string kAtom2 = "atom2";

enum class PulseKind { entangling, verifying };

struct PulseRecord {
  PulseKind kind = PulseKind::entangling;
  /// cos(Omega t) quadrature of the output Sy.
  double cos_value = 0.0;
  /// sin(Omega t) quadrature of the output Sy.
  double sin_value = 0.0;
  double a2_used = 0.0;
  double loss_used = 0.0;
  /// Position in the pulse log; names this pulse's light modes in the history.
  std::size_t sequence = 0;
};

struct DecoherenceParams {
  /// Transverse relaxation time; +infinity disables the channel.
  double t2_s = std::numeric_limits<double>::infinity();
  /// Growth rate of the squeezed-direction variance (CSS units) per second.
  double diffusion_rate = 0.0;
  /// Optical power loss between cell 1 and cell 2.
  double loss_between_cells = 0.0;
  /// Saturation ceiling for diffusion (CSS units).
  double v_anti = 3.0;

  void validate() const;
};

struct ProtocolState {
  /// Conditional state of the two ensembles given every record so far.
  GaussianState atoms;
  /// Unconditional joint state of the ensembles and the light modes of every
  /// pulse; its light x-quadratures carry the law of the records.
  GaussianState history;
  double jx = 0.0;
  std::vector<PulseRecord> pulse_log;
};

/// Two ensembles in coherent spin states.
ProtocolState css_pair(double jx);

/// Adds classical spin noise of `extra` (in units of Jx) to both Var(Jz12) and
/// Var(Jy12).
ProtocolState add_classical_spin_noise(const ProtocolState& state, double extra);

// Atomic collective-variable observables over a state whose first two modes
// are atom1 and atom2.
Observable jz12_observable(std::size_t dim);  // X1 + X2
Observable jy12_observable(std::size_t dim);  // P1 - P2

struct SpinSumVariances {
  double jz12 = 0.0;  // Var(Jz1 + Jz2), physical units
  double jy12 = 0.0;  // Var(Jy1 + Jy2), physical units
};

SpinSumVariances spin_sum_variances(const ProtocolState& state);

/// 1 - (Var(Jz12) + Var(Jy12)) / (2 Jx) for the conditional state.
double state_xi(const ProtocolState& state);

/// Larmor precession of both ensembles by `angle` about the field axis.
Matrix larmor_rotation(std::size_t modes, double angle);

/// Single QND pass of one light mode through both cells: Sy picks up
/// a (X1 + X2) / sqrt(2); Jy1 and Jy2 receive opposite back-action from Sz.
/// A fraction `loss` of the light power is replaced by vacuum between cells.
std::vector<LinearMap> faraday_maps(std::size_t modes, std::size_t light, double a2, double loss);

/// Both rotating-frame channels of one pulse: `light_cos` reads Jz12 and
/// `light_sin` reads Jy12.
std::vector<LinearMap> pulse_maps(std::size_t modes, std::size_t light_cos, std::size_t light_sin,
                                  double a2, double loss);

struct FaradayPassResult {
  ProtocolState state;
  /// Output light variances (canonical; vacuum = 1/2).
  double light_x_var = 0.0;
  double light_p_var = 0.0;
};

/// A single pass without read-out; the light is discarded afterwards.
FaradayPassResult faraday_pass(const ProtocolState& state, double a2, double loss);

/// Chooses the (cos, sin) outcomes given their joint Gaussian law.
using Readout = std::function<std::array<double, 2>(const Vector& mean, const Matrix& cov)>;

Readout sampled_readout(std::uint64_t rng_seed);
/// Records the expected outcome; the conditional covariance is the same as
/// for any sampled outcome.
Readout expected_readout();

enum class ConditionOrder { cos_first, sin_first };

struct PulseResult {
  ProtocolState state;
  PulseRecord record;
};

PulseResult run_pulse(const ProtocolState& state, PulseKind kind, double a2, double loss,
                      const Readout& readout, ConditionOrder order = ConditionOrder::cos_first);

PulseResult entangling_pulse(const ProtocolState& state, double a2, double loss,
                             std::uint64_t rng_seed);
PulseResult verifying_pulse(const ProtocolState& state, double a2, double loss,
                            std::uint64_t rng_seed);

/// T2 relaxation toward the CSS followed by squeezed-direction diffusion.
ProtocolState decohere(const ProtocolState& state, double tau_s, const DecoherenceParams& params);

struct DeltaEprPrediction {
  /// Expected Var(cos_I - cos_II) + Var(sin_I - sin_II), detector units.
  double delta_epr = 0.0;
  /// Shot noise of the verifying pulse.
  double verifying_shot = 0.0;
  /// kappa * dJ_EPR^2: entangling-pulse noise plus decoherence.
  double kappa_j_epr = 0.0;
};

/// Analytic pulse-difference variance for a verifying pulse applied to
/// `state` (with the last entangling pulse's a2 and loss).
DeltaEprPrediction predicted_delta_epr(const DerivedParams& derived, const ProtocolState& state);

}  // namespace macroent
