#include "macroent/protocol.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "macroent/errors.hpp"

namespace macroent {

namespace {

constexpr std::size_t kAtomModes = 2;

std::string light_label(std::size_t sequence, const char* channel) {
  return fmt::format("pulse{}_{}", sequence, channel);
}

Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }

GaussianState apply_all(GaussianState s, const std::vector<LinearMap>& maps) {
  for (const auto& m : maps) s = apply_linear_map(s, m);
  return s;
}

// Embeds an atoms-only (4x4) noise matrix into a larger state.
Matrix embed_atomic(const Matrix& atomic, std::size_t dim) {
  Matrix out = Matrix::Zero(ix(dim), ix(dim));
  out.topLeftCorner(2 * kAtomModes, 2 * kAtomModes) = atomic;
  return out;
}

Matrix atomic_scaling(std::size_t dim, double factor) {
  Matrix out = Matrix::Identity(ix(dim), ix(dim));
  out.topLeftCorner(2 * kAtomModes, 2 * kAtomModes) *= factor;
  return out;
}

void check_a2(double a2, double loss) {
  if (!(a2 >= 0.0) || !std::isfinite(a2)) {
    throw ConfigError(fmt::format("measurement strength a2 must be >= 0 (got {})", a2));
  }
  if (!(loss >= 0.0 && loss < 1.0)) {
    throw ConfigError(fmt::format("loss between cells must lie in [0, 1) (got {})", loss));
  }
}

}  // namespace

void DecoherenceParams::validate() const {
  if (!(t2_s > 0.0)) throw ConfigError("decoherence.t2_s must be positive");
  if (!(diffusion_rate >= 0.0) || !std::isfinite(diffusion_rate)) {
    throw ConfigError("decoherence.diffusion_rate must be >= 0");
  }
  if (!(loss_between_cells >= 0.0 && loss_between_cells < 1.0)) {
    throw ConfigError("decoherence.loss_between_cells must lie in [0, 1)");
  }
  if (!(v_anti >= 1.0) || !std::isfinite(v_anti)) {
    throw ConfigError("decoherence.v_anti must be >= 1 (CSS units)");
  }
}

ProtocolState css_pair(double jx) {
  if (!(jx > 0.0) || !std::isfinite(jx)) {
    throw ConfigError(fmt::format("css_pair: Jx must be positive (got {})", jx));
  }
  auto atoms = vacuum_state({kAtom1, kAtom2});
  return ProtocolState{atoms, atoms, jx, {}};
}

Observable jz12_observable(std::size_t dim) {
  return quadrature_observable(dim, {{x_index(0), 1.0}, {x_index(1), 1.0}});
}

Observable jy12_observable(std::size_t dim) {
  return quadrature_observable(dim, {{p_index(0), 1.0}, {p_index(1), -1.0}});
}

ProtocolState add_classical_spin_noise(const ProtocolState& state, double extra) {
  if (!(extra >= 0.0)) throw ConfigError("classical spin noise must be >= 0");
  const auto z = jz12_observable(2 * kAtomModes).coefficients;
  const auto y = jy12_observable(2 * kAtomModes).coefficients;
  // Var(X1 + X2) grows by `extra` when u = (X1 + X2)/sqrt(2) gains extra/2.
  const Matrix atomic = 0.25 * extra * (z * z.transpose() + y * y.transpose());
  ProtocolState out = state;
  out.atoms = apply_linear_map(
      state.atoms, LinearMap::channel(Matrix::Identity(4, 4), embed_atomic(atomic, 4)));
  out.history = apply_linear_map(
      state.history, LinearMap::channel(Matrix::Identity(ix(state.history.dim()),
                                                         ix(state.history.dim())),
                                        embed_atomic(atomic, state.history.dim())));
  return out;
}

SpinSumVariances spin_sum_variances(const ProtocolState& state) {
  const auto dim = state.atoms.dim();
  return {state.jx * observable_moments(state.atoms, jz12_observable(dim)).variance,
          state.jx * observable_moments(state.atoms, jy12_observable(dim)).variance};
}

double state_xi(const ProtocolState& state) {
  const auto v = spin_sum_variances(state);
  return 1.0 - (v.jz12 + v.jy12) / (2.0 * state.jx);
}

Matrix larmor_rotation(std::size_t modes, double angle) {
  // Both spins precess the same way in the lab; with P2 = -Jy2/sqrt(Jx) that is
  // a counter-rotation of mode 2 in canonical coordinates.
  return phase_rotation(modes, 0, angle) * phase_rotation(modes, 1, -angle);
}

std::vector<LinearMap> faraday_maps(std::size_t modes, std::size_t light, double a2, double loss) {
  check_a2(a2, loss);
  const auto dim = ix(2 * modes);
  const double g = std::sqrt(a2 / 2.0);
  const auto xl = ix(x_index(light));
  const auto pl = ix(p_index(light));

  auto cell = [&](std::size_t atom) {
    Matrix m = Matrix::Identity(dim, dim);
    m(xl, ix(x_index(atom))) = g;
    m(ix(p_index(atom)), pl) = -g;
    return LinearMap::unitary(std::move(m));
  };

  std::vector<LinearMap> maps;
  maps.push_back(cell(0));
  if (loss > 0.0) {
    Matrix m = Matrix::Identity(dim, dim);
    Matrix noise = Matrix::Zero(dim, dim);
    for (auto q : {xl, pl}) {
      m(q, q) = std::sqrt(1.0 - loss);
      noise(q, q) = loss * kVacuumVariance;
    }
    maps.push_back(LinearMap::channel(std::move(m), std::move(noise)));
  }
  maps.push_back(cell(1));
  return maps;
}

std::vector<LinearMap> pulse_maps(std::size_t modes, std::size_t light_cos, std::size_t light_sin,
                                  double a2, double loss) {
  auto maps = faraday_maps(modes, light_cos, a2, loss);
  // A quarter Larmor turn maps (Jz, Jy) -> (Jy, -Jz), so the same QND pass
  // reads Jy12 onto the sine channel.
  maps.push_back(LinearMap::unitary(larmor_rotation(modes, std::numbers::pi / 2)));
  for (auto& m : faraday_maps(modes, light_sin, a2, loss)) maps.push_back(std::move(m));
  maps.push_back(LinearMap::unitary(larmor_rotation(modes, -std::numbers::pi / 2)));
  return maps;
}

FaradayPassResult faraday_pass(const ProtocolState& state, double a2, double loss) {
  const std::string light = "pass_light";
  auto atoms = with_vacuum_modes(state.atoms, {light});
  atoms = apply_all(atoms, faraday_maps(atoms.num_modes(), atoms.mode(light), a2, loss));
  const auto l = atoms.mode(light);

  auto history = with_vacuum_modes(state.history, {light});
  history = apply_all(history, faraday_maps(history.num_modes(), history.mode(light), a2, loss));

  const std::vector<std::string> keep_atoms = {kAtom1, kAtom2};
  auto keep_history = state.history.mode_labels();

  FaradayPassResult out{ProtocolState{reduced_state(atoms, keep_atoms),
                                      reduced_state(history, keep_history), state.jx,
                                      state.pulse_log},
                        atoms.cov()(ix(x_index(l)), ix(x_index(l))),
                        atoms.cov()(ix(p_index(l)), ix(p_index(l)))};
  return out;
}

Readout sampled_readout(std::uint64_t rng_seed) {
  return [rng_seed](const Vector& mean, const Matrix& cov) {
    Rng rng(rng_seed);
    const Vector v = sample_gaussian(mean, cov, rng);
    return std::array<double, 2>{v(0), v(1)};
  };
}

Readout expected_readout() {
  return [](const Vector& mean, const Matrix&) { return std::array<double, 2>{mean(0), mean(1)}; };
}

PulseResult run_pulse(const ProtocolState& state, PulseKind kind, double a2, double loss,
                      const Readout& readout, ConditionOrder order) {
  check_a2(a2, loss);
  const std::size_t sequence = state.pulse_log.size();
  const std::string cos_label = light_label(sequence, "cos");
  const std::string sin_label = light_label(sequence, "sin");

  auto coupled = with_vacuum_modes(state.atoms, {cos_label, sin_label});
  coupled = apply_all(coupled, pulse_maps(coupled.num_modes(), coupled.mode(cos_label),
                                          coupled.mode(sin_label), a2, loss));
  const auto dim = coupled.dim();
  const std::array<Observable, 2> observables = {
      quadrature_observable(dim, {{x_index(coupled.mode(cos_label)), 1.0}}),
      quadrature_observable(dim, {{x_index(coupled.mode(sin_label)), 1.0}})};
  const auto [mean, cov] = joint_moments(coupled, observables);
  const auto values = readout(mean, cov);

  GaussianState conditioned = coupled;
  if (order == ConditionOrder::cos_first) {
    conditioned = condition_on_observable(conditioned, observables[0], values[0]);
    conditioned = condition_on_observable(conditioned, observables[1], values[1]);
  } else {
    conditioned = condition_on_observable(conditioned, observables[1], values[1]);
    conditioned = condition_on_observable(conditioned, observables[0], values[0]);
  }

  auto history = with_vacuum_modes(state.history, {cos_label, sin_label});
  history = apply_all(history, pulse_maps(history.num_modes(), history.mode(cos_label),
                                          history.mode(sin_label), a2, loss));

  const std::vector<std::string> keep = {kAtom1, kAtom2};
  PulseRecord record{kind, values[0], values[1], a2, loss, sequence};
  ProtocolState next{reduced_state(conditioned, keep), std::move(history), state.jx,
                     state.pulse_log};
  next.pulse_log.push_back(record);
  return {std::move(next), record};
}

PulseResult entangling_pulse(const ProtocolState& state, double a2, double loss,
                             std::uint64_t rng_seed) {
  return run_pulse(state, PulseKind::entangling, a2, loss, sampled_readout(rng_seed));
}

PulseResult verifying_pulse(const ProtocolState& state, double a2, double loss,
                            std::uint64_t rng_seed) {
  return run_pulse(state, PulseKind::verifying, a2, loss, sampled_readout(rng_seed));
}

ProtocolState decohere(const ProtocolState& state, double tau_s, const DecoherenceParams& params) {
  if (!(tau_s >= 0.0)) throw ConfigError(fmt::format("delay must be >= 0 (got {})", tau_s));
  params.validate();
  if (tau_s == 0.0) return state;

  ProtocolState out = state;
  const auto hdim = state.history.dim();

  if (std::isfinite(params.t2_s)) {
    const double d = std::exp(-tau_s / params.t2_s);
    const Matrix restore = (1.0 - d * d) * kVacuumVariance * Matrix::Identity(4, 4);
    out.atoms = apply_linear_map(out.atoms, LinearMap::channel(atomic_scaling(4, d), restore));
    out.history = apply_linear_map(
        out.history, LinearMap::channel(atomic_scaling(hdim, d), embed_atomic(restore, hdim)));
  }

  if (params.diffusion_rate > 0.0) {
    // Each measured sum direction u diffuses toward its conjugate w (the
    // anti-squeezed axis), saturating at min(v_anti, V_w). A CSS has V_u = V_w
    // and is left alone.
    const double s = 1.0 / std::sqrt(2.0);
    const std::array<std::pair<Vector, Vector>, 2> pairs = {
        std::pair{Vector((Vector(4) << s, 0, s, 0).finished()),    // (X1 + X2)/sqrt2
                  Vector((Vector(4) << 0, s, 0, s).finished())},   // (P1 + P2)/sqrt2
        std::pair{Vector((Vector(4) << 0, s, 0, -s).finished()),   // (P1 - P2)/sqrt2
                  Vector((Vector(4) << s, 0, -s, 0).finished())}};  // (X1 - X2)/sqrt2
    Matrix noise = Matrix::Zero(4, 4);
    for (const auto& [u, w] : pairs) {
      const double v_u = 2.0 * u.dot(out.atoms.cov() * u);
      const double v_w = 2.0 * w.dot(out.atoms.cov() * w);
      const double ceiling = std::min(params.v_anti, v_w);
      const double growth = std::clamp(ceiling - v_u, 0.0, params.diffusion_rate * tau_s);
      noise += 0.5 * growth * u * u.transpose();
    }
    out.atoms =
        apply_linear_map(out.atoms, LinearMap::channel(Matrix::Identity(4, 4), noise));
    out.history = apply_linear_map(
        out.history,
        LinearMap::channel(Matrix::Identity(ix(hdim), ix(hdim)), embed_atomic(noise, hdim)));
  }
  return out;
}

DeltaEprPrediction predicted_delta_epr(const DerivedParams& derived, const ProtocolState& state) {
  const auto it = std::find_if(state.pulse_log.rbegin(), state.pulse_log.rend(),
                               [](const PulseRecord& r) { return r.kind == PulseKind::entangling; });
  if (it == state.pulse_log.rend()) {
    throw ProtocolError("predicted_delta_epr needs a state prepared by an entangling pulse");
  }
  const PulseRecord& entangling = *it;
  const std::string cos_ii = "predicted_cos";
  const std::string sin_ii = "predicted_sin";
  auto h = with_vacuum_modes(state.history, {cos_ii, sin_ii});
  h = apply_all(h, pulse_maps(h.num_modes(), h.mode(cos_ii), h.mode(sin_ii), entangling.a2_used,
                              entangling.loss_used));
  const auto dim = h.dim();
  auto diff = [&](const char* channel, const std::string& verifying) {
    const auto first = h.mode(light_label(entangling.sequence, channel));
    const auto second = h.mode(verifying);
    return observable_moments(
               h, quadrature_observable(dim, {{x_index(first), 1.0}, {x_index(second), -1.0}}))
        .variance;
  };
  DeltaEprPrediction p;
  p.delta_epr = derived.shot_var * (diff("cos", cos_ii) + diff("sin", sin_ii));
  p.verifying_shot = derived.shot_var;
  p.kappa_j_epr = p.delta_epr - p.verifying_shot;
  return p;
}

}  // namespace macroent
