// Acceptance checks: one PASS/FAIL line per criterion; exit status 1 if any fail.

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "macroent/commands.hpp"
#include "macroent/errors.hpp"

using namespace macroent;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

unsigned worker_count() { return std::max(1u, std::min(8u, std::thread::hardware_concurrency())); }

RunConfig config_file(const std::string& name) {
  return load_config(std::string(MACROENT_CONFIG_DIR) + "/" + name);
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

// sigma gamma n / (4 F A Delta), written out independently of the library.
double hand_alpha(const ApparatusConfig& a) {
  const double sigma = a.wavelength_m * a.wavelength_m / (2.0 * std::numbers::pi);
  return sigma * a.linewidth_hz * a.photon_number /
         (4.0 * a.hyperfine_f * a.beam_area_m2 * a.detuning_hz);
}

Outcome criterion1() {
  const auto t0 = Clock::now();
  const auto text = cmd_params(config_file("default_apparatus.json"));
  const double secs = seconds_since(t0);
  const auto pos = text.find("alpha = ");
  if (pos == std::string::npos) return {false, "no alpha line"};
  const double alpha = std::stod(text.substr(pos + 8));
  return {alpha >= 2.4 && alpha <= 2.7 && secs < 1.0,
          fmt::format("alpha = {:.4f}, {:.3f} s", alpha, secs)};
}

Outcome criterion2() {
  const auto t0 = Clock::now();
  ApparatusConfig a;
  const double jx = 3.5e12;
  const double kappa = 0.5 * hand_alpha(a) * hand_alpha(a);
  double worst = 0.0;
  for (double a2 : {0.1, 0.5, 1.857, 5.0, 50.0}) {
    a.shot_noise_var = 2.0 * kappa * jx / a2;
    const auto d = derive_at(a, jx);
    const double expected = 1.0 - a.shot_noise_var / (a.shot_noise_var + 2.0 * kappa * jx);
    const auto s = run_pulse(css_pair(jx), PulseKind::entangling, d.a2, 0.0, expected_readout());
    const double xi_cov = state_xi(s.state);
    const auto pred = predicted_delta_epr(d, s.state);
    const double xi_ex = xi_exper(pred.delta_epr, d.delta_css, d.shot_var).xi_exper;
    worst = std::max({worst, std::abs(xi_cov - expected), std::abs(xi_ex - expected)});
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && secs < 1.0,
          fmt::format("max |xi - (1 - eta_theory)| = {:.2e}, {:.3f} s", worst, secs)};
}

Outcome criterion3() {
  auto c = config_file("fig2_sweep.json");
  c.monte_carlo.threads = worker_count();
  const auto a = c.resolved_apparatus();
  const double intercept_true = a.shot_noise_var;
  const double slope_true = hand_alpha(a) * hand_alpha(a);
  const auto t0 = Clock::now();
  const auto rows = parse_csv(cmd_fig2(c));
  const double secs = seconds_since(t0);
  double intercept = NAN;
  double slope = NAN;
  std::size_t points = 0;
  for (const auto& r : rows) {
    if (r[0] == "intercept") {
      intercept = std::stod(r[1]);
    } else if (r[0] == "slope") {
      slope = std::stod(r[1]);
    } else if (r[0] != "jx") {
      ++points;
    }
  }
  const double ei = intercept / intercept_true - 1.0;
  const double es = slope / slope_true - 1.0;
  return {points == 6 && c.monte_carlo.n_runs == 10000 && std::abs(ei) <= 0.03 &&
              std::abs(es) <= 0.03 && secs < 30.0,
          fmt::format("{} points x {} runs; intercept {:+.2f}%, slope {:+.2f}%, {:.1f} s", points,
                      c.monte_carlo.n_runs, 100 * ei, 100 * es, secs)};
}

Outcome criterion4() {
  auto c = config_file("operating_point.json");
  c.monte_carlo.threads = worker_count();
  const auto a = c.resolved_apparatus();
  const auto dec = c.resolved_decoherence();
  const auto t0 = Clock::now();
  const auto r = run_entangle_verify(a, 3.5e12, 0.5e-3, dec, c.monte_carlo);
  const double secs = seconds_since(t0);
  const auto ex = xi_exper(r.delta_epr, r.derived.delta_css, r.derived.shot_var);
  const bool witness = witness_photocurrent(r.delta_epr, r.derived.delta_css);
  const bool pass = std::abs(ex.eta_exper - 0.48) <= 0.03 && std::abs(ex.xi_exper - 0.52) <= 0.03 &&
                    witness && secs < 60.0;
  return {pass, fmt::format("D = {:.4f}/ms, eta_exper = {:.4f}, xi_exper = {:.4f} "
                            "(model prediction {:.4f}), witness {}, {:.1f} s",
                            dec.diffusion_rate * 1e-3, ex.eta_exper, ex.xi_exper,
                            1.0 - (r.predicted.delta_epr - r.derived.shot_var) / r.derived.delta_css,
                            witness, secs)};
}

Outcome criterion5() {
  auto c = config_file("operating_point.json");
  c.monte_carlo.threads = worker_count();
  const auto a = c.resolved_apparatus();
  const auto r = run_entangle_verify(a, 3.5e12, 0.0, DecoherenceParams{}, c.monte_carlo);
  const double ratio = r.delta_epr / r.derived.delta_css;
  return {std::abs(ratio - 0.70) <= 0.02,
          fmt::format("Delta_EPR / Delta = {:.4f} +- {:.4f}", ratio,
                      r.delta_epr_stderr / r.derived.delta_css)};
}

Outcome criterion6() {
  auto c = config_file("operating_point.json");
  c.sweep.tau_s = {0.0, 0.3e-3, 0.6e-3, 0.9e-3, 1.2e-3, 1.3e-3, 1.5e-3, 2.0e-3, 3.0e-3};
  const auto rows = parse_csv(cmd_lifetime(c));
  double xi06 = NAN;
  bool collapsed = true;
  bool witness_late = false;
  // Exact arithmetic gives xi(1.2 ms) = 0; allow for the last-bit rounding of
  // 0.65 - D * 1.2e-3.
  constexpr double kRounding = 1e-12;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double tau = std::stod(rows[i][0]);
    const double xi = std::stod(rows[i][1]);
    if (std::abs(tau - 0.6e-3) < 1e-12) xi06 = xi;
    if (tau >= 1.2e-3 - 1e-12) {
      collapsed = collapsed && xi <= kRounding;
      witness_late = witness_late || rows[i][4] == "true";
    }
  }
  return {std::abs(xi06 - 0.325) <= 0.01 && collapsed && !witness_late,
          fmt::format("xi(0.6 ms) = {:.4f}; xi <= 0 for tau >= 1.2 ms: {}; witness true "
                      "at tau >= 1.2 ms: {}",
                      xi06, collapsed, witness_late)};
}

Outcome criterion7() {
  const double f = teleport_fidelity(0.48, 0.35);
  const double classical = teleport_fidelity(1.0, 0.0, FidelityFormula::pure_epr);
  return {std::abs(f - 0.546) < 5e-4 && f >= 0.53 && f <= 0.58 && classical == 0.5,
          fmt::format("F(0.48, 0.35) = {:.4f}; fallback F(V=1) = {}", f, classical)};
}

Outcome criterion8() {
  const double c = correlation_degree(0.25, 1.5);
  return {std::abs(c - 5.0 / 6.0) <= 1e-15 && std::round(c * 1000.0) == 833.0,
          fmt::format("1 - 0.25/1.5 = {:.6f}", c)};
}

Outcome criterion9() {
  std::mt19937_64 gen(20240601);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double min_nu = INFINITY;
  const std::vector<std::string> system = {"a", "b"};
  for (int seq = 0; seq < 1000; ++seq) {
    auto st = vacuum_state(system);
    for (int step = 0; step < 6; ++step) {
      switch (gen() % 4) {
        case 0:
          st = apply_linear_map(st, LinearMap::unitary(single_mode_squeezer(2, gen() % 2, u(gen))));
          break;
        case 1:
          st = apply_linear_map(st, LinearMap::unitary(beam_splitter(2, 0, 1, 3.0 * u(gen))));
          break;
        case 2: {
          Matrix noise = Matrix::Zero(4, 4);
          for (int i = 0; i < 4; ++i) noise(i, i) = std::abs(n(gen));
          const double d = 0.5 + 0.5 * std::abs(u(gen));
          st = apply_linear_map(st, LinearMap::channel(d * Matrix::Identity(4, 4),
                                                       noise + (1 - d * d) * 0.5 *
                                                                   Matrix::Identity(4, 4)));
          break;
        }
        default: {
          // Meter read-out: couple, measure the meter, trace it out.
          auto joint = with_vacuum_modes(st, {"meter"});
          Matrix m = Matrix::Identity(6, 6);
          const double g = 2.0 * u(gen);
          const std::size_t target = gen() % 2;
          m(x_index(2), x_index(target)) = g;
          m(p_index(target), p_index(2)) = -g;
          joint = apply_linear_map(joint, LinearMap::unitary(m));
          const auto obs = quadrature_observable(
              6, {{x_index(2), 1.0}, {p_index(2), 0.3 * u(gen)}}, std::abs(0.2 * n(gen)));
          joint = condition_on_observable(joint, obs, n(gen));
          st = reduced_state(joint, system);
          break;
        }
      }
      min_nu = std::min(min_nu, symplectic_eigenvalues(st).front());
    }
  }

  double qnd_drift = 0.0;
  for (int i = 0; i < 100; ++i) {
    auto atoms = css_pair(3.5e12).atoms;
    atoms = apply_linear_map(atoms, LinearMap::unitary(single_mode_squeezer(2, gen() % 2, u(gen))));
    atoms = apply_linear_map(atoms, LinearMap::unitary(beam_splitter(2, 0, 1, 3.0 * u(gen))));
    const ProtocolState s{atoms, atoms, 3.5e12, {}};
    const auto after = faraday_pass(s, 3.0 + 2.0 * u(gen), 0.1 * (i % 3));
    const double before_v = spin_sum_variances(s).jz12;
    qnd_drift = std::max(qnd_drift, std::abs(spin_sum_variances(after.state).jz12 / before_v - 1.0));
  }

  const auto css = css_pair(3.5e12);
  const double v0 = spin_sum_variances(css).jy12;
  const double v_eps0 = spin_sum_variances(faraday_pass(css, 1.857, 0.0).state).jy12;
  bool growing = true;
  double last = v_eps0;
  std::string grow_list;
  for (double eps : {0.05, 0.1, 0.2}) {
    const double v = spin_sum_variances(faraday_pass(css, 1.857, eps).state).jy12;
    growing = growing && v > last;
    last = v;
    grow_list += fmt::format(" {:.4f}", v / v0);
  }
  const double conserved = std::abs(v_eps0 / v0 - 1.0);
  return {min_nu >= 0.5 - 1e-9 && qnd_drift <= 1e-12 && conserved <= 1e-12 && growing,
          fmt::format("min nu = {:.12f}; Var(Jz12) drift {:.1e}; back-action sum at eps=0 "
                      "drift {:.1e}, growth at eps=0.05/0.1/0.2:{}",
                      min_nu, qnd_drift, conserved, grow_list)};
}

Outcome criterion10() {
  const auto t0 = Clock::now();
  ApparatusConfig a;
  const double kappa = 0.5 * hand_alpha(a) * hand_alpha(a);
  double worst = 0.0;
  int cells = 0;
  std::size_t k = 0;
  for (double jx : {1.0e12, 3.5e12, 5.0e12}) {
    for (double a2 : {0.5, 1.857, 5.0}) {
      a.shot_noise_var = 2.0 * kappa * jx / a2;
      McSettings mc;
      mc.n_runs = 2000;
      mc.threads = worker_count();
      mc.master_seed = derive_seed(101, k++);
      const std::vector<double> grid = {jx};
      const auto an = css_noise_sweep(grid, a, mc);
      mc.mode = McMode::waveform;
      mc.master_seed = derive_seed(202, k);
      const auto wv = css_noise_sweep(grid, a, mc);
      const double z = std::abs(an[0].delta - wv[0].delta) /
                       std::hypot(an[0].std_error, wv[0].std_error);
      worst = std::max(worst, z);
      ++cells;
    }
  }
  const double secs = seconds_since(t0);
  return {cells == 9 && worst <= 4.0 && secs < 300.0,
          fmt::format("{} grid cells, worst |difference| = {:.2f} combined stderr, {:.1f} s",
                      cells, worst, secs)};
}

Outcome criterion11() {
  auto c = config_file("operating_point.json");
  c.monte_carlo.n_runs = 2000;
  c.monte_carlo.threads = 1;
  const auto first = cmd_fig3(c);
  const auto second = cmd_fig3(c);
  c.monte_carlo.threads = worker_count() + 2;
  const auto parallel = cmd_fig3(c);
  return {first == second && first == parallel && !first.empty(),
          fmt::format("{} bytes; repeat identical: {}; threads 1 vs {} identical: {}",
                      first.size(), first == second, c.monte_carlo.threads, first == parallel)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"coupling constant", criterion1},
      {"analytic entanglement identity", criterion2},
      {"CSS line recovery", criterion3},
      {"operating-point reproduction", criterion4},
      {"floor check", criterion5},
      {"lifetime trace", criterion6},
      {"fidelity anchor", criterion7},
      {"correlation comparison", criterion8},
      {"physics property suite", criterion9},
      {"mode equivalence", criterion10},
      {"determinism", criterion11},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    fmt::print("{} criterion {}: {}: {}\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
               o.detail);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
