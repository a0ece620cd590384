#include <gtest/gtest.h>

#include <random>

#include "macroent/analysis.hpp"
#include "macroent/errors.hpp"

using namespace macroent;

TEST(WitnessSpin, Cases) {
  const double jx = 3.5e12;
  EXPECT_FALSE(witness_spin(jx, jx, jx));
  EXPECT_TRUE(witness_spin(0.5 * jx, 0.5 * jx, jx));
  EXPECT_FALSE(witness_spin(1.9 * jx, 0.2 * jx, jx));
}

TEST(WitnessPhotocurrent, Cases) {
  EXPECT_TRUE(witness_photocurrent(0.83, 1.0));
  EXPECT_FALSE(witness_photocurrent(1.0, 1.0));
  EXPECT_TRUE(witness_photocurrent(2.0 * 0.35, 1.0));
}

TEST(XiOperational, Cases) {
  EXPECT_DOUBLE_EQ(xi_operational(5.0, 5.0, 1.0), 0.0);
  EXPECT_NEAR(xi_operational(0.70, 1.0, 0.35), 1.0 - 0.35 / 0.65, 1e-15);
  EXPECT_NEAR(xi_operational(0.70, 1.0, 0.35), 0.462, 5e-4);
  // Unclamped beyond the boundary.
  EXPECT_LT(xi_operational(1.5, 1.0, 0.35), 0.0);
}

TEST(XiOperational, NoAtomicSignal) {
  EXPECT_THROW(xi_operational(1.0, 1.0, 1.0), NumericalError);
  EXPECT_THROW(xi_operational(1.0, 0.5, 1.0), NumericalError);
}

TEST(XiExper, Cases) {
  auto e = xi_exper(0.83, 1.0, 0.35);
  EXPECT_NEAR(e.eta_exper, 0.48, 1e-12);
  EXPECT_NEAR(e.xi_exper, 0.52, 1e-12);
  e = xi_exper(0.70, 1.0, 0.35);
  EXPECT_NEAR(e.eta_exper, 0.35, 1e-12);
  EXPECT_NEAR(e.xi_exper, 0.65, 1e-12);
  e = xi_exper(0.35, 1.0, 0.35);
  EXPECT_DOUBLE_EQ(e.eta_exper, 0.0);
  EXPECT_DOUBLE_EQ(e.xi_exper, 1.0);
}

TEST(XiExper, MonotoneAndAboveOperational) {
  double last = 2.0;
  for (double d = 0.70; d < 2.0; d += 0.05) {
    const double x = xi_exper(d, 1.0, 0.35).xi_exper;
    EXPECT_LT(x, last);
    last = x;
    EXPECT_LE(xi_operational(d, 1.0, 0.35), x + 1e-15);
  }
}

TEST(Correlation, Cases) {
  EXPECT_NEAR(correlation_degree(0.25, 1.5), 1.0 - 0.25 / 1.5, 1e-15);
  EXPECT_NEAR(correlation_degree(0.25, 1.5), 0.833, 5e-4);
  EXPECT_DOUBLE_EQ(correlation_degree(1.2, 1.2), 0.0);
  EXPECT_DOUBLE_EQ(correlation_degree(0.0, 1.2), 1.0);
  EXPECT_THROW(correlation_degree(0.1, 0.0), ConfigError);
}

TEST(CalibrateDiffusion, CalibrationAnchor) {
  const auto c = calibrate_diffusion(3.0, 0.65, 1.2e-3);
  EXPECT_NEAR(c.rate_per_s * 1e-3, 0.5417, 1e-4);
  EXPECT_DOUBLE_EQ(c.v_anti, 3.0);
  // Linear model: xi(t) = xi0 - D t.
  EXPECT_NEAR(0.65 - c.rate_per_s * 0.6e-3, 0.325, 1e-12);
  EXPECT_LE(0.65 - c.rate_per_s * 1.2e-3, 1e-12);
}

TEST(CalibrateDiffusion, InvalidInputs) {
  EXPECT_THROW(calibrate_diffusion(3.0, 0.0, 1e-3), ConfigError);
  EXPECT_THROW(calibrate_diffusion(3.0, 1.0, 1e-3), ConfigError);
  EXPECT_THROW(calibrate_diffusion(3.0, 0.5, 0.0), ConfigError);
  EXPECT_THROW(calibrate_diffusion(0.5, 0.5, 1e-3), ConfigError);
}

TEST(Fidelity, Anchors) {
  EXPECT_NEAR(teleport_fidelity(0.48, 0.35), 1.0 / 1.83, 1e-15);
  EXPECT_NEAR(teleport_fidelity(0.48, 0.35), 0.546, 5e-4);
  EXPECT_DOUBLE_EQ(teleport_fidelity(0.0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(teleport_fidelity(1.0, 0.35, FidelityFormula::pure_epr), 0.5);
}

TEST(Fidelity, DecreasesInEachArgument) {
  for (double v = 0.0; v < 2.0; v += 0.1) {
    EXPECT_GT(teleport_fidelity(v, 0.3), teleport_fidelity(v + 0.05, 0.3));
    EXPECT_GT(teleport_fidelity(0.3, v), teleport_fidelity(0.3, v + 0.05));
  }
}

TEST(FidelityFormulaNames, RoundTrip) {
  for (auto f : {FidelityFormula::reconstructed, FidelityFormula::pure_epr}) {
    EXPECT_EQ(parse_fidelity_formula(to_string(f)), f);
  }
  EXPECT_THROW(parse_fidelity_formula("ref14"), ConfigError);
}

TEST(Report, OperatingPoint) {
  ReportInputs in;
  in.delta_css = 1.0;
  in.shot_var = 0.35;
  in.delta_epr = 0.83;
  in.jx = 3.5e12;
  const auto r = build_report(in);
  EXPECT_TRUE(r.witness_entangled);
  EXPECT_NEAR(r.xi_exper, 0.52, 1e-12);
  EXPECT_NEAR(r.eta_theory, 0.35, 1e-15);
  ASSERT_TRUE(r.fidelity.has_value());
  EXPECT_NEAR(*r.fidelity, 0.546, 5e-4);
  EXPECT_FALSE(r.correlation_degree.has_value());
}

TEST(Report, FullyDecohered) {
  ReportInputs in;
  in.delta_css = 1.0;
  in.shot_var = 0.35;
  in.delta_epr = 2.0;
  const auto r = build_report(in);
  EXPECT_FALSE(r.witness_entangled);
  EXPECT_LE(r.xi_exper, 0.0);
  EXPECT_LE(r.xi_operational, 0.0);
}

TEST(Report, FreshCssBoundary) {
  ReportInputs in;
  in.delta_css = 1.0;
  in.shot_var = 0.35;
  in.delta_epr = 1.0;
  in.v_corr = 0.25;
  in.v_uncorr = 1.5;
  const auto r = build_report(in);
  EXPECT_FALSE(r.witness_entangled);
  EXPECT_NEAR(*r.correlation_degree, 0.8333333333333334, 1e-15);
}

TEST(Report, WitnessEquivalenceUnderKappaMap) {
  // Delta_EPR = dS^2 + kappa dJ^2_EPR; Delta = dS^2 + 2 kappa Jx.
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double jx = 1e12 * (0.5 + 4.0 * u(gen));
    const double kappa = 1.0 + 5.0 * u(gen);
    const double shot = 1e12 * (0.1 + 20.0 * u(gen));
    const double vz = 2.0 * jx * u(gen);
    const double vy = 2.0 * jx * u(gen);
    const double delta_epr = shot + kappa * (vz + vy);
    const double delta = shot + 2.0 * kappa * jx;
    EXPECT_EQ(witness_photocurrent(delta_epr, delta), witness_spin(vz, vy, jx));
  }
}
