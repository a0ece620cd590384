#include <gtest/gtest.h>

#include "macroent/config.hpp"
#include "macroent/errors.hpp"

using namespace macroent;

namespace {

const char* kMinimal = R"({
  "apparatus": {
    "wavelength_m": 852e-9, "linewidth_hz": 5e6, "beam_area_m2": 2e-4,
    "photon_number": 1e13, "detuning_hz": 700e6, "hyperfine_f": 4,
    "atom_number": 8.75e11, "polarization_p": 1.0
  }
})";

std::string expect_config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  ADD_FAILURE() << "no ConfigError";
  return {};
}

}  // namespace

TEST(Config, MinimalUsesDefaults) {
  const auto c = parse_config(kMinimal);
  EXPECT_EQ(c.apparatus, ApparatusConfig{});
  EXPECT_EQ(c.monte_carlo.n_runs, 10000u);
  EXPECT_FALSE(c.operating_point.has_value());
  EXPECT_DOUBLE_EQ(c.resolved_decoherence().t2_s, 0.03);
}

TEST(Config, ShippedConfigsRoundTrip) {
  for (const char* name : {"default_apparatus.json", "operating_point.json", "fig2_sweep.json"}) {
    const auto c = load_config(std::string(MACROENT_CONFIG_DIR) + "/" + name);
    const auto again = parse_config(serialize_config(c));
    EXPECT_EQ(c, again) << name;
    EXPECT_EQ(serialize_config(c), serialize_config(again)) << name;
  }
}

TEST(Config, OperatingPointResolvesShotNoise) {
  const auto c = load_config(std::string(MACROENT_CONFIG_DIR) + "/operating_point.json");
  const auto d = derive(c.resolved_apparatus());
  EXPECT_NEAR(d.eta_theory, 0.35, 1e-12);
  const auto dec = c.resolved_decoherence();
  EXPECT_TRUE(std::isinf(dec.t2_s));
  EXPECT_NEAR(dec.diffusion_rate, 0.65 / 1.2e-3, 1e-9);
  EXPECT_DOUBLE_EQ(dec.v_anti, 3.0);
}

TEST(Config, MissingFieldNamed) {
  const auto msg = expect_config_error(R"({"apparatus": {"wavelength_m": 852e-9}})");
  EXPECT_NE(msg.find("apparatus.linewidth_hz"), std::string::npos) << msg;
}

TEST(Config, UnknownFieldNamed) {
  std::string text = kMinimal;
  text.insert(text.rfind('}'), R"(, "monte_carlo": {"n_runz": 5})");
  const auto msg = expect_config_error(text);
  EXPECT_NE(msg.find("monte_carlo.n_runz"), std::string::npos) << msg;
}

TEST(Config, MalformedJsonReportsPosition) {
  const auto msg = expect_config_error("{\n  \"apparatus\": {\n    \"wavelength_m\": ,\n");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(Config, InvalidValuesRejected) {
  std::string text = kMinimal;
  text.insert(text.rfind('}'), R"(, "monte_carlo": {"n_runs": 1})");
  EXPECT_NE(expect_config_error(text).find("n_runs"), std::string::npos);
  text = kMinimal;
  text.insert(text.rfind('}'), R"(, "monte_carlo": {"mode": "exact"})");
  EXPECT_NE(expect_config_error(text).find("exact"), std::string::npos);
  text = kMinimal;
  text.insert(text.rfind('}'), R"(, "decoherence": {"loss_between_cells": 1.5})");
  EXPECT_NE(expect_config_error(text).find("loss_between_cells"), std::string::npos);
  text = kMinimal;
  text.insert(text.rfind('}'),
              R"(, "decoherence": {"diffusion_rate_per_s": 1, "diffusion_calibration": )"
              R"({"v_anti": 3, "xi_initial": 0.65, "t_zero_s": 1.2e-3}})");
  EXPECT_NE(expect_config_error(text).find("not both"), std::string::npos);
  text = kMinimal;
  text.insert(text.rfind('}'), R"(, "monte_carlo": {"master_seed": -4})");
  EXPECT_NE(expect_config_error(text).find("master_seed"), std::string::npos);
}

TEST(Config, FullSeedRangeSurvives) {
  std::string text = kMinimal;
  text.insert(text.rfind('}'), R"(, "monte_carlo": {"master_seed": 18446744073709551615})");
  const auto c = parse_config(text);
  EXPECT_EQ(c.monte_carlo.master_seed, 18446744073709551615ull);
  EXPECT_EQ(parse_config(serialize_config(c)), c);
}

TEST(Config, AtomPairsConvertToJx) {
  std::string text = kMinimal;
  text.insert(text.rfind('}'),
              R"(, "sweep": {"jx": [1e12], "atoms": [{"atom_number": 5e11, "polarization_p": 0.5}]})");
  const auto c = parse_config(text);
  const auto jx = c.sweep.jx_values();
  ASSERT_EQ(jx.size(), 2u);
  EXPECT_DOUBLE_EQ(jx[1], 1e12);
}

TEST(Config, LoadMissingFile) {
  EXPECT_THROW(load_config("/nonexistent/run.json"), ConfigError);
}
