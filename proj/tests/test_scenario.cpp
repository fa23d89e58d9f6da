#include <filesystem>

#include <gtest/gtest.h>

#include "acbc/blockops.hpp"

using namespace acbc;

namespace scenario_tests {

const char* kMinimal = R"({"model": "wave", "coefficients": {"c": "1", "rho": "1", "m": "1", "d": "0", "k": "1"}})";

std::vector<std::string> shipped() {
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(ACBC_SCENARIO_DIR))
    if (e.path().extension() == ".json") out.push_back(e.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace scenario_tests

TEST(Scenario, MinimalDefaults) {
  ScenarioConfig c = parse_config(scenario_tests::kMinimal);
  EXPECT_EQ(c.geometry.kind, MeshKind::interval);
  EXPECT_EQ(c.geometry.n_cells, 64u);
  EXPECT_EQ(c.model, ModelKind::wave);
  EXPECT_EQ(c.flags.b1_mode, B1Mode::zero);
  EXPECT_EQ(c.coeff("k"), "1");
  EXPECT_DOUBLE_EQ(c.solver.exclusion_rel, 1e-6);
  EXPECT_EQ(parse_config("{}").coeff("c"), default_coefficients(ModelKind::wave).at("c"));
}

TEST(Scenario, SpecialCaseNeedsB3Zero) {
  try {
    parse_config(R"({"coefficients": {"k": "1"}, "flags": {"b1_mode": "minus_b4b2", "special_case": true}})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("B3 = 0"), std::string::npos);
    EXPECT_EQ(e.exit_code(), ExitCode::hypothesis);
  }
  EXPECT_THROW(parse_config(R"({"coefficients": {"k": "0"}, "flags": {"b3_zero": true, "special_case": true}})"),
               ConfigError);
  EXPECT_NO_THROW(parse_config(
      R"({"coefficients": {"k": "0"}, "flags": {"b1_mode": "minus_b4b2", "b3_zero": true, "special_case": true}})"));
}

TEST(Scenario, RejectsDuplicateAndUnknownKeys) {
  EXPECT_THROW(parse_config(R"({"model": "wave", "model": "wave"})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"geometry": {"kind": "interval", "n_cells": 8, "n_cells": 9}})"), ConfigError);
  try {
    parse_config(R"({"geometry": {"kind": "interval", "cells": 8}})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("/geometry/cells"), std::string::npos);
  }
  EXPECT_THROW(parse_config(R"({"colour": 1})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"coefficients": {"a": "1"}})"), ConfigError);  // not a wave coefficient
  EXPECT_THROW(parse_config(R"({"coefficients": {"d": "1 +"}})"), ConfigError);
  EXPECT_THROW(parse_config("{not json"), ConfigError);
}

TEST(Scenario, CrossFieldInvariants) {
  EXPECT_THROW(parse_config(R"({"geometry": {"kind": "interval"}, "flags": {"neutral": true}})"), ConfigError);
  EXPECT_NO_THROW(parse_config(R"({"flags": {"neutral": true, "acknowledge_zero_m": true}})"));
  EXPECT_THROW(parse_config(R"({"geometry": {"kind": "strip"}, "model": "biharmonic"})"), UnsupportedError);
  EXPECT_THROW(parse_config(R"({"geometry": {"kind": "strip", "nx": 3}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"solver": {"tol": -1}})"), ConfigError);
}

TEST(Scenario, RoundTripIsIdempotent) {
  for (const auto& path : scenario_tests::shipped()) {
    ScenarioConfig a = load_config(path);
    ScenarioConfig b = parse_config(serialize_config(a).dump());
    EXPECT_EQ(a, b) << path;
    EXPECT_EQ(serialize_config(b).dump(), serialize_config(a).dump()) << path;
    EXPECT_EQ(config_hash(a), config_hash(b));
  }
}

TEST(Scenario, RandomInitialToken) {
  ScenarioConfig c = parse_config(R"j({"initial": "compatible-random(42)"})j");
  ASSERT_TRUE(c.initial.random_seed.has_value());
  EXPECT_EQ(*c.initial.random_seed, 42u);
  EXPECT_THROW(parse_config(R"({"initial": "random"})"), ConfigError);
}

TEST(Scenario, ShippedScenariosPassAssumptions) {
  auto files = scenario_tests::shipped();
  ASSERT_GE(files.size(), 3u);
  for (const auto& path : files) {
    ScenarioConfig cfg = load_config(path);
    Mesh mesh = build_mesh(cfg.geometry);
    ModelOperators ops = build_operators(cfg, mesh);
    VerificationReport r = check_assumptions(ops);
    EXPECT_TRUE(r.all_pass()) << path << "\n" << r.to_json().dump(1);
  }
}

TEST(Scenario, MissingFileIsIoError) {
  try {
    load_config("/nonexistent/config.json");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_EQ(e.exit_code(), ExitCode::io);
  }
}

TEST(Scenario, CompatibleRandomIsDeterministic) {
  ScenarioConfig c = parse_config(R"j({"initial": "compatible-random(9)", "geometry": {"n_cells": 16}})j");
  Scenario s1 = build_scenario(c), s2 = build_scenario(c);
  Vec a = initial_state_from_config(c.initial, s1.sys, 1e-10);
  Vec b = initial_state_from_config(c.initial, s2.sys, 1e-10);
  EXPECT_EQ((a - b).norm(), 0.0);
  std::mt19937_64 rng(1);
  double u = detail::uniform_pm1(rng);
  EXPECT_GE(u, -1.0);
  EXPECT_LT(u, 1.0);
}
