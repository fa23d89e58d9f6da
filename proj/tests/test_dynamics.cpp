#include <gtest/gtest.h>

#include "acbc/dynamics.hpp"

using namespace acbc;

namespace dynamics_tests {

Scenario reference(std::size_t n, const std::string& name = "abc-1d") {
  ScenarioConfig cfg = load_config(std::string(ACBC_SCENARIO_DIR) + "/" + name + ".json");
  cfg.geometry.n_cells = n;
  return build_scenario(cfg);
}

Vec start(const Scenario& sc) { return initial_state_from_config(sc.config.initial, sc.sys, 1e-9); }

}  // namespace dynamics_tests

TEST(Dynamics, PropagatorIdentityAndGroupLaw) {
  Scenario sc = dynamics_tests::reference(16);
  Propagator P(sc.sys.Acal);
  const Eigen::Index N = sc.sys.dim();
  EXPECT_LT(fro(P.matrix(0.0) - Mat::Identity(N, N)), 1e-10);
  EXPECT_LT(scaled_diff(P.matrix(0.3) * P.matrix(0.2), P.matrix(0.5)), 1e-10);
  EXPECT_LT(scaled_diff(P.matrix(0.4) * P.matrix(-0.4), Mat::Identity(N, N)), 1e-9);
}

TEST(Dynamics, EigenRouteMatchesTaylor) {
  Scenario sc = dynamics_tests::reference(16);
  Propagator P(sc.sys.Acal, 1e12);
  EXPECT_EQ(P.route(), Propagator::Route::eigen);
  EXPECT_LT(scaled_diff(P.matrix(0.1), P.taylor(0.1)), 1e-8);
  Propagator T(sc.sys.Acal, 1e10, true);
  EXPECT_EQ(T.route(), Propagator::Route::taylor);
  Vec x = dynamics_tests::start(sc);
  EXPECT_LT((T.apply(0.1, x) - P.apply(0.1, x)).norm(), 1e-8 * x.norm());
}

TEST(Dynamics, ZeroStateStaysZero) {
  Scenario sc = dynamics_tests::reference(8);
  Trajectory tr = simulate(sc.sys, Vec::Zero(sc.sys.dim()), uniform_grid(1.0, 0.1));
  for (const auto& st : tr.states) EXPECT_EQ(st.norm(), 0.0);
  for (double e : tr.energy) EXPECT_EQ(e, 0.0);
}

TEST(Dynamics, ExactAgreesWithRk4) {
  Scenario sc = dynamics_tests::reference(32);
  Vec x = dynamics_tests::start(sc);
  std::vector<double> grid = uniform_grid(1.0, 1e-3);
  Trajectory ex = simulate(sc.sys, x, grid, Method::exact);
  Trajectory rk = simulate(sc.sys, x, grid, Method::rk4);
  EXPECT_FALSE(rk.cfl_warning);
  double worst = 0;
  for (std::size_t k = 0; k < grid.size(); ++k)
    worst = std::max(worst, state_norm(sc.sys, ex.states[k] - rk.states[k]));
  EXPECT_LT(worst, 1e-6);
}

TEST(Dynamics, EnergyIsQuadraticAndDissipated) {
  Scenario sc = dynamics_tests::reference(16);
  Vec x = dynamics_tests::start(sc);
  EXPECT_NEAR(energy(sc.sys, 2.0 * x), 4.0 * energy(sc.sys, x), 1e-12 * energy(sc.sys, x));
  EXPECT_LE(energy_rate(sc.sys, x), 0.0);
  Trajectory tr = simulate(sc.sys, x, uniform_grid(1.0, 0.01));
  for (std::size_t k = 1; k < tr.energy.size(); ++k) EXPECT_LE(tr.energy[k], tr.energy[k - 1] * (1 + 1e-12));
}

TEST(Dynamics, ConservativeEnergyConstant) {
  Scenario sc = dynamics_tests::reference(16, "abc-1d-conservative");
  Trajectory tr = simulate(sc.sys, dynamics_tests::start(sc), uniform_grid(2.0, 0.05));
  for (double e : tr.energy) EXPECT_NEAR(e, tr.energy.front(), 1e-9 * tr.energy.front());
}

TEST(Dynamics, EnergyUndefinedForRandomDamping) {
  ScenarioConfig cfg = parse_config(R"({"geometry": {"n_cells": 8}, "coefficients": {"d": "0.5", "k": "1"},
      "flags": {"b1_mode": "minus_b4b2"}})");
  Scenario sc = build_scenario(cfg);
  EXPECT_THROW(energy(sc.sys, Vec::Zero(sc.sys.dim())), ModelError);
  Trajectory tr = simulate(sc.sys, Vec::Zero(sc.sys.dim()), uniform_grid(0.1, 0.05));
  EXPECT_TRUE(tr.energy.empty());
}

TEST(Dynamics, TrajectoryConsistency) {
  Scenario sc = dynamics_tests::reference(32);
  Trajectory tr = simulate(sc.sys, dynamics_tests::start(sc), uniform_grid(0.5, 1e-3));
  VerificationReport r = trajectory_consistency(sc.sys, tr);
  EXPECT_LT(r.value("integral_residual"), 1e-5);
  EXPECT_LT(r.value("constraint_residual"), 1e-10);
  EXPECT_LT(r.value("second_derivative_residual"), 1e-3);
  std::vector<double> per = integral_residuals(sc.sys, tr);
  EXPECT_EQ(per.size(), tr.states.size());
  EXPECT_EQ(per.front(), 0.0);
}

TEST(Dynamics, RobinComparisonVanishesWithoutPerturbation) {
  ScenarioConfig cfg = parse_config(R"j({"geometry": {"n_cells": 16}, "coefficients": {"d": "0", "k": "0"},
      "initial": "compatible-random(4)"})j");
  Scenario sc = build_scenario(cfg);
  EXPECT_EQ(fro(sc.sys.A2cal), 0.0);
  RobinComparison rc = robin_comparison(sc.sys, dynamics_tests::start(sc), log_grid(1e-3, 1.0, 7));
  for (double d : rc.deviation) EXPECT_LT(d, 1e-10);
  EXPECT_THROW(robin_comparison(sc.sys, dynamics_tests::start(sc), {2.0}), ConfigError);
}

TEST(Dynamics, RobinDeviationIsFirstOrderInTime) {
  Scenario sc = dynamics_tests::reference(16);
  RobinComparison rc = robin_comparison(sc.sys, dynamics_tests::start(sc), log_grid(1e-4, 1e-2, 5));
  ASSERT_EQ(rc.ratio.size(), 5u);
  EXPECT_GT(rc.a2u0_norm, 0.0);
  EXPECT_NEAR(rc.ratio.front() / rc.a2u0_norm, 1.0, 1e-2);
}

TEST(Dynamics, GridValidation) {
  EXPECT_THROW(uniform_grid(1.0, 0.0), ConfigError);
  Scenario sc = dynamics_tests::reference(8);
  EXPECT_THROW(simulate(sc.sys, Vec::Zero(sc.sys.dim()), {0.0, 0.0}), ConfigError);
  EXPECT_THROW(simulate(sc.sys, Vec::Zero(3), {0.0}), DimensionError);
  std::vector<double> lg = log_grid(1e-3, 1.0, 31);
  EXPECT_NEAR(lg.front(), 1e-3, 1e-18);
  EXPECT_NEAR(lg.back(), 1.0, 1e-15);
}
