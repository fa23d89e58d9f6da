#include <gtest/gtest.h>

#include <functional>
#include <numbers>

#include "acbc/blockops.hpp"

using namespace acbc;

namespace model_tests {

ScenarioConfig wave(const std::string& extra_coeffs = "", std::size_t n = 4) {
  std::string coeffs = R"("c": "1", "rho": "1", "m": "1", "d": "0", "k": "1")";
  if (!extra_coeffs.empty()) coeffs = extra_coeffs;
  return parse_config(R"({"geometry": {"kind": "interval", "n_cells": )" + std::to_string(n) +
                      R"(}, "coefficients": {)" + coeffs + "}}");
}

ModelOperators ops_of(const ScenarioConfig& cfg) { return build_operators(cfg, build_mesh(cfg.geometry)); }

/// Extended vector sampling f at nodes and ghost points.
Vec sample_ext(const ModelOperators& ops, const std::function<double(double)>& f) {
  Vec e(static_cast<Eigen::Index>(ops.n_ext()));
  for (std::size_t i = 0; i < ops.n_nodes; ++i) e(static_cast<Eigen::Index>(i)) = f(ops.dof_points[i].x);
  for (std::size_t k = 0; k < ops.n_ghost; ++k)
    e(static_cast<Eigen::Index>(ops.n_nodes + k)) = f(ops.ghost_points[k].x);
  return e;
}

}  // namespace model_tests

TEST(Model, ConstantCoefficientsSampled) {
  ScenarioConfig cfg = model_tests::wave();
  CoefficientSet cs = sample_coefficients(cfg, build_mesh(cfg.geometry));
  EXPECT_EQ(cs.m.size(), 2);
  EXPECT_EQ(cs.m(0), cplx(1.0));
  EXPECT_EQ(cs.d(1), cplx(0.0));
  EXPECT_EQ(cs.k(0), cplx(1.0));
  EXPECT_DOUBLE_EQ(cs.c, 1.0);
}

TEST(Model, ZeroMassRejected) {
  ScenarioConfig cfg = model_tests::wave(R"("m": "0")");
  try {
    model_tests::ops_of(cfg);
    FAIL();
  } catch (const ModelError& e) {
    EXPECT_NE(std::string(e.what()).find("inf m > 0"), std::string::npos);
  }
}

TEST(Model, BoundaryFieldFollowsArclength) {
  ScenarioConfig cfg = parse_config(R"({"geometry": {"kind": "strip", "nx": 8, "ny": 4}, "coefficients": {"d": "z"}})");
  Mesh mesh = build_mesh(cfg.geometry);
  CoefficientSet cs = sample_coefficients(cfg, mesh);
  for (Eigen::Index i = 0; i < cs.d.size(); ++i) EXPECT_DOUBLE_EQ(cs.d(i).real(), mesh.bnd_arclength(i));
  EXPECT_DOUBLE_EQ(cs.d(8).real(), 1.0);
}

TEST(Model, ConstantsAreHarmonicWithZeroFlux) {
  ModelOperators ops = model_tests::ops_of(model_tests::wave());
  Vec one = Vec::Ones(static_cast<Eigen::Index>(ops.n_ext()));
  EXPECT_LT((ops.A_max * one).norm(), 1e-12);
  EXPECT_LT((ops.L * one).norm(), 1e-12);
}

TEST(Model, LinearFunctionFluxAndRobinTrace) {
  ModelOperators ops = model_tests::ops_of(model_tests::wave());
  Vec u = model_tests::sample_ext(ops, [](double x) { return x; });
  EXPECT_LT((ops.A_max * u).norm(), 1e-12);
  Vec Lu = ops.L * u, Ru = ops.R * u;
  EXPECT_NEAR(Lu(0).real(), -1.0, 1e-12);
  EXPECT_NEAR(Lu(1).real(), 1.0, 1e-12);
  EXPECT_NEAR(Ru(0).real(), -1.0, 1e-12);
  EXPECT_NEAR(Ru(1).real(), 2.0, 1e-12);
}

TEST(Model, RelationRLB2) {
  for (const char* c : {R"("rho": "2", "m": "1 + z", "d": "0.3", "k": "1")", R"("rho": "0", "m": "1", "d": "1", "k": "0")"}) {
    ModelOperators ops = model_tests::ops_of(model_tests::wave(c, 16));
    Mat lhs = ops.R - ops.L;
    lhs.leftCols(static_cast<Eigen::Index>(ops.n_nodes)) += ops.B2;
    EXPECT_EQ(fro(lhs), 0.0);
    EXPECT_EQ(fro(ops.B1), 0.0);
  }
  ScenarioConfig strip = parse_config(R"({"geometry": {"kind": "strip", "nx": 6, "ny": 5}})");
  ModelOperators so = model_tests::ops_of(strip);
  Mat lhs = so.R - so.L;
  lhs.leftCols(static_cast<Eigen::Index>(so.n_nodes)) += so.B2;
  EXPECT_EQ(fro(lhs), 0.0);
}

TEST(Model, BoundaryCouplingSigns) {
  ModelOperators ops = model_tests::ops_of(model_tests::wave(R"("rho": "3", "m": "2", "d": "0.5", "k": "4")", 8));
  EXPECT_NEAR(ops.B2(0, 0).real(), -1.5, 1e-15);
  EXPECT_NEAR(ops.B3(1, 1).real(), -2.0, 1e-15);
  EXPECT_NEAR(ops.B4(0, 0).real(), -0.25, 1e-15);
  ScenarioConfig cfg = model_tests::wave(R"("rho": "3", "m": "2", "d": "0.5", "k": "0")", 8);
  cfg.flags.b1_mode = B1Mode::minus_b4b2;
  ModelOperators o2 = model_tests::ops_of(cfg);
  EXPECT_LT(fro(o2.B1 + o2.B4 * o2.B2), 1e-15);
}

TEST(Model, A0IsNeumannWithoutRobinTerm) {
  ModelOperators ops = model_tests::ops_of(model_tests::wave(R"("rho": "0")", 32));
  Mat A0 = restriction_A0(ops);
  EXPECT_LT((A0 * Vec::Ones(A0.cols())).norm(), 1e-10);
  auto ev = weighted_hermitian_eigenvalues(A0, ops.dof_weights);
  std::vector<double> r;
  for (auto z : ev) r.push_back(z.real());
  std::sort(r.begin(), r.end(), std::greater<>());
  // second-order stencil: error about (k pi)^4 h^2 / 12
  const double h = 1.0 / 32;
  for (int k = 0; k < 4; ++k) {
    const double kp = k * std::numbers::pi;
    EXPECT_NEAR(r[static_cast<std::size_t>(k)], -kp * kp, 1.5 * std::pow(kp, 4) * h * h / 12 + 1e-9);
  }
}

TEST(Model, RobinTopEigenvalueMatchesTranscendentalRoot) {
  // -kappa^2 with kappa tan(kappa / 2) = gamma for the symmetric mode of u'' = mu u,
  // u' = -gamma u at both ends (outward derivative plus gamma u vanishing)
  const double gamma = 1.0;
  double lo = 1e-6, hi = 3.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (mid * std::tan(mid / 2) - gamma > 0 ? hi : lo) = mid;
  }
  double mu = -lo * lo;
  ModelOperators ops = model_tests::ops_of(model_tests::wave(R"("rho": "1", "m": "1")", 64));
  auto ev = weighted_hermitian_eigenvalues(restriction_A0(ops), ops.dof_weights);
  double top = -INFINITY;
  for (auto z : ev) top = std::max(top, z.real());
  EXPECT_NEAR(top, mu, 1e-3);
}

TEST(Model, DivergenceFormMatchesConstantAssembly) {
  auto div = [](const std::string& a) {
    return parse_config(R"({"model": "divergence", "geometry": {"n_cells": 16}, "coefficients": {"a": ")" + a +
                        R"(", "rho": "1", "m": "2", "d": "0.5", "k": "1"}})");
  };
  ModelOperators a = model_tests::ops_of(model_tests::wave(R"("c": "1.5", "rho": "1", "m": "2", "d": "0.5", "k": "1")", 16));
  ModelOperators b = model_tests::ops_of(div("2.25"));
  EXPECT_LT(fro(a.A_max - b.A_max), 1e-12 * fro(a.A_max));
  // L is the conormal flux a du/dn in divergence form, du/dn for the wave model
  EXPECT_LT(fro(2.25 * a.L - b.L), 1e-12 * fro(b.L));
  ModelOperators c = model_tests::ops_of(model_tests::wave(R"("c": "1", "rho": "1", "m": "2", "d": "0.5", "k": "1")", 16));
  ModelOperators e = model_tests::ops_of(div("1"));
  EXPECT_LT(fro(c.A_max - e.A_max), 1e-12);
  EXPECT_LT(fro(c.R - e.R), 1e-12);
  EXPECT_LT(fro(restriction_A0(c) - restriction_A0(e)), 1e-9);
}

TEST(Model, DivergenceFormSymmetricInQuadrature) {
  ScenarioConfig d = parse_config(
      R"j({"model": "divergence", "geometry": {"n_cells": 24}, "coefficients": {"a": "1 + 0.5*x + 0.2*sin(3*x)"}})j");
  ModelOperators ops = model_tests::ops_of(d);
  EXPECT_LT(hermitian_residual(diag(ops.dof_weights) * restriction_A0(ops)), 1e-12);
  EXPECT_THROW(model_tests::ops_of(parse_config(R"({"model": "divergence", "coefficients": {"a": "x - 0.5"}})")),
               ModelError);
}

TEST(Model, BiharmonicPinnedEnds) {
  ScenarioConfig cfg = parse_config(R"({"model": "biharmonic", "geometry": {"n_cells": 32}, "coefficients": {"s": "0"}})");
  ModelOperators ops = model_tests::ops_of(cfg);
  EXPECT_EQ(ops.n_nodes, 31u);
  for (const auto& p : ops.dof_points) {
    EXPECT_GT(p.x, 0.0);
    EXPECT_LT(p.x, 1.0);
  }
  EXPECT_EQ(fro(ops.R - ops.L), 0.0);  // s = 0 gives B2 = 0
  auto cubic = [](double x) { return x * (1 - x) * (x + 0.3); };
  Vec u = model_tests::sample_ext(ops, cubic);
  EXPECT_LT((ops.A_max * u).cwiseAbs().maxCoeff(), 1e-6);
  Mat A0 = restriction_A0(ops);
  EXPECT_LT(hermitian_residual(diag(ops.dof_weights) * A0), 1e-10);
  EXPECT_THROW(assemble_biharmonic_operator(build_strip_mesh(4, 4), {}), UnsupportedError);
}

TEST(Model, NeutralTransformExamples) {
  ModelOperators ops = model_tests::ops_of(model_tests::wave(R"("rho": "1", "m": "1", "d": "0.5", "k": "1")", 8));
  const auto nb = static_cast<Eigen::Index>(ops.n_b);
  ModelOperators same = apply_neutral_transform(ops, Mat::Zero(nb, nb));
  EXPECT_LT(fro(same.B2 - ops.B2) + fro(same.B4 - ops.B4) + fro(same.R - ops.R), 1e-15);
  ModelOperators half = apply_neutral_transform(ops, -Mat::Identity(nb, nb));
  EXPECT_LT(fro(half.B3 - 0.5 * ops.B3), 1e-15);
  EXPECT_LT(fro(half.B2 - 0.5 * ops.B2), 1e-15);
  EXPECT_THROW(apply_neutral_transform(ops, Mat::Identity(nb, nb)), AssumptionError);
  EXPECT_THROW(apply_neutral_transform(ops, Mat::Zero(3, 3)), DimensionError);

  Mesh strip = build_strip_mesh(4, 4);
  Mat M = default_boundary_operator(strip);
  ASSERT_EQ(M.rows(), 5);
  Mat S = (Mat::Identity(5, 5) - M).inverse();
  for (Eigen::Index i = 0; i < 5; ++i) EXPECT_NEAR(S.row(i).sum().real(), 1.0, 1e-12);
  EXPECT_EQ(fro(default_boundary_operator(build_interval_mesh(8, 1.0))), 0.0);
}

TEST(Model, NeutralTransformKeepsRealCouplings) {
  ScenarioConfig cfg = parse_config(R"({"geometry": {"kind": "strip", "nx": 8, "ny": 4}, "flags": {"neutral": true},
                                       "coefficients": {"d": "0.5 + z", "k": "1"}})");
  ModelOperators ops = model_tests::ops_of(cfg);
  EXPECT_EQ(ops.B3.imag().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(ops.B4.imag().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_TRUE(ops.neutral);
}

TEST(Model, AssumptionReport) {
  ModelOperators ops = model_tests::ops_of(model_tests::wave(R"("rho": "1", "m": "1", "d": "0.5", "k": "2")", 64));
  VerificationReport r = check_assumptions(ops);
  EXPECT_TRUE(r.all_pass());
  EXPECT_EQ(r.value("ghost_block_rank"), 2.0);
  EXPECT_LT(r.value("A0_weighted_symmetry"), 1e-12);
  EXPECT_DOUBLE_EQ(r.value("norm_B3"), 2.0);
  EXPECT_DOUBLE_EQ(r.value("norm_B4"), 0.5);
  EXPECT_LT(r.value("semibounded_shift"), 0.0);
}

TEST(Model, NeutralStripLadder) {
  ScenarioConfig cfg = parse_config(R"({"geometry": {"kind": "strip", "nx": 8, "ny": 8}, "flags": {"neutral": true}})");
  ModelOperators ops = model_tests::ops_of(cfg);
  VerificationReport r = check_assumptions(ops);
  EXPECT_TRUE(r.all_pass()) << r.to_json().dump(1);
  LadderResult lad = surjectivity_ladder(ops);
  ASSERT_TRUE(lad.found);
  EXPECT_LE(lad.lambda0, 65536.0);
  EXPECT_LT(lad.contraction, 1.0);
  EXPECT_TRUE(lad.monotone);
  EXPECT_LT(hermitian_residual(neutral_form_matrix(ops)), 1e-10);
}

TEST(Model, RankDeficientGhostBlock) {
  ModelOperators ops = model_tests::ops_of(model_tests::wave("", 8));
  ops.R.rightCols(2).setZero();
  EXPECT_THROW(ghost_maps(ops), AssumptionError);
  EXPECT_THROW(check_assumptions(ops), AssumptionError);
}
