#include <gtest/gtest.h>

#include "acbc/mesh.hpp"

using namespace acbc;

TEST(Mesh, IntervalFourCells) {
  Mesh m = build_interval_mesh(4, 1.0);
  ASSERT_EQ(m.n_nodes(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(m.node_coords[i].x, 0.25 * static_cast<double>(i));
  EXPECT_DOUBLE_EQ(m.h[0], 0.25);
  EXPECT_EQ(m.gamma1, (std::vector<std::size_t>{0, 4}));
  EXPECT_TRUE(m.gamma0.empty());
  EXPECT_NEAR(m.vol_weights.sum(), 1.0, 1e-12);
}

TEST(Mesh, IntervalGhostCount) {
  Mesh m = build_interval_mesh(64, 1.0);
  EXPECT_EQ(m.n_nodes(), 65u);
  EXPECT_EQ(m.ghost_slots.size(), 2u);
  EXPECT_TRUE(m.ghost_slots[0].on_gamma1 && m.ghost_slots[1].on_gamma1);
}

TEST(Mesh, IntervalOneSidedGamma1) {
  Mesh m = build_interval_mesh(8, 2.0, std::vector<std::size_t>{8});
  EXPECT_EQ(m.gamma1, (std::vector<std::size_t>{8}));
  EXPECT_EQ(m.gamma0, (std::vector<std::size_t>{0}));
  EXPECT_FALSE(m.ghost_slots[0].on_gamma1);
  EXPECT_NEAR(m.vol_weights.sum(), 2.0, 1e-12);
  EXPECT_THROW(build_interval_mesh(8, 1.0, std::vector<std::size_t>{3}), ConfigError);
}

TEST(Mesh, IntervalRejectsBadInput) {
  EXPECT_THROW(build_interval_mesh(3, 1.0), ConfigError);
  EXPECT_THROW(build_interval_mesh(8, 0.0), ConfigError);
  EXPECT_THROW(build_interval_mesh(8, -1.0), ConfigError);
}

TEST(Mesh, StripCounts) {
  Mesh m = build_strip_mesh(4, 4);
  EXPECT_EQ(m.n_nodes(), 25u);
  EXPECT_EQ(m.gamma1.size(), 5u);
  EXPECT_NEAR(m.bnd_weights.sum(), 1.0, 1e-12);
  EXPECT_NEAR(m.vol_weights.sum(), 1.0, 1e-12);
  EXPECT_EQ(build_strip_mesh(8, 8).gamma1.size(), 9u);
  EXPECT_THROW(build_strip_mesh(3, 8), ConfigError);
}

TEST(Mesh, StripBoundaryPartition) {
  Mesh m = build_strip_mesh(6, 5);
  std::vector<std::size_t> all = m.gamma0;
  all.insert(all.end(), m.gamma1.begin(), m.gamma1.end());
  std::sort(all.begin(), all.end());
  EXPECT_EQ(std::adjacent_find(all.begin(), all.end()), all.end());  // disjoint
  EXPECT_EQ(all.size(), 2u * 7 + 2u * 4);                              // every boundary node once
  for (std::size_t n : m.gamma1) EXPECT_DOUBLE_EQ(m.node_coords[n].y, 1.0);
  EXPECT_GT(m.vol_weights.minCoeff(), 0.0);
  EXPECT_GT(m.bnd_weights.minCoeff(), 0.0);
}

TEST(Mesh, StripGhostsAdjacentToOneNode) {
  Mesh m = build_strip_mesh(4, 4);
  for (const auto& g : m.ghost_slots) {
    const Point& p = m.node_coords[g.node];
    double d = std::hypot(g.coord.x - p.x, g.coord.y - p.y);
    EXPECT_NEAR(d, 0.25, 1e-14);
    EXPECT_TRUE(g.coord.x < 0 || g.coord.x > 1 || g.coord.y < 0 || g.coord.y > 1);
  }
}

TEST(Mesh, InnerProductExamples) {
  Mesh m = build_interval_mesh(64, 1.0);
  const auto n = static_cast<Eigen::Index>(m.n_nodes());
  Vec one = Vec::Ones(n), x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = m.node_coords[static_cast<std::size_t>(i)].x;
  EXPECT_NEAR(std::abs(inner_product(m, one, one) - 1.0), 0.0, 1e-12);
  EXPECT_NEAR(inner_product(m, x, one).real(), 0.5, 1e-3);
  EXPECT_NEAR(inner_product(m, one, one, RVec::Constant(n, 2.0)).real(), 2.0, 1e-12);
  EXPECT_THROW(inner_product(m, Vec::Ones(3), one), DimensionError);
}

TEST(Mesh, InnerProductConjugateLinear) {
  Mesh m = build_interval_mesh(8, 1.0);
  Vec f = Vec::Random(9), g = Vec::Random(9);
  cplx a(0.3, -1.2);
  EXPECT_NEAR(std::abs(inner_product(m, a * f, g) - a * inner_product(m, f, g)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(inner_product(m, f, a * g) - std::conj(a) * inner_product(m, f, g)), 0.0, 1e-14);
  EXPECT_GT(inner_product(m, f, f).real(), 0.0);
  EXPECT_EQ(inner_product(m, Vec::Zero(9), Vec::Zero(9)), cplx(0.0));
}

TEST(Mesh, QuadratureSecondOrder) {
  auto err = [](std::size_t n) {
    Mesh m = build_interval_mesh(n, 1.0);
    Vec f(static_cast<Eigen::Index>(m.n_nodes()));
    for (std::size_t i = 0; i < m.n_nodes(); ++i) f(static_cast<Eigen::Index>(i)) = std::pow(m.node_coords[i].x, 2);
    return std::abs(inner_product(m, f, f).real() - 0.2);
  };
  double p = std::log2(err(32) / err(64));
  EXPECT_NEAR(p, 2.0, 0.1);
}
