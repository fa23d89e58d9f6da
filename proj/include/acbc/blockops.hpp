#pragma once
// First-order generator on the state (u, v, x, y) with y = R u carried as a coordinate.
// Ghost values are reconstructed from (u, y), so every state vector is admissible.
//
//   u' = v
//   v' = A_max ext(u, y)
//   x' = L ext(u, y)
//   y' = (B1 + B4 B2) u + B3 x + B4 y

#include <cstdint>
#include <random>

#include "acbc/model.hpp"

namespace acbc {

struct BlockSystem {
  ModelOperators ops;
  GhostMaps gm;
  Mat A0;   // A on ker R
  Mat Ay;   // v-row coupling to y
  Mat Lu;   // x-row coupling to u (equals B2)
  Mat Ly;   // x-row coupling to y (identity)
  Mat Acal, A1cal, A2cal;
  Mat Abb0;  // restricted generator on (u, v, x)
  Mat Bbb;   // [B1 + B4 B2, 0, B3]
  std::vector<cplx> eig_A0;
  double a0_scale = 1.0;
  double exclusion_radius = 1e-6;  // in units of lambda^2
  double zero_radius = 1e-6;       // in units of lambda

  Eigen::Index n() const { return static_cast<Eigen::Index>(ops.n_nodes); }
  Eigen::Index b() const { return static_cast<Eigen::Index>(ops.n_b); }
  Eigen::Index dim() const { return 2 * n() + 2 * b(); }
  Eigen::Index ou() const { return 0; }
  Eigen::Index ov() const { return n(); }
  Eigen::Index ox() const { return 2 * n(); }
  Eigen::Index oy() const { return 2 * n() + b(); }

  bool b3_vanishes(double tol = 1e-12) const { return fro(ops.B3) <= tol; }
  bool b1_is_minus_b4b2(double tol = 1e-12) const {
    return fro(ops.B1 + ops.B4 * ops.B2) <= tol * std::max(1.0, fro(ops.B4 * ops.B2));
  }

  /// Extended vector with ghosts solving R ext = y.
  Vec extend(const Vec& u, const Vec& y) const {
    Vec e(static_cast<Eigen::Index>(ops.n_ext()));
    e.head(n()) = u;
    e.tail(static_cast<Eigen::Index>(ops.n_ghost)) = gm.E0 * u + gm.E1 * y;
    return e;
  }

  /// Generator without the x coordinate; valid when B3 = 0, where x does not feed back.
  Mat reduced_generator() const {
    if (!b3_vanishes()) throw AssumptionError("B3 = 0", "reduced (u, v, y) generator needs B3 = 0");
    const Eigen::Index N = n(), B = b();
    Mat r = Mat::Zero(2 * N + B, 2 * N + B);
    r.block(0, 0, 2 * N, 2 * N) = Acal.block(0, 0, 2 * N, 2 * N);
    r.block(0, 2 * N, 2 * N, B) = Acal.block(0, oy(), 2 * N, B);
    r.block(2 * N, 0, B, 2 * N) = Acal.block(oy(), 0, B, 2 * N);
    r.block(2 * N, 2 * N, B, B) = Acal.block(oy(), oy(), B, B);
    return r;
  }
};

/// A on ker R (ghosts eliminated with y = 0).
inline Mat restriction_A0(const ModelOperators& ops) { return restricted_A(ops, ghost_maps(ops)); }

inline BlockSystem assemble_block_generator(ModelOperators ops, double exclusion_rel = 1e-6) {
  BlockSystem s;
  s.gm = ghost_maps(ops);
  s.ops = std::move(ops);
  const ModelOperators& o = s.ops;
  const Eigen::Index n = s.n(), b = s.b();
  const auto g = static_cast<Eigen::Index>(o.n_ghost);
  s.A0 = restricted_A(o, s.gm);
  s.Ay = o.A_max.rightCols(g) * s.gm.E1;
  s.Lu = o.L.leftCols(n) + o.L.rightCols(g) * s.gm.E0;
  s.Ly = o.L.rightCols(g) * s.gm.E1;

  const Eigen::Index N = s.dim();
  s.Acal = Mat::Zero(N, N);
  s.Acal.block(s.ou(), s.ov(), n, n) = Mat::Identity(n, n);
  s.Acal.block(s.ov(), s.ou(), n, n) = s.A0;
  s.Acal.block(s.ov(), s.oy(), n, b) = s.Ay;
  s.Acal.block(s.ox(), s.ou(), b, n) = s.Lu;
  s.Acal.block(s.ox(), s.oy(), b, b) = s.Ly;
  s.Acal.block(s.oy(), s.ou(), b, n) = o.B1 + o.B4 * o.B2;
  s.Acal.block(s.oy(), s.ox(), b, b) = o.B3;
  s.Acal.block(s.oy(), s.oy(), b, b) = o.B4;
  s.A2cal = Mat::Zero(N, N);
  s.A2cal.bottomRows(b) = s.Acal.bottomRows(b);
  s.A1cal = s.Acal - s.A2cal;

  s.Abb0 = Mat::Zero(2 * n + b, 2 * n + b);
  s.Abb0.block(0, n, n, n) = Mat::Identity(n, n);
  s.Abb0.block(n, 0, n, n) = s.A0;
  s.Abb0.block(2 * n, 0, b, n) = o.B2;

  s.Bbb = Mat::Zero(b, 2 * n + b);
  s.Bbb.leftCols(n) = o.B1 + o.B4 * o.B2;
  s.Bbb.rightCols(b) = o.B3;

  s.eig_A0 = weighted_hermitian_eigenvalues(s.A0, o.dof_weights);
  double sc = 1.0;
  for (const auto& mu : s.eig_A0) sc = std::max(sc, std::abs(mu));
  s.a0_scale = sc;
  s.exclusion_radius = exclusion_rel * sc;
  s.zero_radius = exclusion_rel * std::sqrt(sc);
  return s;
}

inline Vec state_vector(const BlockSystem& s, const Vec& u, const Vec& v, const Vec& x, const Vec& y) {
  if (u.size() != s.n() || v.size() != s.n() || x.size() != s.b() || y.size() != s.b())
    throw DimensionError("state_vector: block sizes do not match the system");
  Vec st(s.dim());
  st << u, v, x, y;
  return st;
}

/// Initial state (f, g, h, y0) with y0 = j - B2 f, after checking the compatibility L f = j.
/// f_ext holds node values followed by ghost values.
inline Vec initial_state(const BlockSystem& s, const Vec& f_ext, const Vec& g, const Vec& h, const Vec& j,
                         double tol) {
  const auto ne = static_cast<Eigen::Index>(s.ops.n_ext());
  if (f_ext.size() != ne || g.size() != s.n() || h.size() != s.b() || j.size() != s.b())
    throw DimensionError("initial_state: block sizes do not match the system");
  double res = (s.ops.L * f_ext - j).norm();
  if (res > tol * std::max(1.0, j.norm()))
    throw ConfigError("initial data incompatible: || L f - j || = " + std::to_string(res));
  Vec f = f_ext.head(s.n());
  Vec y0 = j - s.ops.B2 * f;
  return state_vector(s, f, g, h, y0);
}

namespace detail {

/// Uniform double in [-1, 1) from the top 53 bits, identical on every platform.
inline double uniform_pm1(std::mt19937_64& rng) {
  return 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0;
}

inline Vec sample_points(const std::string& text, const std::vector<Point>& pts, const RVec* z = nullptr) {
  auto e = expr::Expression::parse(text);
  Vec out(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    auto I = static_cast<Eigen::Index>(i);
    out(I) = e.eval({pts[i].x, pts[i].y, z ? (*z)(I) : pts[i].x});
  }
  return out;
}

}  // namespace detail

/// Initial state described by a scenario: sampled expressions or compatible random data.
inline Vec initial_state_from_config(const InitialConfig& in, const BlockSystem& s, double tol) {
  const auto n = s.n(), b = s.b();
  const auto g = static_cast<Eigen::Index>(s.ops.n_ghost);
  Vec f_ext(n + g), gv(n), h(b), j(b);
  if (in.random_seed) {
    std::mt19937_64 rng(*in.random_seed);
    for (Eigen::Index i = 0; i < n + g; ++i) f_ext(i) = detail::uniform_pm1(rng);
    for (Eigen::Index i = 0; i < n; ++i) gv(i) = detail::uniform_pm1(rng);
    for (Eigen::Index i = 0; i < b; ++i) h(i) = detail::uniform_pm1(rng);
    j = s.ops.L * f_ext;
  } else {
    f_ext.head(n) = detail::sample_points(in.f, s.ops.dof_points);
    f_ext.tail(g) = detail::sample_points(in.f, s.ops.ghost_points);
    gv = detail::sample_points(in.g, s.ops.dof_points);
    h = detail::sample_points(in.h, s.ops.bnd_points, &s.ops.bnd_arclength);
    j = in.j == "compatible" ? Vec(s.ops.L * f_ext) : detail::sample_points(in.j, s.ops.bnd_points, &s.ops.bnd_arclength);
  }
  return initial_state(s, f_ext, gv, h, j, tol);
}

/// Everything a scenario describes, assembled once.
struct Scenario {
  ScenarioConfig config;
  Mesh mesh;
  BlockSystem sys;
};

inline Scenario build_scenario(const ScenarioConfig& cfg) {
  Scenario sc;
  sc.config = cfg;
  sc.mesh = build_mesh(cfg.geometry);
  sc.sys = assemble_block_generator(build_operators(cfg, sc.mesh), cfg.solver.exclusion_rel);
  return sc;
}

}  // namespace acbc
