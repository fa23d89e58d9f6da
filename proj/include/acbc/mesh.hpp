#pragma once
// Structured node meshes for the interval and the unit-square strip.
// Boundary nodes carry outward ghost slots so normal derivatives are central differences.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "acbc/linalg.hpp"

namespace acbc {

enum class MeshKind { interval, strip };

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct GhostSlot {
  std::size_t node = 0;  // boundary node the ghost mirrors
  int axis = 0;          // 0: x, 1: y
  int side = 0;          // 0: low end, 1: high end
  Point coord;
  bool on_gamma1 = false;
};

struct Mesh {
  MeshKind kind = MeshKind::interval;
  std::size_t nx = 0;  // cells along x
  std::size_t ny = 0;  // cells along y (0 for the interval)
  double length = 1.0;
  std::array<double, 2> h{0.0, 0.0};
  std::vector<Point> node_coords;
  std::vector<std::size_t> gamma0;
  std::vector<std::size_t> gamma1;
  std::vector<GhostSlot> ghost_slots;
  RVec vol_weights;
  RVec bnd_weights;    // aligned with gamma1
  RVec bnd_arclength;  // z coordinate of each gamma1 node

  std::size_t n_nodes() const { return node_coords.size(); }
  std::size_t dim() const { return kind == MeshKind::interval ? 1 : 2; }
  std::size_t cells(int axis) const { return axis == 0 ? nx : ny; }
  std::size_t node_index(std::size_t i, std::size_t j = 0) const { return j * (nx + 1) + i; }
  std::array<std::size_t, 2> node_ij(std::size_t p) const { return {p % (nx + 1), p / (nx + 1)}; }
};

namespace detail {

inline RVec trapezoid(std::size_t n_cells, double h) {
  RVec w = RVec::Constant(static_cast<Eigen::Index>(n_cells + 1), h);
  w(0) = w(static_cast<Eigen::Index>(n_cells)) = 0.5 * h;
  return w;
}

}  // namespace detail

/// Uniform mesh of [0, length]. gamma1 lists endpoint indices (default: both ends).
inline Mesh build_interval_mesh(std::size_t n_cells, double length,
                                std::optional<std::vector<std::size_t>> gamma1 = std::nullopt) {
  if (n_cells < 4) throw ConfigError("interval mesh needs n_cells >= 4, got " + std::to_string(n_cells));
  if (!(length > 0.0)) throw ConfigError("interval mesh needs length > 0");
  Mesh m;
  m.kind = MeshKind::interval;
  m.nx = n_cells;
  m.length = length;
  m.h = {length / static_cast<double>(n_cells), 0.0};
  for (std::size_t i = 0; i <= n_cells; ++i) m.node_coords.push_back({m.h[0] * static_cast<double>(i), 0.0});
  m.vol_weights = detail::trapezoid(n_cells, m.h[0]);

  std::vector<std::size_t> g1 = gamma1.value_or(std::vector<std::size_t>{0, n_cells});
  if (g1.empty()) throw ConfigError("gamma1 must contain at least one endpoint");
  std::sort(g1.begin(), g1.end());
  g1.erase(std::unique(g1.begin(), g1.end()), g1.end());
  for (auto p : g1)
    if (p != 0 && p != n_cells) throw ConfigError("gamma1 entry " + std::to_string(p) + " is not an endpoint");
  m.gamma1 = g1;
  for (std::size_t p : {std::size_t{0}, n_cells})
    if (std::find(g1.begin(), g1.end(), p) == g1.end()) m.gamma0.push_back(p);

  for (int side = 0; side < 2; ++side) {
    std::size_t node = side == 0 ? 0 : n_cells;
    GhostSlot g;
    g.node = node;
    g.axis = 0;
    g.side = side;
    g.coord = {side == 0 ? -m.h[0] : length + m.h[0], 0.0};
    g.on_gamma1 = std::find(g1.begin(), g1.end(), node) != g1.end();
    m.ghost_slots.push_back(g);
  }
  // Counting measure on the two boundary points.
  m.bnd_weights = RVec::Ones(static_cast<Eigen::Index>(g1.size()));
  m.bnd_arclength.resize(static_cast<Eigen::Index>(g1.size()));
  for (std::size_t k = 0; k < g1.size(); ++k) m.bnd_arclength(static_cast<Eigen::Index>(k)) = m.node_coords[g1[k]].x;
  return m;
}

/// Unit square with gamma1 the top edge (corners included as its endpoints).
/// Corner ghosts in the x direction belong to the side walls.
inline Mesh build_strip_mesh(std::size_t nx, std::size_t ny) {
  if (nx < 4 || ny < 4) throw ConfigError("strip mesh needs nx, ny >= 4");
  Mesh m;
  m.kind = MeshKind::strip;
  m.nx = nx;
  m.ny = ny;
  m.length = 1.0;
  m.h = {1.0 / static_cast<double>(nx), 1.0 / static_cast<double>(ny)};
  RVec wx = detail::trapezoid(nx, m.h[0]);
  RVec wy = detail::trapezoid(ny, m.h[1]);
  m.vol_weights.resize(static_cast<Eigen::Index>((nx + 1) * (ny + 1)));
  for (std::size_t j = 0; j <= ny; ++j)
    for (std::size_t i = 0; i <= nx; ++i) {
      m.node_coords.push_back({m.h[0] * static_cast<double>(i), m.h[1] * static_cast<double>(j)});
      m.vol_weights(static_cast<Eigen::Index>(m.node_index(i, j))) =
          wx(static_cast<Eigen::Index>(i)) * wy(static_cast<Eigen::Index>(j));
    }
  for (std::size_t i = 0; i <= nx; ++i) m.gamma1.push_back(m.node_index(i, ny));
  for (std::size_t j = 0; j <= ny; ++j)
    for (std::size_t i = 0; i <= nx; ++i) {
      bool boundary = i == 0 || i == nx || j == 0 || j == ny;
      if (boundary && j != ny) m.gamma0.push_back(m.node_index(i, j));
    }
  auto add = [&](std::size_t i, std::size_t j, int axis, int side, bool g1) {
    GhostSlot g;
    g.node = m.node_index(i, j);
    g.axis = axis;
    g.side = side;
    Point p = m.node_coords[g.node];
    double s = side == 0 ? -1.0 : 1.0;
    if (axis == 0) p.x += s * m.h[0]; else p.y += s * m.h[1];
    g.coord = p;
    g.on_gamma1 = g1;
    m.ghost_slots.push_back(g);
  };
  for (std::size_t j = 0; j <= ny; ++j) {
    add(0, j, 0, 0, false);
    add(nx, j, 0, 1, false);
  }
  for (std::size_t i = 0; i <= nx; ++i) {
    add(i, 0, 1, 0, false);
    add(i, ny, 1, 1, true);
  }
  m.bnd_weights = wx;
  m.bnd_arclength.resize(static_cast<Eigen::Index>(nx + 1));
  for (std::size_t i = 0; i <= nx; ++i) m.bnd_arclength(static_cast<Eigen::Index>(i)) = m.h[0] * static_cast<double>(i);
  return m;
}

/// Quadrature inner product sum_i w_i f_i conj(g_i), optionally with an extra weight field.
inline cplx inner_product(const Mesh& mesh, const Vec& f, const Vec& g) {
  const auto n = static_cast<Eigen::Index>(mesh.n_nodes());
  if (f.size() != n || g.size() != n)
    throw DimensionError("inner_product: vectors of length " + std::to_string(f.size()) + " and " +
                         std::to_string(g.size()) + " on a mesh with " + std::to_string(n) + " nodes");
  cplx s = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) s += mesh.vol_weights(i) * f(i) * std::conj(g(i));
  return s;
}

inline cplx inner_product(const Mesh& mesh, const Vec& f, const Vec& g, const RVec& weight) {
  if (weight.size() != static_cast<Eigen::Index>(mesh.n_nodes()))
    throw DimensionError("inner_product: weight field has wrong length");
  return inner_product(mesh, f.cwiseProduct(weight.cast<cplx>()), g);
}

}  // namespace acbc
