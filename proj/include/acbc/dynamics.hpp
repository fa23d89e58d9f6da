#pragma once
// Time evolution: exact propagator (eigendecomposition, Taylor fallback), RK4, energy,
// and the comparison with the frozen-y (Robin) evolution.

#include <map>

#include "acbc/resolvent.hpp"

namespace acbc {

/// e^{tA}, by eigendecomposition when the eigenvector matrix is well conditioned,
/// otherwise by scaling and squaring with a degree-16 Taylor polynomial.
class Propagator {
 public:
  enum class Route { eigen, taylor };

  explicit Propagator(Mat A, double eig_cond_limit = 1e6, bool force_taylor = false) : A_(std::move(A)) {
    if (force_taylor || A_.rows() == 0) return;
    Eigen::ComplexEigenSolver<Mat> es(A_, true);
    if (es.info() != Eigen::Success) return;
    Eigen::PartialPivLU<Mat> lu(es.eigenvectors());
    double rc = lu.rcond();
    cond_ = rc > 0 ? 1.0 / rc : INFINITY;
    if (cond_ < eig_cond_limit) {
      route_ = Route::eigen;
      V_ = es.eigenvectors();
      Vinv_ = lu.inverse();
      lam_ = es.eigenvalues();
    }
  }

  Route route() const { return route_; }
  double eigvec_condition() const { return cond_; }
  const Mat& generator() const { return A_; }

  Mat matrix(double t) const {
    if (route_ == Route::eigen) {
      Vec e = (t * lam_).array().exp();
      Mat P = V_ * e.asDiagonal() * Vinv_;
      if (A_.imag().isZero(0.0)) P = P.real().cast<cplx>();
      return P;
    }
    return taylor(t);
  }
  Mat taylor(double t) const { return expm_taylor(t * A_); }

  Vec apply(double t, const Vec& x) const {
    if (route_ == Route::eigen) {
      Vec c = Vinv_ * x;
      Vec y = V_ * (t * lam_).array().exp().matrix().cwiseProduct(c);
      if (A_.imag().isZero(0.0) && x.imag().isZero(0.0)) y = y.real().cast<cplx>();
      return y;
    }
    return taylor(t) * x;
  }

 private:
  Mat A_;
  Route route_ = Route::taylor;
  double cond_ = INFINITY;
  Mat V_, Vinv_;
  Vec lam_;
};

inline Mat propagator(const BlockSystem& s, double t, double eig_cond_limit = 1e6) {
  return Propagator(s.Acal, eig_cond_limit).matrix(t);
}

/// Energy 1/2 [rho |grad u|^2 + rho/c^2 |v|^2 + sum k |x|^2 w + sum m |L u|^2 w], with
/// m <(I - M) Lu, Lu> for the neutral model. Needs constant rho, c and m (neutral) and
/// real k, d >= 0.
inline void require_energy_defined(const BlockSystem& s) {
  const ModelOperators& o = s.ops;
  if (o.kind != ModelKind::wave) throw ModelError("energy undefined: only the constant-coefficient wave model has one");
  const CoefficientSet& c = o.coeffs;
  auto real_nonneg = [](const Vec& v) { return v.imag().cwiseAbs().maxCoeff() == 0.0 && v.real().minCoeff() >= 0.0; };
  if (!constant_field(c.rho) || c.rho(0).real() < 0) throw ModelError("energy undefined: rho must be a nonnegative constant");
  if (!real_nonneg(c.k)) throw ModelError("energy undefined: k must be real and nonnegative");
  if (!real_nonneg(c.d)) throw ModelError("energy undefined: d must be real and nonnegative");
  if (o.neutral && !constant_field(c.m)) throw ModelError("energy undefined: the neutral energy needs constant m");
  if (o.b1_mode != B1Mode::zero) throw ModelError("energy undefined: B1 must vanish");
}

/// Normal velocity L ext(u, y) of a state.
inline Vec boundary_velocity(const BlockSystem& s, const Vec& st) {
  return s.Lu * st.segment(s.ou(), s.n()) + s.Ly * st.segment(s.oy(), s.b());
}

inline double energy(const BlockSystem& s, const Vec& st) {
  require_energy_defined(s);
  if (st.size() != s.dim()) throw DimensionError("energy: state has wrong length");
  const ModelOperators& o = s.ops;
  const double rho = o.coeffs.rho(0).real();
  const double c2 = o.coeffs.c * o.coeffs.c;
  Vec u = st.segment(s.ou(), s.n()), v = st.segment(s.ov(), s.n()), x = st.segment(s.ox(), s.b());
  Vec dl = boundary_velocity(s, st);
  const RVec& wb = o.bnd_weights;
  double e = rho * (u.adjoint() * o.grad_form * u)(0).real();
  e += rho / c2 * (v.adjoint() * o.dof_weights.cast<cplx>().asDiagonal() * v)(0).real();
  for (Eigen::Index i = 0; i < s.b(); ++i) e += o.coeffs.k(i).real() * wb(i) * std::norm(x(i));
  if (o.neutral) {
    Vec im = dl - o.M * dl;
    e += o.coeffs.m(0).real() * (dl.adjoint() * wb.cast<cplx>().asDiagonal() * im)(0).real();
  } else {
    for (Eigen::Index i = 0; i < s.b(); ++i) e += o.coeffs.m(i).real() * wb(i) * std::norm(dl(i));
  }
  return 0.5 * e;
}

/// Exact energy dissipation rate -sum d |L u|^2 w.
inline double energy_rate(const BlockSystem& s, const Vec& st) {
  require_energy_defined(s);
  Vec dl = boundary_velocity(s, st);
  double r = 0;
  for (Eigen::Index i = 0; i < s.b(); ++i) r -= s.ops.coeffs.d(i).real() * s.ops.bnd_weights(i) * std::norm(dl(i));
  return r;
}

enum class Method { exact, rk4 };

struct Trajectory {
  std::vector<double> t;
  std::vector<Vec> states;
  std::vector<double> energy;  // empty when the energy is undefined
  Method method = Method::exact;
  std::string route;           // propagator route or rk4 substep info
  std::size_t substeps = 1;
  bool cfl_warning = false;
};

/// Largest RK4 substep: 0.25 h / c for second-order models, 0.25 h^2 for the biharmonic one.
inline double rk4_max_step(const BlockSystem& s) {
  const ModelOperators& o = s.ops;
  double h = INFINITY;
  for (std::size_t i = 0; i + 1 < o.dof_points.size(); ++i) {
    double dx = std::hypot(o.dof_points[i + 1].x - o.dof_points[i].x, o.dof_points[i + 1].y - o.dof_points[i].y);
    if (dx > 0) h = std::min(h, dx);
  }
  if (o.kind == ModelKind::biharmonic) return 0.25 * h * h;
  double c = o.kind == ModelKind::wave ? o.coeffs.c : std::sqrt(o.coeffs.a->maxCoeff());
  return 0.25 * h / c;
}

inline Vec rk4_step(const Mat& A, const Vec& x, double dt) {
  Vec k1 = A * x;
  Vec k2 = A * (x + 0.5 * dt * k1);
  Vec k3 = A * (x + 0.5 * dt * k2);
  Vec k4 = A * (x + dt * k3);
  return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline Trajectory simulate(const BlockSystem& s, const Vec& U0, const std::vector<double>& t_grid,
                           Method method = Method::exact, double eig_cond_limit = 1e6) {
  if (U0.size() != s.dim()) throw DimensionError("simulate: initial state has wrong length");
  if (t_grid.empty()) throw ConfigError("simulate: empty time grid");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1])) throw ConfigError("simulate: time grid must be strictly increasing");
  Trajectory tr;
  tr.method = method;
  tr.t = t_grid;
  bool has_energy = true;
  try {
    require_energy_defined(s);
  } catch (const ModelError&) {
    has_energy = false;
  }
  if (method == Method::exact) {
    Propagator P(s.Acal, eig_cond_limit);
    tr.route = P.route() == Propagator::Route::eigen ? "eigen" : "taylor16";
    if (P.route() == Propagator::Route::eigen) {
      for (double t : t_grid) tr.states.push_back(P.apply(t - t_grid[0], U0));
    } else {
      std::map<long long, Mat> cache;  // step propagators keyed by dt in units of 1e-12
      Vec x = U0;
      tr.states.push_back(x);
      for (std::size_t i = 1; i < t_grid.size(); ++i) {
        double dt = t_grid[i] - t_grid[i - 1];
        long long key = std::llround(dt * 1e12);
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(key, P.taylor(dt)).first;
        x = it->second * x;
        tr.states.push_back(x);
      }
    }
  } else {
    const double hmax = rk4_max_step(s);
    Vec x = U0;
    tr.states.push_back(x);
    for (std::size_t i = 1; i < t_grid.size(); ++i) {
      double dt = t_grid[i] - t_grid[i - 1];
      auto m = static_cast<std::size_t>(std::ceil(dt / hmax - 1e-12));
      m = std::max<std::size_t>(1, m);
      if (m > 1) tr.cfl_warning = true;
      tr.substeps = std::max(tr.substeps, m);
      for (std::size_t k = 0; k < m; ++k) x = rk4_step(s.Acal, x, dt / static_cast<double>(m));
      tr.states.push_back(x);
    }
    tr.route = "rk4";
  }
  if (has_energy)
    for (const auto& x : tr.states) tr.energy.push_back(energy(s, x));
  return tr;
}

inline std::vector<double> uniform_grid(double t_final, double dt) {
  if (!(dt > 0) || !(t_final >= 0)) throw ConfigError("time grid needs dt > 0 and t_final >= 0");
  auto n = static_cast<std::size_t>(std::llround(t_final / dt));
  std::vector<double> t(n + 1);
  for (std::size_t i = 0; i <= n; ++i) t[i] = dt * static_cast<double>(i);
  return t;
}

/// Quadrature-weighted state norm: L^2 for u and v, boundary L^2 for x and y.
inline double state_norm(const BlockSystem& s, const Vec& st) {
  const RVec& w = s.ops.dof_weights;
  const RVec& wb = s.ops.bnd_weights;
  double a = 0;
  for (Eigen::Index i = 0; i < s.n(); ++i)
    a += w(i) * (std::norm(st(s.ou() + i)) + std::norm(st(s.ov() + i)));
  for (Eigen::Index i = 0; i < s.b(); ++i) a += wb(i) * (std::norm(st(s.ox() + i)) + std::norm(st(s.oy() + i)));
  return std::sqrt(a);
}

inline double l2_u(const BlockSystem& s, const Vec& st) {
  double a = 0;
  for (Eigen::Index i = 0; i < s.n(); ++i) a += s.ops.dof_weights(i) * std::norm(st(s.ou() + i));
  return std::sqrt(a);
}

struct RobinComparison {
  std::vector<double> t;
  std::vector<double> deviation;      // state norm of phi(t) - psi(t)
  std::vector<double> deviation_u;    // L^2 norm of the u components
  std::vector<double> ratio;          // deviation / t
  double M_est = 0.0;                 // max ratio
  double a2u0_norm = 0.0;             // || A2 U0 || in the state norm
};

/// phi under the full generator, psi under A1 = A - A2 (y frozen), both from U0.
inline RobinComparison robin_comparison(const BlockSystem& s, const Vec& U0, const std::vector<double>& t_grid,
                                        double eig_cond_limit = 1e6) {
  for (double t : t_grid)
    if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("robin comparison: t must lie in [0, 1]");
  Propagator P(s.Acal, eig_cond_limit), Q(s.A1cal, eig_cond_limit);
  RobinComparison rc;
  rc.a2u0_norm = state_norm(s, s.A2cal * U0);
  for (double t : t_grid) {
    Vec d = P.apply(t, U0) - Q.apply(t, U0);
    rc.t.push_back(t);
    rc.deviation.push_back(state_norm(s, d));
    rc.deviation_u.push_back(l2_u(s, d));
    double r = t > 0 ? rc.deviation.back() / t : NAN;
    rc.ratio.push_back(r);
    if (t > 0) rc.M_est = std::max(rc.M_est, r);
  }
  return rc;
}

inline std::vector<double> log_grid(double t0, double t1, std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i)
    t[i] = t0 * std::pow(t1 / t0, static_cast<double>(i) / static_cast<double>(n - 1));
  return t;
}

/// Per-time | x(t) - x(0) - int_0^t L u | (max over boundary dofs), trapezoid rule.
inline std::vector<double> integral_residuals(const BlockSystem& s, const Trajectory& tr) {
  std::vector<double> out(tr.states.size(), 0.0);
  Vec acc = Vec::Zero(s.b());
  for (std::size_t k = 1; k < tr.states.size(); ++k) {
    double dt = tr.t[k] - tr.t[k - 1];
    acc += 0.5 * dt * (boundary_velocity(s, tr.states[k]) + boundary_velocity(s, tr.states[k - 1]));
    Vec r = tr.states[k].segment(s.ox(), s.b()) - tr.states[0].segment(s.ox(), s.b()) - acc;
    out[k] = s.b() ? r.cwiseAbs().maxCoeff() : 0.0;
  }
  return out;
}

/// Residuals of a trajectory against the equations it should satisfy.
inline VerificationReport trajectory_consistency(const BlockSystem& s, const Trajectory& tr) {
  VerificationReport rep;
  const std::size_t K = tr.states.size();
  double integral = 0.0;
  for (double r : integral_residuals(s, tr)) integral = std::max(integral, r);
  double worst_c = 0.0;
  for (const auto& st : tr.states) {
    Vec u = st.segment(s.ou(), s.n()), y = st.segment(s.oy(), s.b());
    worst_c = std::max(worst_c, (s.ops.R * s.extend(u, y) - y).norm() / std::max(1.0, y.norm()));
  }
  double worst_acc = 0.0;
  for (std::size_t k = 1; k + 1 < K; ++k) {
    double dt = tr.t[k] - tr.t[k - 1];
    Vec u0 = tr.states[k - 1].segment(s.ou(), s.n()), u1 = tr.states[k].segment(s.ou(), s.n()),
        u2 = tr.states[k + 1].segment(s.ou(), s.n());
    Vec y1 = tr.states[k].segment(s.oy(), s.b());
    Vec acc2 = (u2 - 2.0 * u1 + u0) / (dt * dt);
    Vec au = s.ops.A_max * s.extend(u1, y1);
    worst_acc = std::max(worst_acc, (acc2 - au).norm() / std::max(1.0, au.norm()));
  }
  rep.record("integral_residual", integral, true, "max | x(t) - x(0) - int L u |");
  rep.record("constraint_residual", worst_c, true, "max || R ext(u, y) - y || / max(1, ||y||)");
  rep.record("second_derivative_residual", worst_acc, true, "central difference u'' against A_max ext(u, y)");
  return rep;
}

}  // namespace acbc
