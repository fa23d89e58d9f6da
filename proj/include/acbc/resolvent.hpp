#pragma once
// Dirichlet operators, the boundary pencil and closed-form resolvents, each paired
// with the dense computation it must reproduce.

#include "acbc/blockops.hpp"

namespace acbc {

struct ResolventOptions {
  double gamma_rel = 1e-8;
  double cond_limit = 1e12;
};

inline ResolventOptions resolvent_options(const SolverConfig& c) { return {c.gamma_rel, c.cond_limit}; }

/// Distance of mu from the spectrum of A0.
inline double distance_to_sigma_A0(const BlockSystem& s, cplx mu) {
  double d = INFINITY;
  for (const auto& e : s.eig_A0) d = std::min(d, std::abs(mu - e));
  return d;
}

/// lambda != 0 and lambda^2 away from the spectrum of A0.
inline bool admissible(const BlockSystem& s, cplx lambda) {
  return std::abs(lambda) > s.zero_radius && distance_to_sigma_A0(s, lambda * lambda) > s.exclusion_radius;
}

inline void require_admissible(const BlockSystem& s, cplx lambda) {
  if (!(std::abs(lambda) > s.zero_radius))
    throw SpectralParameterError(SpectralParameterError::Kind::zero_parameter, "spectral parameter lambda = 0");
  if (!(distance_to_sigma_A0(s, lambda * lambda) > s.exclusion_radius))
    throw SpectralParameterError(SpectralParameterError::Kind::in_spectrum_A0,
                                 "lambda^2 lies within the exclusion radius of the spectrum of A0");
}

/// D_mu: the solution of (mu - A_max) u = 0, R u = x, as an n_ext x n_b matrix.
inline Mat dirichlet_operator(const BlockSystem& s, cplx mu, double cond_limit = 1e12) {
  if (!(distance_to_sigma_A0(s, mu) > s.exclusion_radius))
    throw SpectralParameterError(SpectralParameterError::Kind::in_spectrum_A0,
                                 "mu lies within the exclusion radius of the spectrum of A0");
  return dirichlet_solve(s.ops, s.ops.R, mu, cond_limit);
}

/// Same construction with the boundary operator L in place of R.
inline Mat dirichlet_operator_AL(const ModelOperators& ops, cplx mu, double cond_limit = 1e12) {
  return dirichlet_solve(ops, ops.L, mu, cond_limit);
}

/// || L D_mu - I - B2 D_mu ||.
inline double identity_LD(const BlockSystem& s, cplx mu) {
  Mat D = dirichlet_operator(s, mu);
  return fro(s.ops.L * D - Mat::Identity(s.b(), s.b()) - s.ops.B2 * D.topRows(s.n()));
}

/// (D, lambda D, L D / lambda) on (u, v, x), node rows only.
inline Mat block_dirichlet(const BlockSystem& s, cplx lambda, const Mat* D_ext = nullptr) {
  require_admissible(s, lambda);
  Mat D = D_ext ? *D_ext : dirichlet_operator(s, lambda * lambda);
  const Eigen::Index n = s.n(), b = s.b();
  Mat out(2 * n + b, b);
  out.topRows(n) = D.topRows(n);
  out.middleRows(n, n) = lambda * D.topRows(n);
  out.bottomRows(b) = (s.ops.L * D) / lambda;
  return out;
}

/// B_lambda = B1 D + (B3 / lambda + B4) L D with D = D_{lambda^2}.
inline Mat pencil(const BlockSystem& s, cplx lambda) {
  require_admissible(s, lambda);
  Mat D = dirichlet_operator(s, lambda * lambda);
  Mat LD = s.ops.L * D;
  return s.ops.B1 * D.topRows(s.n()) + (s.ops.B3 / lambda + s.ops.B4) * LD;
}

/// B4 + [B1 + B4 B2, 0, B3] applied to the block Dirichlet operator.
inline Mat pencil_literal(const BlockSystem& s, cplx lambda) {
  return s.ops.B4 + s.Bbb * block_dirichlet(s, lambda);
}

/// Closed-form resolvent of the restricted generator on (u, v, x).
inline Mat resolvent_A0_block(const BlockSystem& s, cplx lambda, double cond_limit = 1e12) {
  require_admissible(s, lambda);
  const Eigen::Index n = s.n(), b = s.b();
  Mat shifted = -s.A0;
  shifted.diagonal().array() += lambda * lambda;
  Mat R = inverse_checked(shifted, cond_limit, "resolvent of A0");
  Mat out = Mat::Zero(2 * n + b, 2 * n + b);
  out.block(0, 0, n, n) = lambda * R;
  out.block(0, n, n, n) = R;
  out.block(n, 0, n, n) = s.A0 * R;
  out.block(n, n, n, n) = lambda * R;
  Mat B2R = s.ops.B2 * R;
  out.block(2 * n, 0, b, n) = B2R;
  out.block(2 * n, n, b, n) = B2R / lambda;
  out.block(2 * n, 2 * n, b, b) = Mat::Identity(b, b) / lambda;
  return out;
}

inline Mat dense_resolvent(const Mat& A, cplx lambda, double cond_limit = 1e12) {
  Mat shifted = -A;
  shifted.diagonal().array() += lambda;
  return inverse_checked(shifted, cond_limit, "dense resolvent");
}

/// Residuals of the triangular factorization of lambda - Acal, its shift to mu, and the
/// product of the two triangular factors.
inline VerificationReport factorization_check(const BlockSystem& s, cplx lambda, cplx mu, double tol = 1e-8) {
  const Eigen::Index n = s.n(), b = s.b(), m = 2 * n + b, N = s.dim();
  Mat DA = block_dirichlet(s, lambda);
  Mat R0 = resolvent_A0_block(s, lambda);
  Mat Bl = pencil(s, lambda);
  Mat BR = s.Bbb * R0;

  Mat Lf = Mat::Identity(N, N);
  Lf.block(m, 0, b, m) = -BR;
  Mat Mf = Mat::Identity(N, N);
  Mf.block(0, m, m, b) = -DA;
  auto middle = [&](cplx z) {
    Mat d = Mat::Zero(N, N);
    d.block(0, 0, m, m) = -s.Abb0;
    d.block(0, 0, m, m).diagonal().array() += z;
    d.block(m, m, b, b) = -Bl;
    d.block(m, m, b, b).diagonal().array() += z;
    return d;
  };
  auto shifted = [&](cplx z) {
    Mat d = -s.Acal;
    d.diagonal().array() += z;
    return d;
  };

  VerificationReport rep;
  Mat lhs = shifted(lambda);
  rep.check("factorization", scaled_diff(Lf * middle(lambda) * Mf, lhs), tol);

  Mat corr = Mat::Zero(N, N);
  corr.block(0, m, m, b) = DA;
  corr.block(m, 0, b, m) = BR;
  corr.block(m, m, b, b) = -BR * DA;
  Mat lhs_mu = shifted(mu);
  rep.check("shifted_factorization", scaled_diff(Lf * middle(mu) * Mf + (mu - lambda) * corr, lhs_mu), tol);

  Mat prod = Mat::Identity(N, N);
  prod.block(0, m, m, b) = -DA;
  prod.block(m, 0, b, m) = -BR;
  prod.block(m, m, b, b) += BR * DA;
  rep.check("factor_product", scaled_diff(Lf * Mf, prod), tol);
  return rep;
}

/// Closed-form resolvent of Acal through the pencil; refuses when lambda - B_lambda is singular.
inline Mat resolvent_Acal(const BlockSystem& s, cplx lambda, const ResolventOptions& opt = {}) {
  const Eigen::Index n = s.n(), b = s.b(), m = 2 * n + b, N = s.dim();
  Mat DA = block_dirichlet(s, lambda);
  Mat R0 = resolvent_A0_block(s, lambda, opt.cond_limit);
  Mat P = -pencil(s, lambda);
  P.diagonal().array() += lambda;
  double smin = min_singular(P);
  if (!(smin > opt.gamma_rel * std::max(1.0, norm2(P))))
    throw SpectralParameterError(SpectralParameterError::Kind::pencil_singular,
                                 "lambda - B_lambda is singular: lambda is an eigenvalue of the generator");
  Mat RB = P.inverse();
  Mat BR = s.Bbb * R0;
  Mat out(N, N);
  out.block(0, 0, m, m) = R0 + DA * RB * BR;
  out.block(0, m, m, b) = DA * RB;
  out.block(m, 0, b, m) = RB * BR;
  out.block(m, m, b, b) = RB;
  return out;
}

/// Closed-form resolvent on (u, v, y) when B3 = 0 and B1 = -B4 B2.
inline Mat special_case_resolvent(const BlockSystem& s, cplx lambda, double cond_limit = 1e12) {
  if (!s.b3_vanishes()) throw AssumptionError("B3 = 0", "special-case resolvent needs B3 = 0");
  if (!s.b1_is_minus_b4b2()) throw AssumptionError("B1 = -B4 B2", "special-case resolvent needs B1 = -B4 B2");
  if (!(distance_to_sigma_A0(s, lambda * lambda) > s.exclusion_radius))
    throw SpectralParameterError(SpectralParameterError::Kind::in_spectrum_A0,
                                 "lambda^2 lies within the exclusion radius of the spectrum of A0");
  const Eigen::Index n = s.n(), b = s.b();
  Mat shifted = -s.A0;
  shifted.diagonal().array() += lambda * lambda;
  Mat R = inverse_checked(shifted, cond_limit, "resolvent of A0");
  Mat sb = -s.ops.B4;
  sb.diagonal().array() += lambda;
  Mat RB4 = inverse_checked(sb, cond_limit, "resolvent of B4");
  Mat D = dirichlet_operator(s, lambda * lambda).topRows(n);
  Mat out = Mat::Zero(2 * n + b, 2 * n + b);
  out.block(0, 0, n, n) = lambda * R;
  out.block(0, n, n, n) = R;
  out.block(0, 2 * n, n, b) = D * RB4;
  out.block(n, 0, n, n) = s.A0 * R;
  out.block(n, n, n, n) = lambda * R;
  out.block(n, 2 * n, n, b) = lambda * D * RB4;
  out.block(2 * n, 2 * n, b, b) = RB4;
  return out;
}

/// Norm of D^{A,L}_lambda from boundary data into the discrete H^1 space.
inline double dirichlet_AL_norm(const ModelOperators& ops, double lambda) {
  Mat D = dirichlet_operator_AL(ops, lambda).topRows(static_cast<Eigen::Index>(ops.n_nodes));
  return weighted_norm(D, h1_gram(ops), ops.bnd_weights);
}

}  // namespace acbc
