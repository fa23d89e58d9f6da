#pragma once
// Dense complex linear algebra helpers on top of Eigen.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "acbc/errors.hpp"

namespace acbc {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline const cplx I_unit{0.0, 1.0};

inline double fro(const Mat& a) { return a.size() == 0 ? 0.0 : a.norm(); }

/// Largest singular value.
inline double norm2(const Mat& a) {
  if (a.size() == 0) return 0.0;
  if (std::min(a.rows(), a.cols()) <= 16) return Eigen::JacobiSVD<Mat>(a).singularValues()(0);
  return Eigen::BDCSVD<Mat>(a).singularValues()(0);
}

inline double min_singular(const Mat& a) {
  if (a.size() == 0) return 0.0;
  RVec s = std::min(a.rows(), a.cols()) <= 16 ? RVec(Eigen::JacobiSVD<Mat>(a).singularValues())
                                              : RVec(Eigen::BDCSVD<Mat>(a).singularValues());
  return s(s.size() - 1);
}

inline Eigen::Index numerical_rank(const Mat& a, double rel_tol = 1e-12) {
  if (a.size() == 0) return 0;
  RVec s = Eigen::JacobiSVD<Mat>(a).singularValues();
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0)) ++r;
  return r;
}

/// Residual scaled by max(1, ||ref||), Frobenius norms.
inline double scaled_diff(const Mat& a, const Mat& ref) {
  return fro(a - ref) / std::max(1.0, fro(ref));
}

/// ||X - X^H|| / ||X||.
inline double hermitian_residual(const Mat& x) {
  double n = fro(x);
  if (n == 0.0) return 0.0;
  return fro(x - x.adjoint()) / n;
}

inline Mat diag(const RVec& w) { return w.cast<cplx>().asDiagonal(); }
inline Mat diag(const Vec& w) { return w.asDiagonal(); }

/// LU solve that refuses when the reciprocal condition estimate is below 1/cond_limit.
inline Mat solve_checked(const Mat& a, const Mat& rhs, double cond_limit, const std::string& what) {
  Eigen::PartialPivLU<Mat> lu(a);
  double rc = lu.rcond();
  if (!(rc > 1.0 / cond_limit))
    throw NumericalError(what + ": matrix numerically singular (condition estimate " +
                         std::to_string(rc > 0 ? 1.0 / rc : std::numeric_limits<double>::infinity()) + ")");
  return lu.solve(rhs);
}

inline Mat inverse_checked(const Mat& a, double cond_limit, const std::string& what) {
  return solve_checked(a, Mat::Identity(a.rows(), a.cols()), cond_limit, what);
}

inline std::vector<cplx> to_vector(const Vec& v) { return std::vector<cplx>(v.data(), v.data() + v.size()); }

/// Eigenvalues of a general square matrix.
inline std::vector<cplx> eigenvalues(const Mat& a) {
  if (a.rows() == 0) return {};
  Eigen::ComplexEigenSolver<Mat> es(a, false);
  if (es.info() != Eigen::Success) throw NumericalError("eigenvalue iteration did not converge");
  return to_vector(es.eigenvalues());
}

/// Eigenvalues of A where W*A is Hermitian for positive weights W.
/// Falls back to the general solver when the symmetry residual exceeds sym_tol.
inline std::vector<cplx> weighted_hermitian_eigenvalues(const Mat& a, const RVec& w, double sym_tol = 1e-11) {
  RVec sq = w.cwiseSqrt();
  Mat s = sq.cast<cplx>().asDiagonal() * a * sq.cwiseInverse().cast<cplx>().asDiagonal();
  if (hermitian_residual(s) > sym_tol) return eigenvalues(a);
  Mat h = 0.5 * (s + s.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
  std::vector<cplx> out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out.emplace_back(es.eigenvalues()(i), 0.0);
  return out;
}

/// Hausdorff distance between finite point sets.
inline double hausdorff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  auto one_side = [](const std::vector<cplx>& p, const std::vector<cplx>& q) {
    double worst = 0.0;
    for (const auto& x : p) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& y : q) best = std::min(best, std::abs(x - y));
      worst = std::max(worst, best);
    }
    return worst;
  };
  if (a.empty() || b.empty()) return (a.empty() && b.empty()) ? 0.0 : std::numeric_limits<double>::infinity();
  return std::max(one_side(a, b), one_side(b, a));
}

namespace detail {

template <class M>
M expm_taylor16(const M& a) {
  using Scalar = typename M::Scalar;
  const Eigen::Index n = a.rows();
  double nrm = a.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (nrm > 1.0) s = static_cast<int>(std::ceil(std::log2(nrm)));
  M x = a / std::ldexp(1.0, s);
  M id = M::Identity(n, n);
  M p = id;
  for (int k = 16; k >= 1; --k) p = id + (x * p) / Scalar(k);
  for (int i = 0; i < s; ++i) p = p * p;
  return p;
}

}  // namespace detail

/// Matrix exponential by scaling and squaring with a degree-16 Taylor polynomial.
inline Mat expm_taylor(const Mat& a) {
  if (a.imag().isZero(0.0)) return detail::expm_taylor16<RMat>(a.real()).cast<cplx>();
  return detail::expm_taylor16<Mat>(a);
}

inline std::vector<double> to_std(const RVec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace acbc
