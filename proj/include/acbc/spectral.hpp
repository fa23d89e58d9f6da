#pragma once
// Spectrum of the generator three ways: dense eigenvalues, roots of the characteristic
// function det(lambda - B_lambda), and the closed form of the special case.

#include <map>
#include <functional>
#include <numbers>

#include "acbc/resolvent.hpp"

namespace acbc {

enum class Branch { pencil_root, a0_branch, b4_branch, zero_mode };

inline std::string to_string(Branch b) {
  switch (b) {
    case Branch::pencil_root: return "pencil-root";
    case Branch::a0_branch: return "A0-branch";
    case Branch::b4_branch: return "B4-branch";
    case Branch::zero_mode: return "zero-mode";
  }
  return "pencil-root";
}

struct SpectralEntry {
  cplx value;
  Branch branch = Branch::pencil_root;
  double residual = 0.0;
  bool admissible = false;  // lambda != 0, lambda^2 outside the exclusion zone of sigma(A0)
  int iterations = 0;
  double moved = 0.0;       // Newton: distance from the seed
};

struct SpectrumReport {
  std::vector<SpectralEntry> entries;
  std::vector<cplx> gamma_excluded;  // seeds rejected for lying in the exclusion zone
  std::vector<cplx> failed;          // seeds whose iteration did not certify
  std::string method;

  std::vector<cplx> values() const {
    std::vector<cplx> v;
    for (const auto& e : entries) v.push_back(e.value);
    return v;
  }
};

enum class Generator { full, reduced };

inline const char* generator_name(Generator g) { return g == Generator::full ? "full" : "reduced"; }

inline Mat generator_matrix(const BlockSystem& s, Generator g) {
  return g == Generator::full ? s.Acal : s.reduced_generator();
}

inline double zero_tolerance(const BlockSystem& s) { return 1e-5 * std::sqrt(s.a0_scale); }

inline Branch classify(const BlockSystem& s, cplx lambda, const std::vector<cplx>& eig_B4) {
  if (std::abs(lambda) <= zero_tolerance(s)) return Branch::zero_mode;
  if (distance_to_sigma_A0(s, lambda * lambda) <= s.exclusion_radius) return Branch::a0_branch;
  double tb = 1e-8 * (1.0 + norm2(s.ops.B4));
  for (const auto& beta : eig_B4)
    if (std::abs(lambda - beta) <= tb) return Branch::b4_branch;
  return Branch::pencil_root;
}

/// Dense eigenvalues with eigen-residuals ||A w - lambda w|| / ||w||, sorted by (|lambda|, Im).
inline SpectrumReport direct_spectrum(const BlockSystem& s, Generator g = Generator::full) {
  Mat A = generator_matrix(s, g);
  Eigen::ComplexEigenSolver<Mat> es(A, true);
  if (es.info() != Eigen::Success) throw NumericalError("eigenvalue iteration did not converge");
  std::vector<cplx> eb = eigenvalues(s.ops.B4);
  SpectrumReport rep;
  rep.method = std::string("direct-") + generator_name(g);
  double anorm = std::max(1.0, fro(A));
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    SpectralEntry e;
    e.value = es.eigenvalues()(i);
    Vec w = es.eigenvectors().col(i);
    e.residual = (A * w - e.value * w).norm() / (w.norm() * anorm);
    e.branch = classify(s, e.value, eb);
    e.admissible = admissible(s, e.value);
    rep.entries.push_back(e);
  }
  std::sort(rep.entries.begin(), rep.entries.end(), [](const SpectralEntry& a, const SpectralEntry& b) {
    if (std::abs(a.value) != std::abs(b.value)) return std::abs(a.value) < std::abs(b.value);
    return a.value.imag() < b.value.imag();
  });
  return rep;
}

/// det(lambda I - B_lambda).
inline cplx characteristic_value(const BlockSystem& s, cplx lambda) {
  Mat P = -pencil(s, lambda);
  P.diagonal().array() += lambda;
  return P.rows() == 0 ? cplx(1.0) : Eigen::PartialPivLU<Mat>(P).determinant();
}

/// Scale against which |chi| is judged at lambda.
inline double chi_scale(const BlockSystem& s, cplx lambda) {
  return std::pow(std::max(1.0, std::abs(lambda)), static_cast<double>(s.b()));
}

struct NewtonOptions {
  int max_iter = 50;
  double step_tol = 1e-12;  // relative to 1 + |lambda|
  double dedup_rel = 1e-8;
  double cert_rel = 1e-6;
};

inline NewtonOptions newton_options(const SolverConfig& c) {
  NewtonOptions o;
  o.max_iter = c.newton_max_iter;
  o.dedup_rel = c.dedup_rel;
  o.cert_rel = c.cert_rel;
  return o;
}

/// Newton iteration on chi with a central-difference derivative, one run per seed.
/// Poles of chi close to the seed (lambda^2 near an eigenvalue of A0) are multiplied out
/// so the iteration sees an analytic function; a root is certified by the relative
/// smallest singular value of lambda - B_lambda.
inline SpectrumReport pencil_roots(const BlockSystem& s, const std::vector<cplx>& seeds, const NewtonOptions& opt = {}) {
  SpectrumReport rep;
  rep.method = "pencil-newton";
  std::vector<cplx> eb = eigenvalues(s.ops.B4);
  for (const cplx seed : seeds) {
    if (!admissible(s, seed)) {
      rep.gamma_excluded.push_back(seed);
      continue;
    }
    double dmin = distance_to_sigma_A0(s, seed * seed);
    std::vector<cplx> near;
    for (const auto& mu : s.eig_A0)
      if (std::abs(seed * seed - mu) <= 4.0 * dmin) near.push_back(mu);
    auto f = [&](cplx z) {
      cplx v = characteristic_value(s, z) / chi_scale(s, z);
      for (const auto& mu : near) v *= (z * z - mu) / s.a0_scale;
      return v;
    };
    cplx lam = seed;
    bool ok = false, excluded = false;
    int it = 0;
    double last = INFINITY;
    try {
      for (it = 1; it <= opt.max_iter; ++it) {
        // keep the difference stencil clear of the exclusion zone around sigma(A0)
        double room = (distance_to_sigma_A0(s, lam * lam) - s.exclusion_radius) / (2.0 * std::abs(lam) + 1.0);
        double hstep = std::min(1e-7 * (1.0 + std::abs(lam)), 0.1 * room);
        cplx fv = f(lam);
        if (fv == 0.0) {
          ok = true;
          break;
        }
        cplx df = (f(lam + hstep) - f(lam - hstep)) / (2.0 * hstep);
        if (df == 0.0) break;
        cplx step = fv / df;
        double as = std::abs(step), rel = 1.0 + std::abs(lam);
        // round-off floor: the step stopped shrinking once already tiny
        if (as <= 1e-9 * rel && as >= 0.5 * last) {
          ok = true;
          break;
        }
        lam -= step;
        last = as;
        if (!admissible(s, lam)) {
          excluded = true;
          break;
        }
        if (as <= opt.step_tol * rel) {
          ok = true;
          break;
        }
      }
    } catch (const Error&) {
      ok = false;
    }
    if (excluded) {
      rep.gamma_excluded.push_back(seed);
      continue;
    }
    double res = INFINITY;
    if (ok) {
      Mat P = -pencil(s, lam);
      P.diagonal().array() += lam;
      res = P.rows() == 0 ? 0.0 : min_singular(P) / std::max(1.0, norm2(P));
    }
    if (!ok || !(res <= opt.cert_rel)) {
      rep.failed.push_back(seed);
      continue;
    }
    bool dup = false;
    for (const auto& e : rep.entries)
      if (std::abs(e.value - lam) <= opt.dedup_rel * (1.0 + std::abs(lam))) dup = true;
    if (dup) continue;
    SpectralEntry e;
    e.value = lam;
    e.residual = res;
    e.iterations = std::min(it, opt.max_iter);
    e.moved = std::abs(lam - seed);
    e.admissible = true;
    e.branch = classify(s, lam, eb);
    rep.entries.push_back(e);
  }
  return rep;
}

struct Box {
  double re0, re1, im0, im1;
  bool contains(cplx z) const { return z.real() > re0 && z.real() < re1 && z.imag() > im0 && z.imag() < im1; }
};

struct BoxCount {
  double winding_real = 0.0;  // (1 / 2 pi) total change of arg chi along the boundary
  long winding = 0;
  long poles = 0;             // zeros of lambda^{n_b} det(lambda^2 - A0) inside the box
  long roots = 0;             // winding + poles: eigenvalues of the generator inside
  std::size_t evaluations = 0;
};

/// Argument-principle count around a box. chi equals det(lambda - Acal) divided by
/// lambda^{n_b} det(lambda^2 - A0), so the count of generator eigenvalues is the winding
/// number plus the known poles.
inline BoxCount count_roots_in_box(const BlockSystem& s, const Box& box, int n_quad = 256) {
  const cplx corners[4] = {{box.re0, box.im0}, {box.re1, box.im0}, {box.re1, box.im1}, {box.re0, box.im1}};
  BoxCount out;
  auto chi = [&](cplx z) {
    if (!admissible(s, z))
      throw SpectralParameterError(SpectralParameterError::Kind::in_spectrum_A0,
                                   "box boundary passes through the exclusion zone of the pencil");
    ++out.evaluations;
    cplx v = characteristic_value(s, z);
    if (v == 0.0) throw NumericalError("box boundary passes through a root of the characteristic function");
    return v;
  };
  const int per_edge = std::max(4, n_quad / 4);
  double total = 0.0;
  // recursive bisection wherever arg chi turns by more than pi/4 across a segment
  std::function<void(cplx, cplx, cplx, cplx, int)> seg = [&](cplx a, cplx b, cplx fa, cplx fb, int depth) {
    double d = std::arg(fb / fa);
    if (std::abs(d) <= 0.25 * std::numbers::pi || depth >= 40) {
      if (std::abs(d) > 0.25 * std::numbers::pi) throw NumericalError("argument-principle count inconclusive: segment refinement limit reached");
      total += d;
      return;
    }
    cplx m = 0.5 * (a + b);
    cplx fm = chi(m);
    seg(a, m, fa, fm, depth + 1);
    seg(m, b, fm, fb, depth + 1);
  };
  for (int e = 0; e < 4; ++e) {
    cplx a = corners[e], b = corners[(e + 1) % 4];
    cplx za = a, fa = chi(a);
    for (int k = 1; k <= per_edge; ++k) {
      cplx zb = a + (b - a) * (static_cast<double>(k) / per_edge);
      cplx fb = chi(zb);
      seg(za, zb, fa, fb, 0);
      za = zb;
      fa = fb;
    }
  }
  out.winding_real = total / (2.0 * std::numbers::pi);
  out.winding = std::lround(out.winding_real);
  if (std::abs(out.winding_real - static_cast<double>(out.winding)) > 0.3)
    throw NumericalError("argument-principle count inconclusive: rounding gap below 0.2");
  for (const auto& mu : s.eig_A0) {
    cplx r = std::sqrt(mu);
    if (box.contains(r)) ++out.poles;
    if (box.contains(-r)) ++out.poles;
  }
  if (box.contains(0.0)) out.poles += s.b();
  out.roots = out.winding + out.poles;
  return out;
}

struct SpecialCaseResult {
  SpectrumReport spectrum;  // predicted set: +-sqrt(sigma(A0)) and sigma(B4)
  double hausdorff = NAN;   // against the dense spectrum of the reduced generator
  std::vector<cplx> resolvent_points;
  std::vector<double> resolvent_residuals;
  double branch_separation = NAN;  // min over beta in sigma(B4) of dist(beta^2, sigma(A0))
};

/// Closed-form spectrum when B3 = 0 and B1 = -B4 B2, checked against dense eigenvalues
/// and against the dense resolvent at three sample points.
inline SpecialCaseResult special_case_spectrum(const BlockSystem& s, double cond_limit = 1e12) {
  if (!s.b3_vanishes()) throw AssumptionError("B3 = 0", "the special-case spectrum needs B3 = 0 (k = 0)");
  if (!s.b1_is_minus_b4b2()) throw AssumptionError("B1 = -B4 B2", "the special-case spectrum needs B1 = -B4 B2");
  SpecialCaseResult res;
  std::vector<cplx> eb = eigenvalues(s.ops.B4);
  double sep = INFINITY;
  for (const auto& beta : eb) sep = std::min(sep, distance_to_sigma_A0(s, beta * beta));
  res.branch_separation = sep;
  if (!(sep > s.exclusion_radius))
    throw AssumptionError("branch separation", "an eigenvalue of B4 squares into the spectrum of A0");
  res.spectrum.method = "special-case";
  for (const auto& mu : s.eig_A0) {
    cplx r = std::sqrt(mu);
    for (cplx v : {r, -r}) {
      SpectralEntry e;
      e.value = v;
      e.branch = Branch::a0_branch;
      res.spectrum.entries.push_back(e);
    }
  }
  for (const auto& beta : eb) {
    SpectralEntry e;
    e.value = beta;
    e.branch = std::abs(beta) <= zero_tolerance(s) ? Branch::zero_mode : Branch::b4_branch;
    res.spectrum.entries.push_back(e);
  }
  SpectrumReport direct = direct_spectrum(s, Generator::reduced);
  std::vector<cplx> dv = direct.values();
  for (auto& e : res.spectrum.entries) {
    double best = INFINITY;
    for (const auto& v : dv) best = std::min(best, std::abs(v - e.value));
    e.residual = best;
    e.admissible = admissible(s, e.value);
  }
  res.hausdorff = hausdorff(res.spectrum.values(), dv);

  Mat Ared = s.reduced_generator();
  for (cplx lam : {cplx(1.0, 1.0), cplx(0.5, 2.0), cplx(2.0, -0.7)}) {
    if (!admissible(s, lam)) continue;
    Mat closed = special_case_resolvent(s, lam, cond_limit);
    Mat dense = dense_resolvent(Ared, lam, cond_limit);
    res.resolvent_points.push_back(lam);
    res.resolvent_residuals.push_back(scaled_diff(closed, dense));
  }
  return res;
}

struct RangeValue {
  double value;
  double measure;
};

/// Distinct values of a boundary field with their aggregated quadrature measure.
inline std::vector<RangeValue> essential_range(const Vec& field, const RVec& weights, double tol = 1e-12) {
  if (field.size() != weights.size()) throw DimensionError("essential_range: field and weights differ in length");
  std::vector<RangeValue> out;
  for (Eigen::Index i = 0; i < field.size(); ++i) {
    double v = field(i).real();
    bool merged = false;
    for (auto& r : out)
      if (std::abs(r.value - v) <= tol * std::max(1.0, std::abs(v))) {
        r.measure += weights(i);
        merged = true;
        break;
      }
    if (!merged) out.push_back({v, weights(i)});
  }
  std::sort(out.begin(), out.end(), [](const RangeValue& a, const RangeValue& b) { return a.value < b.value; });
  return out;
}

/// Essential range of -d/m, the points the spectrum of B4 sits on.
inline std::vector<RangeValue> essential_range_B4(const ModelOperators& ops) {
  Vec f = -ops.coeffs.d.cwiseQuotient(ops.coeffs.m);
  return essential_range(f, ops.bnd_weights);
}

struct ProxyRow {
  std::size_t nx = 0;
  std::size_t n_b = 0;
  std::size_t count = 0;
  std::size_t total = 0;
};

struct EssentialProxy {
  std::vector<ProxyRow> rows;
  std::vector<RangeValue> range;
  double epsilon = 0.05;
  bool nondecreasing = true;
  std::string message;
};

/// Eigenvalues within epsilon of the essential range as gamma1 is refined (strip, ny fixed).
/// Uses the (u, v, y) generator when B3 = 0, the full one otherwise.
inline EssentialProxy essential_spectrum_proxy(const ScenarioConfig& base, const std::vector<std::size_t>& refinements,
                                               double epsilon = 0.05) {
  EssentialProxy out;
  out.epsilon = epsilon;
  if (base.model == ModelKind::biharmonic) throw UnsupportedError("essential-spectrum proxy needs a wave model on the strip");
  if (base.geometry.kind == MeshKind::interval) {
    out.message = "finite-dimensional boundary space: empty essential spectrum expected";
    return out;
  }
  std::size_t prev = 0;
  for (std::size_t nx : refinements) {
    ScenarioConfig cfg = base;
    cfg.geometry.nx = nx;
    Scenario sc = build_scenario(cfg);
    out.range = essential_range_B4(sc.sys.ops);
    Generator g = sc.sys.b3_vanishes() ? Generator::reduced : Generator::full;
    std::vector<cplx> ev = eigenvalues(generator_matrix(sc.sys, g));
    ProxyRow row;
    row.nx = nx;
    row.n_b = sc.sys.ops.n_b;
    row.total = ev.size();
    for (const auto& z : ev) {
      bool near = false;
      for (const auto& r : out.range)
        if (std::abs(z - cplx(r.value)) <= epsilon) near = true;
      if (near) ++row.count;
    }
    if (!out.rows.empty() && row.count < prev) out.nondecreasing = false;
    prev = row.count;
    out.rows.push_back(row);
  }
  return out;
}

struct CompactResolventDiag {
  std::vector<std::size_t> resolutions;
  std::vector<std::vector<cplx>> lowest;  // per resolution, the first `count` nonzero eigenvalues
  std::vector<double> max_abs;            // largest |lambda| per resolution
  std::vector<double> rel_change;         // between the first two resolutions, per eigenvalue
  double max_rel_change = NAN;
  double growth_exponent = NAN;           // log(max_abs ratio) / log(resolution ratio)
};

/// Lowest eigenvalues of the interval generator under refinement.
inline CompactResolventDiag compact_resolvent_diagnostic(const ScenarioConfig& base,
                                                         const std::vector<std::size_t>& resolutions,
                                                         std::size_t count = 10) {
  if (base.geometry.kind != MeshKind::interval) throw UnsupportedError("compact-resolvent diagnostic runs on the interval");
  if (resolutions.size() < 2) throw ConfigError("compact-resolvent diagnostic needs two resolutions");
  CompactResolventDiag d;
  d.resolutions = resolutions;
  std::vector<cplx> fine_all;  // matching partners: a truncated list can split a conjugate pair
  for (std::size_t N : resolutions) {
    ScenarioConfig cfg = base;
    cfg.geometry.n_cells = N;
    Scenario sc = build_scenario(cfg);
    SpectrumReport rep = direct_spectrum(sc.sys);
    std::vector<cplx> low;
    double mx = 0;
    for (const auto& e : rep.entries) {
      mx = std::max(mx, std::abs(e.value));
      if (e.branch != Branch::zero_mode && low.size() < count) low.push_back(e.value);
      if (e.branch != Branch::zero_mode && N == resolutions[1]) fine_all.push_back(e.value);
    }
    d.lowest.push_back(low);
    d.max_abs.push_back(mx);
  }
  const auto& c = d.lowest[0];
  const auto& f = fine_all;
  d.max_rel_change = 0;
  for (const auto& z : c) {
    double best = INFINITY;
    for (const auto& w : f) best = std::min(best, std::abs(z - w) / std::abs(w));
    d.rel_change.push_back(best);
    d.max_rel_change = std::max(d.max_rel_change, best);
  }
  d.growth_exponent = std::log(d.max_abs[1] / d.max_abs[0]) /
                      std::log(static_cast<double>(resolutions[1]) / static_cast<double>(resolutions[0]));
  return d;
}

struct SpectrumMatch {
  double max_direct_to_root = 0.0;  // scaled by 1 + |lambda|
  double max_root_to_direct = 0.0;
  std::vector<std::pair<cplx, cplx>> pairs;
};

/// Nearest-neighbour matching in both directions, distances scaled by 1 + |lambda|.
inline SpectrumMatch match_spectra(const std::vector<cplx>& direct, const std::vector<cplx>& roots) {
  SpectrumMatch m;
  for (const auto& z : direct) {
    double best = INFINITY;
    cplx arg = z;
    for (const auto& w : roots)
      if (std::abs(z - w) < best) {
        best = std::abs(z - w);
        arg = w;
      }
    m.pairs.emplace_back(z, arg);
    m.max_direct_to_root = std::max(m.max_direct_to_root, best / (1.0 + std::abs(z)));
  }
  for (const auto& w : roots) {
    double best = INFINITY;
    for (const auto& z : direct) best = std::min(best, std::abs(z - w));
    m.max_root_to_direct = std::max(m.max_root_to_direct, best / (1.0 + std::abs(w)));
  }
  return m;
}

}  // namespace acbc
