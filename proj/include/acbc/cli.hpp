#pragma once
// Command-line layer: spectrum, simulate, verify, compare-robin, essential-proxy.
// Each command writes CSV (or JSON for verify) and returns a process exit code.

#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "acbc/acbc.hpp"
#include "acbc/csv.hpp"

#ifndef ACBC_VERSION
#define ACBC_VERSION "0.0.0"
#endif

namespace acbc::cli {

struct CommonArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
};

inline Scenario load_scenario(const CommonArgs& a) {
  ScenarioConfig cfg = load_config(a.config);
  if (a.seed) cfg.initial = InitialConfig{.random_seed = *a.seed};
  return build_scenario(cfg);
}

inline void meta(VerificationReport& r, const Scenario& sc) {
  r.meta["config_hash"] = config_hash(sc.config);
  r.meta["tool_version"] = ACBC_VERSION;
  r.meta["n_nodes"] = std::to_string(sc.sys.n());
  r.meta["n_b"] = std::to_string(sc.sys.b());
  if (sc.config.initial.random_seed) r.meta["seed"] = std::to_string(*sc.config.initial.random_seed);
}

inline int code(ExitCode c) { return static_cast<int>(c); }

// ---------------------------------------------------------------- spectrum

inline void write_spectrum(std::ostream& os, const SpectrumReport& rep) {
  CsvWriter w(os);
  w.row("re", "im", "classification", "residual", "gamma_member");
  for (const auto& e : rep.entries)
    w.row(e.value.real(), e.value.imag(), to_string(e.branch), e.residual, e.admissible ? 1 : 0);
}

/// method: direct | pencil | special | both. Pencil seeds are the direct eigenvalues.
inline int cmd_spectrum(const CommonArgs& a, const std::string& method, std::ostream& out, std::ostream& err) {
  Scenario sc = load_scenario(a);
  const BlockSystem& s = sc.sys;
  const double tol = a.tol.value_or(1e-6);
  OutputSink sink(a.out, out);
  if (method == "direct") {
    write_spectrum(sink.stream(), direct_spectrum(s));
    sink.close();
    return 0;
  }
  if (method == "special") {
    SpecialCaseResult res = special_case_spectrum(s, sc.config.solver.cond_limit);
    write_spectrum(sink.stream(), res.spectrum);
    sink.close();
    double rr = 0;
    for (double v : res.resolvent_residuals) rr = std::max(rr, v);
    err << "hausdorff " << num17(res.hausdorff) << " resolvent " << num17(rr) << "\n";
    if (!(res.hausdorff <= tol * std::max(1.0, std::sqrt(s.a0_scale))) || !(rr <= 1e-8)) {
      err << "error: the predicted set {lambda^2 in sigma(A0)} u sigma(B4) does not match the direct spectrum\n";
      return code(ExitCode::certification);
    }
    return 0;
  }
  SpectrumReport direct = direct_spectrum(s);
  std::vector<cplx> seeds;
  for (const auto& e : direct.entries)
    if (e.admissible) seeds.push_back(e.value);
  SpectrumReport roots = pencil_roots(s, seeds, newton_options(sc.config.solver));
  if (method == "pencil") {
    write_spectrum(sink.stream(), roots);
    sink.close();
  } else if (method == "both") {
    SpectrumMatch m = match_spectra(seeds, roots.values());
    CsvWriter w(sink.stream());
    w.row("direct_re", "direct_im", "root_re", "root_im", "distance");
    for (const auto& [z, r] : m.pairs) w.row(z.real(), z.imag(), r.real(), r.imag(), std::abs(z - r) / (1.0 + std::abs(z)));
    sink.close();
    double d = std::max(m.max_direct_to_root, m.max_root_to_direct);
    err << "max matching distance " << num17(d) << " (" << roots.entries.size() << " roots, " << seeds.size()
        << " admissible eigenvalues)\n";
    if (!(d <= tol)) {
      err << "error: direct eigenvalues and pencil roots disagree (det(lambda - B_lambda) = 0 equivalence)\n";
      return code(ExitCode::certification);
    }
  } else {
    throw ConfigError("spectrum: unknown method '" + method + "'");
  }
  if (!roots.failed.empty()) {
    err << "error: " << roots.failed.size() << " seeds did not certify as pencil roots\n";
    return code(ExitCode::certification);
  }
  return 0;
}

// ---------------------------------------------------------------- simulate

inline int cmd_simulate(const CommonArgs& a, double t_final, double dt, const std::string& method,
                        const std::string& states_path, std::ostream& out, std::ostream& err) {
  Scenario sc = load_scenario(a);
  const BlockSystem& s = sc.sys;
  Method m = method == "rk4" ? Method::rk4 : Method::exact;
  if (method != "rk4" && method != "exact") throw ConfigError("simulate: method must be exact | rk4");
  Vec U0 = initial_state_from_config(sc.config.initial, s, sc.config.solver.tol);
  Trajectory tr = simulate(s, U0, uniform_grid(t_final, dt), m, sc.config.solver.eig_cond_limit);
  if (tr.cfl_warning)
    err << "warning: dt exceeds the rk4 stability bound " << num17(rk4_max_step(s)) << "; used " << tr.substeps
        << " substeps per step, consider --method exact\n";
  std::vector<double> ir = integral_residuals(s, tr);
  OutputSink sink(a.out, out);
  CsvWriter w(sink.stream());
  w.row("t", "energy", "integral_residual", "state_norm", "u_l2");
  for (std::size_t k = 0; k < tr.t.size(); ++k)
    w.row(tr.t[k], tr.energy.empty() ? NAN : tr.energy[k], ir[k], state_norm(s, tr.states[k]), l2_u(s, tr.states[k]));
  sink.close();
  if (!states_path.empty()) {
    OutputSink ss(states_path, out);
    CsvWriter sw(ss.stream());
    std::vector<std::string> head{"t"};
    for (Eigen::Index i = 0; i < s.dim(); ++i) {
      head.push_back("re" + std::to_string(i));
      head.push_back("im" + std::to_string(i));
    }
    sw.row(head);
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
      std::vector<std::string> r{num17(tr.t[k])};
      for (Eigen::Index i = 0; i < s.dim(); ++i) {
        r.push_back(num17(tr.states[k](i).real()));
        r.push_back(num17(tr.states[k](i).imag()));
      }
      sw.row(r);
    }
    ss.close();
  }
  err << "route " << tr.route << "\n";
  if (tr.energy.empty()) {
    err << "note: energy undefined for this configuration, values omitted\n";
    return 0;
  }
  const double slack = a.tol.value_or(1e-9) * tr.energy.front();
  for (std::size_t k = 1; k < tr.energy.size(); ++k)
    if (tr.energy[k] > tr.energy[k - 1] + slack) {
      err << "error: energy increased at t = " << num17(tr.t[k]) << " although d >= 0 (dissipative boundary)\n";
      return code(ExitCode::physics);
    }
  return 0;
}

// ---------------------------------------------------------------- verify

inline const std::vector<std::string>& check_names() {
  static const std::vector<std::string> n{
      "assumptions",      "restricted_block",      "identity_LD",     "dirichlet_defining",
      "resolvent_A0_block", "block_dirichlet",     "pencil_representation", "factorization",
      "shifted_factorization", "factor_product",   "resolvent_Acal",  "special_case_resolvent",
      "branch_separation", "form_symmetry",        "surjectivity_ladder"};
  return n;
}

/// Sample points for the identity checks; inadmissible ones are skipped.
inline std::vector<cplx> verify_points(const BlockSystem& s) {
  std::vector<cplx> out;
  for (cplx l : {cplx(1, 1), cplx(0.5, 2), cplx(2, -0.7), cplx(-0.3, 1.1)})
    if (admissible(s, l)) out.push_back(l);
  return out;
}

inline bool applicable(const std::string& name, const BlockSystem& s) {
  if (name == "special_case_resolvent" || name == "branch_separation") return s.b3_vanishes() && s.b1_is_minus_b4b2();
  if (name == "form_symmetry" || name == "surjectivity_ladder") return s.ops.neutral;
  return true;
}

inline void run_check(const std::string& name, const Scenario& sc, VerificationReport& rep) {
  const BlockSystem& s = sc.sys;
  const auto pts = verify_points(s);
  const double cl = sc.config.solver.cond_limit;
  auto worst = [&](auto f) {
    double w = 0;
    for (cplx l : pts) w = std::max(w, f(l));
    return w;
  };
  if (name == "assumptions") {
    rep.append(check_assumptions(s.ops), "assumptions.");
  } else if (name == "restricted_block") {
    const Eigen::Index n = s.n(), b = s.b();
    Mat ref = Mat::Zero(2 * n + b, 2 * n + b);
    ref.block(0, n, n, n) = Mat::Identity(n, n);
    ref.block(n, 0, n, n) = s.A0;
    ref.block(2 * n, 0, b, n) = s.ops.B2;
    double r = scaled_diff(s.Abb0, ref);
    r = std::max(r, scaled_diff(s.Acal.topLeftCorner(2 * n, 2 * n), s.Abb0.topLeftCorner(2 * n, 2 * n)));
    r = std::max(r, scaled_diff(s.A1cal + s.A2cal, s.Acal));
    rep.check(name, r, 1e-12, "block form of the restricted generator and the splitting");
  } else if (name == "identity_LD") {
    rep.check(name, worst([&](cplx l) { return identity_LD(s, l * l); }), 1e-10, "|| L D - I - B2 D ||");
  } else if (name == "dirichlet_defining") {
    rep.check(name, worst([&](cplx l) {
                Mat D = dirichlet_operator(s, l * l, cl);
                return std::max(fro(s.ops.R * D - Mat::Identity(s.b(), s.b())),
                                fro(l * l * D.topRows(s.n()) - s.ops.A_max * D));
              }),
              1e-9, "R D = I and (mu - A_max) D = 0");
  } else if (name == "resolvent_A0_block") {
    rep.check(name, worst([&](cplx l) { return scaled_diff(resolvent_A0_block(s, l, cl), dense_resolvent(s.Abb0, l, cl)); }),
              1e-9, "closed form against the dense inverse");
  } else if (name == "block_dirichlet") {
    rep.check(name, worst([&](cplx l) {
                Mat D = dirichlet_operator(s, l * l, cl);
                Mat BD = block_dirichlet(s, l, &D);
                const Eigen::Index n = s.n();
                double r = fro(BD.middleRows(n, n) - l * BD.topRows(n));
                r = std::max(r, fro(s.ops.A_max * D - l * BD.middleRows(n, n)));
                r = std::max(r, fro(s.ops.L * D - l * BD.bottomRows(s.b())));
                return std::max(r, fro(s.ops.R * D - Mat::Identity(s.b(), s.b())));
              }),
              1e-9, "eigenvector property of the block Dirichlet operator");
  } else if (name == "pencil_representation") {
    rep.check(name, worst([&](cplx l) { return scaled_diff(pencil(s, l), pencil_literal(s, l)); }), 1e-10,
              "representation formula against the literal composition");
  } else if (name == "factorization" || name == "shifted_factorization" || name == "factor_product") {
    double w = 0;
    for (cplx mu : {cplx(2, 0), cplx(1, 1), cplx(-0.5, 0)}) w = std::max(w, factorization_check(s, cplx(1, 1), mu).value(name));
    rep.check(name, w, 1e-8, "lambda = 1+i, mu in {2, 1+i, -0.5}");
  } else if (name == "resolvent_Acal") {
    rep.check(name, worst([&](cplx l) {
                return scaled_diff(resolvent_Acal(s, l, resolvent_options(sc.config.solver)), dense_resolvent(s.Acal, l, cl));
              }),
              1e-8, "pencil formula against the dense inverse");
  } else if (name == "special_case_resolvent") {
    double w = 0;
    Mat Ared = s.reduced_generator();
    for (cplx l : pts) w = std::max(w, scaled_diff(special_case_resolvent(s, l, cl), dense_resolvent(Ared, l, cl)));
    rep.check(name, w, 1e-8, "block-triangular formula on (u, v, y)");
  } else if (name == "branch_separation") {
    double sep = INFINITY;
    for (const auto& beta : eigenvalues(s.ops.B4)) sep = std::min(sep, distance_to_sigma_A0(s, beta * beta));
    rep.record(name, sep, sep > s.exclusion_radius, "min over beta in sigma(B4) of dist(beta^2, sigma(A0))");
  } else if (name == "form_symmetry") {
    rep.check(name, hermitian_residual(neutral_form_matrix(s.ops)), 1e-10, "conjugate symmetry of the neutral form");
  } else if (name == "surjectivity_ladder") {
    LadderResult lad = surjectivity_ladder(s.ops);
    rep.record(name, lad.contraction, lad.found && lad.contraction < 1.0,
               lad.found ? "lambda0 = " + num17(lad.lambda0) : "no contraction up to 2^16");
    rep.record("ladder_norm_monotone", lad.monotone ? 1.0 : 0.0, lad.monotone, "|| D^{A,L} || along 2^k, k = 2..12");
  } else {
    throw ConfigError("verify: unknown check '" + name + "'");
  }
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

inline int cmd_verify(const CommonArgs& a, const std::string& checks, std::ostream& out, std::ostream& err) {
  std::vector<std::string> sel;
  const bool all = checks == "all";
  if (all) {
    sel = check_names();
  } else {
    sel = split_list(checks);
    for (const auto& c : sel)
      if (std::find(check_names().begin(), check_names().end(), c) == check_names().end())
        throw ConfigError("verify: unknown check '" + c + "'");
  }
  Scenario sc = load_scenario(a);
  VerificationReport rep;
  meta(rep, sc);
  std::string skipped;
  for (const auto& c : sel) {
    if (!applicable(c, sc.sys)) {
      if (all) {
        skipped += (skipped.empty() ? "" : ",") + c;
        continue;
      }
      throw AssumptionError(c, "check does not apply to this configuration");
    }
    run_check(c, sc, rep);
  }
  if (!skipped.empty()) rep.meta["skipped"] = skipped;
  OutputSink sink(a.out, out);
  sink.stream() << rep.to_json().dump(2) << "\n";
  sink.close();
  for (const auto& it : rep.items)
    if (!it.pass) err << "failed: " << it.name << " = " << num17(it.value) << " (tolerance " << num17(it.tolerance) << ")\n";
  return rep.all_pass() ? 0 : code(ExitCode::certification);
}

// ---------------------------------------------------------------- compare-robin

inline int cmd_compare_robin(const CommonArgs& a, std::ostream& out, std::ostream& err) {
  Scenario sc = load_scenario(a);
  const BlockSystem& s = sc.sys;
  Vec U0 = initial_state_from_config(sc.config.initial, s, sc.config.solver.tol);
  std::vector<double> t = log_grid(1e-3, 1.0, 31);
  RobinComparison rc = robin_comparison(s, U0, t, sc.config.solver.eig_cond_limit);
  OutputSink sink(a.out, out);
  CsvWriter w(sink.stream());
  w.row("t", "deviation", "ratio");
  for (std::size_t k = 0; k < rc.t.size(); ++k) w.row(rc.t[k], rc.deviation[k], rc.ratio[k]);
  sink.close();
  err << "M_est " << num17(rc.M_est) << " ||A2 U0|| " << num17(rc.a2u0_norm) << "\n";
  if (rc.a2u0_norm == 0.0) return rc.M_est == 0.0 ? 0 : code(ExitCode::certification);
  // t = 1e-3 is the first grid point, t = 1e-2 the eleventh
  double r3 = rc.ratio[0], r2 = rc.ratio[10];
  const double f = a.tol.value_or(2.0);
  if (!(r2 <= f * r3 && r2 >= r3 / f)) {
    err << "error: deviation is not linear in t near 0 (ratio " << num17(r3) << " vs " << num17(r2) << ")\n";
    return code(ExitCode::certification);
  }
  return 0;
}

// ---------------------------------------------------------------- essential-proxy

inline int cmd_essential_proxy(const CommonArgs& a, const std::vector<std::size_t>& refinements, double epsilon,
                               std::ostream& out, std::ostream& err) {
  ScenarioConfig cfg = load_config(a.config);
  OutputSink sink(a.out, out);
  CsvWriter w(sink.stream());
  if (cfg.geometry.kind == MeshKind::interval) {
    EssentialProxy p = essential_spectrum_proxy(cfg, refinements, epsilon);
    err << p.message << "\n";
    std::vector<std::size_t> res = refinements.size() >= 2 ? refinements : std::vector<std::size_t>{128, 256};
    CompactResolventDiag d = compact_resolvent_diagnostic(cfg, res, 10);
    w.row("k", "re_coarse", "im_coarse", "re_fine", "im_fine", "rel_change");
    for (std::size_t k = 0; k < d.lowest[0].size(); ++k) {
      cplx f = k < d.lowest[1].size() ? d.lowest[1][k] : cplx(NAN, NAN);
      w.row(k + 1, d.lowest[0][k].real(), d.lowest[0][k].imag(), f.real(), f.imag(), d.rel_change[k]);
    }
    sink.close();
    err << "max |lambda| growth exponent " << num17(d.growth_exponent) << "\n";
    return 0;
  }
  EssentialProxy p = essential_spectrum_proxy(cfg, refinements, epsilon);
  w.row("nx", "n_b", "count_near_range", "total");
  for (const auto& r : p.rows) w.row(r.nx, r.n_b, r.count, r.total);
  sink.close();
  err << "essential range of -d/m:";
  for (const auto& r : p.range) err << " " << num17(r.value) << " (measure " << num17(r.measure) << ")";
  err << "\nfinite-dimensional truncation: only the refinement trend is meaningful\n";
  if (!p.nondecreasing) {
    err << "error: eigenvalue counts near the essential range decreased under refinement\n";
    return code(ExitCode::certification);
  }
  return 0;
}

// ---------------------------------------------------------------- entry point

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"acbc: operator-matrix checks for waves with acoustic boundary conditions"};
  app.set_version_flag("--version", std::string(ACBC_VERSION));
  app.require_subcommand(1);
  CommonArgs common;
  auto add_common = [&](CLI::App* c) {
    c->add_option("--config", common.config, "scenario JSON")->required();
    c->add_option("--out", common.out, "output path (stdout when omitted)");
    c->add_option("--seed", common.seed, "replace the initial data by compatible-random(seed)");
    c->add_option("--tol", common.tol, "tolerance of the command's main check");
  };

  std::string method = "both";
  auto* spectrum_cmd = app.add_subcommand("spectrum", "eigenvalues of the coupled generator");
  add_common(spectrum_cmd);
  spectrum_cmd->add_option("--method", method)->check(CLI::IsMember({"direct", "pencil", "special", "both"}));

  double t_final = 1.0, dt = 0.01;
  std::string sim_method = "exact", states;
  auto* sim = app.add_subcommand("simulate", "time evolution with energy diagnostics");
  add_common(sim);
  sim->add_option("--t-final", t_final);
  sim->add_option("--dt", dt);
  sim->add_option("--method", sim_method)->check(CLI::IsMember({"exact", "rk4"}));
  sim->add_option("--states", states, "also dump full states to this CSV");

  std::string checks = "all";
  auto* ver = app.add_subcommand("verify", "identity and factorization residuals as JSON");
  add_common(ver);
  ver->add_option("--checks", checks, "all, or a comma-separated list");

  auto* rob = app.add_subcommand("compare-robin", "deviation from the frozen-boundary evolution");
  add_common(rob);

  std::vector<std::size_t> refinements{8, 16, 32};
  double epsilon = 0.05;
  auto* ess = app.add_subcommand("essential-proxy", "eigenvalue accumulation under boundary refinement");
  add_common(ess);
  ess->add_option("--refinements", refinements);
  ess->add_option("--epsilon", epsilon);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : code(ExitCode::hypothesis);
  }
  try {
    if (*spectrum_cmd) return cmd_spectrum(common, method, out, err);
    if (*sim) return cmd_simulate(common, t_final, dt, sim_method, states, out, err);
    if (*ver) return cmd_verify(common, checks, out, err);
    if (*rob) return cmd_compare_robin(common, out, err);
    if (*ess) return cmd_essential_proxy(common, refinements, epsilon, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return code(ExitCode::certification);
  }
  return code(ExitCode::hypothesis);
}

}  // namespace acbc::cli
