#pragma once
// Scenario documents: JSON with the top-level keys
// geometry, model, coefficients, flags, initial, solver, output.
// Unknown and duplicate keys are rejected; every default is written back on serialization.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "acbc/errors.hpp"
#include "acbc/expr.hpp"
#include "acbc/mesh.hpp"

namespace acbc {

using json = nlohmann::json;

enum class ModelKind { wave, biharmonic, divergence };
enum class B1Mode { zero, minus_b4b2 };

struct GeometryConfig {
  MeshKind kind = MeshKind::interval;
  std::size_t n_cells = 64;
  double length = 1.0;
  std::string gamma1 = "both";  // interval: both | left | right
  std::size_t nx = 16;
  std::size_t ny = 16;
  bool operator==(const GeometryConfig&) const = default;
};

struct FlagsConfig {
  bool neutral = false;
  B1Mode b1_mode = B1Mode::zero;
  bool b3_zero = false;
  bool special_case = false;
  bool acknowledge_zero_m = false;  // neutral model on the interval, where M = 0
  bool operator==(const FlagsConfig&) const = default;
};

struct InitialConfig {
  std::string f = "0";
  std::string g = "0";
  std::string h = "0";
  std::string j = "compatible";  // "compatible" means j = L f
  std::optional<std::uint64_t> random_seed;  // set by "compatible-random(seed)"
  bool operator==(const InitialConfig&) const = default;
};

struct SolverConfig {
  double tol = 1e-10;            // initial-data compatibility
  double exclusion_rel = 1e-6;   // spectral exclusion radius relative to the A0 scale
  double gamma_rel = 1e-8;       // singular-value test for the pencil
  double cond_limit = 1e12;      // refuse solves above this condition estimate
  double eig_cond_limit = 1e6;   // eigenvector conditioning for the propagator
  int newton_max_iter = 50;
  double dedup_rel = 1e-8;
  double cert_rel = 1e-6;
  bool operator==(const SolverConfig&) const = default;
};

struct OutputConfig {
  std::string dir = ".";
  bool operator==(const OutputConfig&) const = default;
};

struct ScenarioConfig {
  GeometryConfig geometry;
  ModelKind model = ModelKind::wave;
  std::map<std::string, std::string> coefficients;
  FlagsConfig flags;
  InitialConfig initial;
  SolverConfig solver;
  OutputConfig output;
  bool operator==(const ScenarioConfig&) const = default;

  const std::string& coeff(const std::string& name) const {
    auto it = coefficients.find(name);
    if (it == coefficients.end()) throw ConfigError("coefficient '" + name + "' not set");
    return it->second;
  }
};

inline std::string to_string(ModelKind m) {
  switch (m) {
    case ModelKind::wave: return "wave";
    case ModelKind::biharmonic: return "biharmonic";
    case ModelKind::divergence: return "divergence";
  }
  return "wave";
}

inline std::string to_string(B1Mode m) { return m == B1Mode::zero ? "zero" : "minus_b4b2"; }

inline std::map<std::string, std::string> default_coefficients(ModelKind m) {
  switch (m) {
    case ModelKind::wave: return {{"c", "1"}, {"rho", "1"}, {"m", "1"}, {"d", "0"}, {"k", "0"}};
    case ModelKind::divergence: return {{"a", "1"}, {"rho", "1"}, {"m", "1"}, {"d", "0"}, {"k", "0"}};
    case ModelKind::biharmonic: return {{"r", "0"}, {"s", "0"}, {"p", "0"}, {"q", "0"}};
  }
  return {};
}

/// Mesh described by the geometry block.
inline Mesh build_mesh(const GeometryConfig& g) {
  if (g.kind == MeshKind::strip) return build_strip_mesh(g.nx, g.ny);
  std::vector<std::size_t> g1;
  if (g.gamma1 == "both") g1 = {0, g.n_cells};
  else if (g.gamma1 == "left") g1 = {0};
  else if (g.gamma1 == "right") g1 = {g.n_cells};
  else throw ConfigError("/geometry/gamma1: expected both | left | right");
  return build_interval_mesh(g.n_cells, g.length, g1);
}

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }
  bool has(const std::string& k) {
    seen_.insert(k);
    return j_.contains(k);
  }
  const json& at(const std::string& k) { seen_.insert(k); return j_.at(k); }
  std::string key_path(const std::string& k) const { return path_ + "/" + k; }

  template <class T>
  void read(const std::string& k, T& out) {
    if (!has(k)) return;
    const json& v = j_.at(k);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError("expected boolean");
        out = v.get<bool>();
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError("expected string");
        out = v.get<std::string>();
      } else if constexpr (std::is_same_v<T, std::size_t>) {
        if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError("expected non-negative integer");
        out = v.get<std::size_t>();
      } else if constexpr (std::is_same_v<T, int>) {
        if (!v.is_number_integer()) throw ConfigError("expected integer");
        out = v.get<int>();
      } else {
        if (!v.is_number()) throw ConfigError("expected number");
        out = v.get<double>();
      }
    } catch (const ConfigError& e) {
      throw ConfigError(key_path(k) + ": " + e.what());
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(path_ + "/" + it.key() + ": unknown key");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline json parse_json_strict(const std::string& text) {
  std::vector<std::set<std::string>> keys;
  json::parser_callback_t cb = [&keys](int, json::parse_event_t ev, json& parsed) {
    if (ev == json::parse_event_t::object_start) keys.emplace_back();
    else if (ev == json::parse_event_t::object_end) keys.pop_back();
    else if (ev == json::parse_event_t::key) {
      std::string k = parsed.get<std::string>();
      if (!keys.back().insert(k).second) throw ConfigError("duplicate key '" + k + "'");
    }
    return true;
  };
  try {
    return json::parse(text, cb);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
}

inline void check_expression(const std::string& path, const std::string& text) {
  try {
    (void)expr::Expression::parse(text);
  } catch (const expr::ParseError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline bool constant_nonzero(const std::string& text) {
  auto e = expr::Expression::parse(text);
  return e.is_constant() && e.eval({}) != 0.0;
}

}  // namespace detail

/// Parse and validate a scenario document.
inline ScenarioConfig parse_config(const std::string& text) {
  json doc = detail::parse_json_strict(text);
  ScenarioConfig cfg;
  detail::ObjectReader top(doc, "");

  if (top.has("model")) {
    std::string m;
    top.read("model", m);
    if (m == "wave") cfg.model = ModelKind::wave;
    else if (m == "biharmonic") cfg.model = ModelKind::biharmonic;
    else if (m == "divergence") cfg.model = ModelKind::divergence;
    else throw ConfigError("/model: expected wave | biharmonic | divergence, got '" + m + "'");
  }

  if (top.has("geometry")) {
    detail::ObjectReader g(top.at("geometry"), "/geometry");
    std::string kind = "interval";
    g.read("kind", kind);
    if (kind == "interval") {
      cfg.geometry.kind = MeshKind::interval;
      g.read("n_cells", cfg.geometry.n_cells);
      g.read("length", cfg.geometry.length);
      g.read("gamma1", cfg.geometry.gamma1);
      if (cfg.geometry.n_cells < 4) throw ConfigError("/geometry/n_cells: must be >= 4");
      if (!(cfg.geometry.length > 0)) throw ConfigError("/geometry/length: must be > 0");
      if (cfg.geometry.gamma1 != "both" && cfg.geometry.gamma1 != "left" && cfg.geometry.gamma1 != "right")
        throw ConfigError("/geometry/gamma1: expected both | left | right");
    } else if (kind == "strip") {
      cfg.geometry.kind = MeshKind::strip;
      g.read("nx", cfg.geometry.nx);
      g.read("ny", cfg.geometry.ny);
      if (cfg.geometry.nx < 4 || cfg.geometry.ny < 4) throw ConfigError("/geometry: nx, ny must be >= 4");
    } else {
      throw ConfigError("/geometry/kind: expected interval | strip, got '" + kind + "'");
    }
    g.finish();
  }

  cfg.coefficients = default_coefficients(cfg.model);
  if (top.has("coefficients")) {
    const json& c = top.at("coefficients");
    if (!c.is_object()) throw ConfigError("/coefficients: expected an object");
    for (auto it = c.begin(); it != c.end(); ++it) {
      std::string path = "/coefficients/" + it.key();
      if (!cfg.coefficients.count(it.key()))
        throw ConfigError(path + ": unknown coefficient for model " + to_string(cfg.model));
      std::string text;
      if (it->is_string()) text = it->get<std::string>();
      else if (it->is_number()) text = detail::fmt17(it->get<double>());
      else throw ConfigError(path + ": expected expression string or number");
      detail::check_expression(path, text);
      cfg.coefficients[it.key()] = text;
    }
  }

  if (top.has("flags")) {
    detail::ObjectReader f(top.at("flags"), "/flags");
    f.read("neutral", cfg.flags.neutral);
    std::string b1 = to_string(cfg.flags.b1_mode);
    f.read("b1_mode", b1);
    if (b1 == "zero") cfg.flags.b1_mode = B1Mode::zero;
    else if (b1 == "minus_b4b2") cfg.flags.b1_mode = B1Mode::minus_b4b2;
    else throw ConfigError("/flags/b1_mode: expected zero | minus_b4b2");
    f.read("b3_zero", cfg.flags.b3_zero);
    f.read("special_case", cfg.flags.special_case);
    f.read("acknowledge_zero_m", cfg.flags.acknowledge_zero_m);
    f.finish();
  }

  if (top.has("initial")) {
    const json& in = top.at("initial");
    if (in.is_string()) {
      static const std::regex re(R"(compatible-random\((\d+)\))");
      std::smatch mm;
      std::string s = in.get<std::string>();
      if (!std::regex_match(s, mm, re)) throw ConfigError("/initial: expected object or 'compatible-random(seed)'");
      cfg.initial.random_seed = std::stoull(mm[1].str());
    } else {
      detail::ObjectReader r(in, "/initial");
      r.read("f", cfg.initial.f);
      r.read("g", cfg.initial.g);
      r.read("h", cfg.initial.h);
      r.read("j", cfg.initial.j);
      r.finish();
      detail::check_expression("/initial/f", cfg.initial.f);
      detail::check_expression("/initial/g", cfg.initial.g);
      detail::check_expression("/initial/h", cfg.initial.h);
      if (cfg.initial.j != "compatible") detail::check_expression("/initial/j", cfg.initial.j);
    }
  }

  if (top.has("solver")) {
    detail::ObjectReader s(top.at("solver"), "/solver");
    s.read("tol", cfg.solver.tol);
    s.read("exclusion_rel", cfg.solver.exclusion_rel);
    s.read("gamma_rel", cfg.solver.gamma_rel);
    s.read("cond_limit", cfg.solver.cond_limit);
    s.read("eig_cond_limit", cfg.solver.eig_cond_limit);
    s.read("newton_max_iter", cfg.solver.newton_max_iter);
    s.read("dedup_rel", cfg.solver.dedup_rel);
    s.read("cert_rel", cfg.solver.cert_rel);
    s.finish();
    if (!(cfg.solver.tol > 0) || !(cfg.solver.exclusion_rel > 0) || !(cfg.solver.gamma_rel > 0) ||
        !(cfg.solver.cond_limit > 1) || !(cfg.solver.eig_cond_limit > 1) || cfg.solver.newton_max_iter < 1 ||
        !(cfg.solver.dedup_rel > 0) || !(cfg.solver.cert_rel > 0))
      throw ConfigError("/solver: tolerances must be positive");
  }

  if (top.has("output")) {
    detail::ObjectReader o(top.at("output"), "/output");
    o.read("dir", cfg.output.dir);
    o.finish();
  }
  top.finish();

  // Cross-field invariants.
  if (cfg.geometry.kind == MeshKind::strip && cfg.model == ModelKind::biharmonic)
    throw UnsupportedError("/model: the biharmonic model is implemented on the interval only");
  if (cfg.model != ModelKind::biharmonic) {
    if (cfg.flags.special_case && cfg.flags.b1_mode != B1Mode::minus_b4b2)
      throw ConfigError("/flags/special_case: the special-case spectrum needs b1_mode = minus_b4b2 (B1 = -B4 B2)");
    if (cfg.flags.special_case && (!cfg.flags.b3_zero || detail::constant_nonzero(cfg.coeff("k"))))
      throw ConfigError("/flags/special_case: the special-case spectrum assumes B3 = 0, i.e. k = 0 and b3_zero = true");
    if (cfg.flags.b3_zero && detail::constant_nonzero(cfg.coeff("k")))
      throw ConfigError("/flags/b3_zero: k = " + cfg.coeff("k") + " contradicts B3 = 0");
  } else if (cfg.flags.neutral) {
    throw UnsupportedError("/flags/neutral: the neutral transform is defined for the wave models");
  }
  if (cfg.flags.neutral && cfg.geometry.kind == MeshKind::interval && !cfg.flags.acknowledge_zero_m)
    throw ConfigError("/flags/neutral: on the interval M = 0; set acknowledge_zero_m to proceed");
  return cfg;
}

/// Canonical JSON with all defaults filled in.
inline json serialize_config(const ScenarioConfig& cfg) {
  json j;
  if (cfg.geometry.kind == MeshKind::interval)
    j["geometry"] = {{"kind", "interval"},
                     {"n_cells", cfg.geometry.n_cells},
                     {"length", cfg.geometry.length},
                     {"gamma1", cfg.geometry.gamma1}};
  else
    j["geometry"] = {{"kind", "strip"}, {"nx", cfg.geometry.nx}, {"ny", cfg.geometry.ny}};
  j["model"] = to_string(cfg.model);
  j["coefficients"] = json::object();
  for (const auto& [k, v] : cfg.coefficients) j["coefficients"][k] = v;
  j["flags"] = {{"neutral", cfg.flags.neutral},
                {"b1_mode", to_string(cfg.flags.b1_mode)},
                {"b3_zero", cfg.flags.b3_zero},
                {"special_case", cfg.flags.special_case},
                {"acknowledge_zero_m", cfg.flags.acknowledge_zero_m}};
  if (cfg.initial.random_seed)
    j["initial"] = "compatible-random(" + std::to_string(*cfg.initial.random_seed) + ")";
  else
    j["initial"] = {{"f", cfg.initial.f}, {"g", cfg.initial.g}, {"h", cfg.initial.h}, {"j", cfg.initial.j}};
  j["solver"] = {{"tol", cfg.solver.tol},
                 {"exclusion_rel", cfg.solver.exclusion_rel},
                 {"gamma_rel", cfg.solver.gamma_rel},
                 {"cond_limit", cfg.solver.cond_limit},
                 {"eig_cond_limit", cfg.solver.eig_cond_limit},
                 {"newton_max_iter", cfg.solver.newton_max_iter},
                 {"dedup_rel", cfg.solver.dedup_rel},
                 {"cert_rel", cfg.solver.cert_rel}};
  j["output"] = {{"dir", cfg.output.dir}};
  return j;
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// FNV-1a over the canonical serialization.
inline std::string config_hash(const ScenarioConfig& cfg) {
  std::string s = serialize_config(cfg).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace acbc
