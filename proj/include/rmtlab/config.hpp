#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rmtlab/complex_branch.hpp"
#include "rmtlab/errors.hpp"
#include "rmtlab/logfield.hpp"

namespace rmtlab {

// Resolved experiment configuration. Every field has a canonical text form so a
// configuration can be echoed to a manifest and read back unchanged.
struct ExperimentConfig {
  std::string ensemble = "goe";
  double beta = 1.0;  // beta-ensemble samplers only; Wigner classes fix it
  std::string potential = "quadratic";
  std::vector<std::size_t> sizes{128};
  std::size_t samples = 10;
  double kappa = 0.05;
  std::optional<double> eta0;          // default (log N)^2 / N
  std::optional<double> grid_spacing;  // default 1 / (4N)
  std::uint64_t seed = 1;
  std::size_t workers = 1;

  FieldPart part = FieldPart::re;
  double t = 0.5;
  double energy = 0.0;
  double eta = 0.0;  // field height
  double gamma = 1.0;
  std::vector<double> checkpoints;
  std::vector<cplx> points{{0.3, 0.05}};
  std::vector<double> zetas{-0.5, 0.5};
  std::vector<double> etas{0.5, 0.1, 0.02};
  std::vector<double> moments{1, 2, 3};
  std::vector<double> u_grid{0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8};
  std::vector<std::size_t> k_list;  // empty: pooled bulk indices with |gamma_k| < 1
  std::size_t mcmc_sweeps = 50;
  std::string dbm_scheme = "imex";  // imex | adaptive
  double dt_max = 1e-3;

  double eta0_for(std::size_t n) const {
    if (eta0) return *eta0;
    const double l = std::log(static_cast<double>(n));
    return l * l / static_cast<double>(n);
  }
  double spacing_for(std::size_t n) const { return grid_spacing ? *grid_spacing : 0.25 / static_cast<double>(n); }

  void validate() const {
    if (sizes.empty()) throw ConfigError("sizes must not be empty");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      if (sizes[i] == 0) throw ConfigError("sizes must be positive");
      if (i > 0 && sizes[i - 1] >= sizes[i]) throw ConfigError("sizes must be strictly ascending");
    }
    if (samples < 1) throw ConfigError("samples must be >= 1");
    if (!(kappa > 0.0 && kappa < 1.0)) throw ConfigError("kappa must lie in (0, 1)");
    if (eta0 && !(*eta0 > 0.0)) throw ConfigError("eta0 must be positive");
    if (grid_spacing && !(*grid_spacing > 0.0)) throw ConfigError("grid-spacing must be positive");
    if (!(beta > 0.0)) throw ConfigError("beta must be positive");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (!(dt_max > 0.0)) throw ConfigError("dt-max must be positive");
  }
};

namespace detail {

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) throw ConfigError("bad number for " + key + ": '" + v + "'");
  return x;
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError("bad integer for " + key + ": '" + v + "'");
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ConfigError("integer out of range for " + key + ": '" + v + "'");
  }
}

template <typename T, typename P>
std::vector<T> parse_list(const std::string& v, P&& one) {
  std::vector<T> out;
  for (const auto& item : split(v, ',')) out.push_back(one(trim(item)));
  return out;
}

// "a+bi", "a-bi", "a", "bi".
inline cplx parse_complex(const std::string& key, const std::string& v) {
  if (v.empty()) throw ConfigError("bad complex number for " + key);
  if (v.back() != 'i') return {parse_double(key, v), 0.0};
  const std::string body = v.substr(0, v.size() - 1);
  std::size_t cut = std::string::npos;
  for (std::size_t i = body.size(); i-- > 1;) {
    if ((body[i] == '+' || body[i] == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
      cut = i;
      break;
    }
  }
  if (cut == std::string::npos) return {0.0, parse_double(key, body.empty() ? "1" : body)};
  std::string im = body.substr(cut);
  if (im == "+" || im == "-") im += "1";
  return {parse_double(key, body.substr(0, cut)), parse_double(key, im)};
}

inline std::string format_complex(cplx z) {
  const std::string im = fmt17(z.imag());
  return fmt17(z.real()) + (im[0] == '-' ? "" : "+") + im + "i";
}

template <typename T, typename F>
std::string join(const std::vector<T>& v, F&& f) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + f(v[i]);
  return s;
}

}  // namespace detail

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "ensemble", "beta",   "potential", "sizes",  "samples", "kappa",  "eta0",    "grid-spacing",
      "seed",     "workers", "part",     "t",      "energy",  "eta",  "gamma",  "checkpoints", "points",
      "zetas",    "etas",   "moments",   "u-grid", "k-list",  "mcmc-sweeps", "dbm-scheme", "dt-max"};
  return keys;
}

// Applies one key=value setting; unknown keys are configuration errors.
inline void apply_setting(ExperimentConfig& c, const std::string& key, const std::string& raw) {
  using namespace detail;
  const std::string v = trim(raw);
  auto pd = [&](const std::string& s) { return parse_double(key, s); };
  auto pu = [&](const std::string& s) { return static_cast<std::size_t>(parse_uint(key, s)); };
  if (key == "ensemble") c.ensemble = v;
  else if (key == "beta") c.beta = pd(v);
  else if (key == "potential") c.potential = v;
  else if (key == "sizes") c.sizes = parse_list<std::size_t>(v, pu);
  else if (key == "samples") c.samples = pu(v);
  else if (key == "kappa") c.kappa = pd(v);
  else if (key == "eta0") c.eta0 = (v.empty() || v == "auto") ? std::nullopt : std::optional<double>(pd(v));
  else if (key == "grid-spacing")
    c.grid_spacing = (v.empty() || v == "auto") ? std::nullopt : std::optional<double>(pd(v));
  else if (key == "seed") c.seed = parse_uint(key, v);
  else if (key == "workers") c.workers = pu(v);
  else if (key == "part") {
    if (v == "re") c.part = FieldPart::re;
    else if (v == "im") c.part = FieldPart::im;
    else throw ConfigError("part must be re or im");
  } else if (key == "t") c.t = pd(v);
  else if (key == "energy") c.energy = pd(v);
  else if (key == "eta") c.eta = pd(v);
  else if (key == "gamma") c.gamma = pd(v);
  else if (key == "checkpoints") c.checkpoints = parse_list<double>(v, pd);
  else if (key == "points") c.points = parse_list<cplx>(v, [&](const std::string& s) { return parse_complex(key, s); });
  else if (key == "zetas") c.zetas = parse_list<double>(v, pd);
  else if (key == "etas") c.etas = parse_list<double>(v, pd);
  else if (key == "moments") c.moments = parse_list<double>(v, pd);
  else if (key == "u-grid") c.u_grid = parse_list<double>(v, pd);
  else if (key == "k-list") c.k_list = parse_list<std::size_t>(v, pu);
  else if (key == "mcmc-sweeps") c.mcmc_sweeps = pu(v);
  else if (key == "dbm-scheme") {
    if (v != "imex" && v != "adaptive") throw ConfigError("dbm-scheme must be imex or adaptive");
    c.dbm_scheme = v;
  } else if (key == "dt-max") c.dt_max = pd(v);
  else throw ConfigError("unknown configuration key '" + key + "'");
}

// Canonical key -> value text for every field (inverse of apply_setting).
inline std::map<std::string, std::string> config_settings(const ExperimentConfig& c) {
  using namespace detail;
  auto f = [](double x) { return fmt17(x); };
  auto u = [](std::size_t x) { return std::to_string(x); };
  std::map<std::string, std::string> m;
  m["ensemble"] = c.ensemble;
  m["beta"] = f(c.beta);
  m["potential"] = c.potential;
  m["sizes"] = join(c.sizes, u);
  m["samples"] = u(c.samples);
  m["kappa"] = f(c.kappa);
  m["eta0"] = c.eta0 ? f(*c.eta0) : "auto";
  m["grid-spacing"] = c.grid_spacing ? f(*c.grid_spacing) : "auto";
  m["seed"] = std::to_string(c.seed);
  m["workers"] = u(c.workers);
  m["part"] = c.part == FieldPart::re ? "re" : "im";
  m["t"] = f(c.t);
  m["energy"] = f(c.energy);
  m["eta"] = f(c.eta);
  m["gamma"] = f(c.gamma);
  m["checkpoints"] = join(c.checkpoints, f);
  m["points"] = join(c.points, format_complex);
  m["zetas"] = join(c.zetas, f);
  m["etas"] = join(c.etas, f);
  m["moments"] = join(c.moments, f);
  m["u-grid"] = join(c.u_grid, f);
  m["k-list"] = join(c.k_list, u);
  m["mcmc-sweeps"] = u(c.mcmc_sweeps);
  m["dbm-scheme"] = c.dbm_scheme;
  m["dt-max"] = f(c.dt_max);
  return m;
}

// Parses "key = value" lines; '#' starts a comment.
inline void apply_key_value_text(ExperimentConfig& c, const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
    apply_setting(c, detail::trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

}  // namespace rmtlab
