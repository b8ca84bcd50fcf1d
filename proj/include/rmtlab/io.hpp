#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "rmtlab/beta_clt.hpp"
#include "rmtlab/config.hpp"
#include "rmtlab/dbm.hpp"
#include "rmtlab/errors.hpp"
#include "rmtlab/experiments.hpp"
#include "rmtlab/logfield.hpp"
#include "rmtlab/spectrum.hpp"

namespace rmtlab::io {

using nlohmann::json;

// 17 significant digits; non-finite values as nan, inf, -inf.
inline std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return detail::fmt17(x);
}

// Writes through a sibling temporary file and renames it into place.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string results_csv(const ResultTable& t) {
  std::string s = "experiment,N,sample,stat,value\n";
  for (const auto& r : t.rows)
    s += t.experiment + "," + std::to_string(r.n) + "," + std::to_string(r.sample) + "," + r.stat + "," +
         num(r.value) + "\n";
  return s;
}

inline std::string summary_csv(const ResultTable& t) {
  std::string s = "experiment,N,stat,mean,median,iqr,slope,slope_se\n";
  for (const auto& r : t.summary)
    s += t.experiment + "," + std::to_string(r.n) + "," + r.stat + "," + num(r.mean) + "," + num(r.median) + "," +
         num(r.iqr) + "," + num(r.slope) + "," + num(r.slope_se) + "\n";
  return s;
}

inline std::string comparison_csv(const ResultTable& t) {
  std::string s = "experiment,N,stat,empirical,predicted,std_error\n";
  for (const auto& r : t.comparisons)
    s += t.experiment + "," + std::to_string(r.n) + "," + r.stat + "," + num(r.empirical) + "," + num(r.predicted) +
         "," + num(r.std_error) + "\n";
  return s;
}

inline std::string field_csv(const FieldGrid& g) {
  std::string s = "# N=" + std::to_string(g.n) + ", eta=" + num(g.eta) + ", centering=" + to_string(g.centering) +
                  "\nE,re_L,im_L\n";
  for (std::size_t i = 0; i < g.energies.size(); ++i)
    s += num(g.energies[i]) + "," + num(g.values[i].real()) + "," + num(g.values[i].imag()) + "\n";
  return s;
}

inline std::string spectrum_csv(const Spectrum& sp) {
  std::string s = "index,lambda\n";
  for (std::size_t i = 0; i < sp.size(); ++i) s += std::to_string(i + 1) + "," + num(sp[i]) + "\n";
  return s;
}

inline std::string spectrum_sidecar(const Spectrum& sp) {
  json j;
  j["ensemble"] = sp.ensemble_tag();
  j["N"] = sp.size();
  j["beta"] = sp.beta();
  j["seed"] = sp.seed();
  return j.dump(2) + "\n";
}

inline std::string checkpoints_csv(const std::vector<Checkpoint>& cps) {
  std::string s = "t,k,lambda,mu\n";
  for (const auto& c : cps)
    for (std::size_t k = 0; k < c.lambda.size(); ++k)
      s += num(c.t) + "," + std::to_string(k + 1) + "," + num(c.lambda[k]) + "," + num(c.mu[k]) + "\n";
  return s;
}

inline json complex_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

inline std::string clt_json(const CltPrediction& p) {
  json j;
  j["beta"] = p.beta;
  j["points"] = json::array();
  for (auto z : p.points) j["points"].push_back(complex_json(z));
  j["zeta"] = json::array();
  for (auto z : p.zeta) j["zeta"].push_back(complex_json(z));
  j["xi"] = json::array();
  for (auto z : p.xi) j["xi"].push_back(complex_json(z));
  j["sigma"] = complex_json(p.sigma);
  j["mu"] = complex_json(p.mu);
  j["quadrature_error"] = p.quadrature_error;
  return j.dump(2) + "\n";
}

// gnuplot script plotting the summary means against N for each statistic.
inline std::string plots_gp(const ResultTable& t) {
  std::string s = "set datafile separator ','\nset key left top\nset logscale x\nset xlabel 'N'\n";
  std::vector<std::string> stats;
  for (const auto& r : t.summary)
    if (r.n != 0 && std::find(stats.begin(), stats.end(), r.stat) == stats.end()) stats.push_back(r.stat);
  for (const auto& st : stats) {
    s += "set title '" + t.experiment + ": " + st + "'\n";
    s += "plot 'summary.csv' using ($2>0 && strcol(3) eq '" + st + "' ? $2 : 1/0):4 with linespoints title 'mean'\n";
    s += "pause -1\n";
  }
  return s;
}

inline constexpr const char* kVersion = "1.0.0";

inline json manifest(const std::string& command, const ExperimentConfig& c, const std::vector<std::string>& files,
                     const std::vector<std::string>& warnings = {}) {
  json j;
  j["command"] = command;
  j["version"] = kVersion;
  j["master_seed"] = c.seed;
  json cfg = json::object();
  for (const auto& [k, v] : config_settings(c)) cfg[k] = v;
  j["config"] = cfg;
  j["outputs"] = files;
  j["warnings"] = warnings;
  return j;
}

// Reads a config file: either a manifest / flat JSON object or key=value text.
inline void apply_config_file(ExperimentConfig& c, const std::filesystem::path& path) {
  const std::string text = read_file(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw ConfigError("cannot parse " + path.string() + ": " + e.what());
    }
    const json& cfg = j.contains("config") ? j["config"] : j;
    for (const auto& [k, v] : cfg.items()) apply_setting(c, k, v.is_string() ? v.get<std::string>() : v.dump());
    return;
  }
  apply_key_value_text(c, text);
}

}  // namespace rmtlab::io
