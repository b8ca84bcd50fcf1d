// rmtlab: command-line front end for the random-matrix laboratory.
//
//   rmtlab <subcommand> [--config FILE] [--flag value ...]
//
// Precedence: flags > config file > RMT_LAB_THREADS (workers only) > defaults.
// Exit codes: 0 success, 2 configuration error, 3 numerical or I/O error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rmtlab/io.hpp"
#include "rmtlab/rmtlab.hpp"

namespace fs = std::filesystem;
using namespace rmtlab;

namespace {

struct Flag {
  const char* key;
  const char* help;
};

// Flags shared by every subcommand; each maps onto a configuration key.
const std::vector<Flag> kFlags = {
    {"ensemble", "goe | gue | wigner-real:<law> | wigner-complex:<law> | divisible:<eps>:<base> | gbeta | mcmc"},
    {"beta", "beta for gbeta / mcmc samplers"},
    {"potential", "quadratic | quartic:<g>"},
    {"sizes", "comma-separated ascending matrix sizes"},
    {"samples", "samples per size"},
    {"kappa", "bulk margin"},
    {"eta0", "mesoscopic height (default (log N)^2/N)"},
    {"grid-spacing", "energy grid spacing (default 1/(4N))"},
    {"seed", "master seed"},
    {"workers", "worker threads"},
    {"checkpoints", "comma-separated checkpoint times (dbm-couple)"},
    {"part", "re | im"},
    {"t", "coupling time"},
    {"energy", "energy for local-law"},
    {"eta", "field height (field)"},
    {"gamma", "GMC parameter"},
    {"points", "comma-separated complex points, e.g. 0.3+0.05i"},
    {"zetas", "Laplace parameters (clt)"},
    {"etas", "heights (local-law)"},
    {"moments", "moment orders p (local-law)"},
    {"u-grid", "tail levels u"},
    {"k-list", "eigenvalue indices (tail)"},
    {"mcmc-sweeps", "production sweeps for mcmc"},
    {"dbm-scheme", "imex | adaptive"},
    {"dt-max", "largest DBM time step"},
};

// Defaults that differ per subcommand.
const std::map<std::string, std::map<std::string, std::string>> kCommandDefaults = {
    {"dbm-couple", {{"ensemble", "wigner-real:rademacher"}}},
    {"tightness", {{"ensemble", "divisible:0.5:wigner-real:rademacher"}}},
    {"clt", {{"ensemble", "gbeta"}, {"beta", "2"}}},
};

struct Invocation {
  std::string config_path;
  std::string out_dir = "out";
  bool plots = false;
  std::map<std::string, std::string> flags;
};

void add_common(CLI::App* sub, Invocation& inv) {
  sub->add_option("--config", inv.config_path, "key=value or JSON manifest file");
  sub->add_option("--out", inv.out_dir, "output directory");
  sub->add_flag("--plots", inv.plots, "also write plots.gp");
  for (const auto& f : kFlags) {
    sub->add_option_function<std::string>(
        std::string("--") + f.key, [&inv, key = std::string(f.key)](const std::string& v) { inv.flags[key] = v; },
        f.help);
  }
}

ExperimentConfig resolve(const std::string& command, const Invocation& inv) {
  ExperimentConfig c;
  if (auto it = kCommandDefaults.find(command); it != kCommandDefaults.end())
    for (const auto& [k, v] : it->second) apply_setting(c, k, v);
  if (const char* env = std::getenv("RMT_LAB_THREADS"); env && *env) apply_setting(c, "workers", env);
  if (!inv.config_path.empty()) {
    if (!fs::exists(inv.config_path)) throw ConfigError("config file not found: " + inv.config_path);
    io::apply_config_file(c, inv.config_path);
  }
  for (const auto& [k, v] : inv.flags) apply_setting(c, k, v);
  c.validate();
  return c;
}

class Output {
 public:
  explicit Output(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& content) {
    io::write_atomic(dir_ / name, content);
    files_.push_back(name);
  }

  void table(const ResultTable& t, bool plots) {
    write("results.csv", io::results_csv(t));
    write("summary.csv", io::summary_csv(t));
    if (!t.comparisons.empty()) write("comparison.csv", io::comparison_csv(t));
    if (plots) write("plots.gp", io::plots_gp(t));
    for (const auto& w : t.warnings) {
      std::cerr << "warning: " << w << "\n";
      warnings_.push_back(w);
    }
  }

  void finish(const std::string& command, const ExperimentConfig& c) {
    io::write_atomic(dir_ / "manifest.json", io::manifest(command, c, files_, warnings_).dump(2) + "\n");
  }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
  std::vector<std::string> warnings_;
};

std::string size_tag(std::size_t n, std::size_t i) { return "N" + std::to_string(n) + "_s" + std::to_string(i); }

void run(const std::string& command, const ExperimentConfig& c, const Invocation& inv) {
  Output out(inv.out_dir);
  if (command == "sample") {
    for (std::size_t n : c.sizes) {
      auto spectra = parallel_map(c.samples, c.workers, [&](std::size_t i) { return sample_spectrum(c, n, i); });
      for (std::size_t i = 0; i < spectra.size(); ++i) {
        out.write("spectrum_" + size_tag(n, i) + ".csv", io::spectrum_csv(spectra[i]));
        out.write("spectrum_" + size_tag(n, i) + ".json", io::spectrum_sidecar(spectra[i]));
      }
    }
  } else if (command == "field") {
    const auto nu = centering_for(c);
    const auto w = bulk_window(nu, c.kappa);
    for (std::size_t n : c.sizes) {
      auto fields = parallel_map(c.samples, c.workers, [&](std::size_t i) {
        const auto grid = uniform_grid(w.a, w.b, c.spacing_for(n));
        return field_on_grid(sample_spectrum(c, n, i), grid, c.eta, nu);
      });
      for (std::size_t i = 0; i < fields.size(); ++i) out.write("field_" + size_tag(n, i) + ".csv", io::field_csv(fields[i]));
    }
  } else if (command == "max") {
    out.table(run_max_experiment(c, c.part), inv.plots);
  } else if (command == "rigidity") {
    out.table(run_rigidity_experiment(c), inv.plots);
  } else if (command == "tail") {
    out.table(run_tail_experiment(c, c.k_list, c.u_grid), inv.plots);
  } else if (command == "dbm-couple") {
    out.table(run_homogenization_experiment(c), inv.plots);
    if (!c.checkpoints.empty()) {
      DbmOptions opt = dbm_options(c);
      opt.checkpoints = c.checkpoints;
      for (std::size_t n : c.sizes) {
        auto runs = parallel_map(c.samples, c.workers, [&](std::size_t i) { return run_coupled_sample(c, n, i, opt); });
        for (std::size_t i = 0; i < runs.size(); ++i)
          out.write("checkpoints_" + size_tag(n, i) + ".csv", io::checkpoints_csv(runs[i].result.checkpoints));
      }
    }
  } else if (command == "tightness") {
    out.table(run_tightness_experiment(c, c.t), inv.plots);
  } else if (command == "clt") {
    const Potential p = potential_from_name(c.potential);
    validate(p);
    const double beta = ensemble_beta(c);
    std::vector<cplx> zeta(c.points.size(), 1.0), xi(c.points.size(), 0.0);
    out.write("clt_prediction.json", io::clt_json(clt_prediction(zeta, xi, c.points, p, beta)));
    out.table(run_clt_experiment(c, c.points, c.zetas), inv.plots);
  } else if (command == "local-law") {
    out.table(run_local_law_scaling(c, c.etas), inv.plots);
  } else if (command == "gmc") {
    out.table(run_gmc_experiment(c), inv.plots);
  }
  out.finish(command, c);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rmtlab: random-matrix laboratory"};
  app.require_subcommand(1);
  Invocation inv;
  const std::vector<std::pair<const char*, const char*>> commands = {
      {"sample", "draw spectra"},
      {"field", "evaluate L_N on the bulk grid"},
      {"max", "maximum of Re or Im L_N"},
      {"rigidity", "optimal rigidity statistic"},
      {"tail", "Gaussian tail of eigenvalue deviations"},
      {"dbm-couple", "coupled Dyson Brownian motion and homogenization"},
      {"tightness", "tightness proxy for coupled maxima"},
      {"clt", "beta-ensemble CLT prediction and Monte Carlo"},
      {"local-law", "moment scaling of s_N - m_sc"},
      {"gmc", "normalized multiplicative chaos mass"},
  };
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), inv);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const ExperimentConfig c = resolve(command, inv);
    run(command, c, inv);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
