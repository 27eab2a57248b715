// fpplab command-line driver.
//
// Exit codes: 0 success, 2 invalid configuration or arguments, 3 a check failed,
// 1 anything else.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fpplab/experiment.hpp"
#include "fpplab/fpp.hpp"
#include "fpplab/lattice.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fpplab;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitCheckFailed = 3;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string out;
  std::string law;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON config file")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "master seed");
  app->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
  app->add_option("--out", c.out, "output directory (default: stdout where applicable)");
  app->add_option("--law", c.law, "weight law, e.g. exponential:1, uniform:1,3, gamma:2,1, lognormal:0,0.5");
}

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.threads) cfg.threads = *c.threads;
  if (!c.out.empty()) cfg.out_dir = c.out;
  if (!c.law.empty()) cfg.law = parse_law_spec(c.law);
  return cfg;
}

// Writes to <out>/<name> when --out was given, otherwise to stdout.
void publish(const Common& c, const std::string& name, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  fs::create_directories(c.out);
  const fs::path p = fs::path(c.out) / name;
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + p.string() + " for writing");
  f << text;
  std::cerr << "wrote " << p.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fpplab: anti-concentration experiments for first-passage percolation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(FPPLAB_VERSION));

  Common common;

  auto* exp = app.add_subcommand("experiment", "sample T(0,(n,0)) across the n-grid and write CSV + JSON");
  add_common(exp, common);
  std::vector<int> n_grid;
  std::optional<std::size_t> samples;
  std::optional<double> window;
  exp->add_option("--n-grid", n_grid, "override the n-grid");
  exp->add_option("--samples", samples, "override samples per n");
  exp->add_option("--window", window, "override the window width");

  auto* mw = app.add_subcommand("mw-check", "MW inequality checks (add --full for the whole battery)");
  add_common(mw, common);
  std::optional<std::size_t> mw_trials;
  bool full = false;
  mw->add_option("--trials", mw_trials, "Monte Carlo trials per check");
  mw->add_flag("--full", full, "also run increment checks and the inequality chain");

  auto* cc = app.add_subcommand("coupling-check", "transport and semigroup checks for one law");
  add_common(cc, common);

  auto* pt = app.add_subcommand("passage-time", "T_r(0,(n,0)) for one environment along an r-grid");
  add_common(pt, common);
  int pt_n = 64;
  std::optional<int> pt_radius;
  std::string pt_grid = "0:0:1";
  pt->add_option("--n", pt_n, "target distance")->check(CLI::Range(16, 1 << 13));
  pt->add_option("--R", pt_radius, "restriction radius (default: multiplier * n)");
  pt->add_option("--r-grid", pt_grid, "perturbation grid lo:hi:count");

  auto* ld = app.add_subcommand("lattice-dump", "list the edges of an annulus as CSV");
  add_common(ld, common);
  int ld_k = 0;
  ld->add_option("--k", ld_k, "scale index")->check(CLI::Range(0, 12));

  auto* od = app.add_subcommand("omega-diag", "increment and window-measure diagnostic");
  add_common(od, common);
  int od_n = 64;
  std::size_t od_trials = 200;
  od->add_option("--n", od_n, "target distance")->check(CLI::Range(16, 1 << 12));
  od->add_option("--trials", od_trials, "environments")->check(CLI::Range(100, 1 << 24));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    ExperimentConfig cfg = resolve(common);

    if (exp->parsed()) {
      if (!n_grid.empty()) cfg.n_grid = n_grid;
      if (samples) cfg.samples = *samples;
      if (window) cfg.window = *window;
      validate(cfg);
      const ResultRecord rec = run_experiment(cfg);
      const OutputPaths paths = emit_outputs(rec, cfg.out_dir);
      std::cerr << "wrote " << paths.csv.string() << " and " << paths.json.string() << "\n";
      return 0;
    }

    if (mw->parsed()) {
      if (mw_trials) cfg.mw_trials = *mw_trials;
      validate(cfg);
      if (full) {
        const BatteryReport rep = run_mw_battery(cfg);
        publish(common, "battery.json", battery_to_json(rep).dump(2) + "\n");
        return rep.all_pass() ? 0 : kExitCheckFailed;
      }
      auto checks = mw_checks(cfg.law, cfg.mw_trials, cfg.seed);
      checks.push_back(gaussian_closed_form_check());
      publish(common, "mw_check.json", checks_to_json(cfg.law.describe(), checks).dump(2) + "\n");
      for (const auto& c : checks) {
        if (!c.pass) return kExitCheckFailed;
      }
      return 0;
    }

    if (cc->parsed()) {
      // Coupling checks also accept the Gaussian law, so no FPP validation here.
      const auto checks = coupling_checks(cfg.law, cfg.seed);
      publish(common, "coupling_check.json", checks_to_json(cfg.law.describe(), checks).dump(2) + "\n");
      for (const auto& c : checks) {
        if (!c.pass) return kExitCheckFailed;
      }
      return 0;
    }

    if (pt->parsed()) {
      if (!cfg.law.positive_support()) throw ValidationError("passage times need a law with support in (0, inf)");
      const int radius = pt_radius.value_or(cfg.radius_multiplier * pt_n);
      if (radius < pt_n) throw ValidationError("--R must be at least --n");
      const auto rs = RGridSpec::parse(pt_grid).points();
      for (double r : rs) {
        if (r < -2.0 || r > 2.0) throw ValidationError("r-grid must lie in [-2, 2]");
      }
      const Environment env = Environment::lazy(cfg.law, GridBox(radius), cfg.seed);
      const QuantileCoupling coupling(cfg.law);
      const auto results = passage_time_profile(env, coupling, pt_n, rs, {0, 0}, {pt_n, 0}, radius);
      json arr = json::array();
      for (std::size_t i = 0; i < rs.size(); ++i) {
        arr.push_back({{"r", rs[i]},
                       {"time", results[i].time},
                       {"touched_boundary", results[i].touched_boundary},
                       {"geodesic_length", results[i].geodesic.size()}});
      }
      publish(common, "passage_time.json", arr.dump(2) + "\n");
      return 0;
    }

    if (ld->parsed()) {
      std::string csv = "edge_id,x0,y0,x1,y1\n";
      for (const Edge& e : annulus_edges(ld_k)) {
        const Vertex a = e.tail(), b = e.head();
        csv += std::to_string(edge_key(e)) + ',' + std::to_string(a.x) + ',' + std::to_string(a.y) + ',' +
               std::to_string(b.x) + ',' + std::to_string(b.y) + '\n';
      }
      publish(common, "lattice_k" + std::to_string(ld_k) + ".csv", csv);
      return 0;
    }

    if (od->parsed()) {
      validate(cfg);
      const QuantileCoupling coupling(cfg.law);
      const double delta0 = estimate_delta0(coupling).delta0;
      const OmegaDiagnostic d =
          omega_diagnostic(coupling, od_n, od_trials, cfg.seed, delta0, cfg.radius_multiplier, cfg.threads);
      publish(common, "omega.json", omega_to_json(d).dump(2) + "\n");
      return 0;
    }
  } catch (const ValidationError& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return kExitValidation;
  } catch (const UnsupportedScale& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
