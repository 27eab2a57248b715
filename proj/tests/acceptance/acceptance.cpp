// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
//   fpplab_acceptance [--out DIR] [--only 1,2,9]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "../support/brute_force.hpp"
#include "fpplab/coupling.hpp"
#include "fpplab/estimators.hpp"
#include "fpplab/experiment.hpp"
#include "fpplab/fpp.hpp"
#include "fpplab/lattice.hpp"
#include "fpplab/parallel.hpp"

using namespace fpplab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double limit_seconds;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<double> linspace(double lo, double hi, int count) { return RGridSpec{lo, hi, count}.points(); }

std::vector<WeightLaw> four_laws() {
  return {WeightLaw::exponential(1.0), WeightLaw::uniform(1.0, 3.0), WeightLaw::gamma(2.0, 1.0),
          WeightLaw::lognormal(0.0, 0.5)};
}

constexpr unsigned kWorkers = 8;

Outcome coupling_exactness() {
  const QuantileCoupling c(WeightLaw::standard_normal());
  double worst = 0.0;
  for (double s : linspace(-4.0, 4.0, 64)) {
    for (double t : linspace(-1.0, 1.0, 64)) worst = std::max(worst, std::abs(c.g(s, t) - (s + t)));
  }
  return {worst <= 1e-9, fmt("max |g_tau(s) - (s+tau)| = %.3g over 4096 pairs", worst)};
}

Outcome semigroup_monotonicity() {
  bool pass = true;
  std::string detail;
  for (const auto& law : four_laws()) {
    const QuantileCoupling c(law);
    std::vector<double> s_grid;
    for (double u : linspace(0.001, 0.999, 64)) s_grid.push_back(law.quantile(u));
    const auto t_grid = linspace(-1.0, 1.0, 64);
    double semigroup = 0.0, inverse = 0.0;
    std::size_t breaks = 0;
    for (double s : s_grid) {
      for (double t1 : linspace(-1.0, 1.0, 21)) {
        for (double t2 : linspace(-1.0, 1.0, 21)) {
          const double want = c.g(s, t1 + t2);
          semigroup = std::max(semigroup, std::abs(c.g(c.g(s, t2), t1) - want) / want);
        }
      }
      for (double t : t_grid) inverse = std::max(inverse, std::abs(c.g(c.g(s, -t), t) - s) / s);
      for (std::size_t i = 1; i < t_grid.size(); ++i) breaks += c.g(s, t_grid[i]) > c.g(s, t_grid[i - 1]) ? 0 : 1;
    }
    for (double t : t_grid) {
      for (std::size_t i = 1; i < s_grid.size(); ++i) breaks += c.g(s_grid[i], t) > c.g(s_grid[i - 1], t) ? 0 : 1;
    }
    const bool ok = semigroup <= 1e-8 && inverse <= 1e-8 && breaks == 0;
    pass = pass && ok;
    detail += fmt("%s: semigroup %.2g, inverse %.2g, monotonicity breaks %zu; ", law.describe().c_str(), semigroup,
                  inverse, breaks);
  }
  return {pass, detail};
}

Outcome good_set_inequality() {
  bool pass = true;
  std::string detail;
  const auto taus = linspace(0.0, 1.0, 64);
  for (const auto& law : four_laws()) {
    const QuantileCoupling c(law);
    const auto cal = estimate_delta0(c, 0.999);
    RngStream rng(derive_seed(2026, static_cast<std::uint64_t>(law.family()), 3));
    std::size_t members = 0, draws = 0, violations = 0;
    while (members < 10000) {
      const double s = law.quantile(rng.uniform());
      ++draws;
      if (!DeltaSetQuery{cal.delta0}.contains(c, s)) continue;
      ++members;
      for (double t : taus) violations += c.g(s, t) >= s + cal.delta0 * t - 1e-10 ? 0 : 1;
    }
    pass = pass && violations == 0 && cal.achieved_mass >= 0.999;
    detail += fmt("%s: delta0 2^%d (mass %.6f), %zu members of %zu draws, %zu violations; ",
                  law.describe().c_str(), static_cast<int>(std::lround(std::log2(cal.delta0))), cal.achieved_mass,
                  members, draws, violations);
  }
  return {pass, detail};
}

Outcome mw_battery() {
  const CheckResult closed = gaussian_closed_form_check();
  bool pass = closed.pass && closed.detail.at("pairs").get<std::size_t>() == 1000;
  std::string detail = fmt("gaussian closed form: %g violations on %zu pairs; ", closed.statistic,
                           closed.detail.at("pairs").get<std::size_t>());
  for (const auto& law : four_laws()) {
    const auto checks = mw_checks(law, 100000, 2026);
    std::size_t failed = 0, inconclusive = 0;
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& c : checks) {
      failed += c.pass ? 0 : 1;
      inconclusive += c.detail.at("inconclusive").get<bool>() ? 1 : 0;
      worst = std::min(worst, c.statistic / c.detail.at("std_error").get<double>());
    }
    pass = pass && failed == 0 && inconclusive == 0;
    detail += fmt("%s: %zu checks, %zu failed, min (rhs-lhs)/se %.2f; ", law.describe().c_str(), checks.size(),
                  failed, worst);
  }
  return {pass, detail};
}

Outcome shortest_path_oracle() {
  const auto law = WeightLaw::exponential(1.0);
  const int radius = 3;
  std::size_t mismatches = 0, comparisons = 0;
  RngStream pick(77);
  for (std::uint64_t env_id = 0; env_id < 100; ++env_id) {
    const auto env = Environment::sample(law, GridBox(radius), derive_seed(555, radius, env_id));
    std::vector<Vertex> targets{{3, 0}};
    targets.push_back({static_cast<int>(pick() % 7) - 3, static_cast<int>(pick() % 7) - 3});
    for (Vertex t : targets) {
      const double fast = passage_time(env, {0, 0}, t, radius).time;
      const double slow = testing::exhaustive_passage_time(radius, {0, 0}, t, [&](Edge e) { return env.weight(e); });
      mismatches += fast == slow ? 0 : 1;
      ++comparisons;
    }
  }
  return {mismatches == 0, fmt("%zu exact comparisons on 100 environments, %zu mismatches", comparisons, mismatches)};
}

Outcome monotone_profile() {
  const auto law = WeightLaw::exponential(1.0);
  const QuantileCoupling c(law);
  const int n = 64, radius = 4 * n;
  const auto rs = linspace(-1.0, 1.0, 64);
  std::vector<std::size_t> violations(500, 0);
  parallel_for(500, kWorkers, [&](std::size_t i, unsigned) {
    const auto env = Environment::lazy(law, GridBox(radius), derive_seed(606, n, i));
    const auto profile = passage_time_profile(env, c, n, rs, {0, 0}, {n, 0}, radius);
    for (std::size_t j = 1; j < profile.size(); ++j) violations[i] += profile[j].time >= profile[j - 1].time ? 0 : 1;
  });
  std::size_t total = 0;
  for (auto v : violations) total += v;
  return {total == 0, fmt("500 environments x 64 r-values, %zu decreasing steps", total)};
}

Outcome budget_boundedness() {
  double worst = 0.0;
  int worst_n = 0;
  auto rs = linspace(-1.0, 1.0, 64);
  for (int n = 16; n <= 1024; ++n) {
    for (double r : rs) {
      const double v = tau_schedule(n, r).norm2();
      if (v > worst) {
        worst = v;
        worst_n = n;
      }
    }
  }
  return {worst <= 50.0, fmt("max ||tau_r||^2 = %.4f (n = %d) over n in [16, 1024]", worst, worst_n)};
}

Outcome desk_scale_bounds() {
  bool pass = true;
  double slack = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 20; ++k) {
    const std::int64_t m = std::int64_t{1} << k;
    const double log_tail = binomial_log_tail(m, 0.999, m / 2);
    const double log_bound = -static_cast<double>(m) * std::log(8.0);
    pass = pass && log_tail <= log_bound;
    slack = std::min(slack, log_bound - log_tail);
  }
  std::string detail = fmt("binomial: min log-slack %.3f over k <= 20; paths:", slack);
  for (int k = 0; k <= 3; ++k) {
    const std::uint64_t count = count_paths_pk(k);
    const std::uint64_t bound = path_count_bound(k);
    pass = pass && count <= bound;
    detail += fmt(" |P_%d| = %llu <= %llu;", k, static_cast<unsigned long long>(count),
                  static_cast<unsigned long long>(bound));
  }
  return {pass, detail};
}

struct Shared {
  fs::path out;
  std::optional<ResultRecord> main_run;
  std::string main_csv;
};

const ResultRecord& main_run(Shared& sh) {
  if (!sh.main_run) {
    ExperimentConfig cfg;  // the default acceptance config
    cfg.threads = kWorkers;
    sh.main_run = run_experiment(cfg);
    sh.main_csv = emit_outputs(*sh.main_run, sh.out / "threads8").csv.string();
  }
  return *sh.main_run;
}

Outcome anti_concentration(Shared& sh) {
  const auto& rec = main_run(sh);
  bool pass = true;
  std::string detail = "q_hat:";
  for (std::size_t i = 0; i < rec.scales.size(); ++i) {
    const auto& s = rec.scales[i].concentration;
    detail += fmt(" n=%d %.4f(%.4f)", rec.scales[i].n, s.q_hat, s.std_error);
    if (i > 0) {
      const auto& p = rec.scales[i - 1].concentration;
      const double tol = 3.0 * std::hypot(s.std_error, p.std_error);
      pass = pass && s.q_hat <= p.q_hat + tol;
    }
  }
  const double first = rec.scales.front().concentration.q_hat;
  const double last = rec.scales.back().concentration.q_hat;
  pass = pass && rec.scales.front().n == 16 && rec.scales.back().n == 128 && last < first;
  return {pass, detail};
}

Outcome variance_growth(Shared& sh) {
  const auto& rec = main_run(sh);
  bool pass = true;
  std::string detail = "var:";
  for (std::size_t i = 0; i < rec.scales.size(); ++i) {
    const auto& v = rec.scales[i].variance;
    detail += fmt(" n=%d %.4f(%.4f)", rec.scales[i].n, v.variance, v.std_error);
    if (i > 0) {
      const auto& p = rec.scales[i - 1].variance;
      pass = pass && v.variance >= p.variance - 3.0 * std::hypot(v.std_error, p.std_error);
    }
  }
  return {pass, detail};
}

Outcome inequality_chain_check(Shared& sh) {
  ExperimentConfig cfg;
  cfg.threads = kWorkers;
  cfg.battery_n = 64;
  const BatteryReport rep = run_mw_battery(cfg);
  std::ofstream(sh.out / "battery.json") << battery_to_json(rep).dump(2) << "\n";
  bool pass = rep.chain.size() == 8;
  std::string detail = fmt("a* = %.4f;", rep.a_star);
  for (const auto& row : rep.chain) {
    pass = pass && row.pass && std::abs(row.tau_norm2 - row.tau_norm2_direct) <= 1e-12 * std::max(1.0, row.tau_norm2);
    detail += fmt(" r=%.3f lhs %.4f rhs %.4f (se %.4f);", row.r, row.lhs, row.rhs, row.std_error);
  }
  std::size_t other_failures = 0;
  for (const auto& c : rep.checks) other_failures += c.pass ? 0 : 1;
  detail += fmt(" other battery checks failing: %zu", other_failures);
  return {pass, detail};
}

Outcome reproducibility(Shared& sh) {
  main_run(sh);
  ExperimentConfig cfg;
  cfg.threads = 1;
  const auto rec = run_experiment(cfg);
  const auto csv1 = emit_outputs(rec, sh.out / "threads1").csv;
  auto read = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string a = read(csv1), b = read(sh.main_csv);
  return {!a.empty() && a == b,
          fmt("1-thread and 8-thread CSVs %s (%zu bytes, hash %s)", a == b ? "identical" : "differ", a.size(),
              rec.config_hash.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fpplab acceptance suite"};
  std::string out = "acceptance_out";
  std::vector<int> only;
  app.add_option("--out", out, "directory for run artifacts");
  app.add_option("--only", only, "criterion ids to run")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  Shared sh;
  sh.out = out;
  fs::create_directories(sh.out);

  const std::vector<Criterion> criteria{
      {1, "coupling exactness (gaussian)", 1, coupling_exactness},
      {2, "semigroup and monotonicity", 10, semigroup_monotonicity},
      {3, "good-set inequality", 30, good_set_inequality},
      {4, "MW inequality battery", 300, mw_battery},
      {5, "shortest-path oracle equivalence", 60, shortest_path_oracle},
      {6, "monotone profile", 600, monotone_profile},
      {7, "budget boundedness", 1, budget_boundedness},
      {8, "desk-scale binomial and path-count bounds", 60, desk_scale_bounds},
      {9, "anti-concentration trend", 1800, [&] { return anti_concentration(sh); }},
      {10, "variance growth", 1800, [&] { return variance_growth(sh); }},
      {11, "finite-volume inequality chain", 900, [&] { return inequality_chain_check(sh); }},
      {12, "thread-count reproducibility", 1800, [&] { return reproducibility(sh); }},
  };

  const std::set<int> selected(only.begin(), only.end());
  nlohmann::json report = nlohmann::json::array();
  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    // Criteria 9 and 10 share one run; its cost is charged to criterion 9.
    const bool in_time = secs <= c.limit_seconds;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("[%s] criterion %d: %s | %s | %.2f s (limit %.0f s)%s\n", pass ? "PASS" : "FAIL", c.id,
                c.title.c_str(), o.detail.c_str(), secs, c.limit_seconds, in_time ? "" : " OVER TIME");
    std::fflush(stdout);
    report.push_back({{"id", c.id},
                      {"title", c.title},
                      {"pass", pass},
                      {"detail", o.detail},
                      {"seconds", secs},
                      {"limit_seconds", c.limit_seconds}});
  }
  std::ofstream(sh.out / "acceptance.json") << report.dump(2) << "\n";
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
