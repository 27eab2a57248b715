#include <algorithm>
#include <cmath>
#include <limits>

#include "fpplab/experiment.hpp"
#include "fpplab/fpp.hpp"
#include "fpplab/parallel.hpp"

namespace fpplab {

using nlohmann::json;

namespace {

std::vector<double> linspace(double lo, double hi, int count) { return RGridSpec{lo, hi, count}.points(); }

// Weight-space points at evenly spaced probability levels, so every law is
// probed across its bulk regardless of scale.
std::vector<double> support_grid(const WeightLaw& law, int count) {
  std::vector<double> out;
  for (double u : linspace(0.005, 0.995, count)) out.push_back(law.quantile(u));
  return out;
}

double rel_err(double a, double b, bool absolute_floor) {
  const double scale = absolute_floor ? std::max(1.0, std::abs(b)) : std::abs(b);
  return std::abs(a - b) / scale;
}

CheckResult make(std::string name, bool pass, double statistic, double tolerance) {
  return {std::move(name), pass, statistic, tolerance, json::object()};
}

}  // namespace

std::vector<CheckResult> coupling_checks(const WeightLaw& law, std::uint64_t seed) {
  const QuantileCoupling c(law);
  const bool gaussian = c.gaussian_mode();
  std::vector<CheckResult> out;

  if (gaussian) {
    double worst = 0.0;
    for (double s : linspace(-4.0, 4.0, 64)) {
      for (double t : linspace(-1.0, 1.0, 64)) worst = std::max(worst, std::abs(c.g(s, t) - (s + t)));
    }
    out.push_back(make("gaussian_shift_exact", worst <= 1e-9, worst, 1e-9));
  }

  const std::vector<double> s_grid = support_grid(law, 64);
  const std::vector<double> t_grid = linspace(-1.0, 1.0, 64);

  double semigroup = 0.0;
  for (double s : s_grid) {
    for (double t1 : linspace(-1.0, 1.0, 16)) {
      for (double t2 : linspace(-1.0, 1.0, 16)) {
        semigroup = std::max(semigroup, rel_err(c.g(c.g(s, t2), t1), c.g(s, t1 + t2), gaussian));
      }
    }
  }
  out.push_back(make("semigroup", semigroup <= 1e-8, semigroup, 1e-8));

  std::size_t breaks = 0;
  for (double t : t_grid) {
    for (std::size_t i = 1; i < s_grid.size(); ++i) breaks += c.g(s_grid[i], t) > c.g(s_grid[i - 1], t) ? 0 : 1;
  }
  for (double s : s_grid) {
    for (std::size_t i = 1; i < t_grid.size(); ++i) breaks += c.g(s, t_grid[i]) > c.g(s, t_grid[i - 1]) ? 0 : 1;
  }
  out.push_back(make("strict_monotonicity", breaks == 0, static_cast<double>(breaks), 0.0));

  double inverse = 0.0;
  for (double s : s_grid) {
    for (double t : t_grid) inverse = std::max(inverse, rel_err(c.g(c.g(s, -t), t), s, gaussian));
  }
  out.push_back(make("inverse_pair", inverse <= 1e-8, inverse, 1e-8));

  // Good-set inequality on 10^4 members of B_δ₀ drawn from the law itself.
  const Delta0Calibration cal = estimate_delta0(c);
  RngStream stream(hash_combine(seed, 0x600d));
  const std::vector<double> tau_check = linspace(0.0, 1.0, 64);
  std::size_t members = 0, draws = 0, violations = 0;
  double worst_gap = std::numeric_limits<double>::infinity();
  while (members < 10000) {
    const double s = law.quantile(stream.uniform());
    ++draws;
    if (!b_delta_member(c, s, cal.delta0)) continue;
    ++members;
    for (double t : tau_check) {
      const double gap = c.g(s, t) - (s + cal.delta0 * t);
      worst_gap = std::min(worst_gap, gap);
      violations += gap >= -kMembershipSlack ? 0 : 1;
    }
  }
  CheckResult good = make("good_set_inequality", violations == 0, static_cast<double>(violations), 0.0);
  good.detail = {{"delta0", cal.delta0},
                 {"achieved_mass", cal.achieved_mass},
                 {"members", members},
                 {"draws", draws},
                 {"min_gap", worst_gap}};
  out.push_back(std::move(good));

  RngStream ks_stream(hash_combine(seed, 0x0c5));
  const KsReport ks = pushforward_check(c, 0.5, 10000, ks_stream);
  out.push_back(make("pushforward_ks", ks.pass, ks.statistic, ks.critical));
  return out;
}

std::vector<CheckResult> mw_checks(const WeightLaw& law, std::size_t trials, std::uint64_t seed) {
  const QuantileCoupling c(law);
  const double median = law.quantile(0.5);
  std::vector<CheckResult> out;
  for (std::size_t dim : {1u, 4u, 16u}) {
    const std::vector<double> tau(dim, 0.5 / std::sqrt(static_cast<double>(dim)));
    const double sum_cut = static_cast<double>(dim) * median;
    const double coord_cut = law.quantile(std::pow(0.5, 1.0 / static_cast<double>(dim)));
    const double centre = static_cast<double>(dim) * law.mean();
    const double half = 0.25 * std::sqrt(static_cast<double>(dim) * law.variance());
    const std::pair<std::string, VectorEvent> events[] = {
        {"sum_below_median",
         [sum_cut](std::span<const double> x) {
           double s = 0.0;
           for (double v : x) s += v;
           return s <= sum_cut;
         }},
        {"all_below_quantile",
         [coord_cut](std::span<const double> x) {
           return std::all_of(x.begin(), x.end(), [&](double v) { return v <= coord_cut; });
         }},
        {"sum_in_central_window",
         [centre, half](std::span<const double> x) {
           double s = 0.0;
           for (double v : x) s += v;
           return s >= centre - half && s <= centre + half;
         }},
    };
    for (std::size_t e = 0; e < std::size(events); ++e) {
      RngStream stream(derive_seed(seed, dim, e));
      const MwReport r = mw_inequality_check(c, tau, events[e].second, trials, stream);
      CheckResult cr = make("mw_dim" + std::to_string(dim) + "_" + events[e].first, r.pass, r.margin,
                            -3.0 * r.std_error);
      cr.detail = {{"lhs", r.lhs},     {"rhs", r.rhs},           {"p_plus", r.p_plus},
                   {"p_minus", r.p_minus}, {"tau_norm2", r.tau_norm2}, {"std_error", r.std_error},
                   {"trials", r.trials}, {"inconclusive", r.inconclusive}};
      out.push_back(std::move(cr));
    }
  }
  return out;
}

CheckResult gaussian_closed_form_check() {
  const auto a = linspace(-4.0, 4.0, 40);
  const auto t = linspace(-2.0, 2.0, 25);
  const std::size_t v = gaussian_halfline_violations(a, t);
  CheckResult r = make("gaussian_halfline_closed_form", v == 0, static_cast<double>(v), 0.0);
  r.detail = {{"pairs", a.size() * t.size()}};
  return r;
}

std::vector<ChainRow> inequality_chain(const ExperimentConfig& config, double* a_star) {
  validate(config);
  const int n = config.battery_n;
  const int radius = config.radius_multiplier * n;
  const GridBox box(radius);
  const QuantileCoupling coupling(config.law);
  const std::vector<double> rs = config.battery_r_grid.points();
  const std::size_t trials = config.battery_samples;
  const std::uint64_t master = hash_combine(config.seed, 0xc4a1);

  // times[i] = {T_0, T_{r_1}, T_{-r_1}, T_{r_2}, ...}
  std::vector<std::vector<double>> times(trials);
  std::vector<DijkstraWorkspace> workspaces(config.threads);
  parallel_for(trials, config.threads, [&](std::size_t i, unsigned worker) {
    const Environment env = Environment::lazy(config.law, box, derive_seed(master, n, i));
    auto& ws = workspaces[worker];
    auto& row = times[i];
    row.push_back(passage_time(env, {0, 0}, {n, 0}, radius, ws).time);
    for (double r : rs) {
      row.push_back(passage_time(env, PerturbationSchedule(n, r), coupling, {0, 0}, {n, 0}, radius, ws).time);
      row.push_back(passage_time(env, PerturbationSchedule(n, -r), coupling, {0, 0}, {n, 0}, radius, ws).time);
    }
  });

  std::vector<double> base(trials);
  for (std::size_t i = 0; i < trials; ++i) base[i] = times[i][0];
  const ConcentrationEstimate q = concentration_function(base, config.window);
  if (a_star) *a_star = q.a_star;
  const auto inside = [&](double v) { return v >= q.a_star && v <= q.a_star + config.window; };

  std::vector<ChainRow> rows;
  const double count = static_cast<double>(trials);
  for (std::size_t j = 0; j < rs.size(); ++j) {
    ChainRow row;
    row.r = rs[j];
    const PerturbationSchedule sched(n, rs[j]);
    row.tau_norm2 = sched.norm2();
    double direct = 0.0;
    GridBox(n).for_each_edge([&](Edge e) {
      const double t = sched.tau(e);
      direct += t * t;
    });
    row.tau_norm2_direct = direct;

    std::size_t h0 = 0, hp = 0, hm = 0;
    for (const auto& t : times) {
      h0 += inside(t[0]) ? 1 : 0;
      hp += inside(t[1 + 2 * j]) ? 1 : 0;
      hm += inside(t[2 + 2 * j]) ? 1 : 0;
    }
    row.lhs = static_cast<double>(h0) / count;
    row.p_plus = static_cast<double>(hp) / count;
    row.p_minus = static_cast<double>(hm) / count;
    const double factor = std::exp(0.5 * row.tau_norm2);
    row.rhs = factor * std::sqrt(row.p_plus * row.p_minus);
    double var = row.lhs * (1.0 - row.lhs) / count;
    if (row.p_plus > 0.0 && row.p_minus > 0.0) {
      var += 0.25 * factor * factor *
             (row.p_minus / row.p_plus * row.p_plus * (1.0 - row.p_plus) / count +
              row.p_plus / row.p_minus * row.p_minus * (1.0 - row.p_minus) / count);
    }
    row.std_error = std::sqrt(var);
    row.pass = row.lhs <= row.rhs + 3.0 * row.std_error;
    rows.push_back(row);
  }
  return rows;
}

bool BatteryReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; }) &&
         std::all_of(chain.begin(), chain.end(), [](const ChainRow& r) { return r.pass; });
}

BatteryReport run_mw_battery(const ExperimentConfig& config) {
  validate(config);
  BatteryReport rep;
  rep.law = config.law.describe();
  rep.config_hash = config_hash(config);
  rep.n = config.battery_n;
  rep.samples = config.battery_samples;
  rep.window = config.window;

  rep.checks = coupling_checks(config.law, config.seed);
  auto mw = mw_checks(config.law, config.mw_trials, config.seed);
  rep.checks.insert(rep.checks.end(), mw.begin(), mw.end());
  rep.checks.push_back(gaussian_closed_form_check());

  const QuantileCoupling coupling(config.law);
  rep.delta0 = estimate_delta0(coupling).delta0;
  const AnnulusIndex idx = scales(config.battery_n);
  for (int k = idx.k0; k <= std::min(idx.k1, 4); ++k) {
    for (double s : {0.0, 0.5}) {
      rep.increments.push_back(perturbation_increment_check(coupling, config.battery_n, k, s, 0.5, rep.delta0,
                                                            config.increment_trials,
                                                            hash_combine(config.seed, 0x1c0 + k)));
    }
  }

  rep.chain = inequality_chain(config, &rep.a_star);
  double worst = 0.0;
  for (const auto& row : rep.chain) {
    worst = std::max(worst, std::abs(row.tau_norm2 - row.tau_norm2_direct) / std::max(1.0, row.tau_norm2));
  }
  rep.checks.push_back(make("tau_norm2_direct_sum", worst <= 1e-12, worst, 1e-12));
  return rep;
}

json checks_to_json(const std::string& law, const std::vector<CheckResult>& checks) {
  json arr = json::array();
  for (const auto& c : checks) {
    arr.push_back({{"name", c.name},
                   {"pass", c.pass},
                   {"statistic", c.statistic},
                   {"tolerance", c.tolerance},
                   {"detail", c.detail}});
  }
  return {{"law", law}, {"checks", arr}};
}

json battery_to_json(const BatteryReport& rep) {
  json out = checks_to_json(rep.law, rep.checks);
  out["schema_version"] = kSchemaVersion;
  out["config_hash"] = rep.config_hash;
  out["delta0"] = rep.delta0;
  out["n"] = rep.n;
  out["samples"] = rep.samples;
  out["a_star"] = rep.a_star;
  out["window"] = rep.window;
  out["pass"] = rep.all_pass();
  json inc = json::array();
  for (const auto& r : rep.increments) {
    inc.push_back({{"k", r.k},
                   {"s", r.s},
                   {"r", r.r},
                   {"threshold", r.threshold},
                   {"trials", r.trials},
                   {"events", r.events},
                   {"frequency", r.frequency},
                   {"stderr", r.std_error},
                   {"budget", r.budget},
                   {"exact", r.exact},
                   {"within_budget", r.pass}});
  }
  out["increments"] = inc;
  json chain = json::array();
  for (const auto& r : rep.chain) {
    chain.push_back({{"r", r.r},
                     {"tau_norm2", r.tau_norm2},
                     {"tau_norm2_direct", r.tau_norm2_direct},
                     {"lhs", r.lhs},
                     {"p_plus", r.p_plus},
                     {"p_minus", r.p_minus},
                     {"rhs", r.rhs},
                     {"stderr", r.std_error},
                     {"pass", r.pass}});
  }
  out["chain"] = chain;
  return out;
}

json omega_to_json(const OmegaDiagnostic& d) {
  return {{"schema_version", kSchemaVersion},
          {"n", d.n},
          {"delta0", d.delta0},
          {"r0", d.r0},
          {"grid", d.grid},
          {"trials", d.trials},
          {"failures", d.failures},
          {"failure_frequency", d.failure_frequency},
          {"min_increment", d.min_increment},
          {"a_star", d.a_star},
          {"window_hits_histogram", d.window_hits_histogram},
          {"mean_window_measure", d.mean_window_measure},
          {"measure_bound_violations", d.measure_bound_violations}};
}

}  // namespace fpplab
