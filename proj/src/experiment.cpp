#include "fpplab/experiment.hpp"

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

#include "fpplab/fpp.hpp"
#include "fpplab/parallel.hpp"

#ifndef FPPLAB_VERSION
#define FPPLAB_VERSION "0.0.0"
#endif

namespace fpplab {

using nlohmann::json;

// ---------------------------------------------------------------- r-grid

std::vector<double> RGridSpec::points() const {
  std::vector<double> out;
  if (count == 1) return {lo};
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out.push_back(i == count - 1 ? hi : lo + (hi - lo) * i / (count - 1));
  }
  return out;
}

std::string RGridSpec::to_string() const {
  std::ostringstream os;
  os.precision(17);
  os << lo << ':' << hi << ':' << count;
  return os.str();
}

RGridSpec RGridSpec::parse(const std::string& text) {
  RGridSpec g;
  int used = -1;
  if (std::sscanf(text.c_str(), "%lf:%lf:%d%n", &g.lo, &g.hi, &g.count, &used) != 3 ||
      used != static_cast<int>(text.size())) {
    throw ValidationError("r-grid must look like lo:hi:count, got '" + text + "'");
  }
  if (g.count < 1) throw ValidationError("r-grid count must be positive");
  if (!std::isfinite(g.lo) || !std::isfinite(g.hi) || g.lo > g.hi) {
    throw ValidationError("r-grid needs finite lo <= hi");
  }
  return g;
}

// ---------------------------------------------------------------- laws

json law_to_json(const WeightLaw& law) {
  switch (law.family()) {
    case LawFamily::Exponential:
      return {{"family", "exponential"}, {"rate", law.param(0)}};
    case LawFamily::Uniform:
      return {{"family", "uniform"}, {"lo", law.param(0)}, {"hi", law.param(1)}};
    case LawFamily::Gamma:
      return {{"family", "gamma"}, {"shape", law.param(0)}, {"scale", law.param(1)}};
    case LawFamily::LogNormal:
      return {{"family", "lognormal"}, {"mu", law.param(0)}, {"sigma", law.param(1)}};
    case LawFamily::PiecewiseLinearCdf: {
      json knots = json::array();
      for (const auto& [s, f] : law.knots()) knots.push_back({s, f});
      return {{"family", "piecewise_linear"}, {"knots", knots}};
    }
    case LawFamily::StandardNormal:
      return {{"family", "standard_normal"}};
  }
  return {};
}

namespace {

double number(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw ValidationError(std::string("law record needs numeric '") + key + "'");
  }
  return j.at(key).get<double>();
}

void only_keys(const json& j, std::initializer_list<const char*> keys) {
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* allowed : keys) known = known || k == allowed;
    if (!known) throw ValidationError("unknown key '" + k + "'");
  }
}

}  // namespace

WeightLaw law_from_json(const json& j) {
  if (!j.is_object() || !j.contains("family") || !j.at("family").is_string()) {
    throw ValidationError("law must be an object with a string 'family'");
  }
  const auto family = j.at("family").get<std::string>();
  try {
    if (family == "exponential") {
      only_keys(j, {"family", "rate"});
      return WeightLaw::exponential(number(j, "rate"));
    }
    if (family == "uniform") {
      only_keys(j, {"family", "lo", "hi"});
      return WeightLaw::uniform(number(j, "lo"), number(j, "hi"));
    }
    if (family == "gamma") {
      only_keys(j, {"family", "shape", "scale"});
      return WeightLaw::gamma(number(j, "shape"), number(j, "scale"));
    }
    if (family == "lognormal") {
      only_keys(j, {"family", "mu", "sigma"});
      return WeightLaw::lognormal(number(j, "mu"), number(j, "sigma"));
    }
    if (family == "piecewise_linear") {
      only_keys(j, {"family", "knots"});
      std::vector<std::pair<double, double>> knots;
      for (const auto& k : j.at("knots")) knots.emplace_back(k.at(0).get<double>(), k.at(1).get<double>());
      return WeightLaw::piecewise_linear(std::move(knots));
    }
    if (family == "standard_normal") {
      only_keys(j, {"family"});
      return WeightLaw::standard_normal();
    }
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception& e) {
    throw ValidationError(std::string("invalid law: ") + e.what());
  }
  throw ValidationError("unknown law family '" + family + "'");
}

WeightLaw parse_law_spec(const std::string& text) {
  if (!text.empty() && text.front() == '{') {
    try {
      return law_from_json(json::parse(text));
    } catch (const json::exception& e) {
      throw ValidationError(std::string("law JSON: ") + e.what());
    }
  }
  const auto colon = text.find(':');
  const std::string family = text.substr(0, colon);
  std::vector<double> p;
  if (colon != std::string::npos) {
    std::istringstream is(text.substr(colon + 1));
    std::string item;
    while (std::getline(is, item, ',')) {
      try {
        std::size_t used = 0;
        p.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw ValidationError("bad law parameter '" + item + "' in '" + text + "'");
      }
    }
  }
  static const std::vector<std::pair<std::string, std::vector<const char*>>> names{
      {"exponential", {"rate"}},   {"uniform", {"lo", "hi"}},       {"gamma", {"shape", "scale"}},
      {"lognormal", {"mu", "sigma"}}, {"standard_normal", {}},
  };
  for (const auto& [name, keys] : names) {
    if (name != family) continue;
    if (p.size() != keys.size()) {
      throw ValidationError("law '" + family + "' takes " + std::to_string(keys.size()) + " parameters");
    }
    json j{{"family", family}};
    for (std::size_t i = 0; i < keys.size(); ++i) j[keys[i]] = p[i];
    return law_from_json(j);
  }
  throw ValidationError("unknown law '" + text + "'");
}

// ---------------------------------------------------------------- config

void validate(const ExperimentConfig& c) {
  if (!c.law.positive_support()) {
    throw ValidationError("law " + c.law.describe() + " has support outside (0, inf); FPP needs positive weights");
  }
  if (c.n_grid.empty()) throw ValidationError("n_grid is empty");
  for (int n : c.n_grid) {
    if (n < 16) throw ValidationError("every n must be at least 16, got " + std::to_string(n));
  }
  if (c.samples < 100) throw ValidationError("samples must be at least 100");
  if (!(c.window > 0.0) || !std::isfinite(c.window)) throw ValidationError("window must be positive");
  if (c.radius_multiplier < 2) throw ValidationError("radius_multiplier must be at least 2");
  for (int n : c.n_grid) {
    if (static_cast<long long>(n) * c.radius_multiplier > (1 << 14)) {
      throw ValidationError("restriction radius multiplier*n exceeds 16384 for n = " + std::to_string(n));
    }
  }
  if (c.battery_n < 16) throw ValidationError("battery_n must be at least 16");
  if (static_cast<long long>(c.battery_n) * c.radius_multiplier > (1 << 14)) {
    throw ValidationError("battery restriction radius exceeds 16384");
  }
  if (c.battery_samples < 100) throw ValidationError("battery_samples must be at least 100");
  for (double r : c.battery_r_grid.points()) {
    if (r < 0.0 || r > 1.0) throw ValidationError("battery_r_grid must lie in [0, 1]");
  }
  for (double r : c.r_grid.points()) {
    if (r < -2.0 || r > 2.0) throw ValidationError("r_grid must lie in [-2, 2]");
  }
  if (c.mw_trials < 100) throw ValidationError("mw_trials must be at least 100");
  if (c.increment_trials < 1) throw ValidationError("increment_trials must be positive");
  if (c.omega_trials != 0 && c.omega_trials < 100) throw ValidationError("omega_trials must be 0 or at least 100");
  if (c.threads < 1) throw ValidationError("threads must be at least 1");
}

json config_to_json(const ExperimentConfig& c) {
  return {
      {"law", law_to_json(c.law)},
      {"n_grid", c.n_grid},
      {"samples", c.samples},
      {"window", c.window},
      {"radius_multiplier", c.radius_multiplier},
      {"r_grid", c.r_grid.to_string()},
      {"seed", c.seed},
      {"battery_n", c.battery_n},
      {"battery_samples", c.battery_samples},
      {"battery_r_grid", c.battery_r_grid.to_string()},
      {"mw_trials", c.mw_trials},
      {"increment_trials", c.increment_trials},
      {"omega_trials", c.omega_trials},
      {"threads", c.threads},
      {"out_dir", c.out_dir},
      {"memory_budget_mb", c.memory_budget_mb},
  };
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  ExperimentConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "law") c.law = law_from_json(v);
      else if (key == "n_grid") c.n_grid = v.get<std::vector<int>>();
      else if (key == "samples") c.samples = v.get<std::size_t>();
      else if (key == "window") c.window = v.get<double>();
      else if (key == "radius_multiplier") c.radius_multiplier = v.get<int>();
      else if (key == "r_grid") c.r_grid = RGridSpec::parse(v.get<std::string>());
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "battery_n") c.battery_n = v.get<int>();
      else if (key == "battery_samples") c.battery_samples = v.get<std::size_t>();
      else if (key == "battery_r_grid") c.battery_r_grid = RGridSpec::parse(v.get<std::string>());
      else if (key == "mw_trials") c.mw_trials = v.get<std::size_t>();
      else if (key == "increment_trials") c.increment_trials = v.get<std::size_t>();
      else if (key == "omega_trials") c.omega_trials = v.get<std::size_t>();
      else if (key == "threads") c.threads = v.get<unsigned>();
      else if (key == "out_dir") c.out_dir = v.get<std::string>();
      else if (key == "memory_budget_mb") c.memory_budget_mb = v.get<std::size_t>();
      else throw ValidationError("unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

std::string config_hash(const ExperimentConfig& c) {
  json j = config_to_json(c);
  j.erase("threads");
  j.erase("out_dir");
  j.erase("memory_budget_mb");
  const std::string canon = j.dump();  // object keys are sorted
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canon) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

// ---------------------------------------------------------------- runner

std::size_t estimated_memory_bytes(const ExperimentConfig& c) {
  int n_max = 0;
  for (int n : c.n_grid) n_max = std::max(n_max, n);
  const std::size_t side = 2 * static_cast<std::size_t>(c.radius_multiplier) * n_max + 1;
  const std::size_t per_worker = side * side * (sizeof(DijkstraWorkspace::Label) + 32);
  return per_worker * c.threads;
}

ResultRecord run_experiment(const ExperimentConfig& config) {
  validate(config);
  const std::size_t need = estimated_memory_bytes(config);
  if (need > config.memory_budget_mb * (std::size_t{1} << 20)) {
    throw ResourceError("estimated " + std::to_string(need >> 20) + " MiB of Dijkstra scratch exceeds the " +
                        std::to_string(config.memory_budget_mb) + " MiB budget");
  }

  ResultRecord rec;
  rec.config = config;
  rec.config_hash = config_hash(config);
  const QuantileCoupling coupling(config.law);
  double delta0 = 0.0;
  if (config.omega_trials > 0) delta0 = estimate_delta0(coupling).delta0;

  std::vector<DijkstraWorkspace> workspaces(config.threads);
  for (int n : config.n_grid) {
    const auto start = std::chrono::steady_clock::now();
    const int radius = config.radius_multiplier * n;
    const GridBox box(radius);
    std::vector<PassageResult> trials(config.samples);
    parallel_for(config.samples, config.threads, [&](std::size_t i, unsigned worker) {
      const Environment env = Environment::lazy(config.law, box, derive_seed(config.seed, n, i));
      PassageResult r = passage_time(env, {0, 0}, {n, 0}, radius, workspaces[worker]);
      r.geodesic.clear();
      r.geodesic.shrink_to_fit();
      trials[i] = std::move(r);
    });

    ScaleStatistics st;
    st.n = n;
    st.radius = radius;
    st.samples = config.samples;
    st.times.reserve(trials.size());
    std::size_t boundary = 0;
    for (const auto& t : trials) {
      st.times.push_back(t.time);
      boundary += t.touched_boundary ? 1 : 0;
      st.tie_count += t.near_ties;
    }
    st.concentration = concentration_function(st.times, config.window);
    st.variance = variance_estimate(st.times);
    st.boundary_rate = static_cast<double>(boundary) / static_cast<double>(trials.size());
    st.omega_failure_rate = std::numeric_limits<double>::quiet_NaN();
    if (config.omega_trials > 0) {
      st.omega_failure_rate = omega_diagnostic(coupling, n, config.omega_trials, hash_combine(config.seed, 0x0e5a),
                                               delta0, config.radius_multiplier, config.threads)
                                  .failure_frequency;
    }
    st.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rec.scales.push_back(std::move(st));
  }
  return rec;
}

// ---------------------------------------------------------------- outputs

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string results_csv(const ResultRecord& record) {
  std::string out =
      "n,law,samples,window,q_hat,a_star,stderr,var,var_stderr,mean,boundary_rate,tie_count,omega_failure_rate\n";
  const std::string law = csv_quote(record.config.law.describe());
  for (const auto& s : record.scales) {
    out += std::to_string(s.n) + ',' + law + ',' + std::to_string(s.samples) + ',' + fmt(record.config.window) +
           ',' + fmt(s.concentration.q_hat) + ',' + fmt(s.concentration.a_star) + ',' +
           fmt(s.concentration.std_error) + ',' + fmt(s.variance.variance) + ',' + fmt(s.variance.std_error) +
           ',' + fmt(s.variance.mean) + ',' + fmt(s.boundary_rate) + ',' + std::to_string(s.tie_count) + ',' +
           fmt(s.omega_failure_rate) + '\n';
  }
  return out;
}

json results_json(const ResultRecord& record) {
  json scales = json::array();
  json seeds = json::array();
  for (const auto& s : record.scales) {
    scales.push_back({
        {"n", s.n},
        {"radius", s.radius},
        {"samples", s.samples},
        {"q_hat", s.concentration.q_hat},
        {"a_star", s.concentration.a_star},
        {"window_count", s.concentration.count},
        {"stderr", s.concentration.std_error},
        {"mean", s.variance.mean},
        {"var", s.variance.variance},
        {"var_stderr", finite_or_null(s.variance.std_error)},
        {"boundary_rate", s.boundary_rate},
        {"tie_count", s.tie_count},
        {"omega_failure_rate", finite_or_null(s.omega_failure_rate)},
        {"runtime_seconds", s.runtime_seconds},
    });
    seeds.push_back({{"n", s.n},
                     {"first_trial_seed", derive_seed(record.config.seed, s.n, 0)},
                     {"rule", "derive_seed(master, n, trial)"}});
  }
  return {
      {"schema_version", kSchemaVersion},
      {"version", FPPLAB_VERSION},
      {"config_hash", record.config_hash},
      {"master_seed", record.config.seed},
      {"config", config_to_json(record.config)},
      {"seeds", seeds},
      {"scales", scales},
  };
}

OutputPaths emit_outputs(const ResultRecord& record, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  OutputPaths paths{dir / "results.csv", dir / "summary.json"};
  const auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + p.string() + " for writing");
    out << text;
    if (!out.flush()) throw std::runtime_error("write failed for " + p.string());
  };
  write(paths.csv, results_csv(record));
  write(paths.json, results_json(record).dump(2) + "\n");
  return paths;
}

}  // namespace fpplab
