#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fpplab/coupling.hpp"
#include "fpplab/distributions.hpp"
#include "fpplab/estimators.hpp"

namespace fpplab {

/// Raised for malformed or out-of-range configuration; the CLI maps it to exit
/// code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Evenly spaced grid "lo:hi:count" (count = 1 gives {lo}).
struct RGridSpec {
  double lo = -1.0;
  double hi = 1.0;
  int count = 64;

  [[nodiscard]] std::vector<double> points() const;
  [[nodiscard]] std::string to_string() const;
  static RGridSpec parse(const std::string& text);
};

struct ExperimentConfig {
  WeightLaw law = WeightLaw::exponential(1.0);
  std::vector<int> n_grid{16, 32, 64, 128};
  std::size_t samples = 4000;
  double window = 1.0;
  int radius_multiplier = 4;
  RGridSpec r_grid{-1.0, 1.0, 64};
  std::uint64_t seed = 20261017;

  // Inequality battery.
  int battery_n = 64;
  std::size_t battery_samples = 2000;
  RGridSpec battery_r_grid{0.0, 1.0, 8};
  std::size_t mw_trials = 100000;
  std::size_t increment_trials = 1000;

  // Per-n Ω increment diagnostic; 0 skips it.
  std::size_t omega_trials = 0;

  // Execution only; excluded from the config hash.
  unsigned threads = 8;
  std::string out_dir = "fpplab-out";
  std::size_t memory_budget_mb = 4096;
};

/// Throws ValidationError on the first violated rule.
void validate(const ExperimentConfig& config);

nlohmann::json law_to_json(const WeightLaw& law);
/// Tagged record such as {"family": "exponential", "rate": 1.0}.
WeightLaw law_from_json(const nlohmann::json& j);
/// Compact form "family:p1,p2", e.g. "exponential:1" or "uniform:1,3"; a
/// string starting with '{' is parsed as the JSON record.
WeightLaw parse_law_spec(const std::string& text);

nlohmann::json config_to_json(const ExperimentConfig& config);
/// Flat keys plus the nested "law" record; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// FNV-1a over the canonical JSON of every field that affects results.
std::string config_hash(const ExperimentConfig& config);

struct ScaleStatistics {
  int n = 0;
  int radius = 0;
  std::size_t samples = 0;
  ConcentrationEstimate concentration;
  VarianceEstimate variance;
  double boundary_rate = 0.0;
  std::uint64_t tie_count = 0;
  double omega_failure_rate = 0.0;  // NaN when the diagnostic was skipped
  double runtime_seconds = 0.0;     // wall clock; reported in JSON only
  std::vector<double> times;        // trial i used seed derive_seed(seed, n, i)
};

struct ResultRecord {
  std::string config_hash;
  ExperimentConfig config;
  std::vector<ScaleStatistics> scales;
};

class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bytes of Dijkstra scratch needed for `config` (all workers, largest box).
std::size_t estimated_memory_bytes(const ExperimentConfig& config);

/// Samples T^{R}(0, (n, 0)) with R = multiplier·n for every n in the grid and
/// summarizes it. Results depend only on the config hash, never on threads.
ResultRecord run_experiment(const ExperimentConfig& config);

struct CheckResult {
  std::string name;
  bool pass = false;
  double statistic = 0.0;
  double tolerance = 0.0;
  nlohmann::json detail = nlohmann::json::object();
};

/// Semigroup, monotonicity, inverse pair, good-set inequality and push-forward
/// checks for one law (plus the exact shift check in Gaussian mode).
std::vector<CheckResult> coupling_checks(const WeightLaw& law, std::uint64_t seed);

/// Monte Carlo MW inequality checks for dim ∈ {1, 4, 16}: sum below n·median, every
/// coordinate below a per-coordinate cut, and a central window for the sum.
std::vector<CheckResult> mw_checks(const WeightLaw& law, std::size_t trials, std::uint64_t seed);

/// The closed-form Gaussian half-line check on a 40 × 25 (a, t) grid.
CheckResult gaussian_closed_form_check();

struct ChainRow {
  double r = 0.0;
  double tau_norm2 = 0.0;         // from annulus sizes
  double tau_norm2_direct = 0.0;  // summed edge by edge over the box
  double lhs = 0.0;               // P̂(T ∈ W)
  double p_plus = 0.0;            // P̂(T_r ∈ W)
  double p_minus = 0.0;           // P̂(T_{-r} ∈ W)
  double rhs = 0.0;
  double std_error = 0.0;
  bool pass = false;
};

struct BatteryReport {
  std::string law;
  std::string config_hash;
  double delta0 = 0.0;
  int n = 0;
  std::size_t samples = 0;
  double a_star = 0.0;
  double window = 1.0;
  std::vector<CheckResult> checks;
  std::vector<IncrementReport> increments;
  std::vector<ChainRow> chain;

  [[nodiscard]] bool all_pass() const;
};

/// Finite-volume inequality chain at n = battery_n: with W the argmax window of
/// T, compares P̂(T ∈ W) with e^{‖τ_r‖²/2}√(P̂(T_r ∈ W) P̂(T_{-r} ∈ W)) on shared
/// environments for every r on the battery grid.
std::vector<ChainRow> inequality_chain(const ExperimentConfig& config, double* a_star = nullptr);

/// Coupling and MW checks, perturbation-increment frequencies for the scales
/// k ≤ 4 of battery_n, and the inequality chain.
BatteryReport run_mw_battery(const ExperimentConfig& config);

nlohmann::json checks_to_json(const std::string& law, const std::vector<CheckResult>& checks);
nlohmann::json battery_to_json(const BatteryReport& report);
nlohmann::json omega_to_json(const OmegaDiagnostic& diag);

inline constexpr int kSchemaVersion = 1;

/// CSV header followed by one row per scale; fixed-precision formatting so that
/// identical statistics produce identical bytes.
std::string results_csv(const ResultRecord& record);
nlohmann::json results_json(const ResultRecord& record);

struct OutputPaths {
  std::filesystem::path csv;
  std::filesystem::path json;
};

/// Writes results.csv and summary.json under `dir` (created if missing).
OutputPaths emit_outputs(const ResultRecord& record, const std::filesystem::path& dir);

}  // namespace fpplab
