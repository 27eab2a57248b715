#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fpplab/coupling.hpp"
#include "fpplab/fpp.hpp"

namespace fpplab {

/// Monte Carlo passage times for one scale.
struct SampleSet {
  std::vector<double> values;
  int n = 0;
  std::string law;
  std::uint64_t seed = 0;
};

struct ConcentrationEstimate {
  double width = 1.0;
  double q_hat = 0.0;
  std::size_t count = 0;  // samples inside the argmax window
  double a_star = 0.0;    // argmax window is [a_star, a_star + width]
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// max_a #{v ∈ [a, a+w]} / N over all closed windows. The maximum is attained
/// with a at a sample point; ties go to the smallest a.
ConcentrationEstimate concentration_function(std::span<const double> values, double width);
inline ConcentrationEstimate concentration_function(const SampleSet& s, double width) {
  return concentration_function(s.values, width);
}

struct VarianceEstimate {
  double mean = 0.0;
  double variance = 0.0;
  double std_error = 0.0;  // jackknife; NaN for fewer than 3 samples
};

/// Unbiased sample variance with a leave-one-out jackknife standard error.
VarianceEstimate variance_estimate(std::span<const double> values);

struct ProportionEstimate {
  double p = 0.0;
  double std_error = 0.0;
};

/// P̂(T ∉ [a, b]).
ProportionEstimate fluctuation_probability(std::span<const double> values, double a, double b);

/// P̂(T ∈ [a, a + w]).
ProportionEstimate window_probability(std::span<const double> values, double a, double w);

/// ln P(Bin(m, p) ≤ threshold), summed exactly in log space.
double binomial_log_tail(std::int64_t m, double p, std::int64_t threshold);
inline double binomial_tail_exact(std::int64_t m, double p, std::int64_t threshold) {
  return std::exp(binomial_log_tail(m, p, threshold));
}

/// Lebesgue measure of {r : T_r ∈ [a, a+w]} for the piecewise-linear
/// interpolation of a nondecreasing profile. Throws std::logic_error when the
/// profile decreases anywhere.
double lebesgue_window_measure(std::span<const double> r_values, std::span<const double> times,
                               double a, double w);

/// The r-grid r0·ℤ ∩ [-1, 1] with r0 = 8 / (δ₀ √(ln n)).
struct OmegaGrid {
  double r0 = 0.0;
  std::vector<double> points;
};
OmegaGrid omega_grid(int n, double delta0);

struct OmegaDiagnostic {
  int n = 0;
  double delta0 = 0.0;
  double r0 = 0.0;
  std::vector<double> grid;
  std::size_t trials = 0;
  std::size_t failures = 0;  // trials where some T_{r+r0} - T_r < 2
  double failure_frequency = 0.0;
  double min_increment = 0.0;
  double a_star = 0.0;  // argmax unit window of T_0 over trials
  /// histogram[j] = number of trials with exactly j grid points r where T_r
  /// lands in [a_star, a_star + 1].
  std::vector<std::size_t> window_hits_histogram;
  /// Lebesgue measure of {r ∈ [-1,1] : T_r ∈ window} averaged over trials,
  /// from a fine interpolated profile, and how often it exceeded 2·r0 on
  /// trials where the increment condition held.
  double mean_window_measure = 0.0;
  std::size_t measure_bound_violations = 0;
};

/// Passage-time level Ω check on environments seeded by derive_seed(seed, n, i).
OmegaDiagnostic omega_diagnostic(const QuantileCoupling& coupling, int n, std::size_t trials,
                                 std::uint64_t seed, double delta0, int radius_multiplier = 4,
                                 unsigned threads = 1, std::size_t profile_points = 65);

/// Frequency of {∃p ∈ P_k : T_{s+r}(p) - T_s(p) ≤ δ₀ r / (2√(ln n))}.
struct IncrementReport {
  int n = 0;
  int k = 0;
  double s = 0.0;
  double r = 0.0;
  double threshold = 0.0;
  std::size_t trials = 0;
  std::size_t events = 0;
  double frequency = 0.0;
  double std_error = 0.0;
  double budget = 0.0;  // e^{-2^k} for s = 0, e^{‖τ_s|Λ_k‖²/2} e^{-2^{k-1}} otherwise
  bool exact = false;   // exhaustive P_k; otherwise a non-backtracking-walk relaxation
  bool pass = false;    // frequency ≤ budget + 3·std_error
};

/// For k ≤ 2 every path of P_k is scanned. For larger k the minimum over P_k is
/// bounded below by the minimum over non-backtracking walks of 2^k steps in
/// Λ_k, so the reported frequency can only overstate the true one.
IncrementReport perturbation_increment_check(const QuantileCoupling& coupling, int n, int k, double s,
                                             double r, double delta0, std::size_t trials,
                                             std::uint64_t seed);

/// Minimum of Σ cost over non-backtracking walks of `steps` edges in Λ_k.
/// `cost` is indexed by slot of GridBox(2^{k+1}).
double min_nonbacktracking_walk(int k, std::span<const double> cost, std::size_t steps);

}  // namespace fpplab
