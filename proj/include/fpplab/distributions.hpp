#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fpplab/rng.hpp"

namespace fpplab {

/// Standard normal kernel. Φ and its complement go through std::erfc, which is
/// accurate to a few ulp; the quantile is a rational starting point refined by
/// one Halley step on erfc, max relative error well below 1e-12 on
/// [1e-300, 1 - 1e-16].
struct GaussianKernel {
  static double cdf(double x) noexcept;
  /// 1 - Φ(x) without cancellation.
  static double sf(double x) noexcept;
  static double pdf(double x) noexcept;
  /// Φ⁻¹(u). Returns ∓inf at u = 0 / 1; throws std::domain_error outside [0, 1].
  static double quantile(double u);
};

enum class LawFamily {
  Exponential,
  Uniform,
  Gamma,
  LogNormal,
  PiecewiseLinearCdf,
  /// Standard normal. Only valid in coupling-test mode; FPP rejects it.
  StandardNormal,
};

/// Absolutely continuous weight distribution with closed-form or numerically
/// inverted quantile. Immutable after construction.
class WeightLaw {
 public:
  static WeightLaw exponential(double rate);
  static WeightLaw uniform(double lo, double hi);
  static WeightLaw gamma(double shape, double scale);
  static WeightLaw lognormal(double mu, double sigma);
  /// Knots are (s, F(s)) pairs with strictly increasing s and F, F(first)=0,
  /// F(last)=1.
  static WeightLaw piecewise_linear(std::vector<std::pair<double, double>> knots);
  static WeightLaw standard_normal();

  [[nodiscard]] LawFamily family() const noexcept { return family_; }
  [[nodiscard]] double param(std::size_t i) const { return params_.at(i); }
  [[nodiscard]] const std::vector<std::pair<double, double>>& knots() const noexcept {
    return knots_;
  }

  [[nodiscard]] double cdf(double s) const;
  /// Survival function 1 - cdf(s), computed without cancellation where possible.
  [[nodiscard]] double sf(double s) const;
  [[nodiscard]] double pdf(double s) const;
  /// Inverse CDF on (0, 1).
  [[nodiscard]] double quantile(double u) const;
  /// Inverse survival function: the s with sf(s) = q, for q in (0, 1).
  [[nodiscard]] double quantile_sf(double q) const;

  /// Open support interval (lower, upper); may be infinite.
  [[nodiscard]] double support_lower() const noexcept { return lower_; }
  [[nodiscard]] double support_upper() const noexcept { return upper_; }
  [[nodiscard]] bool in_support(double s) const noexcept { return s > lower_ && s < upper_; }
  /// True when the support lies in (0, ∞), as FPP weights require.
  [[nodiscard]] bool positive_support() const noexcept { return lower_ >= 0.0; }

  [[nodiscard]] double mean() const;
  [[nodiscard]] double variance() const;

  /// Inverse-transform draws: element i is quantile(u_i) for the i-th uniform
  /// of `stream`.
  std::vector<double> sample(RngStream& stream, std::size_t count) const;

  /// Short human-readable form such as "exponential(rate=1)".
  [[nodiscard]] std::string describe() const;

 private:
  WeightLaw(LawFamily family, std::vector<double> params, double lower, double upper);

  LawFamily family_;
  std::vector<double> params_;
  std::vector<std::pair<double, double>> knots_;
  double lower_;
  double upper_;
};

/// One-sample Kolmogorov–Smirnov statistic. `sorted` must be ascending.
template <typename Cdf>
double ks_statistic(std::span<const double> sorted, Cdf&& cdf) {
  const double count = static_cast<double>(sorted.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    const double above = f - static_cast<double>(i) / count;
    const double below = static_cast<double>(i + 1) / count - f;
    worst = std::max(worst, std::max(above, below));
  }
  return worst;
}

/// Asymptotic 0.999 quantile of the KS null distribution scaled by 1/sqrt(n).
double ks_critical_999(std::size_t n);

}  // namespace fpplab
