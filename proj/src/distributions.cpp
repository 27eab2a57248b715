#include "fpplab/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace fpplab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Acklam's rational approximation for the normal quantile, |rel err| < 1.2e-9.
double acklam_quantile(double u) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double low = 0.02425;
  if (u < low) {
    const double q = std::sqrt(-2.0 * std::log(u));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (u > 1.0 - low) {
    const double q = std::sqrt(-2.0 * std::log1p(-u));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = u - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void require_probability(double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw std::domain_error("quantile argument must lie in (0, 1)");
  }
}

}  // namespace

double GaussianKernel::cdf(double x) noexcept {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double GaussianKernel::sf(double x) noexcept {
  return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

double GaussianKernel::pdf(double x) noexcept {
  return std::exp(-0.5 * x * x) * (std::numbers::inv_sqrtpi / std::numbers::sqrt2);
}

double GaussianKernel::quantile(double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("Φ⁻¹ argument outside [0, 1]");
  if (u == 0.0) return -kInf;
  if (u == 1.0) return kInf;
  // Work in the lower half so the Halley residual is computed without
  // cancellation, then reflect.
  const bool upper = u > 0.5;
  const double p = upper ? 1.0 - u : u;
  double x = acklam_quantile(p);
  const double e = cdf(x) - p;
  const double step = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x -= step / (1.0 + 0.5 * x * step);
  return upper ? -x : x;
}

double ks_critical_999(std::size_t n) {
  // sqrt(-ln(alpha/2)/2) with alpha = 1e-3.
  return std::sqrt(-0.5 * std::log(0.0005)) / std::sqrt(static_cast<double>(n));
}

WeightLaw::WeightLaw(LawFamily family, std::vector<double> params, double lower, double upper)
    : family_(family), params_(std::move(params)), lower_(lower), upper_(upper) {}

WeightLaw WeightLaw::exponential(double rate) {
  require(std::isfinite(rate) && rate > 0.0, "exponential rate must be positive");
  return WeightLaw(LawFamily::Exponential, {rate}, 0.0, kInf);
}

WeightLaw WeightLaw::uniform(double lo, double hi) {
  require(std::isfinite(lo) && std::isfinite(hi) && lo < hi, "uniform requires lo < hi");
  return WeightLaw(LawFamily::Uniform, {lo, hi}, lo, hi);
}

WeightLaw WeightLaw::gamma(double shape, double scale) {
  require(std::isfinite(shape) && shape > 0.0, "gamma shape must be positive");
  require(std::isfinite(scale) && scale > 0.0, "gamma scale must be positive");
  return WeightLaw(LawFamily::Gamma, {shape, scale}, 0.0, kInf);
}

WeightLaw WeightLaw::lognormal(double mu, double sigma) {
  require(std::isfinite(mu), "lognormal mu must be finite");
  require(std::isfinite(sigma) && sigma > 0.0, "lognormal sigma must be positive");
  return WeightLaw(LawFamily::LogNormal, {mu, sigma}, 0.0, kInf);
}

WeightLaw WeightLaw::piecewise_linear(std::vector<std::pair<double, double>> knots) {
  require(knots.size() >= 2, "piecewise-linear CDF needs at least two knots");
  require(knots.front().second == 0.0 && knots.back().second == 1.0,
          "piecewise-linear CDF must run from 0 to 1");
  for (std::size_t i = 0; i < knots.size(); ++i) {
    require(std::isfinite(knots[i].first), "knot positions must be finite");
    if (i > 0) {
      require(knots[i].first > knots[i - 1].first, "knot positions must be strictly increasing");
      require(knots[i].second > knots[i - 1].second, "knot CDF values must be strictly increasing");
    }
  }
  WeightLaw law(LawFamily::PiecewiseLinearCdf, {}, knots.front().first, knots.back().first);
  law.knots_ = std::move(knots);
  return law;
}

WeightLaw WeightLaw::standard_normal() {
  return WeightLaw(LawFamily::StandardNormal, {}, -kInf, kInf);
}

double WeightLaw::cdf(double s) const {
  if (std::isnan(s)) throw std::domain_error("cdf of NaN");
  if (s <= lower_) return 0.0;
  if (s >= upper_) return 1.0;
  switch (family_) {
    case LawFamily::Exponential:
      return -std::expm1(-params_[0] * s);
    case LawFamily::Uniform:
      return (s - params_[0]) / (params_[1] - params_[0]);
    case LawFamily::Gamma:
      return boost::math::gamma_p(params_[0], s / params_[1]);
    case LawFamily::LogNormal:
      return GaussianKernel::cdf((std::log(s) - params_[0]) / params_[1]);
    case LawFamily::PiecewiseLinearCdf: {
      const auto it = std::upper_bound(knots_.begin(), knots_.end(), s,
                                       [](double v, const auto& k) { return v < k.first; });
      const auto& [s1, f1] = *it;
      const auto& [s0, f0] = *(it - 1);
      return f0 + (f1 - f0) * (s - s0) / (s1 - s0);
    }
    case LawFamily::StandardNormal:
      return GaussianKernel::cdf(s);
  }
  return 0.0;
}

double WeightLaw::sf(double s) const {
  if (std::isnan(s)) throw std::domain_error("sf of NaN");
  if (s <= lower_) return 1.0;
  if (s >= upper_) return 0.0;
  switch (family_) {
    case LawFamily::Exponential:
      return std::exp(-params_[0] * s);
    case LawFamily::Uniform:
      return (params_[1] - s) / (params_[1] - params_[0]);
    case LawFamily::Gamma:
      return boost::math::gamma_q(params_[0], s / params_[1]);
    case LawFamily::LogNormal:
      return GaussianKernel::sf((std::log(s) - params_[0]) / params_[1]);
    case LawFamily::PiecewiseLinearCdf: {
      const auto it = std::upper_bound(knots_.begin(), knots_.end(), s,
                                       [](double v, const auto& k) { return v < k.first; });
      const auto& [s1, f1] = *it;
      const auto& [s0, f0] = *(it - 1);
      return (1.0 - f1) + (f1 - f0) * (s1 - s) / (s1 - s0);
    }
    case LawFamily::StandardNormal:
      return GaussianKernel::sf(s);
  }
  return 0.0;
}

double WeightLaw::pdf(double s) const {
  if (!in_support(s)) return 0.0;
  switch (family_) {
    case LawFamily::Exponential:
      return params_[0] * std::exp(-params_[0] * s);
    case LawFamily::Uniform:
      return 1.0 / (params_[1] - params_[0]);
    case LawFamily::Gamma:
      return boost::math::gamma_p_derivative(params_[0], s / params_[1]) / params_[1];
    case LawFamily::LogNormal: {
      const double z = (std::log(s) - params_[0]) / params_[1];
      return GaussianKernel::pdf(z) / (s * params_[1]);
    }
    case LawFamily::PiecewiseLinearCdf: {
      const auto it = std::upper_bound(knots_.begin(), knots_.end(), s,
                                       [](double v, const auto& k) { return v < k.first; });
      const auto& [s1, f1] = *it;
      const auto& [s0, f0] = *(it - 1);
      return (f1 - f0) / (s1 - s0);
    }
    case LawFamily::StandardNormal:
      return GaussianKernel::pdf(s);
  }
  return 0.0;
}

double WeightLaw::quantile(double u) const {
  require_probability(u);
  switch (family_) {
    case LawFamily::Exponential:
      return -std::log1p(-u) / params_[0];
    case LawFamily::Uniform:
      return params_[0] + u * (params_[1] - params_[0]);
    case LawFamily::Gamma:
      if (u == 0.0) return 0.0;
      if (u == 1.0) return kInf;
      return params_[1] * boost::math::gamma_p_inv(params_[0], u);
    case LawFamily::LogNormal:
      return std::exp(params_[0] + params_[1] * GaussianKernel::quantile(u));
    case LawFamily::PiecewiseLinearCdf: {
      const auto it = std::upper_bound(knots_.begin(), knots_.end(), u,
                                       [](double v, const auto& k) { return v < k.second; });
      const auto& [s1, f1] = *it;
      const auto& [s0, f0] = *(it - 1);
      return s0 + (s1 - s0) * (u - f0) / (f1 - f0);
    }
    case LawFamily::StandardNormal:
      return GaussianKernel::quantile(u);
  }
  return 0.0;
}

double WeightLaw::quantile_sf(double q) const {
  require_probability(q);
  switch (family_) {
    case LawFamily::Exponential:
      return -std::log(q) / params_[0];
    case LawFamily::Uniform:
      return params_[1] - q * (params_[1] - params_[0]);
    case LawFamily::Gamma:
      if (q == 1.0) return 0.0;
      if (q == 0.0) return kInf;
      return params_[1] * boost::math::gamma_q_inv(params_[0], q);
    case LawFamily::LogNormal:
      return std::exp(params_[0] - params_[1] * GaussianKernel::quantile(q));
    case LawFamily::PiecewiseLinearCdf: {
      // Survival values decrease along the knots; search on 1 - F.
      const auto it = std::upper_bound(knots_.begin(), knots_.end(), q, [](double v, const auto& k) {
        return v > 1.0 - k.second;
      });
      const auto& [s1, f1] = *it;
      const auto& [s0, f0] = *(it - 1);
      const double q1 = 1.0 - f1;
      return s1 - (s1 - s0) * (q - q1) / (f1 - f0);
    }
    case LawFamily::StandardNormal:
      return -GaussianKernel::quantile(q);
  }
  return 0.0;
}

double WeightLaw::mean() const {
  switch (family_) {
    case LawFamily::Exponential:
      return 1.0 / params_[0];
    case LawFamily::Uniform:
      return 0.5 * (params_[0] + params_[1]);
    case LawFamily::Gamma:
      return params_[0] * params_[1];
    case LawFamily::LogNormal:
      return std::exp(params_[0] + 0.5 * params_[1] * params_[1]);
    case LawFamily::PiecewiseLinearCdf: {
      double m = 0.0;
      for (std::size_t i = 1; i < knots_.size(); ++i) {
        m += (knots_[i].second - knots_[i - 1].second) * 0.5 * (knots_[i].first + knots_[i - 1].first);
      }
      return m;
    }
    case LawFamily::StandardNormal:
      return 0.0;
  }
  return 0.0;
}

double WeightLaw::variance() const {
  switch (family_) {
    case LawFamily::Exponential:
      return 1.0 / (params_[0] * params_[0]);
    case LawFamily::Uniform: {
      const double w = params_[1] - params_[0];
      return w * w / 12.0;
    }
    case LawFamily::Gamma:
      return params_[0] * params_[1] * params_[1];
    case LawFamily::LogNormal: {
      const double s2 = params_[1] * params_[1];
      return std::expm1(s2) * std::exp(2.0 * params_[0] + s2);
    }
    case LawFamily::PiecewiseLinearCdf: {
      // Mixture of uniforms on each segment.
      double second = 0.0;
      for (std::size_t i = 1; i < knots_.size(); ++i) {
        const double a = knots_[i - 1].first;
        const double b = knots_[i].first;
        second += (knots_[i].second - knots_[i - 1].second) * (a * a + a * b + b * b) / 3.0;
      }
      const double m = mean();
      return second - m * m;
    }
    case LawFamily::StandardNormal:
      return 1.0;
  }
  return 0.0;
}

std::vector<double> WeightLaw::sample(RngStream& stream, std::size_t count) const {
  std::vector<double> out(count);
  for (auto& v : out) v = quantile(stream.uniform());
  return out;
}

std::string WeightLaw::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (family_) {
    case LawFamily::Exponential:
      os << "exponential(rate=" << params_[0] << ")";
      break;
    case LawFamily::Uniform:
      os << "uniform(lo=" << params_[0] << ",hi=" << params_[1] << ")";
      break;
    case LawFamily::Gamma:
      os << "gamma(shape=" << params_[0] << ",scale=" << params_[1] << ")";
      break;
    case LawFamily::LogNormal:
      os << "lognormal(mu=" << params_[0] << ",sigma=" << params_[1] << ")";
      break;
    case LawFamily::PiecewiseLinearCdf:
      os << "piecewise_linear(knots=" << knots_.size() << ")";
      break;
    case LawFamily::StandardNormal:
      os << "standard_normal";
      break;
  }
  return os.str();
}

}  // namespace fpplab
