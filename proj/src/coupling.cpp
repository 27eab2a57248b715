#include "fpplab/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fpplab {

QuantileCoupling::QuantileCoupling(WeightLaw law)
    : law_(std::move(law)), gaussian_(law_.family() == LawFamily::StandardNormal) {}

QuantileCoupling::QuantileCoupling(const QuantileCoupling& other)
    : law_(other.law_), gaussian_(other.gaussian_), saturations_(other.saturation_count()) {}

QuantileCoupling& QuantileCoupling::operator=(const QuantileCoupling& other) {
  law_ = other.law_;
  gaussian_ = other.gaussian_;
  saturations_.store(other.saturation_count(), std::memory_order_relaxed);
  return *this;
}

double QuantileCoupling::clamp_latent(double x) const {
  if (x > kLatentLimit || x < -kLatentLimit) {
    saturations_.fetch_add(1, std::memory_order_relaxed);
    return x > 0.0 ? kLatentLimit : -kLatentLimit;
  }
  return x;
}

double QuantileCoupling::h(double x) const {
  if (std::isnan(x)) throw std::domain_error("h of NaN");
  x = clamp_latent(x);
  if (gaussian_) return x;
  // Each half of the line goes through the tail that Φ resolves accurately.
  if (x <= 0.0) return law_.quantile(GaussianKernel::cdf(x));
  return law_.quantile_sf(GaussianKernel::sf(x));
}

double QuantileCoupling::h_inverse(double s) const {
  if (!(s >= law_.support_lower() && s <= law_.support_upper())) {
    throw std::domain_error("value outside the support of the weight law");
  }
  if (gaussian_) return clamp_latent(s);
  const double u = law_.cdf(s);
  if (u <= 0.5) return clamp_latent(GaussianKernel::quantile(u));
  return clamp_latent(-GaussianKernel::quantile(law_.sf(s)));
}

std::span<const double> membership_tau_grid() {
  static const std::vector<double> grid = [] {
    std::vector<double> g;
    for (int i = 0; i < 64; ++i) g.push_back(std::exp2(-16.0 + 16.0 * i / 63.0));
    g.back() = 1.0;
    for (int i = 1; i < 64; ++i) g.push_back(static_cast<double>(i) / 63.0);
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
  }();
  return grid;
}

bool DeltaSetQuery::contains(const QuantileCoupling& coupling, double s) const {
  const double latent = coupling.h_inverse(s);
  for (double tau : membership_tau_grid()) {
    if (coupling.h(latent + tau) < s + delta * tau - kMembershipSlack) return false;
  }
  return true;
}

bool b_delta_member(const QuantileCoupling& coupling, double s, double delta) {
  return DeltaSetQuery{delta}.contains(coupling, s);
}

double membership_threshold(const QuantileCoupling& coupling, double s) {
  const double latent = coupling.h_inverse(s);
  double best = std::numeric_limits<double>::infinity();
  for (double tau : membership_tau_grid()) {
    best = std::min(best, (coupling.h(latent + tau) - s + kMembershipSlack) / tau);
  }
  return best;
}

namespace {

constexpr int kMassCells = 4096;

double gaussian_interval(double a, double b) {
  if (a >= 0.0) return GaussianKernel::sf(a) - GaussianKernel::sf(b);
  return GaussianKernel::cdf(b) - GaussianKernel::cdf(a);
}

// Membership thresholds on the latent scan grid, shared across δ values.
class LatentMassIntegrator {
 public:
  explicit LatentMassIntegrator(const QuantileCoupling& coupling) : coupling_(coupling) {
    xs_.resize(kMassCells + 1);
    thresholds_.resize(kMassCells + 1);
    for (int i = 0; i <= kMassCells; ++i) {
      xs_[i] = -QuantileCoupling::kLatentLimit + 2.0 * QuantileCoupling::kLatentLimit * i / kMassCells;
      thresholds_[i] = threshold_at(xs_[i]);
    }
  }

  double mass(double delta) const {
    double total = 0.0;
    for (int i = 0; i < kMassCells; ++i) {
      const bool left = thresholds_[i] >= delta;
      const bool right = thresholds_[i + 1] >= delta;
      if (left && right) {
        total += gaussian_interval(xs_[i], xs_[i + 1]);
      } else if (left != right) {
        // Bisect for the membership change inside the cell.
        double in = left ? xs_[i] : xs_[i + 1];
        double out = left ? xs_[i + 1] : xs_[i];
        for (int it = 0; it < 50; ++it) {
          const double mid = 0.5 * (in + out);
          (threshold_at(mid) >= delta ? in : out) = mid;
        }
        total += left ? gaussian_interval(xs_[i], in) : gaussian_interval(in, xs_[i + 1]);
      }
    }
    return total;
  }

 private:
  double threshold_at(double x) const { return membership_threshold(coupling_, coupling_.h(x)); }

  const QuantileCoupling& coupling_;
  std::vector<double> xs_;
  std::vector<double> thresholds_;
};

}  // namespace

double good_set_mass(const QuantileCoupling& coupling, double delta) {
  return LatentMassIntegrator(coupling).mass(delta);
}

MassEstimate good_set_mass_monte_carlo(const QuantileCoupling& coupling, double delta,
                                       std::size_t draws, RngStream& stream) {
  if (draws == 0) throw std::invalid_argument("need at least one draw");
  std::size_t hits = 0;
  const DeltaSetQuery query{delta};
  for (std::size_t i = 0; i < draws; ++i) {
    if (query.contains(coupling, coupling.law().quantile(stream.uniform()))) ++hits;
  }
  const double p = static_cast<double>(hits) / static_cast<double>(draws);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(draws))};
}

Delta0Calibration estimate_delta0(const QuantileCoupling& coupling, double target_mass) {
  if (!(target_mass > 0.0 && target_mass < 1.0)) {
    throw std::invalid_argument("target mass must lie in (0, 1)");
  }
  const LatentMassIntegrator integrator(coupling);
  for (int j = 0; j <= 20; ++j) {
    const double delta = std::exp2(-j);
    const double mass = integrator.mass(delta);
    if (mass >= target_mass) return {delta, mass, target_mass};
  }
  throw CalibrationError("no delta in {2^0, ..., 2^-20} reaches the target good-set mass for " +
                         coupling.law().describe());
}

MwReport mw_inequality_check(const QuantileCoupling& coupling, std::span<const double> tau,
                             const VectorEvent& event, std::size_t trials, RngStream& stream) {
  if (tau.empty()) throw std::invalid_argument("dimension must be at least 1");
  if (trials == 0) throw std::invalid_argument("need at least one trial");
  const std::size_t dim = tau.size();
  std::vector<double> base(dim), plus(dim), minus(dim);
  std::size_t hit0 = 0, hit_plus = 0, hit_minus = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double z = GaussianKernel::quantile(stream.uniform());
      base[i] = coupling.h(z);
      plus[i] = coupling.h(z + tau[i]);
      minus[i] = coupling.h(z - tau[i]);
    }
    hit0 += event(base) ? 1 : 0;
    hit_plus += event(plus) ? 1 : 0;
    hit_minus += event(minus) ? 1 : 0;
  }
  const double n = static_cast<double>(trials);
  MwReport r{};
  r.trials = trials;
  r.lhs = static_cast<double>(hit0) / n;
  r.p_plus = static_cast<double>(hit_plus) / n;
  r.p_minus = static_cast<double>(hit_minus) / n;
  r.tau_norm2 = 0.0;
  for (double t : tau) r.tau_norm2 += t * t;
  const double factor = std::exp(0.5 * r.tau_norm2);
  r.rhs = factor * std::sqrt(r.p_plus * r.p_minus);
  r.margin = r.rhs - r.lhs;

  const double var_lhs = r.lhs * (1.0 - r.lhs) / n;
  double var_rhs = 0.0;
  if (r.p_plus > 0.0 && r.p_minus > 0.0) {
    const double var_plus = r.p_plus * (1.0 - r.p_plus) / n;
    const double var_minus = r.p_minus * (1.0 - r.p_minus) / n;
    var_rhs = 0.25 * factor * factor *
              (r.p_minus / r.p_plus * var_plus + r.p_plus / r.p_minus * var_minus);
  }
  r.std_error = std::sqrt(var_lhs + var_rhs);
  r.inconclusive = hit0 == 0 && hit_plus == 0 && hit_minus == 0;
  r.pass = r.inconclusive || r.lhs <= r.rhs + 3.0 * r.std_error;
  return r;
}

std::size_t gaussian_halfline_violations(std::span<const double> a_grid,
                                         std::span<const double> t_grid) {
  std::size_t violations = 0;
  for (double a : a_grid) {
    for (double t : t_grid) {
      const double lhs = std::log(GaussianKernel::cdf(-a));
      const double rhs = 0.5 * t * t +
                         0.5 * (std::log(GaussianKernel::cdf(t - a)) +
                                std::log(GaussianKernel::cdf(-t - a)));
      if (lhs > rhs + 1e-12 * std::max(1.0, std::abs(lhs))) ++violations;
    }
  }
  return violations;
}

KsReport pushforward_check(const QuantileCoupling& coupling, double tau, std::size_t trials,
                           RngStream& stream) {
  if (trials == 0) throw std::invalid_argument("need at least one trial");
  std::vector<double> values(trials);
  for (auto& v : values) v = coupling.g(coupling.law().quantile(stream.uniform()), tau);
  std::sort(values.begin(), values.end());
  const double stat = ks_statistic(values, [&](double s) {
    return GaussianKernel::cdf(coupling.h_inverse(s) - tau);
  });
  const double crit = ks_critical_999(trials);
  return {stat, crit, stat <= crit, trials};
}

}  // namespace fpplab
