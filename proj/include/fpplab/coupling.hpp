#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpplab/distributions.hpp"
#include "fpplab/rng.hpp"

namespace fpplab {

/// Monotone transport h = G⁻¹∘Φ pushing the standard normal onto a weight law,
/// together with the perturbation semigroup g_τ(s) = h(h⁻¹(s) + τ).
///
/// Latent Gaussian arguments are clamped to [-kLatentLimit, kLatentLimit];
/// beyond that range Φ no longer resolves the tails. Every clamp increments a
/// diagnostic counter so the bias is visible rather than silent.
class QuantileCoupling {
 public:
  static constexpr double kLatentLimit = 8.5;

  explicit QuantileCoupling(WeightLaw law);
  QuantileCoupling(const QuantileCoupling& other);
  QuantileCoupling& operator=(const QuantileCoupling& other);

  [[nodiscard]] const WeightLaw& law() const noexcept { return law_; }
  /// True for the standard normal law, where h is the identity.
  [[nodiscard]] bool gaussian_mode() const noexcept { return gaussian_; }

  /// h(x). Nondecreasing, and strictly increasing while h(x) stays off a
  /// finite support endpoint (which rounding can reach in the far tail).
  [[nodiscard]] double h(double x) const;
  /// h⁻¹(s) = Φ⁻¹(G(s)). Throws std::domain_error for s outside the closure
  /// of the support; a finite support endpoint (reachable through rounding in
  /// h) saturates to ∓kLatentLimit.
  [[nodiscard]] double h_inverse(double s) const;
  /// g_τ(s). Throws std::domain_error for s outside the support.
  [[nodiscard]] double g(double s, double tau) const { return h(h_inverse(s) + tau); }

  [[nodiscard]] std::uint64_t saturation_count() const noexcept {
    return saturations_.load(std::memory_order_relaxed);
  }

 private:
  [[nodiscard]] double clamp_latent(double x) const;

  WeightLaw law_;
  bool gaussian_;
  mutable std::atomic<std::uint64_t> saturations_{0};
};

/// Fixed τ-grid used by the good-set predicate: 64 geometric points from 2⁻¹⁶
/// to 1 merged with the 63 positive points of the uniform 64-point grid on
/// [0, 1]. Sorted ascending, no duplicates.
std::span<const double> membership_tau_grid();

/// Absolute slack allowed in g_τ(s) ≥ s + δτ; absorbs the rounding of g itself.
inline constexpr double kMembershipSlack = 1e-10;

/// Predicate for the good set B_δ: s ∈ B_δ iff g_τ(s) ≥ s + δτ - slack for
/// every τ on the membership grid.
struct DeltaSetQuery {
  double delta;

  [[nodiscard]] bool contains(const QuantileCoupling& coupling, double s) const;
};

bool b_delta_member(const QuantileCoupling& coupling, double s, double delta);

/// Largest δ with s ∈ B_δ, i.e. min over the grid of (g_τ(s) - s + slack)/τ.
double membership_threshold(const QuantileCoupling& coupling, double s);

/// G(B_δ) by latent-space quadrature: the latent line [-8.5, 8.5] is scanned on
/// a uniform grid and every membership change is located by bisection, so the
/// mass is a sum of exact Gaussian interval probabilities.
double good_set_mass(const QuantileCoupling& coupling, double delta);

/// Monte Carlo estimate of G(B_δ) with its binomial standard error.
struct MassEstimate {
  double mass;
  double std_error;
};
MassEstimate good_set_mass_monte_carlo(const QuantileCoupling& coupling, double delta,
                                       std::size_t draws, RngStream& stream);

struct Delta0Calibration {
  double delta0;
  double achieved_mass;
  double target_mass;
};

class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Largest δ in {2⁰, 2⁻¹, …, 2⁻²⁰} whose good set carries at least
/// `target_mass`. Throws CalibrationError if none does.
Delta0Calibration estimate_delta0(const QuantileCoupling& coupling, double target_mass = 0.999);

using VectorEvent = std::function<bool(std::span<const double>)>;

struct MwReport {
  double lhs;        // P̂(X ∈ A)
  double rhs;        // e^{‖τ‖²/2} √(P̂₊ P̂₋)
  double p_plus;     // P̂(g_τ(X) ∈ A)
  double p_minus;    // P̂(g_{-τ}(X) ∈ A)
  double tau_norm2;
  double margin;     // rhs - lhs
  double std_error;  // combined standard error of lhs and rhs
  bool pass;         // lhs ≤ rhs + 3·std_error
  bool inconclusive;
  std::size_t trials;
};

/// Monte Carlo check of P(X∈A) ≤ e^{‖τ‖²/2}√(P(g_τ(X)∈A) P(g_{-τ}(X)∈A)) for
/// X with IID coordinates of the coupling's law. All three probabilities use
/// the same latent Gaussians.
MwReport mw_inequality_check(const QuantileCoupling& coupling, std::span<const double> tau,
                             const VectorEvent& event, std::size_t trials, RngStream& stream);

/// Closed-form one-dimensional Gaussian check on half-lines A = [a, ∞):
/// Φ(-a) ≤ e^{t²/2} √(Φ(t-a) Φ(-t-a)). Returns the number of violating pairs
/// (evaluated in log space, relative tolerance 1e-12).
std::size_t gaussian_halfline_violations(std::span<const double> a_grid,
                                         std::span<const double> t_grid);

struct KsReport {
  double statistic;
  double critical;
  bool pass;
  std::size_t trials;
};

/// Draws X by inverse transform, maps it through g_τ and compares the result to
/// the CDF s ↦ Φ(h⁻¹(s) - τ) with a one-sample KS test at level 0.999.
KsReport pushforward_check(const QuantileCoupling& coupling, double tau, std::size_t trials,
                           RngStream& stream);

}  // namespace fpplab
