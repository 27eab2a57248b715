#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fpplab/coupling.hpp"

using namespace fpplab;

TEST_CASE("exponential transport matches the frozen oracle") {
  const QuantileCoupling c(WeightLaw::exponential(1.0));
  CHECK(c.h(1.0) == doctest::Approx(1.8410216450092635058).epsilon(1e-14));
  CHECK(c.g(1.0, 0.5) == doctest::Approx(1.6036406389707328035).epsilon(1e-13));
  CHECK(c.g(2.0, -0.3) == doctest::Approx(1.553930158567155895).epsilon(1e-13));
  CHECK(c.h_inverse(c.h(-2.5)) == doctest::Approx(-2.5).epsilon(1e-12));
  CHECK(c.g(0.7, 0.0) == doctest::Approx(0.7).epsilon(1e-14));
  CHECK_THROWS_AS(static_cast<void>(c.h_inverse(-1.0)), std::domain_error);
}

TEST_CASE("gaussian mode is the identity transport") {
  const QuantileCoupling c(WeightLaw::standard_normal());
  CHECK(c.gaussian_mode());
  CHECK(c.h(1.25) == doctest::Approx(1.25).epsilon(1e-14));
  CHECK(c.g(-3.0, 0.4) == doctest::Approx(-2.6).epsilon(1e-12));
}

TEST_CASE("latent clamping is counted") {
  const QuantileCoupling c(WeightLaw::uniform(1.0, 3.0));
  const auto before = c.saturation_count();
  const double top = c.h(20.0);
  CHECK(c.saturation_count() == before + 1);
  CHECK(top <= 3.0);
  CHECK(top == c.h(QuantileCoupling::kLatentLimit));
  // Support endpoints saturate instead of throwing.
  CHECK(c.h_inverse(3.0) == QuantileCoupling::kLatentLimit);
}

TEST_CASE("membership grid") {
  const auto grid = membership_tau_grid();
  CHECK(grid.size() == 126);  // 1 is on both grids
  CHECK(grid.front() == doctest::Approx(std::ldexp(1.0, -16)));
  CHECK(grid.back() == 1.0);
  CHECK(std::is_sorted(grid.begin(), grid.end()));
}

TEST_CASE("good set and delta0 calibration") {
  const QuantileCoupling u(WeightLaw::uniform(1.0, 3.0));
  const auto cu = estimate_delta0(u);
  CHECK(cu.delta0 == std::ldexp(1.0, -10));
  CHECK(cu.achieved_mass == doctest::Approx(0.999372).epsilon(2e-5));

  const QuantileCoupling e(WeightLaw::exponential(1.0));
  const auto ce = estimate_delta0(e);
  CHECK(ce.delta0 == std::ldexp(1.0, -9));
  CHECK(ce.achieved_mass == doctest::Approx(0.999442).epsilon(2e-5));

  // The exponential good set near the median holds for a large delta.
  CHECK(b_delta_member(e, std::log(2.0), 0.5));
  CHECK(DeltaSetQuery{0.5}.contains(e, std::log(2.0)));
  CHECK(membership_threshold(e, std::log(2.0)) > 0.5);
  // Uniform weights close to the upper end barely move.
  CHECK_FALSE(b_delta_member(u, 3.0 - 1e-9, 0.5));

  const QuantileCoupling g(WeightLaw::standard_normal());
  CHECK(estimate_delta0(g).delta0 == 1.0);

  RngStream rng(3);
  const auto mc = good_set_mass_monte_carlo(e, ce.delta0, 200000, rng);
  CHECK(std::abs(mc.mass - good_set_mass(e, ce.delta0)) < 5.0 * mc.std_error + 1e-4);
}

TEST_CASE("MW inequality with zero perturbation is an equality") {
  const QuantileCoupling c(WeightLaw::exponential(1.0));
  RngStream rng(11);
  const std::vector<double> tau(3, 0.0);
  const auto rep = mw_inequality_check(
      c, tau, [](std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0) <= 3.0; }, 5000, rng);
  CHECK(rep.lhs == rep.p_plus);
  CHECK(rep.lhs == rep.p_minus);
  CHECK(rep.rhs == doctest::Approx(rep.lhs).epsilon(1e-15));
  CHECK(rep.pass);
}

TEST_CASE("gaussian closed form has no violations") {
  std::vector<double> a, t;
  for (int i = 0; i < 40; ++i) a.push_back(-4.0 + 8.0 * i / 39);
  for (int i = 0; i < 25; ++i) t.push_back(-2.0 + 4.0 * i / 24);
  CHECK(gaussian_halfline_violations(a, t) == 0);
}

TEST_CASE("push-forward law of g_tau") {
  const QuantileCoupling c(WeightLaw::lognormal(0.0, 0.5));
  RngStream rng(5);
  const auto ks = pushforward_check(c, 0.7, 5000, rng);
  CHECK(ks.pass);
  CHECK(ks.critical == doctest::Approx(1.9495 / std::sqrt(5000.0)));
}
