#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "../support/brute_force.hpp"
#include "fpplab/estimators.hpp"

using namespace fpplab;

TEST_CASE("concentration function") {
  const std::vector<double> v{0.0, 0.5, 1.0, 1.2, 5.0};
  const auto q = concentration_function(v, 1.0);
  CHECK(q.count == 3);
  CHECK(q.q_hat == doctest::Approx(0.6));
  CHECK(q.a_star == 0.0);  // [0,1] and [0.5,1.5] both hold 3; smallest a wins

  RngStream rng(17);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 1 + rng() % 500;
    std::vector<double> xs(n);
    for (auto& x : xs) x = 10.0 * rng.uniform();
    const double w = 0.05 + 2.0 * rng.uniform();
    const auto est = concentration_function(xs, w);
    CHECK(est.count == testing::brute_force_window_count(xs, w));

    std::vector<double> shifted = xs;
    for (auto& x : shifted) x += 64.0;  // exact in binary for these magnitudes
    std::reverse(shifted.begin(), shifted.end());
    CHECK(concentration_function(shifted, w).q_hat == est.q_hat);
  }
  CHECK_THROWS(concentration_function(std::vector<double>{}, 1.0));
  CHECK_THROWS(concentration_function(v, 0.0));
}

TEST_CASE("variance estimate") {
  const std::vector<double> two{0.0, 2.0};
  const auto v = variance_estimate(two);
  CHECK(v.mean == 1.0);
  CHECK(v.variance == 2.0);
  CHECK(std::isnan(v.std_error));
  CHECK_THROWS(variance_estimate(std::vector<double>{1.0}));

  RngStream rng(9);
  std::vector<double> xs(4000);
  for (auto& x : xs) x = GaussianKernel::quantile(rng.uniform()) * 3.0;
  const auto big = variance_estimate(xs);
  CHECK(std::abs(big.variance - 9.0) < 4.0 * big.std_error);
  // Jackknife SE of a Gaussian sample variance is close to σ²√(2/(n-1)).
  CHECK(big.std_error == doctest::Approx(9.0 * std::sqrt(2.0 / 3999.0)).epsilon(0.15));
}

TEST_CASE("probabilities") {
  const std::vector<double> v{1, 2, 3, 4};
  CHECK(fluctuation_probability(v, 1.5, 3.5).p == 0.5);
  CHECK_THROWS(fluctuation_probability(v, 2.0, 2.0));
  CHECK(window_probability(v, 2.0, 1.0).p == 0.5);
}

TEST_CASE("binomial tails") {
  CHECK(binomial_tail_exact(10, 0.5, 10) == doctest::Approx(1.0));
  CHECK(binomial_tail_exact(10, 0.5, 0) == doctest::Approx(std::ldexp(1.0, -10)));
  CHECK(binomial_tail_exact(4, 0.25, 1) == doctest::Approx(std::pow(0.75, 4) + 4 * 0.25 * std::pow(0.75, 3)));
  for (int k = 0; k <= 20; ++k) {
    const std::int64_t m = std::int64_t{1} << k;
    CHECK(binomial_log_tail(m, 0.999, m / 2) <= -static_cast<double>(m) * std::log(8.0));
  }
}

TEST_CASE("lebesgue window measure") {
  const std::vector<double> r{-1.0, 0.0, 1.0};
  const std::vector<double> t{0.0, 1.0, 2.0};
  CHECK(lebesgue_window_measure(r, t, 0.5, 1.0) == doctest::Approx(1.0));
  CHECK(lebesgue_window_measure(r, t, 5.0, 1.0) == 0.0);
  const std::vector<double> flat{1.0, 1.0, 1.0};
  CHECK(lebesgue_window_measure(r, flat, 0.5, 1.0) == doctest::Approx(2.0));
  const std::vector<double> bad{0.0, 2.0, 1.0};
  CHECK_THROWS_AS(lebesgue_window_measure(r, bad, 0.0, 1.0), std::logic_error);
}

TEST_CASE("omega grid") {
  const auto g = omega_grid(256, 0.5);
  CHECK(g.r0 == doctest::Approx(6.7945744023041523418).epsilon(1e-14));
  CHECK(g.points == std::vector<double>{0.0});
  const auto fine = omega_grid(256, 32.0);
  CHECK(fine.points.size() % 2 == 1);
  CHECK(fine.points[fine.points.size() / 2] == 0.0);
  for (double p : fine.points) CHECK(std::abs(p) <= 1.0);
}

TEST_CASE("non-backtracking relaxation bounds the exact minimum") {
  const QuantileCoupling c(WeightLaw::exponential(1.0));
  const int k = 2;
  const GridBox box(2 << k);
  std::vector<double> cost(box.slot_count(), std::numeric_limits<double>::infinity());
  RngStream rng(4);
  for (int rep = 0; rep < 5; ++rep) {
    for (const Edge& e : annulus_edges(k)) cost[box.edge_slot(e)] = rng.uniform();
    double exact = std::numeric_limits<double>::infinity();
    for_each_path_pk(k, [&](std::span<const Vertex> p) {
      double s = 0.0;
      for (std::size_t i = 0; i + 1 < p.size(); ++i) s += cost[box.edge_slot(edge_between(p[i], p[i + 1]))];
      exact = std::min(exact, s);
      return true;
    });
    const double relaxed = min_nonbacktracking_walk(k, cost, std::size_t{1} << k);
    CHECK(relaxed <= exact + 1e-12);
  }
}

TEST_CASE("perturbation increments") {
  const QuantileCoupling c(WeightLaw::exponential(1.0));
  const auto rep = perturbation_increment_check(c, 16, 2, 0.0, 1.0, 0.5, 200, 1);
  CHECK(rep.exact);
  CHECK(rep.trials == 200);
  CHECK(rep.budget == doctest::Approx(std::exp(-4.0)));
  CHECK(rep.frequency >= 0.0);
  const auto shifted = perturbation_increment_check(c, 64, 3, 0.5, 0.5, 0.5, 50, 1);
  CHECK_FALSE(shifted.exact);
  CHECK(shifted.budget > 0.0);
  CHECK_THROWS(perturbation_increment_check(c, 64, 2, 0.0, 0.5, 0.5, 10, 1));
  CHECK_THROWS(perturbation_increment_check(c, 64, 3, 0.0, 0.0, 0.5, 10, 1));
}

TEST_CASE("omega diagnostic is thread independent") {
  const QuantileCoupling c(WeightLaw::exponential(1.0));
  const auto one = omega_diagnostic(c, 16, 100, 5, 16.0, 2, 1, 9);
  const auto three = omega_diagnostic(c, 16, 100, 5, 16.0, 2, 3, 9);
  CHECK(one.failures == three.failures);
  CHECK(one.min_increment == three.min_increment);
  CHECK(one.mean_window_measure == three.mean_window_measure);
  CHECK(one.window_hits_histogram == three.window_hits_histogram);
  CHECK(one.grid.size() > 1);
  CHECK_THROWS(omega_diagnostic(c, 16, 50, 5, 16.0));
}
