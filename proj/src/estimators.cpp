#include "fpplab/estimators.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "fpplab/parallel.hpp"

namespace fpplab {

ConcentrationEstimate concentration_function(std::span<const double> values, double width) {
  if (values.empty()) throw std::invalid_argument("concentration function of an empty sample");
  if (!(width > 0.0)) throw std::invalid_argument("window width must be positive");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  ConcentrationEstimate out;
  out.width = width;
  out.samples = sorted.size();
  std::size_t j = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    j = std::max(j, i);
    while (j < sorted.size() && sorted[j] <= sorted[i] + width) ++j;
    if (j - i > out.count) {
      out.count = j - i;
      out.a_star = sorted[i];
    }
  }
  const double n = static_cast<double>(sorted.size());
  out.q_hat = static_cast<double>(out.count) / n;
  out.std_error = std::sqrt(out.q_hat * (1.0 - out.q_hat) / n);
  return out;
}

VarianceEstimate variance_estimate(std::span<const double> values) {
  const std::size_t count = values.size();
  if (count < 2) throw std::invalid_argument("variance needs at least two samples");
  const double n = static_cast<double>(count);
  VarianceEstimate out;
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.variance = ss / (n - 1.0);
  if (count < 3) {
    out.std_error = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  // Leave-one-out variances: SS_i = SS - d_i² n/(n-1).
  std::vector<double> loo(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double d = values[i] - out.mean;
    loo[i] = (ss - d * d * n / (n - 1.0)) / (n - 2.0);
  }
  const double loo_mean = std::accumulate(loo.begin(), loo.end(), 0.0) / n;
  double spread = 0.0;
  for (double v : loo) spread += (v - loo_mean) * (v - loo_mean);
  out.std_error = std::sqrt((n - 1.0) / n * spread);
  return out;
}

namespace {

ProportionEstimate proportion(std::size_t hits, std::size_t total) {
  if (total == 0) throw std::invalid_argument("proportion of an empty sample");
  const double n = static_cast<double>(total);
  const double p = static_cast<double>(hits) / n;
  return {p, std::sqrt(p * (1.0 - p) / n)};
}

}  // namespace

ProportionEstimate fluctuation_probability(std::span<const double> values, double a, double b) {
  if (!(a < b)) throw std::invalid_argument("fluctuation interval needs a < b");
  const auto outside = std::count_if(values.begin(), values.end(), [&](double v) { return v < a || v > b; });
  return proportion(static_cast<std::size_t>(outside), values.size());
}

ProportionEstimate window_probability(std::span<const double> values, double a, double w) {
  const auto inside = std::count_if(values.begin(), values.end(), [&](double v) { return v >= a && v <= a + w; });
  return proportion(static_cast<std::size_t>(inside), values.size());
}

double binomial_log_tail(std::int64_t m, double p, std::int64_t threshold) {
  if (m < 0) throw std::invalid_argument("binomial size must be nonnegative");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial probability must lie in [0, 1]");
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (threshold < 0) return kNegInf;
  if (threshold >= m) return 0.0;
  if (p == 0.0) return 0.0;
  if (p == 1.0) return kNegInf;
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  const double lg_m = std::lgamma(static_cast<double>(m) + 1.0);
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(threshold) + 1);
  for (std::int64_t j = 0; j <= threshold; ++j) {
    const double dj = static_cast<double>(j);
    const double dm = static_cast<double>(m - j);
    terms.push_back(lg_m - std::lgamma(dj + 1.0) - std::lgamma(dm + 1.0) + dj * log_p + dm * log_q);
  }
  const double peak = *std::max_element(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - peak);
  return peak + std::log(sum);
}

double lebesgue_window_measure(std::span<const double> r_values, std::span<const double> times,
                               double a, double w) {
  if (r_values.size() != times.size() || r_values.empty()) {
    throw std::invalid_argument("profile needs matching, nonempty r and time arrays");
  }
  if (!(w >= 0.0)) throw std::invalid_argument("window width must be nonnegative");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(r_values[i] > r_values[i - 1])) throw std::invalid_argument("r values must increase");
    if (times[i] < times[i - 1]) {
      throw std::logic_error("passage-time profile decreases in r; monotone coupling violated");
    }
  }
  const double b = a + w;
  double measure = 0.0;
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    const double r0 = r_values[i], r1 = r_values[i + 1];
    const double t0 = times[i], t1 = times[i + 1];
    if (t0 == t1) {
      if (t0 >= a && t0 <= b) measure += r1 - r0;
      continue;
    }
    const double slope = (t1 - t0) / (r1 - r0);
    const double lo = std::max(r0, r0 + (a - t0) / slope);
    const double hi = std::min(r1, r0 + (b - t0) / slope);
    if (hi > lo) measure += hi - lo;
  }
  return measure;
}

OmegaGrid omega_grid(int n, double delta0) {
  if (!(delta0 > 0.0)) throw std::invalid_argument("delta0 must be positive");
  if (n < 2) throw std::invalid_argument("n must be at least 2");
  OmegaGrid grid;
  grid.r0 = 8.0 / (delta0 * std::sqrt(std::log(static_cast<double>(n))));
  auto reach = static_cast<long>(std::floor(1.0 / grid.r0));
  while (reach > 0 && static_cast<double>(reach) * grid.r0 > 1.0) --reach;
  for (long j = -reach; j <= reach; ++j) grid.points.push_back(static_cast<double>(j) * grid.r0);
  return grid;
}

OmegaDiagnostic omega_diagnostic(const QuantileCoupling& coupling, int n, std::size_t trials,
                                 std::uint64_t seed, double delta0, int radius_multiplier,
                                 unsigned threads, std::size_t profile_points) {
  if (trials < 100) throw std::invalid_argument("omega diagnostic needs at least 100 trials");
  if (profile_points < 2) throw std::invalid_argument("profile needs at least two points");
  if (radius_multiplier < 2) throw std::invalid_argument("radius multiplier must be at least 2");
  scales(n);

  OmegaDiagnostic out;
  out.n = n;
  out.delta0 = delta0;
  const OmegaGrid grid = omega_grid(n, delta0);
  out.r0 = grid.r0;
  out.grid = grid.points;
  out.trials = trials;

  std::vector<double> fine(profile_points);
  for (std::size_t i = 0; i < profile_points; ++i) {
    fine[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(profile_points - 1);
  }

  const int radius = radius_multiplier * n;
  const Vertex source{0, 0}, target{n, 0};
  struct Trial {
    std::vector<double> at_grid;
    std::vector<double> profile;
    double min_increment = std::numeric_limits<double>::infinity();
  };
  std::vector<Trial> results(trials);
  std::vector<DijkstraWorkspace> workspaces(std::max(1u, threads));

  parallel_for(trials, threads, [&](std::size_t i, unsigned worker) {
    const Environment env = Environment::lazy(coupling.law(), GridBox(radius), derive_seed(seed, n, i));
    auto& ws = workspaces[worker];
    Trial& t = results[i];
    for (double r : grid.points) {
      const double base = passage_time(env, PerturbationSchedule(n, r), coupling, source, target, radius, ws).time;
      const double bumped =
          passage_time(env, PerturbationSchedule(n, r + grid.r0), coupling, source, target, radius, ws).time;
      t.at_grid.push_back(base);
      t.min_increment = std::min(t.min_increment, bumped - base);
    }
    for (double r : fine) {
      t.profile.push_back(passage_time(env, PerturbationSchedule(n, r), coupling, source, target, radius, ws).time);
    }
  });

  // r = 0 is always a grid point (the centre of r0·ℤ ∩ [-1, 1]).
  const std::size_t centre = grid.points.size() / 2;
  std::vector<double> base_times;
  base_times.reserve(trials);
  for (const auto& t : results) base_times.push_back(t.at_grid[centre]);
  out.a_star = concentration_function(base_times, 1.0).a_star;

  out.min_increment = std::numeric_limits<double>::infinity();
  out.window_hits_histogram.assign(grid.points.size() + 1, 0);
  double measure_total = 0.0;
  for (const auto& t : results) {
    const bool held = t.min_increment >= 2.0;
    if (!held) ++out.failures;
    out.min_increment = std::min(out.min_increment, t.min_increment);
    const auto hits = std::count_if(t.at_grid.begin(), t.at_grid.end(),
                                    [&](double v) { return v >= out.a_star && v <= out.a_star + 1.0; });
    ++out.window_hits_histogram[static_cast<std::size_t>(hits)];
    const double measure = lebesgue_window_measure(fine, t.profile, out.a_star, 1.0);
    measure_total += measure;
    if (held && measure > 2.0 * grid.r0) ++out.measure_bound_violations;
  }
  out.failure_frequency = static_cast<double>(out.failures) / static_cast<double>(trials);
  out.mean_window_measure = measure_total / static_cast<double>(trials);
  return out;
}

double min_nonbacktracking_walk(int k, std::span<const double> cost, std::size_t steps) {
  const GridBox box(2 << k);
  if (cost.size() != box.slot_count()) throw std::invalid_argument("cost must be indexed by box slot");
  if (steps == 0) return 0.0;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Directions: 0 = +x, 1 = -x, 2 = +y, 3 = -y; d ^ 1 reverses d.
  struct Step {
    std::uint32_t from, to;
    std::uint8_t dir;
    double cost;
  };
  std::vector<Step> moves;
  for (const Edge& e : annulus_edges(k)) {
    const double c = cost[box.edge_slot(e)];
    const auto t = static_cast<std::uint32_t>(box.vertex_index(e.tail()));
    const auto h = static_cast<std::uint32_t>(box.vertex_index(e.head()));
    const std::uint8_t forward = e.axis == Axis::Horizontal ? 0 : 2;
    moves.push_back({t, h, forward, c});
    moves.push_back({h, t, static_cast<std::uint8_t>(forward ^ 1), c});
  }

  // best[v*4 + d]: cheapest walk so far ending at v whose last move had direction d.
  std::vector<double> best(box.vertex_count() * 4, kInf), next(best.size());
  for (const Step& m : moves) best[m.to * 4 + m.dir] = std::min(best[m.to * 4 + m.dir], m.cost);
  for (std::size_t s = 1; s < steps; ++s) {
    std::fill(next.begin(), next.end(), kInf);
    for (const Step& m : moves) {
      double in = kInf;
      for (int d = 0; d < 4; ++d) {
        if (d != (m.dir ^ 1)) in = std::min(in, best[m.from * 4 + d]);
      }
      if (in < kInf) next[m.to * 4 + m.dir] = std::min(next[m.to * 4 + m.dir], in + m.cost);
    }
    best.swap(next);
  }
  return *std::min_element(best.begin(), best.end());
}

IncrementReport perturbation_increment_check(const QuantileCoupling& coupling, int n, int k, double s,
                                             double r, double delta0, std::size_t trials,
                                             std::uint64_t seed) {
  const AnnulusIndex idx = scales(n);
  if (k < idx.k0 || k > idx.k1) throw std::invalid_argument("scale k must lie in [k0, k1] for this n");
  if (k > 4) throw std::invalid_argument("increment check supports k <= 4");
  if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("r must lie in (0, 1]");
  if (!(s >= -1.0 && s <= 1.0)) throw std::invalid_argument("s must lie in [-1, 1]");
  if (trials == 0) throw std::invalid_argument("need at least one trial");

  IncrementReport out;
  out.n = n;
  out.k = k;
  out.s = s;
  out.r = r;
  out.trials = trials;
  out.threshold = delta0 * r / (2.0 * std::sqrt(std::log(static_cast<double>(n))));
  out.exact = k <= 2;

  const GridBox box(2 << k);
  const std::vector<Edge> lambda = annulus_edges(k);
  const PerturbationSchedule base(n, s), moved(n, s + r);

  std::vector<std::vector<std::uint32_t>> paths;
  if (out.exact) {
    for_each_path_pk(k, [&](std::span<const Vertex> p) {
      std::vector<std::uint32_t> slots;
      for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        slots.push_back(static_cast<std::uint32_t>(box.edge_slot(edge_between(p[i], p[i + 1]))));
      }
      paths.push_back(std::move(slots));
      return true;
    });
  }

  std::vector<double> cost(box.slot_count(), std::numeric_limits<double>::infinity());
  const std::size_t length = std::size_t{1} << k;
  for (std::size_t t = 0; t < trials; ++t) {
    const LatentField field(derive_seed(seed, static_cast<std::uint64_t>(k), t));
    for (const Edge& e : lambda) {
      const double z = field(e);
      cost[box.edge_slot(e)] = coupling.h(z + moved.tau(e)) - coupling.h(z + base.tau(e));
    }
    double minimum = std::numeric_limits<double>::infinity();
    if (out.exact) {
      for (const auto& p : paths) {
        double sum = 0.0;
        for (auto slot : p) sum += cost[slot];
        minimum = std::min(minimum, sum);
      }
    } else {
      minimum = min_nonbacktracking_walk(k, cost, length);
    }
    if (minimum <= out.threshold) ++out.events;
  }
  const auto est = proportion(out.events, trials);
  out.frequency = est.p;
  out.std_error = est.std_error;
  const double two_k = static_cast<double>(length);
  out.budget = s == 0.0 ? std::exp(-two_k) : std::exp(0.5 * base.norm2_on_scale(k) - 0.5 * two_k);
  out.pass = out.frequency <= out.budget + 3.0 * out.std_error;
  return out;
}

}  // namespace fpplab
