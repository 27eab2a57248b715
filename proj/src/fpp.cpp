#include "fpplab/fpp.hpp"

#include <cmath>
#include <limits>

namespace fpplab {

namespace {

void require_positive_support(const WeightLaw& law) {
  if (!law.positive_support()) {
    throw std::invalid_argument("first-passage environments need a weight law supported in (0, inf); got " +
                                law.describe());
  }
}

}  // namespace

Environment Environment::sample(const WeightLaw& law, GridBox box, std::uint64_t seed) {
  require_positive_support(law);
  Environment env(box, QuantileCoupling(law), seed);
  const LatentField field(seed);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  env.latents_.assign(box.slot_count(), nan);
  env.weights_.assign(box.slot_count(), nan);
  box.for_each_edge([&](Edge e) {
    const std::size_t slot = box.edge_slot(e);
    env.latents_[slot] = field(e);
    env.weights_[slot] = env.coupling_->h(env.latents_[slot]);
  });
  return env;
}

Environment Environment::lazy(const WeightLaw& law, GridBox box, std::uint64_t seed) {
  require_positive_support(law);
  return Environment(box, QuantileCoupling(law), seed);
}

Environment Environment::from_weights(GridBox box, std::vector<double> weights) {
  if (weights.size() != box.slot_count()) {
    throw std::invalid_argument("weight vector must have one entry per box slot");
  }
  Environment env(box, std::nullopt, 0);
  box.for_each_edge([&](Edge e) {
    const double w = weights[box.edge_slot(e)];
    if (!(std::isfinite(w) && w >= 0.0)) throw std::invalid_argument("edge weights must be finite and >= 0");
  });
  env.weights_ = std::move(weights);
  return env;
}

const QuantileCoupling& Environment::coupling() const {
  if (!coupling_) throw std::logic_error("environment was built from explicit weights");
  return *coupling_;
}

double Environment::latent(Edge e) const {
  if (!coupling_) throw std::logic_error("environment was built from explicit weights");
  if (!box_.contains(e)) throw std::domain_error("edge outside the environment box");
  if (!latents_.empty()) return latents_[box_.edge_slot(e)];
  return LatentField(seed_)(e);
}

void Environment::set_weight(Edge e, double w) {
  if (coupling_) throw std::logic_error("only explicit-weight environments are mutable");
  if (!box_.contains(e)) throw std::domain_error("edge outside the environment box");
  if (!(std::isfinite(w) && w >= 0.0)) throw std::invalid_argument("edge weights must be finite and >= 0");
  weights_[box_.edge_slot(e)] = w;
}

PerturbationSchedule::PerturbationSchedule(int n, double r) : index_(scales(n)), r_(r) {
  if (!std::isfinite(r)) throw std::invalid_argument("perturbation parameter must be finite");
  const double root_log = std::sqrt(std::log(static_cast<double>(n)));
  for (int k = index_.k0; k <= index_.k1; ++k) {
    unit_[k - index_.k0] = 1.0 / (std::ldexp(1.0, k) * root_log);
  }
}

double PerturbationSchedule::norm2_on_scale(int k) const {
  const double t = r_ * unit_tau(k);
  return static_cast<double>(annulus_size(k)) * t * t;
}

double PerturbationSchedule::norm2() const {
  double total = 0.0;
  for (int k = index_.k0; k <= index_.k1; ++k) total += norm2_on_scale(k);
  return total;
}

PerturbationSchedule tau_schedule(int n, double r) {
  if (!(r >= -2.0 && r <= 2.0)) throw std::invalid_argument("r must lie in [-2, 2]");
  return PerturbationSchedule(n, r);
}

Environment perturb_environment(const Environment& env, const PerturbationSchedule& sched,
                                const QuantileCoupling& coupling) {
  if (!env.has_latents()) throw std::logic_error("cannot perturb an environment without latents");
  const GridBox& box = env.box();
  Environment out(box, coupling, env.seed());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.latents_.assign(box.slot_count(), nan);
  out.weights_.assign(box.slot_count(), nan);
  box.for_each_edge([&](Edge e) {
    const std::size_t slot = box.edge_slot(e);
    const double tau = sched.tau(e);
    const double latent = env.latent(e);
    if (tau == 0.0) {
      out.latents_[slot] = latent;
      out.weights_[slot] = env.weight(e);
    } else {
      out.latents_[slot] = latent + tau;
      out.weights_[slot] = coupling.h(latent + tau);
    }
  });
  return out;
}

void DijkstraWorkspace::prepare(const GridBox& box) {
  if (labels.size() < box.vertex_count()) {
    labels.assign(box.vertex_count(), Label{0.0L, 0, 0, -1});
    generation = 0;
  }
  if (++generation == 0) {
    std::fill(labels.begin(), labels.end(), Label{0.0L, 0, 0, -1});
    generation = 1;
  }
}

namespace {

void check_radius(const Environment& env, int radius) {
  if (radius < 1 || radius > env.box().radius()) {
    throw std::domain_error("restriction radius must lie in [1, environment radius]");
  }
}

}  // namespace

PassageResult passage_time(const Environment& env, Vertex source, Vertex target, int radius,
                           DijkstraWorkspace& ws) {
  check_radius(env, radius);
  return shortest_path(radius, source, target, [&env](Edge e) { return env.weight(e); }, ws);
}

PassageResult passage_time(const Environment& env, Vertex source, Vertex target, int radius) {
  DijkstraWorkspace ws;
  return passage_time(env, source, target, radius, ws);
}

PassageResult passage_time(const Environment& env, const PerturbationSchedule& sched,
                           const QuantileCoupling& coupling, Vertex source, Vertex target,
                           int radius, DijkstraWorkspace& ws) {
  check_radius(env, radius);
  if (!env.has_latents()) throw std::logic_error("cannot perturb an environment without latents");
  return shortest_path(
      radius, source, target,
      [&](Edge e) {
        const double tau = sched.tau(e);
        return tau == 0.0 ? env.weight(e) : coupling.h(env.latent(e) + tau);
      },
      ws);
}

std::vector<PassageResult> passage_time_profile(const Environment& env, const QuantileCoupling& coupling,
                                                int n, std::span<const double> r_values, Vertex source,
                                                Vertex target, int radius) {
  DijkstraWorkspace ws;
  std::vector<PassageResult> out;
  out.reserve(r_values.size());
  for (double r : r_values) {
    out.push_back(passage_time(env, PerturbationSchedule(n, r), coupling, source, target, radius, ws));
  }
  return out;
}

long double path_weight(const Environment& env, std::span<const Edge> path) {
  long double total = 0.0L;
  for (const Edge& e : path) total += static_cast<long double>(env.weight(e));
  return total;
}

long double path_weight(const Environment& env, const PerturbationSchedule& sched,
                        const QuantileCoupling& coupling, std::span<const Edge> path) {
  long double total = 0.0L;
  for (const Edge& e : path) {
    const double tau = sched.tau(e);
    total += static_cast<long double>(tau == 0.0 ? env.weight(e) : coupling.h(env.latent(e) + tau));
  }
  return total;
}

}  // namespace fpplab
