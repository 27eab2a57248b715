#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fpplab/coupling.hpp"
#include "fpplab/distributions.hpp"
#include "fpplab/lattice.hpp"

namespace fpplab {

class PerturbationSchedule;

/// Counter-based standard Gaussian per edge: the latent of edge e is
/// Φ⁻¹(U(seed, key(e))). Depends only on the seed and the global edge
/// coordinates, never on the box or on evaluation order.
class LatentField {
 public:
  explicit constexpr LatentField(std::uint64_t seed) noexcept : seed_(seed) {}

  [[nodiscard]] double operator()(Edge e) const {
    return GaussianKernel::quantile(bits_to_open_unit(hash_combine(seed_, edge_key(e))));
  }
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
};

/// One realization of edge weights t_e = h(latent_e) on a box.
///
/// Sampled environments are either materialized (latents and weights stored
/// per slot) or lazy (both recomputed from the latent field on demand; used
/// for large boxes where shortest paths only touch a small region). Both
/// give bit-identical weights for the same (law, seed). Environments built from
/// explicit weights carry no latents and cannot be perturbed.
class Environment {
 public:
  /// Throws std::invalid_argument when the law's support is not in (0, ∞).
  static Environment sample(const WeightLaw& law, GridBox box, std::uint64_t seed);
  static Environment lazy(const WeightLaw& law, GridBox box, std::uint64_t seed);
  /// `weights` is indexed by box slot; unused slots are ignored.
  static Environment from_weights(GridBox box, std::vector<double> weights);

  [[nodiscard]] const GridBox& box() const noexcept { return box_; }
  [[nodiscard]] bool materialized() const noexcept { return !weights_.empty(); }
  [[nodiscard]] bool has_latents() const noexcept { return coupling_.has_value(); }
  [[nodiscard]] const QuantileCoupling& coupling() const;
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

  [[nodiscard]] double latent(Edge e) const;
  [[nodiscard]] double weight(Edge e) const {
    if (!weights_.empty()) return weights_[box_.edge_slot(e)];
    return coupling_->h(LatentField(seed_)(e));
  }

  void set_weight(Edge e, double w);

  friend Environment perturb_environment(const Environment& env, const PerturbationSchedule& sched,
                                         const QuantileCoupling& coupling);

 private:
  Environment(GridBox box, std::optional<QuantileCoupling> coupling, std::uint64_t seed)
      : box_(box), coupling_(std::move(coupling)), seed_(seed) {}

  GridBox box_;
  std::optional<QuantileCoupling> coupling_;
  std::uint64_t seed_ = 0;
  std::vector<double> latents_;
  std::vector<double> weights_;
};

inline Environment sample_environment(const WeightLaw& law, GridBox box, std::uint64_t seed) {
  return Environment::sample(law, box, seed);
}

/// τ_r(e) = r / (2^k √(ln n)) for e ∈ Λ_k with k0 ≤ k ≤ k1, and 0 elsewhere.
class PerturbationSchedule {
 public:
  /// No range check on r; use tau_schedule for the checked constructor.
  PerturbationSchedule(int n, double r);

  [[nodiscard]] int n() const noexcept { return index_.n; }
  [[nodiscard]] double r() const noexcept { return r_; }
  [[nodiscard]] const AnnulusIndex& index() const noexcept { return index_; }

  /// Per-edge magnitude at r = 1 for scale k (0 outside [k0, k1]).
  [[nodiscard]] double unit_tau(int k) const noexcept {
    return (k >= index_.k0 && k <= index_.k1) ? unit_[k - index_.k0] : 0.0;
  }
  [[nodiscard]] double tau(Edge e) const noexcept { return r_ * unit_tau(edge_scale(e)); }

  /// ‖τ_r‖₂² from the exact annulus sizes.
  [[nodiscard]] double norm2() const;
  /// ‖τ_r‖₂² restricted to Λ_k.
  [[nodiscard]] double norm2_on_scale(int k) const;

 private:
  AnnulusIndex index_;
  double r_;
  std::array<double, 32> unit_{};
};

/// Checked constructor: n ≥ 16 and r ∈ [-2, 2].
PerturbationSchedule tau_schedule(int n, double r);

/// New materialized environment with latents shifted by τ_r(e) and weights
/// h(latent_e + τ_r(e)). Edges with τ = 0 keep their weight bit for bit.
Environment perturb_environment(const Environment& env, const PerturbationSchedule& sched,
                                const QuantileCoupling& coupling);

struct PassageResult {
  double time = 0.0;
  std::vector<Edge> geodesic;  // source to target
  int radius = 0;
  bool touched_boundary = false;
  std::uint64_t near_ties = 0;  // tentative distances within 1e-12 of an existing label
  std::size_t settled = 0;
};

/// Reusable scratch arrays for Dijkstra on boxes of radius up to capacity.
class DijkstraWorkspace {
 public:
  void prepare(const GridBox& box);

  struct Label {
    long double dist;
    std::uint32_t stamp;
    std::uint32_t settled_stamp;
    std::int8_t from_dir;
  };
  std::vector<Label> labels;
  std::vector<std::pair<long double, std::uint32_t>> heap;
  std::uint32_t generation = 0;
};

/// Exact shortest path in [-R, R]² under the nonnegative weights `weight(e)`.
/// Distances are accumulated in extended precision; heap ties are broken by
/// vertex index (lexicographic (x, y)). Stops once the target is settled.
template <typename WeightFn>
PassageResult shortest_path(int radius, Vertex source, Vertex target, WeightFn&& weight,
                            DijkstraWorkspace& ws);

/// T^R(source, target) in the unperturbed environment.
PassageResult passage_time(const Environment& env, Vertex source, Vertex target, int radius);
PassageResult passage_time(const Environment& env, Vertex source, Vertex target, int radius,
                           DijkstraWorkspace& ws);

/// T^R_r(source, target): weights h(latent_e + τ_r(e)) from the env's latents.
PassageResult passage_time(const Environment& env, const PerturbationSchedule& sched,
                           const QuantileCoupling& coupling, Vertex source, Vertex target,
                           int radius, DijkstraWorkspace& ws);

/// T_r for each r in `r_values`, all on the env's latent field.
std::vector<PassageResult> passage_time_profile(const Environment& env, const QuantileCoupling& coupling,
                                                int n, std::span<const double> r_values, Vertex source,
                                                Vertex target, int radius);

/// Sum of the current weights along a path, accumulated from its first vertex.
long double path_weight(const Environment& env, std::span<const Edge> path);

/// Sum of h(latent_e + τ(e)) along a path.
long double path_weight(const Environment& env, const PerturbationSchedule& sched,
                        const QuantileCoupling& coupling, std::span<const Edge> path);

// ---------------------------------------------------------------------------

template <typename WeightFn>
PassageResult shortest_path(int radius, Vertex source, Vertex target, WeightFn&& weight,
                            DijkstraWorkspace& ws) {
  const GridBox box(radius);
  if (!box.contains(source) || !box.contains(target)) {
    throw std::domain_error("source and target must lie in the restriction box");
  }
  PassageResult out;
  out.radius = radius;
  if (source == target) {
    out.touched_boundary = box.on_boundary(source);
    return out;
  }
  ws.prepare(box);
  const std::uint32_t gen = ws.generation;
  auto& labels = ws.labels;
  auto& heap = ws.heap;
  heap.clear();
  const auto cmp = [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second > b.second);
  };

  const auto src = static_cast<std::uint32_t>(box.vertex_index(source));
  const auto dst = static_cast<std::uint32_t>(box.vertex_index(target));
  labels[src] = {0.0L, gen, 0, -1};
  heap.emplace_back(0.0L, src);

  // Direction d moves by (dx[d], dy[d]); its reverse is d ^ 1.
  static constexpr int dx[] = {1, -1, 0, 0};
  static constexpr int dy[] = {0, 0, 1, -1};

  while (!heap.empty()) {
    std::pop_heap(heap.begin(), heap.end(), cmp);
    const auto [d, u] = heap.back();
    heap.pop_back();
    auto& lu = labels[u];
    if (lu.settled_stamp == gen || d > lu.dist) continue;
    lu.settled_stamp = gen;
    ++out.settled;
    if (u == dst) break;
    const Vertex vu = box.vertex_at(u);
    for (int dir = 0; dir < 4; ++dir) {
      const Vertex vv{vu.x + dx[dir], vu.y + dy[dir]};
      if (!box.contains(vv)) continue;
      const auto v = static_cast<std::uint32_t>(box.vertex_index(vv));
      auto& lv = labels[v];
      if (lv.stamp == gen && lv.settled_stamp == gen) continue;
      const Edge e = dir == 0   ? Edge{vu.x, vu.y, Axis::Horizontal}
                     : dir == 1 ? Edge{vv.x, vv.y, Axis::Horizontal}
                     : dir == 2 ? Edge{vu.x, vu.y, Axis::Vertical}
                                : Edge{vv.x, vv.y, Axis::Vertical};
      const long double nd = d + static_cast<long double>(weight(e));
      if (lv.stamp != gen || nd < lv.dist) {
        if (lv.stamp == gen && lv.dist - nd <= 1e-12L) ++out.near_ties;
        lv = {nd, gen, 0, static_cast<std::int8_t>(dir)};
        heap.emplace_back(nd, v);
        std::push_heap(heap.begin(), heap.end(), cmp);
      } else if (nd - lv.dist <= 1e-12L) {
        ++out.near_ties;
      }
    }
  }

  out.time = static_cast<double>(labels[dst].dist);
  Vertex cur = target;
  out.touched_boundary = box.on_boundary(cur);
  while (cur != source) {
    const int dir = labels[box.vertex_index(cur)].from_dir;
    const Vertex prev{cur.x - dx[dir], cur.y - dy[dir]};
    out.geodesic.push_back(edge_between(prev, cur));
    out.touched_boundary = out.touched_boundary || box.on_boundary(prev);
    cur = prev;
  }
  std::reverse(out.geodesic.begin(), out.geodesic.end());
  return out;
}

}  // namespace fpplab
