#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace fpplab {

struct Vertex {
  int x = 0;
  int y = 0;

  friend constexpr auto operator<=>(const Vertex&, const Vertex&) = default;
};

/// ℓ^∞ norm; every scale in this library is measured with it.
constexpr int linf(Vertex v) noexcept { return std::max(std::abs(v.x), std::abs(v.y)); }

enum class Axis : std::uint8_t { Horizontal = 0, Vertical = 1 };

/// Nearest-neighbour edge stored by its lower-left endpoint: (x, y)–(x+1, y)
/// for Horizontal, (x, y)–(x, y+1) for Vertical. The defaulted ordering is
/// lexicographic in (x, y, axis), which is the global tie-break order.
struct Edge {
  int x = 0;
  int y = 0;
  Axis axis = Axis::Horizontal;

  [[nodiscard]] constexpr Vertex tail() const noexcept { return {x, y}; }
  [[nodiscard]] constexpr Vertex head() const noexcept {
    return axis == Axis::Horizontal ? Vertex{x + 1, y} : Vertex{x, y + 1};
  }

  friend constexpr auto operator<=>(const Edge&, const Edge&) = default;
};

/// Edge joining two neighbouring vertices; throws std::invalid_argument otherwise.
Edge edge_between(Vertex a, Vertex b);

/// Packed 64-bit key, order-preserving with respect to Edge ordering.
constexpr std::uint64_t edge_key(Edge e) noexcept {
  constexpr std::int64_t bias = std::int64_t{1} << 30;
  return (static_cast<std::uint64_t>(e.x + bias) << 32) |
         (static_cast<std::uint64_t>(e.y + bias) << 1) | static_cast<std::uint64_t>(e.axis);
}

/// Vertices of [-R, R]² and the nearest-neighbour edges inside it.
///
/// Edges are addressed by dense slots: slot = 2·vertex_index(tail) + axis.
/// Slots whose head leaves the box are unused, so slot_count() exceeds
/// edge_count() by 2·(2R+1).
class GridBox {
 public:
  explicit GridBox(int radius);

  [[nodiscard]] int radius() const noexcept { return radius_; }
  [[nodiscard]] int side() const noexcept { return 2 * radius_ + 1; }
  [[nodiscard]] std::size_t vertex_count() const noexcept {
    return static_cast<std::size_t>(side()) * side();
  }
  [[nodiscard]] std::size_t edge_count() const noexcept {
    return 2 * static_cast<std::size_t>(side()) * (side() - 1);
  }
  [[nodiscard]] std::size_t slot_count() const noexcept { return 2 * vertex_count(); }

  [[nodiscard]] bool contains(Vertex v) const noexcept {
    return std::abs(v.x) <= radius_ && std::abs(v.y) <= radius_;
  }
  [[nodiscard]] bool contains(Edge e) const noexcept { return contains(e.tail()) && contains(e.head()); }
  [[nodiscard]] bool on_boundary(Vertex v) const noexcept { return linf(v) == radius_; }

  [[nodiscard]] std::size_t vertex_index(Vertex v) const noexcept {
    return static_cast<std::size_t>(v.x + radius_) * side() + static_cast<std::size_t>(v.y + radius_);
  }
  [[nodiscard]] Vertex vertex_at(std::size_t index) const noexcept {
    return {static_cast<int>(index / side()) - radius_, static_cast<int>(index % side()) - radius_};
  }
  [[nodiscard]] std::size_t edge_slot(Edge e) const noexcept {
    return 2 * vertex_index(e.tail()) + static_cast<std::size_t>(e.axis);
  }
  [[nodiscard]] Edge edge_at(std::size_t slot) const noexcept {
    const Vertex t = vertex_at(slot / 2);
    return {t.x, t.y, static_cast<Axis>(slot % 2)};
  }

  /// Visits every edge of the box in increasing slot (= Edge) order.
  void for_each_edge(const std::function<void(Edge)>& visit) const;

 private:
  int radius_;
};

/// Dyadic scale bounds for distance n: k0 = ⌊log₂ √n⌋, k1 = ⌊log₂ n⌋ - 1.
struct AnnulusIndex {
  int n = 0;
  int k0 = 0;
  int k1 = 0;

  [[nodiscard]] int scale_count() const noexcept { return k1 - k0 + 1; }
};

class UnsupportedScale : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws UnsupportedScale for n < 16.
AnnulusIndex scales(int n);

/// The k with e ∈ Λ_k, or -1 when e lies in no Λ_k with k ≥ 0.
///
/// Λ_k holds the edges with both endpoints in [-2^{k+1}, 2^{k+1}]² and at least
/// one endpoint outside [-2^k, 2^k]², i.e. edges whose larger endpoint norm lies
/// in (2^k, 2^{k+1}].
int edge_scale(Edge e) noexcept;

inline bool in_annulus(Edge e, int k) noexcept { return k >= 0 && edge_scale(e) == k; }

/// Λ_k in increasing Edge order.
std::vector<Edge> annulus_edges(int k);

/// |Λ_k| = 24·4^k + 4·2^k, the edge count of the outer box minus the inner box.
std::int64_t annulus_size(int k);

/// Vertices incident to Λ_k: 2^k ≤ ‖v‖∞ ≤ 2^{k+1}.
std::int64_t path_start_count(int k);

/// path_start_count(k) · 3^{2^k}, saturating at UINT64_MAX.
std::uint64_t path_count_bound(int k);

/// A lattice path given by its vertex sequence.
using VertexPath = std::vector<Vertex>;

/// Simple paths of exactly 2^k edges, all in Λ_k, each undirected path listed
/// once (oriented so that front() < back()).
struct PathSetPk {
  int k = 0;
  std::vector<VertexPath> paths;
};

class PathEnumerationTruncated : public std::runtime_error {
 public:
  PathEnumerationTruncated(int k, std::uint64_t partial)
      : std::runtime_error("P_k enumeration exceeded its cap"), k_(k), partial_(partial) {}
  [[nodiscard]] int k() const noexcept { return k_; }
  [[nodiscard]] std::uint64_t partial_count() const noexcept { return partial_; }

 private:
  int k_;
  std::uint64_t partial_;
};

/// Calls `visit` for every path of P_k; stops early when `visit` returns false.
/// Returns the number of paths visited.
std::uint64_t for_each_path_pk(int k, const std::function<bool(std::span<const Vertex>)>& visit);

std::uint64_t count_paths_pk(int k);

/// Materialized P_k. Throws std::invalid_argument for k > 4 and
/// PathEnumerationTruncated once more than `cap` paths are found.
PathSetPk enumerate_paths_pk(int k, std::uint64_t cap);

/// Start index of a run of 2^k consecutive edges of `path` that all lie in Λ_k.
std::optional<std::size_t> find_scale_crossing(std::span<const Vertex> path, int k);

}  // namespace fpplab
