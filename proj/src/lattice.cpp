#include "fpplab/lattice.hpp"

#include <bit>
#include <limits>

namespace fpplab {

Edge edge_between(Vertex a, Vertex b) {
  if (b < a) std::swap(a, b);
  if (a.y == b.y && b.x == a.x + 1) return {a.x, a.y, Axis::Horizontal};
  if (a.x == b.x && b.y == a.y + 1) return {a.x, a.y, Axis::Vertical};
  throw std::invalid_argument("vertices are not nearest neighbours");
}

GridBox::GridBox(int radius) : radius_(radius) {
  if (radius < 1) throw std::invalid_argument("box radius must be positive");
  if (radius > (1 << 14)) throw std::invalid_argument("box radius too large");
}

void GridBox::for_each_edge(const std::function<void(Edge)>& visit) const {
  for (int x = -radius_; x <= radius_; ++x) {
    for (int y = -radius_; y <= radius_; ++y) {
      if (x < radius_) visit({x, y, Axis::Horizontal});
      if (y < radius_) visit({x, y, Axis::Vertical});
    }
  }
}

AnnulusIndex scales(int n) {
  if (n < 16) throw UnsupportedScale("scales require n >= 16");
  const auto un = static_cast<unsigned>(n);
  const int log2n = std::bit_width(un) - 1;
  // ⌊log₂ √n⌋ = ⌊⌊log₂ n⌋ / 2⌋.
  return {n, log2n / 2, log2n - 1};
}

int edge_scale(Edge e) noexcept {
  const int a = std::max(linf(e.tail()), linf(e.head()));
  if (a < 2) return -1;
  return std::bit_width(static_cast<unsigned>(a - 1)) - 1;
}

std::vector<Edge> annulus_edges(int k) {
  if (k < 0 || k > 12) throw std::invalid_argument("annulus scale must lie in [0, 12]");
  std::vector<Edge> out;
  out.reserve(static_cast<std::size_t>(annulus_size(k)));
  GridBox(1 << (k + 1)).for_each_edge([&](Edge e) {
    if (edge_scale(e) == k) out.push_back(e);
  });
  return out;
}

std::int64_t annulus_size(int k) {
  if (k < 0 || k > 28) throw std::invalid_argument("annulus scale must lie in [0, 28]");
  const std::int64_t m = std::int64_t{1} << k;
  return 24 * m * m + 4 * m;
}

std::int64_t path_start_count(int k) {
  if (k < 0 || k > 28) throw std::invalid_argument("annulus scale must lie in [0, 28]");
  const std::int64_t outer = (std::int64_t{2} << k) * 2 + 1;  // side of [-2^{k+1}, 2^{k+1}]²
  const std::int64_t inner = (std::int64_t{1} << k) * 2 - 1;  // side of the open inner box
  return outer * outer - inner * inner;
}

std::uint64_t path_count_bound(int k) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t bound = static_cast<std::uint64_t>(path_start_count(k));
  const std::uint64_t steps = std::uint64_t{1} << k;
  for (std::uint64_t i = 0; i < steps; ++i) {
    if (bound > kMax / 3) return kMax;
    bound *= 3;
  }
  return bound;
}

namespace {

bool edge_in_scale(Vertex a, Vertex b, int k) {
  const int norm = std::max(linf(a), linf(b));
  return norm > (1 << k) && norm <= (2 << k);
}

class PathWalker {
 public:
  PathWalker(int k, const std::function<bool(std::span<const Vertex>)>& visit)
      : k_(k), length_(std::size_t{1} << k), visit_(visit) {
    path_.reserve(length_ + 1);
  }

  std::uint64_t run() {
    const int outer = 2 << k_;
    for (int x = -outer; x <= outer && !stopped_; ++x) {
      for (int y = -outer; y <= outer && !stopped_; ++y) {
        const Vertex v{x, y};
        if (linf(v) < (1 << k_)) continue;
        path_.assign(1, v);
        extend();
      }
    }
    return count_;
  }

 private:
  void extend() {
    if (path_.size() == length_ + 1) {
      // Each undirected path appears twice; keep the orientation with front < back.
      if (path_.front() < path_.back()) {
        ++count_;
        if (!visit_(path_)) stopped_ = true;
      }
      return;
    }
    static constexpr int dx[] = {1, -1, 0, 0};
    static constexpr int dy[] = {0, 0, 1, -1};
    const Vertex cur = path_.back();
    for (int d = 0; d < 4 && !stopped_; ++d) {
      const Vertex next{cur.x + dx[d], cur.y + dy[d]};
      if (!edge_in_scale(cur, next, k_)) continue;
      if (std::find(path_.begin(), path_.end(), next) != path_.end()) continue;
      path_.push_back(next);
      extend();
      path_.pop_back();
    }
  }

  int k_;
  std::size_t length_;
  const std::function<bool(std::span<const Vertex>)>& visit_;
  VertexPath path_;
  std::uint64_t count_ = 0;
  bool stopped_ = false;
};

}  // namespace

std::uint64_t for_each_path_pk(int k, const std::function<bool(std::span<const Vertex>)>& visit) {
  if (k < 0 || k > 4) throw std::invalid_argument("P_k enumeration supports 0 <= k <= 4");
  return PathWalker(k, visit).run();
}

std::uint64_t count_paths_pk(int k) {
  return for_each_path_pk(k, [](std::span<const Vertex>) { return true; });
}

PathSetPk enumerate_paths_pk(int k, std::uint64_t cap) {
  PathSetPk set{k, {}};
  std::uint64_t seen = 0;
  for_each_path_pk(k, [&](std::span<const Vertex> p) {
    if (++seen > cap) return false;
    set.paths.emplace_back(p.begin(), p.end());
    return true;
  });
  if (seen > cap) throw PathEnumerationTruncated(k, seen);
  return set;
}

std::optional<std::size_t> find_scale_crossing(std::span<const Vertex> path, int k) {
  const std::size_t need = std::size_t{1} << k;
  std::size_t run = 0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    run = edge_in_scale(path[i], path[i + 1], k) ? run + 1 : 0;
    if (run == need) return i + 1 - need;
  }
  return std::nullopt;
}

}  // namespace fpplab
