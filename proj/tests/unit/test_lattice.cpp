#include <doctest.h>

#include <set>

#include "fpplab/lattice.hpp"

using namespace fpplab;

TEST_CASE("grid box indexing") {
  const GridBox box(3);
  CHECK(box.side() == 7);
  CHECK(box.vertex_count() == 49);
  CHECK(box.edge_count() == 84);
  std::size_t edges = 0;
  Edge prev{-100, -100, Axis::Horizontal};
  box.for_each_edge([&](Edge e) {
    ++edges;
    CHECK(box.contains(e));
    CHECK(box.edge_at(box.edge_slot(e)) == e);
    CHECK(prev < e);
    CHECK(edge_key(prev) < edge_key(e));
    prev = e;
  });
  CHECK(edges == box.edge_count());
  for (std::size_t i = 0; i < box.vertex_count(); ++i) CHECK(box.vertex_index(box.vertex_at(i)) == i);
  CHECK(box.on_boundary({3, -1}));
  CHECK_FALSE(box.on_boundary({2, 2}));
  CHECK_THROWS(GridBox(0));
}

TEST_CASE("edges between neighbours") {
  CHECK(edge_between({1, 0}, {0, 0}) == Edge{0, 0, Axis::Horizontal});
  CHECK(edge_between({0, 2}, {0, 3}) == Edge{0, 2, Axis::Vertical});
  CHECK_THROWS_AS(edge_between({0, 0}, {1, 1}), std::invalid_argument);
}

TEST_CASE("dyadic scales") {
  CHECK(edge_scale({0, 0, Axis::Horizontal}) == -1);
  CHECK(edge_scale({1, 0, Axis::Horizontal}) == 0);
  CHECK(edge_scale({2, 0, Axis::Horizontal}) == 1);
  CHECK(edge_scale({-3, 4, Axis::Vertical}) == 2);
  CHECK(edge_scale({4, 0, Axis::Horizontal}) == 2);
  CHECK(edge_scale({3, 0, Axis::Horizontal}) == 1);

  const auto s = scales(256);
  CHECK(s.k0 == 4);
  CHECK(s.k1 == 7);
  CHECK(scales(16).k0 == 2);
  CHECK(scales(16).k1 == 3);
  CHECK(scales(1000).k0 == 4);
  CHECK(scales(1000).k1 == 8);
  CHECK_THROWS_AS(scales(15), UnsupportedScale);
}

TEST_CASE("annulus sizes match the frozen oracle") {
  const std::int64_t expected[] = {28, 104, 400, 1568, 6208, 24704, 98560};
  for (int k = 0; k <= 6; ++k) {
    CHECK(annulus_size(k) == expected[k]);
    const auto edges = annulus_edges(k);
    CHECK(static_cast<std::int64_t>(edges.size()) == expected[k]);
    for (const Edge& e : edges) CHECK(in_annulus(e, k));
  }
  CHECK(path_start_count(0) == 24);
  CHECK(path_start_count(2) == 17 * 17 - 7 * 7);
}

TEST_CASE("P_k enumeration") {
  const std::uint64_t expected[] = {28, 236, 6672};
  for (int k = 0; k <= 2; ++k) {
    CHECK(count_paths_pk(k) == expected[k]);
    CHECK(count_paths_pk(k) <= path_count_bound(k));
  }
  const auto p2 = enumerate_paths_pk(2, 10000);
  CHECK(p2.paths.size() == 6672);
  std::set<std::vector<std::pair<int, int>>> unique;
  for (const auto& p : p2.paths) {
    CHECK(p.size() == 5);
    CHECK(p.front() < p.back());
    std::set<std::pair<int, int>> verts;
    std::vector<std::pair<int, int>> key;
    for (std::size_t i = 0; i < p.size(); ++i) {
      verts.insert({p[i].x, p[i].y});
      key.push_back({p[i].x, p[i].y});
      if (i > 0) CHECK(in_annulus(edge_between(p[i - 1], p[i]), 2));
    }
    CHECK(verts.size() == p.size());
    unique.insert(key);
  }
  CHECK(unique.size() == p2.paths.size());

  try {
    enumerate_paths_pk(2, 100);
    FAIL("expected truncation");
  } catch (const PathEnumerationTruncated& e) {
    CHECK(e.k() == 2);
    CHECK(e.partial_count() > 100);
  }
  CHECK_THROWS_AS(enumerate_paths_pk(5, 10), std::invalid_argument);
  CHECK(path_count_bound(40 - 20) == UINT64_MAX);
}

TEST_CASE("scale crossings") {
  const VertexPath path{{0, 0}, {1, 0}, {2, 0}, {3, 0}, {3, 1}, {3, 2}, {4, 2}};
  // Λ_1 edges have max endpoint norm 3 or 4; the run (2,0)→(3,0)→(3,1) has length 2.
  const auto at = find_scale_crossing(path, 1);
  REQUIRE(at.has_value());
  CHECK(*at == 2);
  CHECK_FALSE(find_scale_crossing(path, 3).has_value());
}
