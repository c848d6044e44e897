// SPDX-License-Identifier: Apache-2.0

#include "anchornav/frontier.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "test_support.hpp"

using namespace anchornav;
using anchornav::testing::random_layer;
using anchornav::testing::u01;
using anchornav::testing::uniform_layer;

namespace {

// Free on the left of the column at `split_ix`, unknown from it on; the
// interface cells run vertically.
LayerMap split_map(int size, int split_ix) {
  LayerMap m = uniform_layer(size, Occ::Free);
  for (int iy = 0; iy < size; ++iy) {
    for (int ix = split_ix; ix < size; ++ix) m.set({ix, iy}, Occ::Unknown);
  }
  return m;
}

std::set<std::pair<int, int>> cell_set(const FrontierCluster& c) {
  std::set<std::pair<int, int>> s;
  for (const GridIndex g : c.cells) s.insert({g.ix, g.iy});
  return s;
}

}  // namespace

TEST_CASE("no frontiers on fully unknown or fully free maps") {
  CHECK(detect_frontiers(uniform_layer(15, Occ::Unknown)).empty());
  CHECK(detect_frontiers(uniform_layer(15, Occ::Free)).empty());
}

TEST_CASE("a straight interface yields one cluster with the right axis") {
  const LayerMap m = split_map(20, 10);
  const auto clusters = detect_frontiers(m);
  REQUIRE(clusters.size() == 1);
  const FrontierCluster& c = clusters[0];
  CHECK(c.cells.size() == 20);
  // Vertical interface: the principal axis is +Y after canonicalization.
  CHECK(std::abs(c.principal_axis.x) < 1e-9);
  CHECK(c.principal_axis.y == doctest::Approx(1.0));
  CHECK(c.length == doctest::Approx(19 * m.resolution()));
  // The unknown side is +X.
  CHECK(c.unknown_dir.x == doctest::Approx(1.0));
}

TEST_CASE("principal axis tracks sampled lines") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const double phi = u01(rng) * kPi;
    // A one-cell-wide free line in unknown space: every cell is a frontier
    // cell, so detection returns the line as one cluster.
    LayerMap m = uniform_layer(60, Occ::Unknown);
    const Vec2 mid{6.0, 6.0};
    for (int i = -20; i <= 20; ++i) {
      const Vec2 p{mid.x + i * 0.18 * std::cos(phi),
                   mid.y + i * 0.18 * std::sin(phi)};
      const GridIndex c = m.cell_at(p);
      if (m.in_bounds(c)) m.set(c, Occ::Free);
    }
    const auto clusters = detect_frontiers(m);
    REQUIRE(clusters.size() >= 1);
    const FrontierCluster* biggest = &clusters[0];
    for (const auto& c : clusters) {
      if (c.cells.size() > biggest->cells.size()) biggest = &c;
    }
    const Vec2 axis = biggest->principal_axis;
    const double align =
        std::abs(axis.x * std::cos(phi) + axis.y * std::sin(phi));
    CHECK(align >= 0.999);
  }
}

TEST_CASE("split leaves short clusters alone") {
  const LayerMap m = split_map(20, 10);
  const FrontierCluster c = detect_frontiers(m)[0];
  const auto parts = split_cluster(c, 10.0);
  REQUIRE(parts.size() == 1);
  CHECK(parts[0].cells.size() == c.cells.size());
}

TEST_CASE("a 20-cell interface splits into exactly three segments") {
  const LayerMap m = split_map(20, 10);  // length 3.8 m at 0.2 m/cell
  const FrontierCluster parent = detect_frontiers(m)[0];
  const auto parts = split_cluster(parent, 1.6);  // ceil(3.8/1.6) = 3
  REQUIRE(parts.size() == 3);

  std::set<std::pair<int, int>> whole;
  size_t total = 0;
  for (const FrontierCluster& p : parts) {
    CHECK(p.length <= 1.6 + m.resolution());
    const auto cells = cell_set(p);
    for (const auto& cell : cells) {
      CHECK(whole.insert(cell).second);  // disjoint
    }
    total += cells.size();
  }
  CHECK(total == parent.cells.size());
  CHECK(whole == cell_set(parent));
}

TEST_CASE("degenerate single-cell cluster") {
  LayerMap m = uniform_layer(10, Occ::Unknown);
  m.set({5, 5}, Occ::Free);
  const auto clusters = detect_frontiers(m);
  REQUIRE(clusters.size() == 1);
  CHECK(clusters[0].cells.size() == 1);
  CHECK(clusters[0].length == doctest::Approx(0.0));
  CHECK(clusters[0].principal_axis.x == doctest::Approx(1.0));  // tie -> +X
  const auto parts = split_cluster(clusters[0], 1.0);
  REQUIRE(parts.size() == 1);
}

TEST_CASE("split partitions random frontier clusters exactly") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const LayerMap m = random_layer(rng, 25, 0.1, 0.4);
    for (const FrontierCluster& c : detect_frontiers(m)) {
      const auto parts = split_cluster(c, 0.8);
      std::set<std::pair<int, int>> whole;
      for (const FrontierCluster& p : parts) {
        CHECK(!p.cells.empty());
        for (const auto& cell : cell_set(p)) CHECK(whole.insert(cell).second);
      }
      CHECK(whole == cell_set(c));
    }
  }
}

TEST_CASE("detect_frontiers is idempotent on an unchanged map") {
  std::mt19937_64 rng(77);
  const LayerMap m = random_layer(rng, 25, 0.15, 0.35);
  const auto a = detect_frontiers(m);
  const auto b = detect_frontiers(m);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(cell_set(a[i]) == cell_set(b[i]));
    CHECK(a[i].centroid.x == doctest::Approx(b[i].centroid.x));
    CHECK(a[i].length == doctest::Approx(b[i].length));
  }
}

TEST_CASE("corners of a single-cell cluster collapse in XY") {
  LayerMap m = uniform_layer(10, Occ::Unknown);
  m.set({5, 5}, Occ::Free);
  FrontierCluster c = detect_frontiers(m)[0];
  const auto corners = cluster_corners(c, 1.0, 1.0);
  for (const Vec3& w : corners) {
    CHECK(w.x == doctest::Approx(corners[0].x));
    CHECK(w.y == doctest::Approx(corners[0].y));
  }
  double zlo = 10, zhi = -10;
  for (const Vec3& w : corners) {
    zlo = std::min(zlo, w.z);
    zhi = std::max(zhi, w.z);
  }
  CHECK(zhi - zlo == doctest::Approx(1.0));
  CHECK(zlo == doctest::Approx(0.5));
}

TEST_CASE("corners of a +Y cluster sit at the expected offsets") {
  FrontierCluster c;
  c.centroid = {4.0, 6.0};
  c.principal_axis = {0.0, 1.0};
  c.length = 2.0;
  c.unknown_dir = {1.0, 0.0};
  const auto corners = cluster_corners(c, 1.0, 1.0);
  int low = 0, high = 0;
  for (const Vec3& w : corners) {
    CHECK(w.x == doctest::Approx(4.0));
    CHECK((std::abs(w.y - 5.0) < 1e-9 || std::abs(w.y - 7.0) < 1e-9));
    if (w.z == doctest::Approx(0.5)) ++low;
    if (w.z == doctest::Approx(1.5)) ++high;
  }
  CHECK(low == 2);
  CHECK(high == 2);
  // Counterclockwise from the free side (-X): the winding normal must point
  // away from the unknown direction.
  const Vec3 n = (corners[1] - corners[0]).cross(corners[3] - corners[0]);
  CHECK(n.x * c.unknown_dir.x + n.y * c.unknown_dir.y < 0.0);
}

TEST_CASE("rotating a cluster rotates its corners") {
  FrontierCluster c;
  c.centroid = {0.0, 0.0};
  c.principal_axis = {1.0, 0.0};
  c.length = 2.0;
  c.unknown_dir = {0.0, 1.0};
  const auto base = cluster_corners(c, 1.0, 1.0);

  FrontierCluster r;  // everything rotated 90 degrees about the centroid
  r.centroid = {0.0, 0.0};
  r.principal_axis = {0.0, 1.0};
  r.length = 2.0;
  r.unknown_dir = {-1.0, 0.0};
  const auto rotated = cluster_corners(r, 1.0, 1.0);

  // The rotated corner set must be the 90-degree rotation of the base set.
  for (const Vec3& w : base) {
    const Vec3 expect{-w.y, w.x, w.z};
    bool found = false;
    for (const Vec3& v : rotated) {
      if ((v - expect).norm() < 1e-9) found = true;
    }
    CHECK(found);
  }
}

TEST_CASE("viewpoints are free, clear, near the centroid and face it") {
  const LayerMap m = split_map(30, 15);
  FrontierParams params;
  const auto clusters = build_frontiers(m, params, 1.0);
  REQUIRE(!clusters.empty());
  for (const FrontierCluster& c : clusters) {
    REQUIRE(c.has_viewpoint);
    const GridIndex cell = m.cell_at(c.viewpoint.xy());
    CHECK(m.occ(cell) == Occ::Free);
    CHECK(has_clearance(m, cell, params.clearance_radius));
    CHECK((c.viewpoint.xy() - c.centroid).norm() <=
          params.viewpoint_search_radius);
    const Vec2 to_cluster = c.centroid - c.viewpoint.xy();
    if (to_cluster.norm() > 1e-9) {
      CHECK(std::abs(wrap_angle(std::atan2(to_cluster.y, to_cluster.x) -
                                c.viewpoint_yaw)) < 1e-9);
    }
  }
}

TEST_CASE("build_frontiers assigns dense indices") {
  std::mt19937_64 rng(15);
  const LayerMap m = random_layer(rng, 30, 0.1, 0.35);
  const auto clusters = build_frontiers(m, FrontierParams{}, 1.0);
  for (size_t i = 0; i < clusters.size(); ++i) {
    CHECK(clusters[i].index == static_cast<int>(i));
  }
}
