// SPDX-License-Identifier: Apache-2.0

#include "anchornav/frontier.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace anchornav {

namespace {

// Centroid, covariance eigenvector and projected extent for a set of centers.
void recompute_stats(FrontierCluster& c) {
  const size_t n = c.cell_centers.size();
  Vec2 mean;
  for (const Vec2& p : c.cell_centers) mean = mean + p;
  mean = mean * (1.0 / static_cast<double>(n));
  c.centroid = mean;

  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const Vec2& p : c.cell_centers) {
    const Vec2 d = p - mean;
    sxx += d.x * d.x;
    sxy += d.x * d.y;
    syy += d.y * d.y;
  }
  sxx /= static_cast<double>(n);
  sxy /= static_cast<double>(n);
  syy /= static_cast<double>(n);

  Vec2 axis{1.0, 0.0};
  const double eps = 1e-12;
  if (std::abs(sxy) > eps) {
    const double half = (sxx + syy) / 2.0;
    const double det = std::sqrt((sxx - syy) * (sxx - syy) / 4.0 + sxy * sxy);
    const double lmax = half + det;
    axis = {sxy, lmax - sxx};
    const double norm = axis.norm();
    if (norm > eps) {
      axis = axis * (1.0 / norm);
    } else {
      axis = {1.0, 0.0};
    }
  } else if (syy > sxx + eps) {
    axis = {0.0, 1.0};
  }
  // Canonical sign keeps splits and corner ordering deterministic.
  if (axis.x < 0.0 || (axis.x == 0.0 && axis.y < 0.0)) axis = axis * -1.0;
  c.principal_axis = axis;

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const Vec2& p : c.cell_centers) {
    const double t = (p - mean).dot(axis);
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  c.length = (n > 0) ? hi - lo : 0.0;
}

}  // namespace

std::vector<FrontierCluster> detect_frontiers(const LayerMap& layer) {
  const int sx = layer.size_x();
  const int sy = layer.size_y();
  std::vector<uint8_t> frontier(layer.cell_count(), 0);
  auto flat = [sx](GridIndex c) {
    return static_cast<size_t>(c.iy) * static_cast<size_t>(sx) +
           static_cast<size_t>(c.ix);
  };

  static constexpr int kFour[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (int iy = 0; iy < sy; ++iy) {
    for (int ix = 0; ix < sx; ++ix) {
      const GridIndex c{ix, iy};
      if (layer.occ(c) != Occ::Free) continue;
      for (const auto& d : kFour) {
        const GridIndex n{ix + d[0], iy + d[1]};
        if (layer.in_bounds(n) && layer.occ(n) == Occ::Unknown) {
          frontier[flat(c)] = 1;
          break;
        }
      }
    }
  }

  std::vector<FrontierCluster> clusters;
  std::vector<uint8_t> seen(layer.cell_count(), 0);
  for (int iy = 0; iy < sy; ++iy) {
    for (int ix = 0; ix < sx; ++ix) {
      const GridIndex start{ix, iy};
      if (!frontier[flat(start)] || seen[flat(start)]) continue;

      FrontierCluster c;
      std::deque<GridIndex> queue{start};
      seen[flat(start)] = 1;
      Vec2 unknown_sum;
      while (!queue.empty()) {
        const GridIndex cur = queue.front();
        queue.pop_front();
        c.cells.push_back(cur);
        c.cell_centers.push_back(layer.center(cur));
        for (const auto& d : kFour) {
          const GridIndex n{cur.ix + d[0], cur.iy + d[1]};
          if (layer.in_bounds(n) && layer.occ(n) == Occ::Unknown) {
            unknown_sum = unknown_sum + Vec2{static_cast<double>(d[0]),
                                             static_cast<double>(d[1])};
          }
        }
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            const GridIndex n{cur.ix + dx, cur.iy + dy};
            if (!layer.in_bounds(n)) continue;
            if (!frontier[flat(n)] || seen[flat(n)]) continue;
            seen[flat(n)] = 1;
            queue.push_back(n);
          }
        }
      }
      const double norm = unknown_sum.norm();
      c.unknown_dir = (norm > 1e-12) ? unknown_sum * (1.0 / norm) : Vec2{};
      recompute_stats(c);
      c.index = static_cast<int>(clusters.size());
      clusters.push_back(std::move(c));
    }
  }
  return clusters;
}

std::vector<FrontierCluster> split_cluster(const FrontierCluster& cluster,
                                           double max_length) {
  if (max_length <= 0.0) throw std::invalid_argument("max_length must be > 0");
  if (cluster.length <= max_length || cluster.cells.size() <= 1) {
    return {cluster};
  }

  const int segments =
      static_cast<int>(std::ceil(cluster.length / max_length));
  const double width = cluster.length / segments;

  double lo = std::numeric_limits<double>::infinity();
  for (const Vec2& p : cluster.cell_centers) {
    lo = std::min(lo, (p - cluster.centroid).dot(cluster.principal_axis));
  }

  std::vector<FrontierCluster> out(static_cast<size_t>(segments));
  for (size_t i = 0; i < cluster.cells.size(); ++i) {
    const double t =
        (cluster.cell_centers[i] - cluster.centroid).dot(cluster.principal_axis);
    int bucket = static_cast<int>(std::floor((t - lo) / width));
    bucket = std::clamp(bucket, 0, segments - 1);
    out[static_cast<size_t>(bucket)].cells.push_back(cluster.cells[i]);
    out[static_cast<size_t>(bucket)].cell_centers.push_back(
        cluster.cell_centers[i]);
  }

  std::vector<FrontierCluster> result;
  for (FrontierCluster& seg : out) {
    if (seg.cells.empty()) continue;
    seg.unknown_dir = cluster.unknown_dir;  // local interface direction
    recompute_stats(seg);
    seg.index = static_cast<int>(result.size());
    result.push_back(std::move(seg));
  }
  return result;
}

std::array<Vec3, 4> cluster_corners(const FrontierCluster& cluster,
                                    double layer_height,
                                    double layer_spacing) {
  const Vec2 e = cluster.principal_axis * (cluster.length / 2.0);
  const double zlo = layer_height - layer_spacing / 2.0;
  const double zhi = layer_height + layer_spacing / 2.0;
  const Vec2 a = cluster.centroid - e;
  const Vec2 b = cluster.centroid + e;

  std::array<Vec3, 4> corners{Vec3{a.x, a.y, zlo}, Vec3{b.x, b.y, zlo},
                              Vec3{b.x, b.y, zhi}, Vec3{a.x, a.y, zhi}};

  // Counterclockwise from the free side: the winding normal must point away
  // from the unknown region.
  const Vec3 n = (corners[1] - corners[0]).cross(corners[3] - corners[0]);
  if (n.x * cluster.unknown_dir.x + n.y * cluster.unknown_dir.y > 0.0) {
    std::swap(corners[1], corners[3]);
  }
  return corners;
}

bool assign_viewpoint(FrontierCluster& cluster, const LayerMap& layer,
                      const FrontierParams& params) {
  const GridIndex center_cell = layer.cell_at(cluster.centroid);
  const int radius = static_cast<int>(
      std::ceil(params.viewpoint_search_radius / layer.resolution()));

  GridIndex best{};
  double best_dist = std::numeric_limits<double>::infinity();
  bool found = false;
  GridIndex fallback{};
  double fallback_dist = std::numeric_limits<double>::infinity();
  bool have_fallback = false;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      const GridIndex c{center_cell.ix + dx, center_cell.iy + dy};
      if (!layer.in_bounds(c) || layer.occ(c) != Occ::Free) continue;
      const double d = (layer.center(c) - cluster.centroid).norm();
      if (d > params.viewpoint_search_radius) continue;
      if (d < fallback_dist) {
        fallback_dist = d;
        fallback = c;
        have_fallback = true;
      }
      if (!has_clearance(layer, c, params.clearance_radius)) continue;
      if (d < best_dist) {
        best_dist = d;
        best = c;
        found = true;
      }
    }
  }
  if (!found) {
    // Thin free regions (e.g. a freshly probed sliver of an adjacent layer)
    // may hold no cell with full clearance; the nearest free cell still
    // makes a workable observation point.
    if (!have_fallback) return false;
    best = fallback;
  }

  const Vec2 at = layer.center(best);
  cluster.viewpoint = {at.x, at.y, layer.height()};
  const Vec2 to_cluster = cluster.centroid - at;
  cluster.viewpoint_yaw = (to_cluster.norm() > 1e-9)
                              ? std::atan2(to_cluster.y, to_cluster.x)
                              : 0.0;
  cluster.has_viewpoint = true;
  return true;
}

std::vector<FrontierCluster> build_frontiers(const LayerMap& layer,
                                             const FrontierParams& params,
                                             double layer_spacing) {
  std::vector<FrontierCluster> out;
  for (const FrontierCluster& raw : detect_frontiers(layer)) {
    for (FrontierCluster& seg : split_cluster(raw, params.max_length)) {
      seg.corners = cluster_corners(seg, layer.height(), layer_spacing);
      if (!assign_viewpoint(seg, layer, params)) continue;
      seg.index = static_cast<int>(out.size());
      out.push_back(std::move(seg));
    }
  }
  return out;
}

}  // namespace anchornav
