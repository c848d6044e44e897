// SPDX-License-Identifier: Apache-2.0

#include "anchornav/anchors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace anchornav {

int adaptive_cardinality(int n_obs, int obs_threshold, int m_nominal,
                         int m_max) {
  if (m_nominal < 2 || m_max < m_nominal) {
    throw std::invalid_argument("adaptive_cardinality: need m_max >= m_nominal >= 2");
  }
  return n_obs < obs_threshold ? m_max : m_nominal;
}

std::vector<double> yaw_sample_set(double phi_left, double phi_right,
                                   int m_phi) {
  if (m_phi < 2) throw std::invalid_argument("yaw_sample_set: m_phi >= 2");
  if (phi_left < phi_right) {
    throw std::invalid_argument("yaw_sample_set: phi_left >= phi_right");
  }
  std::vector<double> samples;
  samples.reserve(static_cast<size_t>(m_phi));
  const double span = phi_left - phi_right;
  for (int l = 1; l <= m_phi; ++l) {
    samples.push_back(phi_left - (l - 1.0) / (m_phi - 1.0) * span);
  }
  return samples;
}

namespace {

std::optional<Vec2> project_if_visible(const Pose& cam_pose, const Vec3& p,
                                       const Intrinsics& k) {
  const Vec3 cam = camera_point(cam_pose, p);
  if (cam.z <= 0.0) return std::nullopt;
  const PixelPoint px = project_to_pixel(cam, k);
  if (!px.inside(k)) return std::nullopt;
  return Vec2{px.u, px.v};
}

}  // namespace

std::vector<Anchor> frontier_anchors(const std::vector<FrontierCluster>& clusters,
                                     const Pose& cam_pose, const Intrinsics& k,
                                     const FovCap& cap) {
  std::vector<Anchor> anchors;
  for (const FrontierCluster& c : clusters) {
    if (!c.has_viewpoint) continue;
    std::array<Vec2, 4> pixels{};
    bool all_visible = true;
    for (size_t i = 0; i < 4; ++i) {
      const auto px = project_if_visible(cam_pose, c.corners[i], k);
      if (!px || !fov_contains(cam_pose, c.corners[i], cap)) {
        all_visible = false;
        break;
      }
      pixels[i] = *px;
    }
    if (!all_visible) continue;

    Anchor a;
    a.kind = AnchorKind::Frontier;
    a.position = c.viewpoint;
    a.yaw_hint = c.viewpoint_yaw;
    a.source_cluster = c.index;
    a.polyline = pixels;
    a.has_polyline = true;
    anchors.push_back(a);
  }
  return anchors;
}

std::vector<Anchor> target_anchors(const LayerMap& layer, const Pose& pose,
                                   const std::vector<double>& relative_yaws,
                                   double clearance_radius, double range,
                                   const Intrinsics& k) {
  std::vector<Anchor> anchors;
  const Vec2 at = pose.position.xy();
  const GridIndex origin = layer.cell_at(at);
  if (!layer.in_bounds(origin)) return anchors;

  const int max_cells =
      static_cast<int>(std::ceil(range / layer.resolution())) + 2;
  for (const double rel : relative_yaws) {
    const double theta = wrap_angle(pose.yaw + rel);
    const std::vector<GridIndex> ray =
        bresenham_ray(layer, origin, theta, max_cells);

    bool found = false;
    GridIndex best{};
    for (size_t i = 1; i < ray.size(); ++i) {
      const GridIndex c = ray[i];
      if (layer.occ(c) != Occ::Free) break;  // line of sight ends here
      if ((layer.center(c) - at).norm() > range) break;
      if (!has_clearance(layer, c, clearance_radius)) continue;
      best = c;  // walking outward, so the last qualifying cell is farthest
      found = true;
    }
    if (!found) continue;

    Anchor a;
    a.kind = AnchorKind::Target;
    const Vec2 center = layer.center(best);
    a.position = {center.x, center.y, layer.height()};
    a.yaw_hint = theta;
    a.pixel = project_if_visible(pose, a.position, k);
    anchors.push_back(a);
  }
  return anchors;
}

std::vector<Anchor> inter_layer_anchors(const MultiLayerMap& m,
                                        int current_layer, const Pose& pose,
                                        double clearance_radius,
                                        const Intrinsics& k) {
  std::vector<Anchor> anchors;
  const int nl = static_cast<int>(m.layers.size());
  if (current_layer < 0 || current_layer >= nl) return anchors;
  const LayerMap& here = m.layers[static_cast<size_t>(current_layer)];
  const GridIndex at = here.cell_at(pose.position.xy());
  if (!here.in_bounds(at)) return anchors;

  const int r =
      static_cast<int>(std::ceil(clearance_radius / here.resolution()));
  for (const int delta : {1, -1}) {
    const int target = current_layer + delta;
    if (target < 0 || target >= nl) continue;
    const LayerMap& other = m.layers[static_cast<size_t>(target)];

    bool clear = true;
    for (int dy = -r; dy <= r && clear; ++dy) {
      for (int dx = -r; dx <= r && clear; ++dx) {
        if (std::hypot(dx, dy) * here.resolution() >= clearance_radius &&
            (dx != 0 || dy != 0)) {
          continue;
        }
        const GridIndex c{at.ix + dx, at.iy + dy};
        if (!here.in_bounds(c) || here.occ(c) != Occ::Free ||
            other.occ(c) != Occ::Free) {
          clear = false;
        }
      }
    }
    if (!clear) continue;

    Anchor a;
    a.kind = AnchorKind::InterLayer;
    a.position = {pose.position.x, pose.position.y, other.height()};
    a.yaw_hint = pose.yaw;
    a.layer = target;
    a.pixel = project_if_visible(pose, a.position, k);
    anchors.push_back(a);
  }
  return anchors;
}

void number_anchors(std::vector<Anchor>& anchors) {
  for (size_t i = 0; i < anchors.size(); ++i) {
    anchors[i].index = static_cast<int>(i) + 1;
  }
}

}  // namespace anchornav
