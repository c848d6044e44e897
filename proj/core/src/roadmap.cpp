// SPDX-License-Identifier: Apache-2.0

#include "anchornav/roadmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace anchornav {

const char* to_string(VertexSource s) {
  switch (s) {
    case VertexSource::Start: return "start";
    case VertexSource::Vlm: return "vlm";
    case VertexSource::Geo: return "geo";
    case VertexSource::Switch: return "switch";
  }
  return "unknown";
}

int RoadmapGraph::add_vertex(const Pose& pose, const FovCap& cap,
                             VertexSource source, int step, bool visited) {
  const int id = static_cast<int>(vertices_.size());
  vertices_.push_back({id, step, pose, cap, source, visited});
  return id;
}

void RoadmapGraph::append_step(const HyperEdge& edge) {
  auto check = [this](int id, const char* what) {
    if (id < 0 || id >= static_cast<int>(vertices_.size())) {
      throw DanglingReference(std::string("append_step: ") + what +
                              " id " + std::to_string(id) + " unknown");
    }
  };
  check(edge.prev, "prev");
  check(edge.chosen, "chosen");
  if (edge.vlm_candidate) check(*edge.vlm_candidate, "vlm candidate");
  if (edge.geo_candidate) check(*edge.geo_candidate, "geo candidate");
  if (edge.switch_candidate) check(*edge.switch_candidate, "switch candidate");

  edges_.push_back(edge);
  vertices_[static_cast<size_t>(edge.chosen)].visited = true;
}

const RoadmapVertex& RoadmapGraph::vertex(int id) const {
  if (id < 0 || id >= static_cast<int>(vertices_.size())) {
    throw DanglingReference("vertex id " + std::to_string(id) + " unknown");
  }
  return vertices_[static_cast<size_t>(id)];
}

RoadmapVertex& RoadmapGraph::vertex(int id) {
  if (id < 0 || id >= static_cast<int>(vertices_.size())) {
    throw DanglingReference("vertex id " + std::to_string(id) + " unknown");
  }
  return vertices_[static_cast<size_t>(id)];
}

std::vector<int> k_nearest_visited(const RoadmapGraph& graph, Vec3 position,
                                   int k) {
  std::vector<std::pair<double, int>> visited;
  for (const RoadmapVertex& v : graph.vertices()) {
    if (v.visited) visited.emplace_back((v.pose.position - position).norm(), v.id);
  }
  std::sort(visited.begin(), visited.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second < b.second;
  });
  std::vector<int> out;
  for (size_t i = 0; i < visited.size() && static_cast<int>(i) < k; ++i) {
    out.push_back(visited[i].second);
  }
  return out;
}

bool visibility_indicator(const Vec3& hit, const RoadmapGraph& graph,
                          const std::vector<int>& neighbors) {
  for (const int id : neighbors) {
    const RoadmapVertex& v = graph.vertex(id);
    if (fov_contains(v.pose, hit, v.cap)) return true;
  }
  return false;
}

double information_gain(const Pose& candidate, const LayerMap& layer,
                        const RoadmapGraph& graph,
                        const std::vector<int>& neighbors, const FovCap& cap,
                        int n_rays, bool full_circle, HitRule rule) {
  if (!layer.contains_point(candidate.position.xy())) {
    throw OutOfBounds("information_gain: candidate outside layer");
  }
  if (n_rays <= 0) return 0.0;

  double unseen = 0.0;
  for (int m = 0; m < n_rays; ++m) {
    double theta;
    if (full_circle) {
      theta = 2.0 * kPi * m / n_rays;
    } else {
      // Midpoint sampling across the cap's angular width.
      const double span = 2.0 * cap.half_angle;
      theta = candidate.yaw - cap.half_angle + span * (m + 0.5) / n_rays;
    }
    const RayHit hit =
        cast_hit(layer, candidate.position.xy(), theta, cap.radius, rule);
    const Vec3 hit3{hit.point.x, hit.point.y, layer.height()};
    if (!visibility_indicator(hit3, graph, neighbors)) unseen += 1.0;
  }
  return unseen / n_rays;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("logit: p must lie strictly inside (0, 1)");
  }
  return std::log(p / (1.0 - p));
}

double gain_confidence(double gain, double alpha, double tau) {
  return sigmoid(alpha * (gain - tau));
}

double validate_candidate(double p_gain, double confidence, double lambda) {
  return sigmoid(logit(p_gain) + lambda * logit(confidence));
}

int select_goal(std::optional<int> vlm_vertex, int geo_vertex, double p_valid,
                double valid_threshold) {
  if (vlm_vertex && p_valid > valid_threshold) return *vlm_vertex;
  return geo_vertex;
}

double select_yaw(double confidence, double traj_yaw, double current_yaw,
                  double yaw_confidence_threshold,
                  double yaw_deviation_threshold) {
  const double deviation = std::abs(wrap_angle(traj_yaw - current_yaw));
  if (confidence > yaw_confidence_threshold &&
      deviation > yaw_deviation_threshold) {
    return current_yaw;
  }
  return traj_yaw;
}

GeoCandidate geometric_candidate(const MultiLayerMap& belief,
                                 int current_layer, const Pose& pose,
                                 const RoadmapGraph& graph,
                                 const ValidationParams& vp, const FovCap& cap,
                                 const FrontierParams& fp) {
  const int nl = static_cast<int>(belief.layers.size());
  const LayerMap& here = belief.layers[static_cast<size_t>(current_layer)];
  const GridIndex start = here.cell_at(pose.position.xy());

  std::vector<DistanceField> dist;
  bool dist_ready = false;
  auto distance_to = [&](int layer, Vec2 at) {
    if (!dist_ready) {
      dist = multilayer_geodesic_field(belief, current_layer, start);
      dist_ready = true;
    }
    const GridIndex c = belief.layers[static_cast<size_t>(layer)].cell_at(at);
    if (!belief.layers[static_cast<size_t>(layer)].in_bounds(c)) {
      return std::numeric_limits<double>::infinity();
    }
    return dist[static_cast<size_t>(layer)].at(c);
  };

  // Current layer first.
  const std::vector<FrontierCluster> clusters =
      build_frontiers(here, fp, belief.layer_spacing);
  GeoCandidate best;
  bool found = false;
  for (const FrontierCluster& c : clusters) {
    const Pose vp_pose{c.viewpoint, c.viewpoint_yaw};
    const std::vector<int> neighbors =
        k_nearest_visited(graph, c.viewpoint, vp.k_nearest);
    double gain = 0.0;
    try {
      gain = information_gain(vp_pose, here, graph, neighbors, cap, vp.n_rays,
                              vp.full_circle_rays, vp.hit_rule);
    } catch (const OutOfBounds&) {
      continue;
    }
    const double d = distance_to(current_layer, c.viewpoint.xy());
    if (!std::isfinite(d)) continue;
    const double score = gain / (1.0 + d);
    if (!found || score > best.score) {
      best = {vp_pose, current_layer, c.index, false, score};
      found = true;
    }
  }
  if (found) return best;

  // No frontier on this layer: ladder toward an adjacent layer that still
  // has some. Straight-line motion cannot cut diagonally through a ceiling,
  // so the fallback is two-phase: walk to the nearest open column, then
  // ascend or descend through it.
  for (const int delta : {1, -1}) {
    const int adj = current_layer + delta;
    if (adj < 0 || adj >= nl) continue;
    const LayerMap& other = belief.layers[static_cast<size_t>(adj)];
    if (build_frontiers(other, fp, belief.layer_spacing).empty()) continue;

    const int rc =
        static_cast<int>(std::ceil(fp.clearance_radius / here.resolution()));
    GridIndex best_cell{};
    double best_dist = std::numeric_limits<double>::infinity();
    // First pass wants a column wide enough to fly through; if the belief's
    // knowledge of the other layer is still a thin probed band, settle for
    // any single free column and walk there to widen the probe.
    for (const bool need_disc : {true, false}) {
      for (int iy = 0; iy < here.size_y(); ++iy) {
        for (int ix = 0; ix < here.size_x(); ++ix) {
          const GridIndex c{ix, iy};
          if (here.occ(c) != Occ::Free || other.occ(c) != Occ::Free) continue;
          bool column_clear = true;
          for (int dy = -rc; dy <= rc && column_clear && need_disc; ++dy) {
            for (int dx = -rc; dx <= rc && column_clear; ++dx) {
              if (std::hypot(dx, dy) * here.resolution() >
                  fp.clearance_radius) {
                continue;
              }
              const GridIndex n{ix + dx, iy + dy};
              if (!here.in_bounds(n) || here.occ(n) != Occ::Free ||
                  other.occ(n) != Occ::Free) {
                column_clear = false;
              }
            }
          }
          if (!column_clear) continue;
          const double d = distance_to(current_layer, here.center(c));
          if (d < best_dist) {
            best_dist = d;
            best_cell = c;
          }
        }
      }
      if (std::isfinite(best_dist)) break;
    }
    if (!std::isfinite(best_dist)) continue;

    const Vec2 at = here.center(best_cell);
    if (here.cell_at(pose.position.xy()) == best_cell) {
      // Standing in the open column: the candidate is the vertical hop.
      return {{{pose.position.x, pose.position.y, other.height()}, pose.yaw},
              adj,
              -1,
              false,
              0.0};
    }
    return {{{at.x, at.y, here.height()},
             yaw_from(pose.position, {at.x, at.y, here.height()})},
            current_layer,
            -1,
            false,
            0.0};
  }

  // Fully explored (or unreachable frontiers): rotate in place to force a
  // fresh prompt from a new heading.
  return {{pose.position, wrap_angle(pose.yaw + kPi / 2.0)},
          current_layer,
          -1,
          true,
          0.0};
}

}  // namespace anchornav
