// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <vector>

#include "anchornav/frontier.hpp"
#include "anchornav/geometry.hpp"
#include "anchornav/occupancy.hpp"

namespace anchornav {

enum class AnchorKind { Frontier, Target, InterLayer };

/// A spatially grounded decision option: a global position a policy may
/// select, plus where it lives in the annotated image.
struct Anchor {
  AnchorKind kind = AnchorKind::Target;
  int index = 0;  // dense from 1 within a frame
  Vec3 position;
  double yaw_hint = 0.0;
  std::optional<Vec2> pixel;           // single annotation point
  std::optional<int> source_cluster;   // Frontier anchors only
  int layer = 0;
  std::array<Vec2, 4> polyline{};      // projected corners, Frontier only
  bool has_polyline = false;
};

struct AnchorParams {
  double phi_left = deg2rad(60.0);    // sector bound, relative to heading
  double phi_right = -deg2rad(60.0);
  int m_nominal = 3;
  int m_max = 5;
  int obs_threshold = 2;              // frontier-scarcity threshold
  double clearance_radius = 0.6;      // meters
};

/// Everything a decision policy sees for one frame.
struct AnnotatedObservation {
  std::vector<Anchor> anchors;
  std::vector<std::array<Vec2, 4>> frontier_polylines;
  LayerMap layer_snapshot;  // the flight-altitude belief layer
  Pose camera_pose;         // viewpoint the frame was taken from
  int current_layer = 0;
  int frame_width = 0;
  int frame_height = 0;
};

/// m_max while observable frontiers are scarce (n_obs < threshold),
/// m_nominal otherwise.
int adaptive_cardinality(int n_obs, int obs_threshold, int m_nominal,
                         int m_max);

/// Uniform discretization of [phi_right, phi_left] into m_phi samples,
/// endpoints included, ordered from phi_left to phi_right.
std::vector<double> yaw_sample_set(double phi_left, double phi_right,
                                   int m_phi);

/// Frontier clusters whose four rectangle corners all project with positive
/// depth inside the image and inside the cap become anchors at their
/// viewpoints, carrying the projected corner polyline.
std::vector<Anchor> frontier_anchors(const std::vector<FrontierCluster>& clusters,
                                     const Pose& cam_pose, const Intrinsics& k,
                                     const FovCap& cap);

/// Per relative yaw: the farthest Free cell center reachable along the
/// discrete ray with line-of-sight, within `range`, keeping
/// `clearance_radius` to every non-Free cell. Yaws without a candidate are
/// omitted.
std::vector<Anchor> target_anchors(const LayerMap& layer, const Pose& pose,
                                   const std::vector<double>& relative_yaws,
                                   double clearance_radius, double range,
                                   const Intrinsics& k);

/// One anchor per adjacent layer whose vertical column at the pose (and its
/// clearance neighborhood in both layers) is entirely Free.
std::vector<Anchor> inter_layer_anchors(const MultiLayerMap& m,
                                        int current_layer, const Pose& pose,
                                        double clearance_radius,
                                        const Intrinsics& k);

/// Assign dense indices 1..N in place.
void number_anchors(std::vector<Anchor>& anchors);

}  // namespace anchornav
