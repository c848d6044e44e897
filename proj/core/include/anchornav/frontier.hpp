// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <vector>

#include "anchornav/occupancy.hpp"

namespace anchornav {

/// A connected group of frontier cells (Free cells bordering Unknown space)
/// reduced to a planar segment: centroid, principal axis and extent, plus the
/// vertical rectangle corners and a reachable observation point.
struct FrontierCluster {
  std::vector<GridIndex> cells;
  std::vector<Vec2> cell_centers;  // kept alongside indices so splits stay pure
  Vec2 centroid;
  Vec2 principal_axis{1.0, 0.0};  // unit, canonical sign
  double length = 0.0;            // extent of centers projected on the axis
  Vec2 unknown_dir;               // mean direction toward unknown neighbors
  std::array<Vec3, 4> corners{};
  Vec3 viewpoint;
  double viewpoint_yaw = 0.0;
  bool has_viewpoint = false;
  int index = 0;
};

struct FrontierParams {
  double max_length = 3.0;              // segment length cap, meters
  double clearance_radius = 0.6;        // viewpoint clearance, meters
  double viewpoint_search_radius = 3.0; // how far from the centroid to look
};

/// Frontier cells are Free cells with at least one Unknown 4-neighbor;
/// clusters are their 8-connected components. Axis/length come from the 2D
/// covariance of the cell centers (ties and degenerate blobs resolve to +X).
std::vector<FrontierCluster> detect_frontiers(const LayerMap& layer);

/// Partition a cluster into ceil(length / max_length) equal-width intervals
/// along its principal axis. Returns {cluster} unchanged when it already
/// fits. Empty intervals are dropped; every statistic is recomputed.
std::vector<FrontierCluster> split_cluster(const FrontierCluster& cluster,
                                           double max_length);

/// Corner points of the vertical frontier rectangle: centroid +/- (length/2)
/// along the axis, at layer_height +/- layer_spacing/2, ordered
/// counterclockwise as seen from the free side.
std::array<Vec3, 4> cluster_corners(const FrontierCluster& cluster,
                                    double layer_height, double layer_spacing);

/// Pick the Free cell nearest the centroid that keeps `clearance_radius` to
/// every non-Free cell, looking outward up to the search radius; the
/// viewpoint faces the cluster. Returns false when no such cell exists.
bool assign_viewpoint(FrontierCluster& cluster, const LayerMap& layer,
                      const FrontierParams& params);

/// detect -> split -> corners -> viewpoints, dropping clusters without a
/// reachable viewpoint; indices are assigned in stable detection order.
std::vector<FrontierCluster> build_frontiers(const LayerMap& layer,
                                             const FrontierParams& params,
                                             double layer_spacing);

}  // namespace anchornav
