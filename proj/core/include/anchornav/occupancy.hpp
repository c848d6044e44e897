// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "anchornav/geometry.hpp"

namespace anchornav {

enum class Occ : int8_t { Unknown = -1, Free = 0, Occupied = 1 };

struct GridIndex {
  int ix = 0;
  int iy = 0;

  bool operator==(const GridIndex&) const = default;
};

/// One horizontal occupancy layer: a dense 2D grid of {-1, 0, 1} values at a
/// fixed height. Cell (0,0)'s lower-left corner sits at `origin`; a metric
/// point on a cell edge belongs to the higher-index cell (floor division).
class LayerMap {
 public:
  LayerMap() = default;
  LayerMap(double height, double resolution, Vec2 origin, int size_x,
           int size_y, Occ fill = Occ::Unknown);

  double height() const { return height_; }
  double resolution() const { return resolution_; }
  Vec2 origin() const { return origin_; }
  int size_x() const { return size_x_; }
  int size_y() const { return size_y_; }
  size_t cell_count() const { return cells_.size(); }

  bool in_bounds(GridIndex c) const {
    return c.ix >= 0 && c.ix < size_x_ && c.iy >= 0 && c.iy < size_y_;
  }
  bool contains_point(Vec2 p) const { return in_bounds(cell_at(p)); }

  /// Stored value at `c`. Throws OutOfBounds.
  Occ occ(GridIndex c) const;
  void set(GridIndex c, Occ value);

  GridIndex cell_at(Vec2 p) const {
    return {static_cast<int>(std::floor((p.x - origin_.x) / resolution_)),
            static_cast<int>(std::floor((p.y - origin_.y) / resolution_))};
  }
  Vec2 center(GridIndex c) const {
    return {origin_.x + (c.ix + 0.5) * resolution_,
            origin_.y + (c.iy + 0.5) * resolution_};
  }

  const std::vector<int8_t>& cells() const { return cells_; }
  std::vector<int8_t>& cells() { return cells_; }

 private:
  size_t offset(GridIndex c) const {
    return static_cast<size_t>(c.iy) * static_cast<size_t>(size_x_) +
           static_cast<size_t>(c.ix);
  }

  double height_ = 0.0;
  double resolution_ = 0.1;
  Vec2 origin_;
  int size_x_ = 0;
  int size_y_ = 0;
  std::vector<int8_t> cells_;
};

/// Stack of layers sharing resolution, origin and dimensions, sorted by
/// height with uniform spacing.
struct MultiLayerMap {
  std::vector<LayerMap> layers;
  double layer_spacing = 1.0;

  bool consistent(double tol = 1e-9) const;
  /// Index of the layer whose height is nearest to z (clamped to range).
  int layer_of_height(double z) const;
  /// Same grid shape but every cell Unknown (an agent's initial belief).
  MultiLayerMap blank_copy() const;
};

/// Ordered 8-connected cell sequence starting at `origin` heading `theta`,
/// truncated at the map boundary or after `max_cells` cells.
std::vector<GridIndex> bresenham_ray(const LayerMap& layer, GridIndex origin,
                                     double theta, int max_cells);

/// Bresenham cells from a to b inclusive (both must be in bounds).
std::vector<GridIndex> bresenham_between(GridIndex a, GridIndex b);

enum class HitKind { Occupied, UnknownBoundary, RangeLimit, KnownFree };

/// Which cell along a ray counts as the hit.
/// FirstInformative: first Occupied or Unknown cell, origin excluded.
/// FirstKnown: first Free or Occupied cell, origin included (literal
/// selection rule, degenerates to the origin in explored free space).
enum class HitRule { FirstInformative, FirstKnown };

struct RayHit {
  Vec2 point;      // center of the hit cell
  GridIndex cell;
  HitKind kind = HitKind::RangeLimit;
};

/// Walk the discrete ray from `viewpoint` and return the hit point.
/// Cells whose center lies farther than `range` from the viewpoint are out of
/// range; if no cell qualifies the last in-range cell is returned with kind
/// RangeLimit. Throws OutOfBounds when the viewpoint is outside the map.
RayHit cast_hit(const LayerMap& layer, Vec2 viewpoint, double theta,
                double range, HitRule rule = HitRule::FirstInformative);

/// Simulated 360-degree range sensing: update `belief` from `world` along
/// `n_rays` uniformly spaced azimuths. Cells before the first ground-truth
/// occupied cell become Free, that cell becomes Occupied, cells beyond
/// `range` stay untouched. Throws OutOfBounds when the sensor is outside.
void raycast_update(LayerMap& belief, const Pose& sensor,
                    const LayerMap& world, int n_rays, double range);

/// True when no Occupied/Unknown cell center (or out-of-map cell) lies within
/// `radius` of the center of `cell`.
bool has_clearance(const LayerMap& layer, GridIndex cell, double radius);

/// Geodesic distances over Free cells, 8-connected (diagonal cost sqrt(2)).
struct DistanceField {
  int size_x = 0;
  int size_y = 0;
  std::vector<double> dist;  // +inf where unreachable

  double at(GridIndex c) const {
    return dist[static_cast<size_t>(c.iy) * static_cast<size_t>(size_x) +
                static_cast<size_t>(c.ix)];
  }
};

DistanceField geodesic_field(const LayerMap& layer, GridIndex source);

/// Geodesic distances across the whole layer stack: 8-connected in-plane,
/// plus vertical edges between Free cells of adjacent layers.
std::vector<DistanceField> multilayer_geodesic_field(const MultiLayerMap& m,
                                                     int source_layer,
                                                     GridIndex source);

}  // namespace anchornav
