// SPDX-License-Identifier: Apache-2.0

#include "anchornav/occupancy.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace anchornav {

LayerMap::LayerMap(double height, double resolution, Vec2 origin, int size_x,
                   int size_y, Occ fill)
    : height_(height),
      resolution_(resolution),
      origin_(origin),
      size_x_(size_x),
      size_y_(size_y),
      cells_(static_cast<size_t>(size_x) * static_cast<size_t>(size_y),
             static_cast<int8_t>(fill)) {
  if (resolution <= 0.0) throw std::invalid_argument("resolution must be > 0");
  if (size_x <= 0 || size_y <= 0)
    throw std::invalid_argument("layer dimensions must be positive");
}

Occ LayerMap::occ(GridIndex c) const {
  if (!in_bounds(c)) {
    throw OutOfBounds("occ: cell (" + std::to_string(c.ix) + ", " +
                      std::to_string(c.iy) + ") outside layer");
  }
  return static_cast<Occ>(cells_[offset(c)]);
}

void LayerMap::set(GridIndex c, Occ value) {
  if (!in_bounds(c)) {
    throw OutOfBounds("set: cell (" + std::to_string(c.ix) + ", " +
                      std::to_string(c.iy) + ") outside layer");
  }
  cells_[offset(c)] = static_cast<int8_t>(value);
}

bool MultiLayerMap::consistent(double tol) const {
  if (layers.empty()) return false;
  for (size_t i = 0; i < layers.size(); ++i) {
    const LayerMap& l = layers[i];
    if (l.size_x() != layers[0].size_x() || l.size_y() != layers[0].size_y())
      return false;
    if (std::abs(l.resolution() - layers[0].resolution()) > tol) return false;
    if (std::abs(l.origin().x - layers[0].origin().x) > tol ||
        std::abs(l.origin().y - layers[0].origin().y) > tol)
      return false;
    if (i > 0 &&
        std::abs(l.height() - layers[i - 1].height() - layer_spacing) > tol)
      return false;
  }
  return true;
}

int MultiLayerMap::layer_of_height(double z) const {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < layers.size(); ++i) {
    const double d = std::abs(layers[i].height() - z);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

MultiLayerMap MultiLayerMap::blank_copy() const {
  MultiLayerMap out;
  out.layer_spacing = layer_spacing;
  out.layers.reserve(layers.size());
  for (const LayerMap& l : layers) {
    out.layers.emplace_back(l.height(), l.resolution(), l.origin(), l.size_x(),
                            l.size_y(), Occ::Unknown);
  }
  return out;
}

std::vector<GridIndex> bresenham_ray(const LayerMap& layer, GridIndex origin,
                                     double theta, int max_cells) {
  std::vector<GridIndex> cells;
  if (max_cells <= 0 || !layer.in_bounds(origin)) return cells;

  // Endpoint far enough that truncation by count happens first in any
  // direction (diagonal lines advance ~0.7 cells per step along each axis).
  const double reach = 2.0 * max_cells + 2.0;
  const GridIndex target{
      origin.ix + static_cast<int>(std::lround(std::cos(theta) * reach)),
      origin.iy + static_cast<int>(std::lround(std::sin(theta) * reach))};

  int dx = target.ix - origin.ix;
  int dy = target.iy - origin.iy;
  const int step_x = (dx < 0) ? -1 : 1;
  const int step_y = (dy < 0) ? -1 : 1;
  dx = std::abs(dx) * 2;
  dy = std::abs(dy) * 2;

  int x = origin.ix;
  int y = origin.iy;
  cells.push_back(origin);

  auto push = [&](int cx, int cy) -> bool {
    const GridIndex c{cx, cy};
    if (!layer.in_bounds(c) ||
        cells.size() >= static_cast<size_t>(max_cells)) {
      return false;
    }
    cells.push_back(c);
    return true;
  };

  if (dx > dy) {
    int err = dy - dx / 2;
    while (x != target.ix) {
      if (err >= 0) {
        y += step_y;
        err -= dx;
      }
      x += step_x;
      err += dy;
      if (!push(x, y)) break;
    }
  } else {
    int err = dx - dy / 2;
    while (y != target.iy) {
      if (err >= 0) {
        x += step_x;
        err -= dy;
      }
      y += step_y;
      err += dx;
      if (!push(x, y)) break;
    }
  }
  return cells;
}

std::vector<GridIndex> bresenham_between(GridIndex a, GridIndex b) {
  std::vector<GridIndex> cells;
  int dx = b.ix - a.ix;
  int dy = b.iy - a.iy;
  const int step_x = (dx < 0) ? -1 : 1;
  const int step_y = (dy < 0) ? -1 : 1;
  dx = std::abs(dx) * 2;
  dy = std::abs(dy) * 2;

  int x = a.ix;
  int y = a.iy;
  cells.push_back(a);
  if (dx > dy) {
    int err = dy - dx / 2;
    while (x != b.ix) {
      if (err >= 0) {
        y += step_y;
        err -= dx;
      }
      x += step_x;
      err += dy;
      cells.push_back({x, y});
    }
  } else {
    int err = dx - dy / 2;
    while (y != b.iy) {
      if (err >= 0) {
        x += step_x;
        err -= dy;
      }
      y += step_y;
      err += dx;
      cells.push_back({x, y});
    }
  }
  return cells;
}

RayHit cast_hit(const LayerMap& layer, Vec2 viewpoint, double theta,
                double range, HitRule rule) {
  const GridIndex origin = layer.cell_at(viewpoint);
  if (!layer.in_bounds(origin)) {
    throw OutOfBounds("cast_hit: viewpoint outside layer");
  }

  const int max_cells =
      static_cast<int>(std::ceil(range / layer.resolution())) + 2;
  const std::vector<GridIndex> ray =
      bresenham_ray(layer, origin, theta, max_cells);

  RayHit last{layer.center(origin), origin, HitKind::RangeLimit};
  for (size_t i = 0; i < ray.size(); ++i) {
    const GridIndex c = ray[i];
    const Vec2 center = layer.center(c);
    if ((center - viewpoint).norm() > range) break;
    const Occ v = layer.occ(c);
    if (rule == HitRule::FirstInformative) {
      if (i == 0) {
        last = {center, c, HitKind::RangeLimit};
        continue;
      }
      if (v == Occ::Occupied) return {center, c, HitKind::Occupied};
      if (v == Occ::Unknown) return {center, c, HitKind::UnknownBoundary};
    } else {
      if (v == Occ::Occupied) return {center, c, HitKind::Occupied};
      if (v == Occ::Free) return {center, c, HitKind::KnownFree};
    }
    last = {center, c, HitKind::RangeLimit};
  }
  return last;
}

void raycast_update(LayerMap& belief, const Pose& sensor,
                    const LayerMap& world, int n_rays, double range) {
  const Vec2 at = sensor.position.xy();
  const GridIndex origin = world.cell_at(at);
  if (!world.in_bounds(origin) || !belief.in_bounds(origin)) {
    throw OutOfBounds("raycast_update: sensor outside map");
  }

  const int max_cells =
      static_cast<int>(std::ceil(range / world.resolution())) + 2;
  for (int r = 0; r < n_rays; ++r) {
    const double theta = 2.0 * kPi * r / n_rays;
    for (const GridIndex c : bresenham_ray(world, origin, theta, max_cells)) {
      if ((world.center(c) - at).norm() > range) break;
      const Occ truth = world.occ(c);
      if (truth == Occ::Occupied) {
        belief.set(c, Occ::Occupied);
        break;
      }
      if (truth == Occ::Unknown) break;  // nothing behind an unmodeled region
      belief.set(c, Occ::Free);
    }
  }
}

bool has_clearance(const LayerMap& layer, GridIndex cell, double radius) {
  const int r = static_cast<int>(std::ceil(radius / layer.resolution()));
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      const double d = std::hypot(dx, dy) * layer.resolution();
      if (d >= radius) continue;
      const GridIndex n{cell.ix + dx, cell.iy + dy};
      if (!layer.in_bounds(n)) return false;
      if (layer.occ(n) != Occ::Free) return false;
    }
  }
  return true;
}

DistanceField geodesic_field(const LayerMap& layer, GridIndex source) {
  const double inf = std::numeric_limits<double>::infinity();
  DistanceField f{layer.size_x(), layer.size_y(),
                  std::vector<double>(layer.cell_count(), inf)};
  if (!layer.in_bounds(source) || layer.occ(source) != Occ::Free) {
    if (layer.in_bounds(source)) {
      f.dist[static_cast<size_t>(source.iy) * layer.size_x() + source.ix] = 0.0;
    }
    return f;
  }

  const double res = layer.resolution();
  const double diag = res * std::sqrt(2.0);
  auto idx = [&](GridIndex c) {
    return static_cast<size_t>(c.iy) * static_cast<size_t>(layer.size_x()) +
           static_cast<size_t>(c.ix);
  };

  std::priority_queue<std::pair<double, size_t>,
                      std::vector<std::pair<double, size_t>>, std::greater<>>
      pq;
  f.dist[idx(source)] = 0.0;
  pq.emplace(0.0, idx(source));

  while (!pq.empty()) {
    const auto [d, i] = pq.top();
    pq.pop();
    if (d > f.dist[i]) continue;
    const GridIndex c{static_cast<int>(i % layer.size_x()),
                      static_cast<int>(i / layer.size_x())};
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const GridIndex n{c.ix + dx, c.iy + dy};
        if (!layer.in_bounds(n) || layer.occ(n) != Occ::Free) continue;
        const double step = (dx != 0 && dy != 0) ? diag : res;
        const double nd = d + step;
        if (nd < f.dist[idx(n)]) {
          f.dist[idx(n)] = nd;
          pq.emplace(nd, idx(n));
        }
      }
    }
  }
  return f;
}

std::vector<DistanceField> multilayer_geodesic_field(const MultiLayerMap& m,
                                                     int source_layer,
                                                     GridIndex source) {
  const double inf = std::numeric_limits<double>::infinity();
  const int nl = static_cast<int>(m.layers.size());
  const int sx = m.layers[0].size_x();
  const int sy = m.layers[0].size_y();
  const size_t per_layer = static_cast<size_t>(sx) * static_cast<size_t>(sy);

  std::vector<DistanceField> fields(
      m.layers.size(),
      DistanceField{sx, sy, std::vector<double>(per_layer, inf)});
  if (source_layer < 0 || source_layer >= nl ||
      !m.layers[source_layer].in_bounds(source)) {
    return fields;
  }

  const double res = m.layers[0].resolution();
  const double diag = res * std::sqrt(2.0);
  auto flat = [&](int layer, GridIndex c) {
    return static_cast<size_t>(layer) * per_layer +
           static_cast<size_t>(c.iy) * static_cast<size_t>(sx) +
           static_cast<size_t>(c.ix);
  };
  auto dist_at = [&](size_t f) -> double& {
    return fields[f / per_layer].dist[f % per_layer];
  };

  std::priority_queue<std::pair<double, size_t>,
                      std::vector<std::pair<double, size_t>>, std::greater<>>
      pq;
  if (m.layers[source_layer].occ(source) == Occ::Free) {
    dist_at(flat(source_layer, source)) = 0.0;
    pq.emplace(0.0, flat(source_layer, source));
  }

  while (!pq.empty()) {
    const auto [d, i] = pq.top();
    pq.pop();
    if (d > dist_at(i)) continue;
    const int layer = static_cast<int>(i / per_layer);
    const size_t rem = i % per_layer;
    const GridIndex c{static_cast<int>(rem % sx), static_cast<int>(rem / sx)};

    auto relax = [&](int nlayer, GridIndex n, double step) {
      if (!m.layers[nlayer].in_bounds(n) ||
          m.layers[nlayer].occ(n) != Occ::Free)
        return;
      const size_t ni = flat(nlayer, n);
      if (d + step < dist_at(ni)) {
        dist_at(ni) = d + step;
        pq.emplace(d + step, ni);
      }
    };

    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        relax(layer, {c.ix + dx, c.iy + dy},
              (dx != 0 && dy != 0) ? diag : res);
      }
    }
    if (layer + 1 < nl) relax(layer + 1, c, m.layer_spacing);
    if (layer - 1 >= 0) relax(layer - 1, c, m.layer_spacing);
  }
  return fields;
}

}  // namespace anchornav
