// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <vector>

#include "anchornav/frontier.hpp"
#include "anchornav/geometry.hpp"
#include "anchornav/occupancy.hpp"

namespace anchornav {

enum class VertexSource { Start, Vlm, Geo, Switch };

const char* to_string(VertexSource s);

/// A recorded decision state: where the agent stood (or a candidate stood)
/// and what its camera cap would cover.
struct RoadmapVertex {
  int id = 0;
  int step = 0;
  Pose pose;
  FovCap cap;
  VertexSource source = VertexSource::Start;
  bool visited = false;
};

struct ValidationRecord {
  double gain = 0.0;        // G
  double p_gain = 0.0;      // sigma(alpha (G - tau_G))
  double confidence = 0.0;  // clipped detection confidence
  double p_valid = 0.0;     // log-odds fusion of the two
};

/// One decision step: the previous vertex, the candidate set, the validation
/// numbers and the vertex that was actually adopted.
struct HyperEdge {
  int prev = -1;
  int chosen = -1;
  std::optional<int> vlm_candidate;
  std::optional<int> geo_candidate;
  std::optional<int> switch_candidate;
  std::optional<ValidationRecord> validation;
};

class RoadmapGraph {
 public:
  int add_vertex(const Pose& pose, const FovCap& cap, VertexSource source,
                 int step, bool visited = false);
  /// Appends the edge and marks its chosen vertex visited.
  /// Throws DanglingReference when any referenced id does not exist.
  void append_step(const HyperEdge& edge);

  const RoadmapVertex& vertex(int id) const;
  RoadmapVertex& vertex(int id);
  const std::vector<RoadmapVertex>& vertices() const { return vertices_; }
  const std::vector<HyperEdge>& edges() const { return edges_; }
  size_t size() const { return vertices_.size(); }

 private:
  std::vector<RoadmapVertex> vertices_;
  std::vector<HyperEdge> edges_;
};

/// Everything the candidate-validation pipeline is tuned by.
struct ValidationParams {
  int k_nearest = 5;                  // K
  double alpha = 10.0;                // logistic slope
  double gain_threshold = 0.3;        // tau_G
  double lambda = 1.0;                // detection-confidence weight
  double valid_threshold = 0.5;       // tau_valid
  double yaw_confidence_threshold = 0.8;        // tau_yaw
  double yaw_deviation_threshold = deg2rad(30.0);  // tau_dpsi
  int n_rays = 72;                    // M
  double epsilon = 1e-3;              // confidence clip margin
  bool full_circle_rays = false;      // rays span the cap by default
  HitRule hit_rule = HitRule::FirstInformative;
};

/// Up to k visited vertices nearest to `position` (Euclidean), ties broken
/// by lower id.
std::vector<int> k_nearest_visited(const RoadmapGraph& graph, Vec3 position,
                                   int k);

/// 1 iff the hit point lies inside any neighbor's cap.
bool visibility_indicator(const Vec3& hit, const RoadmapGraph& graph,
                          const std::vector<int>& neighbors);

/// Fraction of the candidate's raycast hit points not covered by the
/// neighbors' caps. Rays span the cap's angular width centered on the
/// candidate yaw (or the full circle when configured); rays that leave the
/// map still contribute their boundary hit. Throws OutOfBounds when the
/// candidate stands outside the layer.
double information_gain(const Pose& candidate, const LayerMap& layer,
                        const RoadmapGraph& graph,
                        const std::vector<int>& neighbors, const FovCap& cap,
                        int n_rays, bool full_circle = false,
                        HitRule rule = HitRule::FirstInformative);

double sigmoid(double x);
/// ln(p / (1-p)). Throws DomainError unless p lies strictly inside (0, 1).
double logit(double p);

/// sigma(alpha (gain - tau)).
double gain_confidence(double gain, double alpha, double tau);

/// sigma(logit(p_gain) + lambda logit(confidence)).
/// Throws DomainError when either probability is 0 or 1 exactly.
double validate_candidate(double p_gain, double confidence, double lambda);

/// The proposed vertex wins only with P_valid strictly above the threshold;
/// otherwise the geometric candidate is adopted.
int select_goal(std::optional<int> vlm_vertex, int geo_vertex, double p_valid,
                double valid_threshold);

/// Keep the current yaw when confidence is high and the trajectory heading
/// deviates strongly; otherwise align with the trajectory heading.
double select_yaw(double confidence, double traj_yaw, double current_yaw,
                  double yaw_confidence_threshold,
                  double yaw_deviation_threshold);

struct GeoCandidate {
  Pose pose;
  int layer = 0;
  int cluster_index = -1;
  bool rotate_in_place = false;
  double score = 0.0;
};

/// Geometry-based fallback: among frontier viewpoints on the current layer
/// (adjacent layers only when the current one has none), maximize
/// gain / (1 + geodesic distance); ties go to the lower cluster index. With
/// no frontiers anywhere the candidate is a +90 degree rotation in place.
GeoCandidate geometric_candidate(const MultiLayerMap& belief,
                                 int current_layer, const Pose& pose,
                                 const RoadmapGraph& graph,
                                 const ValidationParams& vp, const FovCap& cap,
                                 const FrontierParams& fp);

}  // namespace anchornav
