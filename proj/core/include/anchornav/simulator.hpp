// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "anchornav/anchors.hpp"
#include "anchornav/frontier.hpp"
#include "anchornav/prompting.hpp"
#include "anchornav/roadmap.hpp"

namespace anchornav {

enum class Mode { TwoPointFiveD, ThreeD };

/// A navigation task: ground-truth world, start, language-described goal,
/// and the prompt budget.
struct Scenario {
  std::string name;
  Mode mode = Mode::TwoPointFiveD;
  double resolution = 0.2;
  double layer_spacing = 1.0;
  MultiLayerMap world;
  std::vector<std::vector<std::string>> ascii_layers;  // '#', '.', '?'
  Pose start;
  Vec3 goal;
  std::string goal_description;
  std::string guidelines;  // scenario-authored, passed through verbatim
  double optimal_path_length = 1.0;
  int horizon = 5;
  uint64_t seed = 0;
};

Scenario scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const Scenario& s);
Scenario load_scenario(const std::string& path);

/// All engine tuning in one place. Everything here is a config key; angles
/// are radians internally and degrees only in the JSON form.
struct SimParams {
  Intrinsics camera{330.0, 330.0, 320.0, 240.0, 640, 480};
  FovCap cap{8.0, deg2rad(60.0)};
  double sense_range = 8.0;
  int sense_rays = 720;
  double probe_radius = 2.0;  // adjacent-layer reveal ring around the pose
  double motion_step = 0.2;
  double success_radius = 3.0;
  AnchorParams anchors;
  FrontierParams frontier;
  ValidationParams validation;
  PromptTemplate prompt_template = PromptTemplate::defaults();
  double policy_timeout_seconds = 60.0;
  int policy_retries = 2;
  double mock_confidence_scale = 1.0;
  double start_jitter_radius = 0.5;      // per-seed start perturbation
  double start_jitter_yaw = deg2rad(30.0);
};

std::string params_to_json_text(const SimParams& p);
SimParams params_from_json_text(const std::string& text);

/// Live episode state; the belief map never contradicts the world on
/// Free/Occupied, only Unknown may differ.
struct EpisodeState {
  Pose pose;
  MultiLayerMap belief;
  RoadmapGraph graph;
  int prompts_used = 0;
  double path_length = 0.0;
  bool goal_observed = false;
  int current_vertex = 0;
};

enum class MotionStatus { Arrived, Blocked, NoOp, GoalReached };
enum class Outcome { Success, BudgetExhausted, PolicyFailure };

const char* to_string(MotionStatus s);
const char* to_string(Outcome o);

struct MotionResult {
  MotionStatus status = MotionStatus::NoOp;
  double traveled = 0.0;
  Pose final_pose;
};

/// 360-degree range sensing on the current layer plus a vertical column
/// probe that reveals the adjacent-layer cells around the pose.
void sense(EpisodeState& state, const MultiLayerMap& world,
           const SimParams& params);

/// Straight-line motion in equal increments (<= motion_step), sensing after
/// each one and halting before the first blocked cell. Blocked motion is a
/// result, not an error. The final yaw is taken from goal_pose. The optional
/// stop predicate is evaluated after every increment; returning true ends
/// the motion with GoalReached (the success rule is continuous: a pass
/// within the success radius counts even between decisions).
MotionResult move_to(EpisodeState& state, const MultiLayerMap& world,
                     const Pose& goal_pose, const SimParams& params,
                     const std::function<bool(const Pose&)>& stop = {});

/// In the cap and unobstructed on the goal's layer in the true world.
bool goal_visible(const Pose& pose, const Vec3& goal,
                  const MultiLayerMap& world, const FovCap& cap);

struct StepRecord {
  int k = 0;
  Pose pose_before;
  double dtg_before = 0.0;
  bool goal_visible_before = false;
  int n_anchors = 0;
  std::string anchors_json_text;  // metadata offered to the policy
  std::vector<std::string> responses;
  std::vector<std::string> parse_errors;
  std::optional<VlmResponse> parsed;
  std::string event;  // "move", "yaw" or "noop"
  std::string selected_anchor_kind;  // for move events
  std::optional<ValidationRecord> validation;
  std::optional<int> vlm_candidate;
  std::optional<int> geo_candidate;
  std::optional<int> switch_candidate;
  std::optional<int> chosen;
  std::string adopted_source;  // roadmap source of the adopted vertex
  std::optional<Pose> target;
  std::optional<MotionResult> motion;
  Pose pose_after;
  int prompts_used = 0;
  double path_length = 0.0;
};

struct EpisodeLog {
  // header
  std::string scenario_json;
  std::string params_json;
  std::string policy_name;
  uint64_t seed = 0;
  // steps
  std::vector<StepRecord> steps;
  // trailer
  Outcome outcome = Outcome::PolicyFailure;
  bool success = false;
  double dtg = 0.0;
  double path_length = 0.0;
  int prompts_used = 0;
  bool goal_observed = false;
  std::string responses_digest;
  RoadmapGraph graph;

  std::string to_jsonl() const;
  static EpisodeLog from_jsonl_text(const std::string& text);
  void save(const std::string& path) const;
  static EpisodeLog load(const std::string& path);
};

/// FNV-1a over all raw responses in call order ("fnv1a64:<hex>"); any
/// single-byte change to any response changes the digest.
std::string responses_digest(const std::vector<StepRecord>& steps);

using FrameObserver =
    std::function<void(int step, const AnnotatedObservation& obs)>;

/// Run the full decision loop: sense, annotate, prompt, parse (one retry on
/// parse errors), validate against the roadmap, move; terminate on success
/// (distance <= success_radius and goal visible), on budget exhaustion or on
/// policy failure. Deterministic for fixed (scenario, policy, params, seed).
EpisodeLog run_episode(const Scenario& scenario, DecisionPolicy& policy,
                       const SimParams& params, uint64_t seed,
                       const FrameObserver& observer = {});

struct ReplayResult {
  bool identical = false;
  // -1: digest mismatch; otherwise index of the first divergent step, or
  // steps.size() when only the trailer diverges.
  int first_divergent_step = 0;
  std::string detail;
};

/// Re-run an episode from its own log (scripted over the recorded responses)
/// and compare every derived record.
ReplayResult replay_log(const EpisodeLog& recorded,
                        const FrameObserver& observer = {});

}  // namespace anchornav
