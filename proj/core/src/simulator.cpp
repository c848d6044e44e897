// SPDX-License-Identifier: Apache-2.0

#include "anchornav/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace anchornav {

using nlohmann::json;

namespace {

json pose_to_json(const Pose& p) {
  return json::array({p.position.x, p.position.y, p.position.z, p.yaw});
}

Pose pose_from_json(const json& j) {
  return {{j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()},
          j.at(3).get<double>()};
}

Occ char_to_occ(char c) {
  switch (c) {
    case '#': return Occ::Occupied;
    case '.': return Occ::Free;
    case '?': return Occ::Unknown;
    default:
      throw std::invalid_argument(std::string("scenario cell '") + c +
                                  "' is not one of '#', '.', '?'");
  }
}

}  // namespace

Scenario scenario_from_json_text(const std::string& text) {
  const json j = json::parse(text);
  Scenario s;
  s.name = j.at("name").get<std::string>();
  const std::string mode = j.at("mode").get<std::string>();
  if (mode == "2.5d") {
    s.mode = Mode::TwoPointFiveD;
  } else if (mode == "3d") {
    s.mode = Mode::ThreeD;
  } else {
    throw std::invalid_argument("scenario mode must be '2.5d' or '3d'");
  }
  s.resolution = j.at("resolution").get<double>();
  s.layer_spacing = j.at("layer_spacing").get<double>();
  s.ascii_layers = j.at("layers").get<std::vector<std::vector<std::string>>>();
  if (s.ascii_layers.empty() || s.ascii_layers[0].empty()) {
    throw std::invalid_argument("scenario needs at least one non-empty layer");
  }

  const int size_y = static_cast<int>(s.ascii_layers[0].size());
  const int size_x = static_cast<int>(s.ascii_layers[0][0].size());
  s.world.layer_spacing = s.layer_spacing;
  for (size_t li = 0; li < s.ascii_layers.size(); ++li) {
    const auto& rows = s.ascii_layers[li];
    if (static_cast<int>(rows.size()) != size_y) {
      throw std::invalid_argument("layer " + std::to_string(li) +
                                  " row count differs");
    }
    LayerMap layer((li + 0.5) * s.layer_spacing, s.resolution, Vec2{},
                   size_x, size_y);
    for (int iy = 0; iy < size_y; ++iy) {
      if (static_cast<int>(rows[static_cast<size_t>(iy)].size()) != size_x) {
        throw std::invalid_argument("layer " + std::to_string(li) + " row " +
                                    std::to_string(iy) + " length differs");
      }
      for (int ix = 0; ix < size_x; ++ix) {
        layer.set({ix, iy},
                  char_to_occ(rows[static_cast<size_t>(iy)]
                                  [static_cast<size_t>(ix)]));
      }
    }
    s.world.layers.push_back(std::move(layer));
  }

  const json& st = j.at("start");
  const auto sp = st.at("position");
  s.start.position = {sp.at(0).get<double>(), sp.at(1).get<double>(),
                      sp.at(2).get<double>()};
  s.start.yaw = wrap_angle(deg2rad(st.at("yaw_deg").get<double>()));
  const auto g = j.at("goal");
  s.goal = {g.at(0).get<double>(), g.at(1).get<double>(), g.at(2).get<double>()};
  s.goal_description = j.at("goal_description").get<std::string>();
  if (j.contains("guidelines")) {
    s.guidelines = j.at("guidelines").get<std::string>();
  }
  s.optimal_path_length = j.at("optimal_path_length").get<double>();
  s.horizon = j.at("horizon").get<int>();
  s.seed = j.at("seed").get<uint64_t>();
  return s;
}

std::string scenario_to_json_text(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["mode"] = s.mode == Mode::TwoPointFiveD ? "2.5d" : "3d";
  j["resolution"] = s.resolution;
  j["layer_spacing"] = s.layer_spacing;
  j["layers"] = s.ascii_layers;
  j["start"] = {{"position",
                 {s.start.position.x, s.start.position.y, s.start.position.z}},
                {"yaw_deg", rad2deg(s.start.yaw)}};
  j["goal"] = {s.goal.x, s.goal.y, s.goal.z};
  j["goal_description"] = s.goal_description;
  if (!s.guidelines.empty()) j["guidelines"] = s.guidelines;
  j["optimal_path_length"] = s.optimal_path_length;
  j["horizon"] = s.horizon;
  j["seed"] = s.seed;
  return j.dump();
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return scenario_from_json_text(buf.str());
}

const char* to_string(MotionStatus s) {
  switch (s) {
    case MotionStatus::Arrived: return "arrived";
    case MotionStatus::Blocked: return "blocked";
    case MotionStatus::NoOp: return "noop";
    case MotionStatus::GoalReached: return "goal_reached";
  }
  return "unknown";
}

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Success: return "success";
    case Outcome::BudgetExhausted: return "budget_exhausted";
    case Outcome::PolicyFailure: return "policy_failure";
  }
  return "unknown";
}

void sense(EpisodeState& state, const MultiLayerMap& world,
           const SimParams& params) {
  const int layer = state.belief.layer_of_height(state.pose.position.z);
  raycast_update(state.belief.layers[static_cast<size_t>(layer)], state.pose,
                 world.layers[static_cast<size_t>(layer)], params.sense_rays,
                 params.sense_range);

  // Vertical probe: reveal a ring of the adjacent layers around the pose
  // (the range sensor's vertical spread) so inter-layer anchors can be
  // validated against the belief and ascent candidates have hit points that
  // are not glued to the pose column.
  const LayerMap& here = world.layers[static_cast<size_t>(layer)];
  const GridIndex at = here.cell_at(state.pose.position.xy());
  const int r =
      static_cast<int>(std::ceil(params.probe_radius / here.resolution()));
  for (const int delta : {-1, 1}) {
    const int adj = layer + delta;
    if (adj < 0 || adj >= static_cast<int>(world.layers.size())) continue;
    const LayerMap& truth = world.layers[static_cast<size_t>(adj)];
    LayerMap& belief = state.belief.layers[static_cast<size_t>(adj)];
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) {
        if (std::hypot(dx, dy) * here.resolution() > params.probe_radius) {
          continue;
        }
        const GridIndex c{at.ix + dx, at.iy + dy};
        if (!truth.in_bounds(c)) continue;
        const Occ v = truth.occ(c);
        if (v != Occ::Unknown) belief.set(c, v);
      }
    }
  }
}

MotionResult move_to(EpisodeState& state, const MultiLayerMap& world,
                     const Pose& goal_pose, const SimParams& params,
                     const std::function<bool(const Pose&)>& stop) {
  const Vec3 from = state.pose.position;
  const Vec3 delta = goal_pose.position - from;
  const double length = delta.norm();
  if (length < 1e-9) {
    state.pose.yaw = goal_pose.yaw;
    return {MotionStatus::NoOp, 0.0, state.pose};
  }

  const int n = std::max(1, static_cast<int>(std::ceil(length / params.motion_step)));
  MotionStatus status = MotionStatus::Arrived;
  Vec3 current = from;
  double traveled = 0.0;
  for (int i = 1; i <= n; ++i) {
    const Vec3 next = from + delta * (static_cast<double>(i) / n);
    const int layer = world.layer_of_height(next.z);
    const LayerMap& truth = world.layers[static_cast<size_t>(layer)];
    const LayerMap& belief = state.belief.layers[static_cast<size_t>(layer)];
    const GridIndex cell = truth.cell_at(next.xy());
    if (!truth.in_bounds(cell) || truth.occ(cell) == Occ::Occupied ||
        belief.occ(cell) != Occ::Free) {
      // The world check is the physics, the belief check keeps the planner
      // from tunneling through walls it has not sensed yet.
      status = MotionStatus::Blocked;
      break;
    }
    traveled += (next - current).norm();
    current = next;
    state.pose.position = current;
    sense(state, world, params);
    if (stop && stop(state.pose)) {
      status = MotionStatus::GoalReached;
      break;
    }
  }

  state.pose.yaw = goal_pose.yaw;
  state.path_length += traveled;
  return {status, traveled, state.pose};
}

bool goal_visible(const Pose& pose, const Vec3& goal,
                  const MultiLayerMap& world, const FovCap& cap) {
  if (!fov_contains(pose, goal, cap)) return false;
  const int layer = world.layer_of_height(goal.z);
  const LayerMap& truth = world.layers[static_cast<size_t>(layer)];
  const GridIndex a = truth.cell_at(pose.position.xy());
  const GridIndex b = truth.cell_at(goal.xy());
  if (!truth.in_bounds(a) || !truth.in_bounds(b)) return false;
  for (const GridIndex c : bresenham_between(a, b)) {
    if (truth.occ(c) == Occ::Occupied) return false;
  }
  return true;
}

namespace {

double next_u01(std::mt19937_64& rng) {
  // Fixed 53-bit construction; identical on every standard library.
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

Pose jittered_start(const Scenario& scenario, const SimParams& params,
                    uint64_t seed) {
  if (params.start_jitter_radius <= 0.0 && params.start_jitter_yaw <= 0.0) {
    return scenario.start;
  }
  std::mt19937_64 rng(scenario.seed ^
                      (seed * 0x9E3779B97F4A7C15ULL + 0x2545F4914F6CDD1DULL));
  const int layer = scenario.world.layer_of_height(scenario.start.position.z);
  const LayerMap& truth = scenario.world.layers[static_cast<size_t>(layer)];

  for (int attempt = 0; attempt < 20; ++attempt) {
    const double radius = params.start_jitter_radius * std::sqrt(next_u01(rng));
    const double angle = 2.0 * kPi * next_u01(rng);
    const double dyaw = (2.0 * next_u01(rng) - 1.0) * params.start_jitter_yaw;
    Pose p = scenario.start;
    p.position.x += radius * std::cos(angle);
    p.position.y += radius * std::sin(angle);
    p.yaw = wrap_angle(p.yaw + dyaw);
    const GridIndex c = truth.cell_at(p.position.xy());
    if (truth.in_bounds(c) && truth.occ(c) == Occ::Free &&
        has_clearance(truth, c, params.anchors.clearance_radius)) {
      return p;
    }
  }
  return scenario.start;
}

json validation_to_json(const ValidationRecord& v) {
  return {{"gain", v.gain},
          {"p_gain", v.p_gain},
          {"confidence", v.confidence},
          {"p_valid", v.p_valid}};
}

ValidationRecord validation_from_json(const json& j) {
  return {j.at("gain").get<double>(), j.at("p_gain").get<double>(),
          j.at("confidence").get<double>(), j.at("p_valid").get<double>()};
}

json response_to_json(const VlmResponse& r) {
  json j;
  j["interpretation"] = r.interpretation;
  if (r.action.type == ActionType::SelectAnchor) {
    j["action"] = {{"type", "anchor"}, {"index", r.action.anchor_index}};
  } else {
    j["action"] = {{"type", "yaw"}, {"delta_yaw", r.action.delta_yaw}};
  }
  j["confidence"] = r.confidence;
  return j;
}

VlmResponse response_from_json(const json& j) {
  VlmResponse r;
  r.interpretation = j.at("interpretation").get<std::string>();
  const json& a = j.at("action");
  if (a.at("type").get<std::string>() == "anchor") {
    r.action = {ActionType::SelectAnchor, a.at("index").get<int>(), 0.0};
  } else {
    r.action = {ActionType::AdjustYaw, 0, a.at("delta_yaw").get<double>()};
  }
  r.confidence = j.at("confidence").get<double>();
  return r;
}

json step_to_json(const StepRecord& s) {
  json j;
  j["type"] = "step";
  j["k"] = s.k;
  j["pose_before"] = pose_to_json(s.pose_before);
  j["dtg_before"] = s.dtg_before;
  j["goal_visible_before"] = s.goal_visible_before;
  j["n_anchors"] = s.n_anchors;
  j["anchors"] = json::parse(s.anchors_json_text.empty() ? "[]"
                                                         : s.anchors_json_text);
  j["responses"] = s.responses;
  j["parse_errors"] = s.parse_errors;
  j["parsed"] = s.parsed ? response_to_json(*s.parsed) : json(nullptr);
  j["event"] = s.event;
  j["selected_anchor_kind"] =
      s.selected_anchor_kind.empty() ? json(nullptr)
                                     : json(s.selected_anchor_kind);
  j["validation"] =
      s.validation ? validation_to_json(*s.validation) : json(nullptr);
  j["candidates"] = {
      {"vlm", s.vlm_candidate ? json(*s.vlm_candidate) : json(nullptr)},
      {"geo", s.geo_candidate ? json(*s.geo_candidate) : json(nullptr)},
      {"switch",
       s.switch_candidate ? json(*s.switch_candidate) : json(nullptr)}};
  j["chosen"] = s.chosen ? json(*s.chosen) : json(nullptr);
  j["adopted_source"] =
      s.adopted_source.empty() ? json(nullptr) : json(s.adopted_source);
  j["target"] = s.target ? pose_to_json(*s.target) : json(nullptr);
  if (s.motion) {
    j["motion"] = {{"status", to_string(s.motion->status)},
                   {"traveled", s.motion->traveled}};
  } else {
    j["motion"] = nullptr;
  }
  j["pose_after"] = pose_to_json(s.pose_after);
  j["prompts_used"] = s.prompts_used;
  j["path_length"] = s.path_length;
  return j;
}

StepRecord step_from_json(const json& j) {
  StepRecord s;
  s.k = j.at("k").get<int>();
  s.pose_before = pose_from_json(j.at("pose_before"));
  s.dtg_before = j.at("dtg_before").get<double>();
  s.goal_visible_before = j.at("goal_visible_before").get<bool>();
  s.n_anchors = j.at("n_anchors").get<int>();
  s.anchors_json_text = j.at("anchors").dump();
  s.responses = j.at("responses").get<std::vector<std::string>>();
  s.parse_errors = j.at("parse_errors").get<std::vector<std::string>>();
  if (!j.at("parsed").is_null()) s.parsed = response_from_json(j.at("parsed"));
  s.event = j.at("event").get<std::string>();
  if (!j.at("selected_anchor_kind").is_null()) {
    s.selected_anchor_kind = j.at("selected_anchor_kind").get<std::string>();
  }
  if (!j.at("validation").is_null()) {
    s.validation = validation_from_json(j.at("validation"));
  }
  const json& cand = j.at("candidates");
  if (!cand.at("vlm").is_null()) s.vlm_candidate = cand.at("vlm").get<int>();
  if (!cand.at("geo").is_null()) s.geo_candidate = cand.at("geo").get<int>();
  if (!cand.at("switch").is_null()) {
    s.switch_candidate = cand.at("switch").get<int>();
  }
  if (!j.at("chosen").is_null()) s.chosen = j.at("chosen").get<int>();
  if (!j.at("adopted_source").is_null()) {
    s.adopted_source = j.at("adopted_source").get<std::string>();
  }
  if (!j.at("target").is_null()) s.target = pose_from_json(j.at("target"));
  if (!j.at("motion").is_null()) {
    MotionResult m;
    const std::string st = j.at("motion").at("status").get<std::string>();
    m.status = st == "arrived" ? MotionStatus::Arrived
               : st == "blocked" ? MotionStatus::Blocked
               : st == "goal_reached" ? MotionStatus::GoalReached
                                      : MotionStatus::NoOp;
    m.traveled = j.at("motion").at("traveled").get<double>();
    s.motion = m;
  }
  s.pose_after = pose_from_json(j.at("pose_after"));
  s.prompts_used = j.at("prompts_used").get<int>();
  s.path_length = j.at("path_length").get<double>();
  return s;
}

json graph_to_json(const RoadmapGraph& g) {
  json vertices = json::array();
  for (const RoadmapVertex& v : g.vertices()) {
    vertices.push_back({{"id", v.id},
                        {"step", v.step},
                        {"pose", pose_to_json(v.pose)},
                        {"cap", {v.cap.radius, v.cap.half_angle}},
                        {"source", to_string(v.source)},
                        {"visited", v.visited}});
  }
  json edges = json::array();
  for (const HyperEdge& e : g.edges()) {
    edges.push_back(
        {{"prev", e.prev},
         {"chosen", e.chosen},
         {"vlm", e.vlm_candidate ? json(*e.vlm_candidate) : json(nullptr)},
         {"geo", e.geo_candidate ? json(*e.geo_candidate) : json(nullptr)},
         {"switch",
          e.switch_candidate ? json(*e.switch_candidate) : json(nullptr)},
         {"validation", e.validation ? validation_to_json(*e.validation)
                                     : json(nullptr)}});
  }
  return {{"vertices", vertices}, {"edges", edges}};
}

json trailer_to_json(const EpisodeLog& log) {
  json j;
  j["type"] = "trailer";
  j["outcome"] = to_string(log.outcome);
  j["success"] = log.success;
  j["dtg"] = log.dtg;
  j["path_length"] = log.path_length;
  j["prompts_used"] = log.prompts_used;
  j["goal_observed"] = log.goal_observed;
  j["steps"] = log.steps.size();
  j["responses_digest"] = log.responses_digest;
  j["graph"] = graph_to_json(log.graph);
  return j;
}

}  // namespace

std::string responses_digest(const std::vector<StepRecord>& steps) {
  uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const char* data, size_t n) {
    for (size_t i = 0; i < n; ++i) {
      h ^= static_cast<uint8_t>(data[i]);
      h *= 0x100000001b3ULL;
    }
  };
  for (const StepRecord& s : steps) {
    for (const std::string& r : s.responses) {
      mix(r.data(), r.size());
      mix("\n", 1);
    }
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

std::string EpisodeLog::to_jsonl() const {
  json header;
  header["type"] = "header";
  header["format"] = 1;
  header["scenario"] = json::parse(scenario_json);
  header["params"] = json::parse(params_json);
  header["policy"] = policy_name;
  header["seed"] = seed;

  std::string out = header.dump();
  out.push_back('\n');
  for (const StepRecord& s : steps) {
    out += step_to_json(s).dump();
    out.push_back('\n');
  }
  out += trailer_to_json(*this).dump();
  out.push_back('\n');
  return out;
}

EpisodeLog EpisodeLog::from_jsonl_text(const std::string& text) {
  EpisodeLog log;
  std::istringstream in(text);
  std::string line;
  bool have_header = false, have_trailer = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    const std::string type = j.at("type").get<std::string>();
    if (type == "header") {
      log.scenario_json = j.at("scenario").dump();
      log.params_json = j.at("params").dump();
      log.policy_name = j.at("policy").get<std::string>();
      log.seed = j.at("seed").get<uint64_t>();
      have_header = true;
    } else if (type == "step") {
      log.steps.push_back(step_from_json(j));
    } else if (type == "trailer") {
      const std::string outcome = j.at("outcome").get<std::string>();
      log.outcome = outcome == "success" ? Outcome::Success
                    : outcome == "budget_exhausted" ? Outcome::BudgetExhausted
                                                    : Outcome::PolicyFailure;
      log.success = j.at("success").get<bool>();
      log.dtg = j.at("dtg").get<double>();
      log.path_length = j.at("path_length").get<double>();
      log.prompts_used = j.at("prompts_used").get<int>();
      log.goal_observed = j.at("goal_observed").get<bool>();
      log.responses_digest = j.at("responses_digest").get<std::string>();
      for (const json& v : j.at("graph").at("vertices")) {
        const std::string src = v.at("source").get<std::string>();
        const VertexSource source = src == "start" ? VertexSource::Start
                                    : src == "vlm" ? VertexSource::Vlm
                                    : src == "geo" ? VertexSource::Geo
                                                   : VertexSource::Switch;
        log.graph.add_vertex(pose_from_json(v.at("pose")),
                             {v.at("cap").at(0).get<double>(),
                              v.at("cap").at(1).get<double>()},
                             source, v.at("step").get<int>(),
                             v.at("visited").get<bool>());
      }
      for (const json& e : j.at("graph").at("edges")) {
        HyperEdge edge;
        edge.prev = e.at("prev").get<int>();
        edge.chosen = e.at("chosen").get<int>();
        if (!e.at("vlm").is_null()) edge.vlm_candidate = e.at("vlm").get<int>();
        if (!e.at("geo").is_null()) edge.geo_candidate = e.at("geo").get<int>();
        if (!e.at("switch").is_null()) {
          edge.switch_candidate = e.at("switch").get<int>();
        }
        if (!e.at("validation").is_null()) {
          edge.validation = validation_from_json(e.at("validation"));
        }
        log.graph.append_step(edge);
      }
      have_trailer = true;
    }
  }
  if (!have_header || !have_trailer) {
    throw std::runtime_error("episode log missing header or trailer record");
  }
  return log;
}

void EpisodeLog::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write log file: " + path);
  out << to_jsonl();
}

EpisodeLog EpisodeLog::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open log file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_jsonl_text(buf.str());
}

EpisodeLog run_episode(const Scenario& scenario_in, DecisionPolicy& policy,
                       const SimParams& params_in, uint64_t seed,
                       const FrameObserver& observer) {
  EpisodeLog log;
  log.scenario_json = scenario_to_json_text(scenario_in);
  log.params_json = params_to_json_text(params_in);
  log.policy_name = policy.name();
  log.seed = seed;

  // The run is driven by exactly what the header records, so a replay that
  // parses the header reproduces it bit for bit.
  const Scenario scenario = scenario_from_json_text(log.scenario_json);
  const SimParams params = params_from_json_text(log.params_json);

  PromptTemplate tmpl = params.prompt_template;
  if (!scenario.guidelines.empty()) {
    tmpl.important_guidelines = scenario.guidelines;
  }

  EpisodeState state;
  state.pose = jittered_start(scenario, params, seed);
  state.belief = scenario.world.blank_copy();
  state.current_vertex = state.graph.add_vertex(
      state.pose, params.cap, VertexSource::Start, 0, /*visited=*/true);

  Outcome outcome = Outcome::BudgetExhausted;
  bool success = false;

  for (int k = 0;; ++k) {
    sense(state, scenario.world, params);
    const bool visible =
        goal_visible(state.pose, scenario.goal, scenario.world, params.cap);
    state.goal_observed = state.goal_observed || visible;
    const double dtg = (state.pose.position - scenario.goal).norm();
    if (dtg <= params.success_radius && visible) {
      outcome = Outcome::Success;
      success = true;
      break;
    }
    if (state.prompts_used >= scenario.horizon) {
      outcome = Outcome::BudgetExhausted;
      break;
    }

    const int layer = state.belief.layer_of_height(state.pose.position.z);
    const LayerMap& belief_layer =
        state.belief.layers[static_cast<size_t>(layer)];
    const std::vector<FrontierCluster> clusters =
        build_frontiers(belief_layer, params.frontier, scenario.layer_spacing);

    int n_obs = 0;
    for (const FrontierCluster& c : clusters) {
      const Vec3 centroid{c.centroid.x, c.centroid.y, belief_layer.height()};
      if (fov_contains(state.pose, centroid, params.cap)) ++n_obs;
    }
    const int m_phi =
        adaptive_cardinality(n_obs, params.anchors.obs_threshold,
                             params.anchors.m_nominal, params.anchors.m_max);
    const std::vector<double> yaws = yaw_sample_set(
        params.anchors.phi_left, params.anchors.phi_right, m_phi);

    std::vector<Anchor> anchors =
        frontier_anchors(clusters, state.pose, params.camera, params.cap);
    for (Anchor& a : target_anchors(belief_layer, state.pose, yaws,
                                    params.anchors.clearance_radius,
                                    params.cap.radius, params.camera)) {
      anchors.push_back(a);
    }
    if (scenario.mode == Mode::ThreeD) {
      for (Anchor& a : inter_layer_anchors(state.belief, layer, state.pose,
                                           params.anchors.clearance_radius,
                                           params.camera)) {
        anchors.push_back(a);
      }
    }
    for (Anchor& a : anchors) {
      if (a.kind != AnchorKind::InterLayer) a.layer = layer;
    }
    number_anchors(anchors);

    AnnotatedObservation obs;
    obs.anchors = anchors;
    for (const Anchor& a : anchors) {
      if (a.has_polyline) obs.frontier_polylines.push_back(a.polyline);
    }
    obs.layer_snapshot = belief_layer;
    obs.camera_pose = state.pose;
    obs.current_layer = layer;
    obs.frame_width = params.camera.width;
    obs.frame_height = params.camera.height;
    if (observer) observer(k, obs);

    const std::string prompt =
        build_prompt(scenario.goal_description, obs, tmpl);

    StepRecord rec;
    rec.k = k;
    rec.pose_before = state.pose;
    rec.dtg_before = dtg;
    rec.goal_visible_before = visible;
    rec.n_anchors = static_cast<int>(anchors.size());
    rec.anchors_json_text = anchors_json(anchors);

    state.prompts_used += 1;  // one budget unit per decision step

    std::optional<VlmResponse> parsed;
    try {
      const std::string raw = policy.decide(prompt, obs);
      rec.responses.push_back(raw);
      try {
        parsed = parse_response(raw, rec.n_anchors,
                                params.validation.epsilon);
      } catch (const ParseError& first) {
        rec.parse_errors.emplace_back(to_string(first.kind()));
        const std::string correction =
            prompt + "=== Correction ===\nThe previous reply was invalid (" +
            to_string(first.kind()) +
            "). Reply with exactly one JSON object matching the output "
            "schema.\n";
        const std::string raw2 = policy.decide(correction, obs);
        rec.responses.push_back(raw2);
        try {
          parsed = parse_response(raw2, rec.n_anchors,
                                  params.validation.epsilon);
        } catch (const ParseError& second) {
          rec.parse_errors.emplace_back(to_string(second.kind()));
        }
      }
    } catch (const PolicyUnavailable&) {
      rec.event = "noop";
      rec.pose_after = state.pose;
      rec.prompts_used = state.prompts_used;
      rec.path_length = state.path_length;
      log.steps.push_back(rec);
      outcome = Outcome::PolicyFailure;
      break;
    } catch (const ScriptExhausted&) {
      rec.event = "noop";
      rec.pose_after = state.pose;
      rec.prompts_used = state.prompts_used;
      rec.path_length = state.path_length;
      log.steps.push_back(rec);
      outcome = Outcome::PolicyFailure;
      break;
    }

    if (!parsed) {
      // Two failed parses: the step burns its budget without moving.
      rec.event = "noop";
      rec.pose_after = state.pose;
      rec.prompts_used = state.prompts_used;
      rec.path_length = state.path_length;
      log.steps.push_back(rec);
      continue;
    }
    rec.parsed = parsed;

    if (parsed->action.type == ActionType::AdjustYaw) {
      state.pose.yaw = wrap_angle(state.pose.yaw + parsed->action.delta_yaw);
      const int v = state.graph.add_vertex(state.pose, params.cap,
                                           VertexSource::Vlm, k + 1);
      HyperEdge edge;
      edge.prev = state.current_vertex;
      edge.chosen = v;
      edge.vlm_candidate = v;
      state.graph.append_step(edge);
      state.current_vertex = v;

      rec.event = "yaw";
      rec.vlm_candidate = v;
      rec.chosen = v;
      rec.adopted_source = to_string(VertexSource::Vlm);
      rec.pose_after = state.pose;
      rec.prompts_used = state.prompts_used;
      rec.path_length = state.path_length;
      log.steps.push_back(rec);
      continue;
    }

    // Anchor selection: candidate vertex, geometric rival, validation.
    const Anchor& anchor =
        anchors[static_cast<size_t>(parsed->action.anchor_index - 1)];
    const bool is_switch = anchor.kind == AnchorKind::InterLayer;

    double cand_yaw = state.pose.yaw;
    const Vec2 disp = anchor.position.xy() - state.pose.position.xy();
    if (disp.norm() >= 1e-9) {
      cand_yaw = yaw_from(state.pose.position, anchor.position);
    }
    const Pose cand_pose{anchor.position, cand_yaw};
    const int v_cand = state.graph.add_vertex(
        cand_pose, params.cap,
        is_switch ? VertexSource::Switch : VertexSource::Vlm, k + 1);

    const GeoCandidate geo =
        geometric_candidate(state.belief, layer, state.pose, state.graph,
                            params.validation, params.cap, params.frontier);
    const int v_geo = state.graph.add_vertex(geo.pose, params.cap,
                                             VertexSource::Geo, k + 1);

    const std::vector<int> neighbors = k_nearest_visited(
        state.graph, cand_pose.position, params.validation.k_nearest);
    const LayerMap& cand_layer =
        state.belief.layers[static_cast<size_t>(anchor.layer)];
    // A vertical transition has no meaningful forward sector, so its rays
    // always span the full circle; horizontal candidates follow the config.
    const bool full_circle = is_switch || params.validation.full_circle_rays;
    const double gain = information_gain(
        cand_pose, cand_layer, state.graph, neighbors, params.cap,
        params.validation.n_rays, full_circle, params.validation.hit_rule);
    const double p_gain = gain_confidence(gain, params.validation.alpha,
                                          params.validation.gain_threshold);
    const double p_valid =
        validate_candidate(p_gain, parsed->confidence,
                           params.validation.lambda);
    rec.validation =
        ValidationRecord{gain, p_gain, parsed->confidence, p_valid};

    const int chosen = select_goal(v_cand, v_geo, p_valid,
                                   params.validation.valid_threshold);
    const Pose target_vertex_pose = state.graph.vertex(chosen).pose;

    double traj_yaw = state.pose.yaw;
    const Vec2 target_disp =
        target_vertex_pose.position.xy() - state.pose.position.xy();
    if (target_disp.norm() >= 1e-9) {
      traj_yaw = yaw_from(state.pose.position, target_vertex_pose.position);
    } else if (state.graph.vertex(chosen).source == VertexSource::Geo) {
      traj_yaw = target_vertex_pose.yaw;  // rotate-in-place fallback
    }
    const double goal_yaw = select_yaw(
        parsed->confidence, traj_yaw, state.pose.yaw,
        params.validation.yaw_confidence_threshold,
        params.validation.yaw_deviation_threshold);

    const Pose move_target{target_vertex_pose.position, goal_yaw};
    const auto success_stop = [&](const Pose& p) {
      return (p.position - scenario.goal).norm() <= params.success_radius &&
             goal_visible(p, scenario.goal, scenario.world, params.cap);
    };
    const MotionResult motion =
        move_to(state, scenario.world, move_target, params, success_stop);

    HyperEdge edge;
    edge.prev = state.current_vertex;
    if (is_switch) {
      edge.switch_candidate = v_cand;
    } else {
      edge.vlm_candidate = v_cand;
    }
    edge.geo_candidate = v_geo;
    edge.validation = rec.validation;

    // The adopted vertex records the pose actually reached.
    const double arrival_error =
        (motion.final_pose.position - target_vertex_pose.position).norm();
    int adopted = chosen;
    if (arrival_error < 1e-9) {
      state.graph.vertex(chosen).pose = motion.final_pose;
    } else {
      adopted = state.graph.add_vertex(motion.final_pose, params.cap,
                                       state.graph.vertex(chosen).source,
                                       k + 1);
    }
    edge.chosen = adopted;
    state.graph.append_step(edge);
    state.current_vertex = adopted;

    rec.event = "move";
    switch (anchor.kind) {
      case AnchorKind::Frontier: rec.selected_anchor_kind = "frontier"; break;
      case AnchorKind::Target: rec.selected_anchor_kind = "target"; break;
      case AnchorKind::InterLayer:
        rec.selected_anchor_kind = "inter_layer";
        break;
    }
    if (is_switch) {
      rec.switch_candidate = v_cand;
    } else {
      rec.vlm_candidate = v_cand;
    }
    rec.geo_candidate = v_geo;
    rec.chosen = adopted;
    rec.adopted_source = to_string(state.graph.vertex(adopted).source);
    rec.target = move_target;
    rec.motion = motion;
    rec.pose_after = state.pose;
    rec.prompts_used = state.prompts_used;
    rec.path_length = state.path_length;
    log.steps.push_back(rec);
  }

  log.outcome = outcome;
  log.success = success;
  log.dtg = (state.pose.position - scenario.goal).norm();
  log.path_length = state.path_length;
  log.prompts_used = state.prompts_used;
  log.goal_observed = state.goal_observed;
  log.graph = state.graph;
  log.responses_digest = responses_digest(log.steps);
  return log;
}

ReplayResult replay_log(const EpisodeLog& recorded,
                        const FrameObserver& observer) {
  if (responses_digest(recorded.steps) != recorded.responses_digest) {
    return {false, -1, "responses digest mismatch"};
  }

  std::vector<std::string> responses;
  for (const StepRecord& s : recorded.steps) {
    for (const std::string& r : s.responses) responses.push_back(r);
  }
  ScriptedPolicy scripted(responses);

  const Scenario scenario = scenario_from_json_text(recorded.scenario_json);
  const SimParams params = params_from_json_text(recorded.params_json);
  const EpisodeLog rerun =
      run_episode(scenario, scripted, params, recorded.seed, observer);

  const size_t n = std::min(recorded.steps.size(), rerun.steps.size());
  for (size_t i = 0; i < n; ++i) {
    if (step_to_json(recorded.steps[i]) != step_to_json(rerun.steps[i])) {
      return {false, static_cast<int>(i),
              "step " + std::to_string(i) + " diverges"};
    }
  }
  if (recorded.steps.size() != rerun.steps.size()) {
    return {false, static_cast<int>(n),
            "step count differs: recorded " +
                std::to_string(recorded.steps.size()) + ", replayed " +
                std::to_string(rerun.steps.size())};
  }
  if (trailer_to_json(recorded) != trailer_to_json(rerun)) {
    return {false, static_cast<int>(recorded.steps.size()),
            "trailer diverges"};
  }
  return {true, static_cast<int>(recorded.steps.size()), "identical"};
}

}  // namespace anchornav
