// SPDX-License-Identifier: Apache-2.0

#include "anchornav/prompting.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include <json.hpp>
#include <httplib.h>

#include "anchornav/raster.hpp"

namespace anchornav {

using nlohmann::json;

PromptTemplate PromptTemplate::defaults() {
  PromptTemplate t;
  t.role_goal =
      "You are the decision module of an indoor aerial robot. Your mission is "
      "to reach the described goal location using as few decisions as "
      "possible.";
  t.observation_input =
      "You receive a list of numbered spatial anchors and a summary of the "
      "occupancy layer at the current flight altitude. Frontier anchors mark "
      "boundaries of unexplored space (cyan rectangles), target anchors mark "
      "reachable free-space points (red discs), inter-layer anchors mark safe "
      "vertical transitions (blue squares). Anchor positions are in meters in "
      "the global frame.";
  t.important_guidelines =
      "Prefer anchors that plausibly lead toward the goal. Avoid revisiting "
      "explored regions.";
  t.behavior_options =
      "Choose exactly one action: (1) select an anchor by its index, or (2) "
      "adjust the heading by a yaw angle in degrees.";
  t.output_schema =
      "Reply with a single JSON object and nothing else: "
      R"({"interpretation": string, "action": {"type": "anchor", "index": int} )"
      R"(or {"type": "yaw", "delta_yaw_deg": number}, "confidence": number in (0,1)})";
  return t;
}

const char* to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::MalformedDocument: return "malformed_document";
    case ParseErrorKind::SchemaViolation: return "schema_violation";
    case ParseErrorKind::IndexOutOfRange: return "index_out_of_range";
    case ParseErrorKind::ConfidenceOutOfRange: return "confidence_out_of_range";
  }
  return "unknown";
}

namespace {

const char* kind_name(AnchorKind k) {
  switch (k) {
    case AnchorKind::Frontier: return "frontier";
    case AnchorKind::Target: return "target";
    case AnchorKind::InterLayer: return "inter_layer";
  }
  return "unknown";
}

std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

}  // namespace

std::string anchors_json(const std::vector<Anchor>& anchors) {
  json arr = json::array();
  for (const Anchor& a : anchors) {
    json j;
    j["index"] = a.index;
    j["kind"] = kind_name(a.kind);
    j["position"] = {a.position.x, a.position.y, a.position.z};
    j["yaw_deg"] = rad2deg(a.yaw_hint);
    j["layer"] = a.layer;
    if (a.pixel) {
      j["pixel"] = {a.pixel->x, a.pixel->y};
    } else {
      j["pixel"] = nullptr;
    }
    if (a.source_cluster) j["cluster"] = *a.source_cluster;
    arr.push_back(j);
  }
  return arr.dump();
}

std::string build_prompt(const std::string& task_description,
                         const AnnotatedObservation& obs,
                         const PromptTemplate& tmpl) {
  size_t unknown = 0, free_cells = 0, occupied = 0;
  for (int8_t v : obs.layer_snapshot.cells()) {
    if (v < 0) ++unknown;
    else if (v == 0) ++free_cells;
    else ++occupied;
  }
  const double total = static_cast<double>(obs.layer_snapshot.cell_count());

  std::string p;
  p += "=== Role and Goal ===\n";
  p += tmpl.role_goal;
  p += "\nTask: " + task_description + "\n";
  p += "=== Observation Input ===\n";
  p += tmpl.observation_input;
  p += "\nAnchors (" + std::to_string(obs.anchors.size()) + "): ";
  p += obs.anchors.empty() ? "none" : anchors_json(obs.anchors);
  p += "\nLayer map: " + std::to_string(obs.layer_snapshot.size_x()) + "x" +
       std::to_string(obs.layer_snapshot.size_y()) + " cells at " +
       format_fixed(obs.layer_snapshot.resolution(), 3) + " m/cell, height " +
       format_fixed(obs.layer_snapshot.height(), 2) + " m; free " +
       format_fixed(100.0 * free_cells / total, 1) + "%, occupied " +
       format_fixed(100.0 * occupied / total, 1) + "%, unknown " +
       format_fixed(100.0 * unknown / total, 1) + "%\n";
  p += "=== Important Guidelines ===\n";
  p += tmpl.important_guidelines;
  p += "\n=== Behavior Options ===\n";
  p += tmpl.behavior_options;
  p += "\n=== Output Schema ===\n";
  p += tmpl.output_schema;
  p += "\n";
  return p;
}

VlmResponse parse_response(const std::string& raw, int n_anchors,
                           double epsilon) {
  json doc = json::parse(raw, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw ParseError(ParseErrorKind::MalformedDocument,
                     "response is not a JSON object");
  }
  if (doc.size() != 3 || !doc.contains("interpretation") ||
      !doc.contains("action") || !doc.contains("confidence")) {
    throw ParseError(ParseErrorKind::SchemaViolation,
                     "expected exactly interpretation/action/confidence");
  }
  if (!doc["interpretation"].is_string()) {
    throw ParseError(ParseErrorKind::SchemaViolation,
                     "interpretation must be a string");
  }
  if (!doc["confidence"].is_number()) {
    throw ParseError(ParseErrorKind::SchemaViolation,
                     "confidence must be a number");
  }
  const json& act = doc["action"];
  if (!act.is_object() || !act.contains("type") || !act["type"].is_string()) {
    throw ParseError(ParseErrorKind::SchemaViolation,
                     "action must be an object with a type");
  }

  VlmResponse r;
  r.interpretation = doc["interpretation"].get<std::string>();

  const std::string type = act["type"].get<std::string>();
  if (type == "anchor") {
    if (act.size() != 2 || !act.contains("index") ||
        !act["index"].is_number_integer()) {
      throw ParseError(ParseErrorKind::SchemaViolation,
                       "anchor action needs exactly {type, index}");
    }
    const int index = act["index"].get<int>();
    if (index < 1 || index > n_anchors) {
      throw ParseError(ParseErrorKind::IndexOutOfRange,
                       "anchor index " + std::to_string(index) +
                           " not in 1.." + std::to_string(n_anchors));
    }
    r.action = {ActionType::SelectAnchor, index, 0.0};
  } else if (type == "yaw") {
    if (act.size() != 2 || !act.contains("delta_yaw_deg") ||
        !act["delta_yaw_deg"].is_number()) {
      throw ParseError(ParseErrorKind::SchemaViolation,
                       "yaw action needs exactly {type, delta_yaw_deg}");
    }
    const double deg = act["delta_yaw_deg"].get<double>();
    if (std::abs(deg) > 180.0) {
      throw ParseError(ParseErrorKind::SchemaViolation,
                       "|delta_yaw_deg| must be <= 180");
    }
    r.action = {ActionType::AdjustYaw, 0, deg2rad(deg)};
  } else {
    throw ParseError(ParseErrorKind::SchemaViolation,
                     "unknown action type '" + type + "'");
  }

  const double c = doc["confidence"].get<double>();
  if (!(c > 0.0 && c < 1.0)) {
    throw ParseError(ParseErrorKind::ConfidenceOutOfRange,
                     "confidence must lie in (0, 1)");
  }
  r.confidence = clip_confidence(c, epsilon);
  return r;
}

std::string serialize_response(const VlmResponse& r) {
  json doc;
  doc["interpretation"] = r.interpretation;
  if (r.action.type == ActionType::SelectAnchor) {
    doc["action"] = {{"type", "anchor"}, {"index", r.action.anchor_index}};
  } else {
    doc["action"] = {{"type", "yaw"},
                     {"delta_yaw_deg", rad2deg(r.action.delta_yaw)}};
  }
  doc["confidence"] = r.confidence;
  return doc.dump();
}

double clip_confidence(double c, double epsilon) {
  return std::min(std::max(c, epsilon), 1.0 - epsilon);
}

MockOraclePolicy::MockOraclePolicy(const MultiLayerMap& world, Vec3 goal,
                                   double confidence_scale,
                                   double confidence_offset)
    : world_(world),
      goal_(goal),
      scale_(confidence_scale),
      offset_(confidence_offset) {
  const int goal_layer = world.layer_of_height(goal.z);
  const GridIndex goal_cell =
      world.layers[static_cast<size_t>(goal_layer)].cell_at(goal.xy());
  to_goal_ = multilayer_geodesic_field(world, goal_layer, goal_cell);
}

std::string MockOraclePolicy::decide(const std::string& /*prompt*/,
                                     const AnnotatedObservation& obs) {
  // The flight to an anchor can pass closer to the goal than the anchor
  // itself (anchors sit at the far end of their rays), so an anchor is
  // scored by the better of its endpoint distance and the closest approach
  // of an unobstructed straight flight toward it.
  const auto segment_approach = [this](const Vec3& from,
                                       const Vec3& to) -> double {
    const Vec3 delta = to - from;
    const double length = delta.norm();
    const int steps = std::max(1, static_cast<int>(std::ceil(length / 0.1)));
    double closest = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= steps; ++i) {
      const Vec3 p = from + delta * (static_cast<double>(i) / steps);
      const int li = world_.layer_of_height(p.z);
      const LayerMap& layer = world_.layers[static_cast<size_t>(li)];
      const GridIndex c = layer.cell_at(p.xy());
      if (!layer.in_bounds(c) || layer.occ(c) == Occ::Occupied) {
        return std::numeric_limits<double>::infinity();
      }
      closest = std::min(closest, (p - goal_).norm());
    }
    return closest;
  };

  const int goal_layer = world_.layer_of_height(goal_.z);
  int best_index = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  int switch_index = -1;
  double switch_dist = std::numeric_limits<double>::infinity();
  for (const Anchor& a : obs.anchors) {
    if (a.layer < 0 || a.layer >= static_cast<int>(to_goal_.size())) continue;
    const LayerMap& layer = world_.layers[static_cast<size_t>(a.layer)];
    const GridIndex c = layer.cell_at(a.position.xy());
    if (!layer.in_bounds(c)) continue;
    double d = to_goal_[static_cast<size_t>(a.layer)].at(c);
    d = std::min(d, segment_approach(obs.camera_pose.position, a.position));
    if (d < best_dist) {
      best_dist = d;
      best_index = a.index;
    }
    if (a.kind == AnchorKind::InterLayer &&
        std::abs(a.layer - goal_layer) <
            std::abs(obs.current_layer - goal_layer) &&
        d < switch_dist) {
      switch_dist = d;
      switch_index = a.index;
    }
  }
  // The goal lives on another layer and a near-competitive climb exists:
  // take it, since the transition is mandatory anyway.
  if (switch_index >= 0 && switch_dist <= best_dist + 2.0) {
    best_index = switch_index;
    best_dist = switch_dist;
  }

  double here_dist = std::numeric_limits<double>::infinity();
  const int here_layer = obs.current_layer;
  if (here_layer >= 0 && here_layer < static_cast<int>(to_goal_.size())) {
    const LayerMap& layer = world_.layers[static_cast<size_t>(here_layer)];
    const GridIndex c = layer.cell_at(obs.camera_pose.position.xy());
    if (layer.in_bounds(c)) {
      here_dist = to_goal_[static_cast<size_t>(here_layer)].at(c);
    }
  }

  const auto calibrated = [this](double d) {
    return 1.0 / (1.0 + std::exp(-(offset_ - d) / scale_));
  };
  // Detection-grade confidence: the goal is in range of the anchor with an
  // unobstructed line of sight on its layer.
  const auto goal_detected = [this](const Vec3& from) {
    if ((goal_ - from).norm() > 8.0) return false;
    const LayerMap& layer =
        world_.layers[static_cast<size_t>(world_.layer_of_height(goal_.z))];
    const GridIndex a = layer.cell_at(from.xy());
    const GridIndex b = layer.cell_at(goal_.xy());
    if (!layer.in_bounds(a) || !layer.in_bounds(b)) return false;
    for (const GridIndex c : bresenham_between(a, b)) {
      if (layer.occ(c) == Occ::Occupied) return false;
    }
    return true;
  };

  VlmResponse r;
  if (best_index >= 0 && (best_dist <= here_dist - 0.25 || best_dist <= 2.0)) {
    const Anchor& chosen = obs.anchors[static_cast<size_t>(best_index - 1)];
    const bool detected = goal_detected(chosen.position);
    r.interpretation = "anchor " + std::to_string(best_index) +
                       (detected ? " keeps the target in view ("
                                 : " has the shortest remaining route (") +
                       format_fixed(best_dist, 2) + " m)";
    r.action = {ActionType::SelectAnchor, best_index, 0.0};
    r.confidence = detected ? 0.9 : calibrated(best_dist);
  } else {
    // No anchor makes real progress: the useful direction lies outside the
    // sampled sector, so re-aim the heading toward the goal instead.
    double delta = deg2rad(90.0);
    const Vec2 disp = goal_.xy() - obs.camera_pose.position.xy();
    if (disp.norm() > 1e-9) {
      delta = wrap_angle(std::atan2(disp.y, disp.x) - obs.camera_pose.yaw);
      if (std::abs(delta) < 1e-9) delta = deg2rad(90.0);  // aligned yet stuck
    }
    r.interpretation = "no anchor shortens the route; re-aiming " +
                       format_fixed(rad2deg(delta), 1) + " degrees";
    r.action = {ActionType::AdjustYaw, 0, delta};
    r.confidence =
        std::isfinite(here_dist) ? calibrated(here_dist) : 0.2;
  }
  return serialize_response(r);
}

ScriptedPolicy::ScriptedPolicy(std::vector<std::string> responses)
    : responses_(std::move(responses)) {}

std::string ScriptedPolicy::decide(const std::string& /*prompt*/,
                                   const AnnotatedObservation& /*obs*/) {
  if (cursor_ >= responses_.size()) {
    throw ScriptExhausted("scripted policy exhausted after " +
                          std::to_string(responses_.size()) + " responses");
  }
  return responses_[cursor_++];
}

RemotePolicy::RemotePolicy(RemotePolicyOptions options)
    : options_(std::move(options)) {
  std::string rest = options_.url;
  const std::string scheme = "http://";
  if (rest.rfind(scheme, 0) == 0) rest = rest.substr(scheme.size());
  const size_t slash = rest.find('/');
  std::string hostport = rest.substr(0, slash);
  path_ = (slash == std::string::npos) ? "/" : rest.substr(slash);
  const size_t colon = hostport.find(':');
  if (colon == std::string::npos) {
    host_ = hostport;
  } else {
    host_ = hostport.substr(0, colon);
    port_ = std::stoi(hostport.substr(colon + 1));
  }
}

std::string RemotePolicy::decide(const std::string& prompt,
                                 const AnnotatedObservation& obs) {
  json body;
  body["prompt"] = prompt;
  body["anchors"] = json::parse(anchors_json(obs.anchors));
  if (options_.send_image) {
    body["image_png_base64"] = base64_encode(encode_png(annotate_frame(obs)));
  }
  const std::string payload = body.dump();

  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt <= options_.retries; ++attempt) {
    httplib::Client client(host_, port_);
    const auto timeout = std::chrono::milliseconds(
        static_cast<int64_t>(options_.timeout_seconds * 1000.0));
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    auto res = client.Post(path_, payload, "application/json");
    if (res && res->status == 200) return res->body;
    last_error = res ? ("HTTP " + std::to_string(res->status))
                     : std::string("transport failure");
  }
  throw PolicyUnavailable("remote policy at " + options_.url +
                          " unavailable: " + last_error);
}

}  // namespace anchornav
