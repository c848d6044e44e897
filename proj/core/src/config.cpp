// SPDX-License-Identifier: Apache-2.0

#include "anchornav/config.hpp"

#include <stdexcept>

#include <json.hpp>

namespace anchornav {

using nlohmann::json;

namespace {

const char* hit_rule_name(HitRule r) {
  return r == HitRule::FirstInformative ? "first_informative" : "first_known";
}

HitRule hit_rule_from(const std::string& s) {
  if (s == "first_informative") return HitRule::FirstInformative;
  if (s == "first_known") return HitRule::FirstKnown;
  throw std::invalid_argument("unknown hit_rule '" + s + "'");
}

// Overlay one group of keys onto a params struct. Angle values are stored in
// radians; *_deg spellings are accepted on input for config-file use.
void overlay_group(SimParams& p, const std::string& group, const json& obj) {
  auto require_number = [&](const json& v, const std::string& key) -> double {
    if (!v.is_number()) {
      throw std::invalid_argument("param " + group + "." + key +
                                  " must be a number");
    }
    return v.get<double>();
  };

  for (const auto& [key, value] : obj.items()) {
    const double num = value.is_number() ? value.get<double>() : 0.0;
    bool handled = true;
    if (group == "camera") {
      if (key == "fx") p.camera.fx = require_number(value, key);
      else if (key == "fy") p.camera.fy = require_number(value, key);
      else if (key == "cx") p.camera.cx = require_number(value, key);
      else if (key == "cy") p.camera.cy = require_number(value, key);
      else if (key == "width") p.camera.width = static_cast<int>(num);
      else if (key == "height") p.camera.height = static_cast<int>(num);
      else handled = false;
    } else if (group == "cap") {
      if (key == "radius") p.cap.radius = require_number(value, key);
      else if (key == "half_angle") p.cap.half_angle = require_number(value, key);
      else if (key == "half_angle_deg") p.cap.half_angle = deg2rad(num);
      else handled = false;
    } else if (group == "sense") {
      if (key == "range") p.sense_range = require_number(value, key);
      else if (key == "rays") p.sense_rays = static_cast<int>(num);
      else if (key == "probe_radius") p.probe_radius = require_number(value, key);
      else handled = false;
    } else if (group == "motion") {
      if (key == "step") p.motion_step = require_number(value, key);
      else handled = false;
    } else if (group == "success") {
      if (key == "radius") p.success_radius = require_number(value, key);
       else handled = false;
    } else if (group == "anchors") {
      if (key == "phi_left") p.anchors.phi_left = require_number(value, key);
      else if (key == "phi_left_deg") p.anchors.phi_left = deg2rad(num);
      else if (key == "phi_right") p.anchors.phi_right = require_number(value, key);
      else if (key == "phi_right_deg") p.anchors.phi_right = deg2rad(num);
      else if (key == "m_nominal") p.anchors.m_nominal = static_cast<int>(num);
      else if (key == "m_max") p.anchors.m_max = static_cast<int>(num);
      else if (key == "obs_threshold") p.anchors.obs_threshold = static_cast<int>(num);
      else if (key == "clearance_radius") p.anchors.clearance_radius = require_number(value, key);
      else handled = false;
    } else if (group == "frontier") {
      if (key == "max_length") p.frontier.max_length = require_number(value, key);
      else if (key == "clearance_radius") p.frontier.clearance_radius = require_number(value, key);
      else if (key == "viewpoint_search_radius") p.frontier.viewpoint_search_radius = require_number(value, key);
      else handled = false;
    } else if (group == "validation") {
      if (key == "k_nearest") p.validation.k_nearest = static_cast<int>(num);
      else if (key == "alpha") p.validation.alpha = require_number(value, key);
      else if (key == "gain_threshold") p.validation.gain_threshold = require_number(value, key);
      else if (key == "lambda") p.validation.lambda = require_number(value, key);
      else if (key == "valid_threshold") p.validation.valid_threshold = require_number(value, key);
      else if (key == "yaw_confidence_threshold") p.validation.yaw_confidence_threshold = require_number(value, key);
      else if (key == "yaw_deviation") p.validation.yaw_deviation_threshold = require_number(value, key);
      else if (key == "yaw_deviation_deg") p.validation.yaw_deviation_threshold = deg2rad(num);
      else if (key == "rays") p.validation.n_rays = static_cast<int>(num);
      else if (key == "epsilon") p.validation.epsilon = require_number(value, key);
      else if (key == "full_circle_rays") p.validation.full_circle_rays = value.get<bool>();
      else if (key == "hit_rule") p.validation.hit_rule = hit_rule_from(value.get<std::string>());
      else handled = false;
    } else if (group == "policy") {
      if (key == "timeout_seconds") p.policy_timeout_seconds = require_number(value, key);
      else if (key == "retries") p.policy_retries = static_cast<int>(num);
      else if (key == "mock_confidence_scale") p.mock_confidence_scale = require_number(value, key);
      else handled = false;
    } else if (group == "jitter") {
      if (key == "radius") p.start_jitter_radius = require_number(value, key);
      else if (key == "yaw") p.start_jitter_yaw = require_number(value, key);
      else if (key == "yaw_deg") p.start_jitter_yaw = deg2rad(num);
      else handled = false;
    } else if (group == "template") {
      const std::string text = value.get<std::string>();
      if (key == "role_goal") p.prompt_template.role_goal = text;
      else if (key == "observation_input") p.prompt_template.observation_input = text;
      else if (key == "important_guidelines") p.prompt_template.important_guidelines = text;
      else if (key == "behavior_options") p.prompt_template.behavior_options = text;
      else if (key == "output_schema") p.prompt_template.output_schema = text;
      else handled = false;
    } else {
      throw std::invalid_argument("unknown param group '" + group + "'");
    }
    if (!handled) {
      throw std::invalid_argument("unknown param key '" + group + "." + key +
                                  "'");
    }
  }
}

void overlay_params(SimParams& p, const json& obj) {
  if (!obj.is_object()) {
    throw std::invalid_argument("params must be a JSON object");
  }
  for (const auto& [group, value] : obj.items()) {
    overlay_group(p, group, value);
  }
}

}  // namespace

std::string params_to_json_text(const SimParams& p) {
  json j;
  j["camera"] = {{"fx", p.camera.fx},   {"fy", p.camera.fy},
                 {"cx", p.camera.cx},   {"cy", p.camera.cy},
                 {"width", p.camera.width}, {"height", p.camera.height}};
  j["cap"] = {{"radius", p.cap.radius}, {"half_angle", p.cap.half_angle}};
  j["sense"] = {{"range", p.sense_range},
                {"rays", p.sense_rays},
                {"probe_radius", p.probe_radius}};
  j["motion"] = {{"step", p.motion_step}};
  j["success"] = {{"radius", p.success_radius}};
  j["anchors"] = {{"phi_left", p.anchors.phi_left},
                  {"phi_right", p.anchors.phi_right},
                  {"m_nominal", p.anchors.m_nominal},
                  {"m_max", p.anchors.m_max},
                  {"obs_threshold", p.anchors.obs_threshold},
                  {"clearance_radius", p.anchors.clearance_radius}};
  j["frontier"] = {
      {"max_length", p.frontier.max_length},
      {"clearance_radius", p.frontier.clearance_radius},
      {"viewpoint_search_radius", p.frontier.viewpoint_search_radius}};
  j["validation"] = {
      {"k_nearest", p.validation.k_nearest},
      {"alpha", p.validation.alpha},
      {"gain_threshold", p.validation.gain_threshold},
      {"lambda", p.validation.lambda},
      {"valid_threshold", p.validation.valid_threshold},
      {"yaw_confidence_threshold", p.validation.yaw_confidence_threshold},
      {"yaw_deviation", p.validation.yaw_deviation_threshold},
      {"rays", p.validation.n_rays},
      {"epsilon", p.validation.epsilon},
      {"full_circle_rays", p.validation.full_circle_rays},
      {"hit_rule", hit_rule_name(p.validation.hit_rule)}};
  j["policy"] = {{"timeout_seconds", p.policy_timeout_seconds},
                 {"retries", p.policy_retries},
                 {"mock_confidence_scale", p.mock_confidence_scale}};
  j["jitter"] = {{"radius", p.start_jitter_radius},
                 {"yaw", p.start_jitter_yaw}};
  j["template"] = {
      {"role_goal", p.prompt_template.role_goal},
      {"observation_input", p.prompt_template.observation_input},
      {"important_guidelines", p.prompt_template.important_guidelines},
      {"behavior_options", p.prompt_template.behavior_options},
      {"output_schema", p.prompt_template.output_schema}};
  return j.dump();
}

SimParams params_from_json_text(const std::string& text) {
  SimParams p;
  overlay_params(p, json::parse(text));
  return p;
}

void apply_config_text(RunConfig& config, const std::string& json_text) {
  const json j = json::parse(json_text);
  if (!j.is_object()) {
    throw std::invalid_argument("config must be a JSON object");
  }
  for (const auto& [key, value] : j.items()) {
    if (key == "scenarios") {
      config.scenario_paths = value.get<std::vector<std::string>>();
    } else if (key == "policy") {
      config.policy_spec = value.get<std::string>();
    } else if (key == "output_dir") {
      config.output_dir = value.get<std::string>();
    } else if (key == "seeds") {
      if (value.is_string()) {
        config.seeds = parse_seed_spec(value.get<std::string>());
      } else {
        config.seeds = value.get<std::vector<uint64_t>>();
      }
    } else if (key == "parallelism") {
      config.parallelism = value.get<int>();
    } else if (key == "render") {
      config.render = value.get<bool>();
    } else if (key == "params") {
      overlay_params(config.params, value);
    } else {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
}

void apply_override(SimParams& params, const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw std::invalid_argument("override must look like group.key=value: " +
                                assignment);
  }
  const std::string path = assignment.substr(0, eq);
  const std::string value_text = assignment.substr(eq + 1);
  const size_t dot = path.find('.');
  if (dot == std::string::npos) {
    throw std::invalid_argument("override key must be group.key: " + path);
  }

  json value = json::parse(value_text, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = value_text;  // bare strings are fine

  json patch;
  patch[path.substr(0, dot)][path.substr(dot + 1)] = value;
  overlay_params(params, patch);
}

std::vector<uint64_t> parse_seed_spec(const std::string& spec) {
  std::vector<uint64_t> seeds;
  const size_t range = spec.find("..");
  if (range != std::string::npos) {
    const uint64_t from = std::stoull(spec.substr(0, range));
    const uint64_t to = std::stoull(spec.substr(range + 2));
    if (to < from) throw std::invalid_argument("seed range is reversed: " + spec);
    for (uint64_t s = from; s <= to; ++s) seeds.push_back(s);
    return seeds;
  }
  size_t pos = 0;
  while (pos < spec.size()) {
    const size_t comma = spec.find(',', pos);
    const std::string tok = spec.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (!tok.empty()) seeds.push_back(std::stoull(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (seeds.empty()) throw std::invalid_argument("empty seed spec");
  return seeds;
}

}  // namespace anchornav
