// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "anchornav/anchors.hpp"
#include "anchornav/errors.hpp"

namespace anchornav {

/// The five-part structured prompt. The guidelines section is authored per
/// scenario and passed through verbatim; the engine attaches no semantics to
/// it.
struct PromptTemplate {
  std::string role_goal;
  std::string observation_input;
  std::string important_guidelines;
  std::string behavior_options;
  std::string output_schema;

  static PromptTemplate defaults();
  bool valid() const {
    return !role_goal.empty() && !observation_input.empty() &&
           !important_guidelines.empty() && !behavior_options.empty() &&
           !output_schema.empty();
  }
};

enum class ActionType { SelectAnchor, AdjustYaw };

struct VlmAction {
  ActionType type = ActionType::AdjustYaw;
  int anchor_index = 0;    // SelectAnchor, 1-based
  double delta_yaw = 0.0;  // AdjustYaw, radians, |delta| <= pi
};

struct VlmResponse {
  std::string interpretation;
  VlmAction action;
  double confidence = 0.5;  // clipped to [eps, 1-eps]
};

enum class ParseErrorKind {
  MalformedDocument,
  SchemaViolation,
  IndexOutOfRange,
  ConfidenceOutOfRange,
};

const char* to_string(ParseErrorKind kind);

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ParseErrorKind kind() const { return kind_; }

 private:
  ParseErrorKind kind_;
};

/// Serialized anchor metadata (JSON array text), shared by the prompt payload
/// and the remote wire format.
std::string anchors_json(const std::vector<Anchor>& anchors);

/// Deterministic concatenation of the five template sections plus anchor
/// metadata and a layer-map summary.
std::string build_prompt(const std::string& task_description,
                         const AnnotatedObservation& obs,
                         const PromptTemplate& tmpl);

/// Strict parse of the output-schema JSON document. Throws ParseError with a
/// distinguishable kind; the returned confidence is already clipped.
VlmResponse parse_response(const std::string& raw, int n_anchors,
                           double epsilon = 1e-3);

/// Canonical output-schema document for a response (degrees at the
/// boundary). parse_response(serialize_response(r)) == r on valid input.
std::string serialize_response(const VlmResponse& r);

/// min(max(c, eps), 1 - eps).
double clip_confidence(double c, double epsilon);

/// A decision source: given the prompt payload and the observation metadata,
/// produce raw response text in the output-schema format.
class DecisionPolicy {
 public:
  virtual ~DecisionPolicy() = default;
  virtual std::string decide(const std::string& prompt,
                             const AnnotatedObservation& obs) = 0;
  virtual std::string name() const = 0;
};

/// Ground-truth-aware oracle: scores each anchor by the better of its
/// geodesic distance to the goal and the closest approach of an unobstructed
/// straight flight toward it, picks the minimizer, and reports the
/// calibrated detection confidence sigma((offset - distance) / scale) (at the
/// success boundary the detector is 50/50). When no anchor shortens the
/// remaining route it re-aims the heading toward the goal instead.
/// Deterministic.
class MockOraclePolicy : public DecisionPolicy {
 public:
  MockOraclePolicy(const MultiLayerMap& world, Vec3 goal,
                   double confidence_scale = 1.0,
                   double confidence_offset = 3.0);
  std::string decide(const std::string& prompt,
                     const AnnotatedObservation& obs) override;
  std::string name() const override { return "mock"; }

 private:
  const MultiLayerMap& world_;
  Vec3 goal_;
  double scale_;
  double offset_;
  std::vector<DistanceField> to_goal_;  // computed once
};

/// Replays a recorded response sequence; throws ScriptExhausted past the end.
class ScriptedPolicy : public DecisionPolicy {
 public:
  explicit ScriptedPolicy(std::vector<std::string> responses);
  std::string decide(const std::string& prompt,
                     const AnnotatedObservation& obs) override;
  std::string name() const override { return "scripted"; }
  size_t consumed() const { return cursor_; }

 private:
  std::vector<std::string> responses_;
  size_t cursor_ = 0;
};

struct RemotePolicyOptions {
  std::string url;  // http://host:port/path
  double timeout_seconds = 60.0;
  int retries = 2;
  bool send_image = false;
};

/// Synchronous HTTP POST of {"prompt", "anchors", "image_png_base64"?} to a
/// configured endpoint; the response body is the output-schema document.
/// Throws PolicyUnavailable after the retry budget is exhausted.
class RemotePolicy : public DecisionPolicy {
 public:
  explicit RemotePolicy(RemotePolicyOptions options);
  std::string decide(const std::string& prompt,
                     const AnnotatedObservation& obs) override;
  std::string name() const override { return "remote"; }

 private:
  RemotePolicyOptions options_;
  std::string host_;
  std::string path_;
  int port_ = 80;
};

}  // namespace anchornav
