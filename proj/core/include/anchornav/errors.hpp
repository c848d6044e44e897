// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace anchornav {

/// Point lies behind or on the image plane (Z <= 0).
struct NonPositiveDepth : std::domain_error {
  explicit NonPositiveDepth(const std::string& what) : std::domain_error(what) {}
};

/// Horizontal displacement too small to derive a yaw.
struct DegenerateDirection : std::domain_error {
  explicit DegenerateDirection(const std::string& what) : std::domain_error(what) {}
};

/// Grid index or metric point outside map bounds.
struct OutOfBounds : std::out_of_range {
  explicit OutOfBounds(const std::string& what) : std::out_of_range(what) {}
};

/// Probability argument outside the open interval (0, 1).
struct DomainError : std::domain_error {
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Hyperedge references a vertex id that does not exist.
struct DanglingReference : std::invalid_argument {
  explicit DanglingReference(const std::string& what) : std::invalid_argument(what) {}
};

/// An aggregate operation received zero episodes.
struct EmptySet : std::invalid_argument {
  explicit EmptySet(const std::string& what) : std::invalid_argument(what) {}
};

/// Remote decision policy could not be reached within the retry budget.
struct PolicyUnavailable : std::runtime_error {
  explicit PolicyUnavailable(const std::string& what) : std::runtime_error(what) {}
};

/// Scripted decision policy ran past its recorded responses.
struct ScriptExhausted : std::runtime_error {
  explicit ScriptExhausted(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace anchornav
