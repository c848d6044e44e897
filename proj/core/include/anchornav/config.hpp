// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "anchornav/simulator.hpp"

namespace anchornav {

/// Everything a batch run needs. Precedence: defaults, then the config file,
/// then command-line flags (no environment variables, so a run is fully
/// reproducible from (config, scenario, seed)).
struct RunConfig {
  std::vector<std::string> scenario_paths;
  std::string policy_spec = "mock";  // mock | scripted:<path> | remote:<url>
  std::string output_dir = "runs";
  std::vector<uint64_t> seeds = {1};
  int parallelism = 1;
  bool render = false;
  SimParams params;
};

/// Merge a JSON config document into `config`. Unknown keys are rejected.
void apply_config_text(RunConfig& config, const std::string& json_text);

/// Apply one dotted-path override like "validation.alpha=12" or
/// "cap.half_angle_deg=55". Throws std::invalid_argument on unknown keys or
/// unparsable values.
void apply_override(SimParams& params, const std::string& assignment);

/// "3", "1,4,9" or "1..10" (inclusive).
std::vector<uint64_t> parse_seed_spec(const std::string& spec);

}  // namespace anchornav
