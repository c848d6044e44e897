// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "anchornav/simulator.hpp"

namespace anchornav {

/// One episode reduced to what the report needs.
struct EpisodeStats {
  std::string scenario;
  bool success = false;
  double dtg = 0.0;
  double path_length = 0.0;
  double optimal_length = 1.0;
  int prompts = 0;
  bool goal_observed = false;
};

EpisodeStats stats_from_log(const EpisodeLog& log);

struct NreEpisode {
  bool success = false;
  double distance = 0.0;  // residual distance to the ideal target
};

/// Normalized residual error: mean of (1 - S) + S (D / D_max)^gamma with the
/// ratio clamped to [0, 1]. Throws EmptySet on an empty list.
double nre(const std::vector<NreEpisode>& episodes, double d_max,
           double gamma);

struct SplEpisode {
  bool success = false;
  double path_length = 0.0;
  double optimal_length = 1.0;  // must be > 0
};

/// Success weighted by inverse path length: mean of S l / max(p, l).
/// Throws EmptySet on an empty list.
double spl(const std::vector<SplEpisode>& episodes);

struct StatLine {
  double avg = 0.0;
  double stddev = 0.0;  // population
  double max = 0.0;
  double min = 0.0;
};

struct AggregateRow {
  std::string scenario;
  int episodes = 0;
  StatLine prompts;
  StatLine path_length;
  StatLine dtg;
  double obs_rate = 0.0;
  double sr = 0.0;
  double spl = 0.0;
  double nre = 0.0;  // at the configured d_max/gamma
};

struct MetricsParams {
  double nre_d_max = 3.0;   // the success radius
  double nre_gamma = 0.5;
};

/// Aggregate same-scenario episodes (population std). Throws EmptySet.
AggregateRow summarize(const std::vector<EpisodeStats>& episodes,
                       const MetricsParams& params = {});

/// Group by scenario name (rows sorted by name).
std::vector<AggregateRow> summarize_by_scenario(
    const std::vector<EpisodeStats>& episodes,
    const MetricsParams& params = {});

std::string render_table(const std::vector<AggregateRow>& rows);
std::string report_json(const std::vector<AggregateRow>& rows);

}  // namespace anchornav
