// SPDX-License-Identifier: Apache-2.0

#include "anchornav/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include <json.hpp>

namespace anchornav {

using nlohmann::json;

EpisodeStats stats_from_log(const EpisodeLog& log) {
  const Scenario scenario = scenario_from_json_text(log.scenario_json);
  EpisodeStats s;
  s.scenario = scenario.name;
  s.success = log.success;
  s.dtg = log.dtg;
  s.path_length = log.path_length;
  s.optimal_length = scenario.optimal_path_length;
  s.prompts = log.prompts_used;
  s.goal_observed = log.goal_observed;
  return s;
}

double nre(const std::vector<NreEpisode>& episodes, double d_max,
           double gamma) {
  if (episodes.empty()) throw EmptySet("nre: no episodes");
  if (d_max <= 0.0 || gamma <= 0.0) {
    throw std::invalid_argument("nre: d_max and gamma must be > 0");
  }
  double total = 0.0;
  for (const NreEpisode& e : episodes) {
    const double ratio = std::clamp(e.distance / d_max, 0.0, 1.0);
    total += e.success ? std::pow(ratio, gamma) : 1.0;
  }
  return total / static_cast<double>(episodes.size());
}

double spl(const std::vector<SplEpisode>& episodes) {
  if (episodes.empty()) throw EmptySet("spl: no episodes");
  double total = 0.0;
  for (const SplEpisode& e : episodes) {
    if (e.optimal_length <= 0.0) {
      throw std::invalid_argument("spl: optimal length must be > 0");
    }
    if (e.success) {
      total += e.optimal_length / std::max(e.path_length, e.optimal_length);
    }
  }
  return total / static_cast<double>(episodes.size());
}

namespace {

StatLine stat_line(const std::vector<double>& values) {
  StatLine s;
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  s.max = values[0];
  s.min = values[0];
  for (double v : values) {
    var += (v - mean) * (v - mean);
    s.max = std::max(s.max, v);
    s.min = std::min(s.min, v);
  }
  s.avg = mean;
  s.stddev = std::sqrt(var / n);
  return s;
}

}  // namespace

AggregateRow summarize(const std::vector<EpisodeStats>& episodes,
                       const MetricsParams& params) {
  if (episodes.empty()) throw EmptySet("summarize: no episodes");

  AggregateRow row;
  row.scenario = episodes[0].scenario;
  row.episodes = static_cast<int>(episodes.size());

  std::vector<double> prompts, paths, dtgs;
  std::vector<NreEpisode> nre_eps;
  std::vector<SplEpisode> spl_eps;
  double successes = 0.0, observed = 0.0;
  for (const EpisodeStats& e : episodes) {
    prompts.push_back(static_cast<double>(e.prompts));
    paths.push_back(e.path_length);
    dtgs.push_back(e.dtg);
    successes += e.success ? 1.0 : 0.0;
    observed += e.goal_observed ? 1.0 : 0.0;
    nre_eps.push_back({e.success, e.dtg});
    spl_eps.push_back({e.success, e.path_length, e.optimal_length});
  }
  row.prompts = stat_line(prompts);
  row.path_length = stat_line(paths);
  row.dtg = stat_line(dtgs);
  row.sr = successes / static_cast<double>(episodes.size());
  row.obs_rate = observed / static_cast<double>(episodes.size());
  row.spl = spl(spl_eps);
  row.nre = nre(nre_eps, params.nre_d_max, params.nre_gamma);
  return row;
}

std::vector<AggregateRow> summarize_by_scenario(
    const std::vector<EpisodeStats>& episodes, const MetricsParams& params) {
  std::map<std::string, std::vector<EpisodeStats>> groups;
  for (const EpisodeStats& e : episodes) groups[e.scenario].push_back(e);
  std::vector<AggregateRow> rows;
  for (const auto& [name, group] : groups) rows.push_back(summarize(group, params));
  return rows;
}

namespace {

std::string fixed(double v, int decimals = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

}  // namespace

std::string render_table(const std::vector<AggregateRow>& rows) {
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"Scenario", "N", "Prompts avg/std/max/min",
                   "Path avg/std/max/min", "DtG avg/std/max/min", "Obs", "SR",
                   "SPL", "NRE"});
  for (const AggregateRow& r : rows) {
    auto line = [](const StatLine& s) {
      return fixed(s.avg) + "/" + fixed(s.stddev) + "/" + fixed(s.max) + "/" +
             fixed(s.min);
    };
    cells.push_back({r.scenario, std::to_string(r.episodes), line(r.prompts),
                     line(r.path_length), line(r.dtg), fixed(r.obs_rate),
                     fixed(r.sr), fixed(r.spl), fixed(r.nre)});
  }

  std::vector<size_t> widths(cells[0].size(), 0);
  for (const auto& row : cells) {
    for (size_t i = 0; i < row.size(); ++i) {
      widths[i] = std::max(widths[i], row[i].size());
    }
  }
  std::string out;
  for (size_t r = 0; r < cells.size(); ++r) {
    for (size_t i = 0; i < cells[r].size(); ++i) {
      out += cells[r][i];
      if (i + 1 < cells[r].size()) {
        out.append(widths[i] - cells[r][i].size() + 2, ' ');
      }
    }
    out += "\n";
    if (r == 0) {
      size_t total = 0;
      for (size_t w : widths) total += w + 2;
      out.append(total - 2, '-');
      out += "\n";
    }
  }
  return out;
}

std::string report_json(const std::vector<AggregateRow>& rows) {
  json arr = json::array();
  for (const AggregateRow& r : rows) {
    auto line = [](const StatLine& s) {
      return json{{"avg", s.avg}, {"std", s.stddev}, {"max", s.max},
                  {"min", s.min}};
    };
    arr.push_back({{"scenario", r.scenario},
                   {"episodes", r.episodes},
                   {"prompts", line(r.prompts)},
                   {"path_length", line(r.path_length)},
                   {"dtg", line(r.dtg)},
                   {"obs_rate", r.obs_rate},
                   {"sr", r.sr},
                   {"spl", r.spl},
                   {"nre", r.nre}});
  }
  return arr.dump(2) + "\n";
}

}  // namespace anchornav
