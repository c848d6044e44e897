// SPDX-License-Identifier: Apache-2.0

#include "anchornav/metrics.hpp"

#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <random>

#include "test_support.hpp"

using namespace anchornav;
using anchornav::testing::golden_path;
using anchornav::testing::read_file;
using anchornav::testing::u01;
using anchornav::testing::update_golden;
using anchornav::testing::write_file;

namespace {

std::vector<EpisodeStats> fixture_stats() {
  std::vector<EpisodeStats> all;
  const double paths[] = {9.5, 11.0, 12.5, 40.0};
  const double dtgs[] = {1.0, 2.5, 2.9, 9.0};
  const bool wins[] = {true, true, true, false};
  const int prompts[] = {2, 3, 4, 5};
  for (int i = 0; i < 4; ++i) {
    EpisodeStats e;
    e.scenario = "fixture";
    e.success = wins[i];
    e.dtg = dtgs[i];
    e.path_length = paths[i];
    e.optimal_length = 10.0;
    e.prompts = prompts[i];
    e.goal_observed = wins[i];
    all.push_back(e);
  }
  return all;
}

}  // namespace

TEST_CASE("nre exact values") {
  CHECK(nre({{true, 0.0}, {true, 0.0}}, 3.0, 0.5) == doctest::Approx(0.0));
  CHECK(nre({{false, 1.0}, {false, 7.0}}, 3.0, 0.5) == doctest::Approx(1.0));
  CHECK(nre({{true, 1.0}}, 4.0, 0.5) == doctest::Approx(0.5));
  CHECK_THROWS_AS(nre({}, 3.0, 0.5), EmptySet);
  CHECK_THROWS_AS(nre({{true, 1.0}}, 0.0, 0.5), std::invalid_argument);
}

TEST_CASE("nre clamps the ratio and stays within [0, 1]") {
  // A successful episode logged beyond d_max still contributes at most 1.
  CHECK(nre({{true, 10.0}}, 3.0, 0.5) == doctest::Approx(1.0));
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<NreEpisode> eps;
    const int n = 1 + static_cast<int>(u01(rng) * 10);
    for (int i = 0; i < n; ++i) {
      eps.push_back({u01(rng) < 0.5, u01(rng) * 8.0});
    }
    const double v = nre(eps, 3.0, 0.5);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("nre equals 1 - SR when successful residuals are zero") {
  std::vector<NreEpisode> eps{{true, 0.0}, {false, 4.0}, {true, 0.0},
                              {false, 2.0}};
  const double sr = 0.5;
  CHECK(nre(eps, 3.0, 0.5) == doctest::Approx(1.0 - sr));
}

TEST_CASE("nre matches the hand-computed four-episode fixture") {
  const std::vector<NreEpisode> eps{
      {true, 0.0}, {true, 3.0}, {false, 5.0}, {true, 1.5}};
  // (0 + 1 + 1 + sqrt(0.5)) / 4
  CHECK(nre(eps, 3.0, 0.5) ==
        doctest::Approx((2.0 + std::sqrt(0.5)) / 4.0).epsilon(1e-12));
}

TEST_CASE("spl exact values") {
  CHECK(spl({{true, 10.0, 10.0}}) == doctest::Approx(1.0));
  CHECK(spl({{false, 5.0, 10.0}}) == doctest::Approx(0.0));
  CHECK(spl({{true, 10.0, 8.0}}) == doctest::Approx(0.8));
  // Arriving "shorter than optimal" (success radius) never exceeds 1.
  CHECK(spl({{true, 7.0, 10.0}}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(spl({}), EmptySet);
  CHECK_THROWS_AS(spl({{true, 5.0, 0.0}}), std::invalid_argument);
}

TEST_CASE("spl never exceeds the success rate") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<SplEpisode> eps;
    double successes = 0.0;
    const int n = 1 + static_cast<int>(u01(rng) * 12);
    for (int i = 0; i < n; ++i) {
      const bool win = u01(rng) < 0.6;
      eps.push_back({win, u01(rng) * 30.0, 0.5 + u01(rng) * 20.0});
      successes += win ? 1.0 : 0.0;
    }
    CHECK(spl(eps) <= successes / n + 1e-12);
  }
}

TEST_CASE("summarize of a single episode degenerates correctly") {
  EpisodeStats e;
  e.scenario = "solo";
  e.success = true;
  e.dtg = 2.0;
  e.path_length = 9.0;
  e.optimal_length = 8.0;
  e.prompts = 3;
  e.goal_observed = true;
  const AggregateRow row = summarize({e});
  CHECK(row.episodes == 1);
  CHECK(row.dtg.stddev == doctest::Approx(0.0));
  CHECK(row.dtg.min == doctest::Approx(row.dtg.max));
  CHECK(row.dtg.avg == doctest::Approx(2.0));
  CHECK(row.sr == doctest::Approx(1.0));
  CHECK(row.spl == doctest::Approx(8.0 / 9.0));
}

TEST_CASE("population std over two values") {
  EpisodeStats a, b;
  a.scenario = b.scenario = "pair";
  a.success = b.success = true;
  a.dtg = 2.0;
  b.dtg = 4.0;
  a.path_length = b.path_length = 10.0;
  a.optimal_length = b.optimal_length = 10.0;
  a.prompts = b.prompts = 1;
  const AggregateRow row = summarize({a, b});
  CHECK(row.dtg.avg == doctest::Approx(3.0));
  CHECK(row.dtg.stddev == doctest::Approx(1.0));  // population, divide by N
  CHECK(row.dtg.min == doctest::Approx(2.0));
  CHECK(row.dtg.max == doctest::Approx(4.0));
}

TEST_CASE("summarize is permutation invariant") {
  std::vector<EpisodeStats> stats = fixture_stats();
  const AggregateRow base = summarize(stats);
  std::reverse(stats.begin(), stats.end());
  const AggregateRow flipped = summarize(stats);
  CHECK(base.prompts.avg == doctest::Approx(flipped.prompts.avg));
  CHECK(base.path_length.stddev == doctest::Approx(flipped.path_length.stddev));
  CHECK(base.sr == doctest::Approx(flipped.sr));
  CHECK(base.spl == doctest::Approx(flipped.spl));
  CHECK(base.nre == doctest::Approx(flipped.nre));
  CHECK_THROWS_AS(summarize({}), EmptySet);
}

TEST_CASE("grouping splits rows by scenario name") {
  std::vector<EpisodeStats> stats = fixture_stats();
  EpisodeStats other;
  other.scenario = "another";
  other.success = true;
  other.dtg = 1.0;
  other.path_length = 5.0;
  other.optimal_length = 5.0;
  other.prompts = 1;
  stats.push_back(other);
  const auto rows = summarize_by_scenario(stats);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].scenario == "another");  // sorted by name
  CHECK(rows[1].scenario == "fixture");
  CHECK(rows[1].episodes == 4);
}

TEST_CASE("report table matches the frozen golden") {
  const auto rows = summarize_by_scenario(fixture_stats());
  const std::string table = render_table(rows);
  const std::string path = golden_path("report_fixture.txt");
  if (update_golden()) write_file(path, table);
  const std::string golden = read_file(path);
  REQUIRE_MESSAGE(!golden.empty(),
                  "golden missing; run with ANCHORNAV_UPDATE_GOLDEN=1");
  CHECK(table == golden);
}

TEST_CASE("json report round-trips its fields") {
  const auto rows = summarize_by_scenario(fixture_stats());
  const auto doc = nlohmann::json::parse(report_json(rows));
  REQUIRE(doc.is_array());
  REQUIRE(doc.size() == 1);
  CHECK(doc[0]["scenario"] == "fixture");
  CHECK(doc[0]["episodes"] == 4);
  CHECK(doc[0]["sr"].get<double>() == doctest::Approx(0.75));
  CHECK(doc[0]["prompts"]["avg"].get<double>() == doctest::Approx(3.5));
}
