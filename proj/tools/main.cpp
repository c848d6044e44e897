// SPDX-License-Identifier: Apache-2.0
//
// anchornav command-line tool: run episodes, report metrics, replay logs,
// render annotated frames.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "anchornav/config.hpp"
#include "anchornav/metrics.hpp"
#include "anchornav/raster.hpp"
#include "anchornav/simulator.hpp"

namespace fs = std::filesystem;
using namespace anchornav;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitEngine = 2;
constexpr int kExitDivergence = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::unique_ptr<DecisionPolicy> make_policy(const std::string& spec,
                                            const Scenario& scenario,
                                            const SimParams& params) {
  if (spec == "mock") {
    return std::make_unique<MockOraclePolicy>(scenario.world, scenario.goal,
                                              params.mock_confidence_scale);
  }
  if (spec.rfind("scripted:", 0) == 0) {
    const std::string path = spec.substr(9);
    const nlohmann::json doc = nlohmann::json::parse(read_file(path));
    return std::make_unique<ScriptedPolicy>(
        doc.get<std::vector<std::string>>());
  }
  if (spec.rfind("remote:", 0) == 0) {
    RemotePolicyOptions options;
    options.url = spec.substr(7);
    options.timeout_seconds = params.policy_timeout_seconds;
    options.retries = params.policy_retries;
    return std::make_unique<RemotePolicy>(options);
  }
  throw std::invalid_argument(
      "policy must be mock, scripted:<path> or remote:<url>, got '" + spec +
      "'");
}

int cmd_run(const RunConfig& config) {
  if (config.scenario_paths.empty()) {
    std::cerr << "run: no scenario files given\n";
    return kExitUsage;
  }
  fs::create_directories(config.output_dir);

  struct Job {
    std::string scenario_path;
    uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const std::string& path : config.scenario_paths) {
    for (const uint64_t seed : config.seeds) jobs.push_back({path, seed});
  }

  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex io_mutex;

  auto worker = [&]() {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= jobs.size() || failed.load()) break;
      const Job& job = jobs[i];
      try {
        const Scenario scenario = load_scenario(job.scenario_path);
        const auto policy =
            make_policy(config.policy_spec, scenario, config.params);

        const std::string stem =
            scenario.name + "__seed" + std::to_string(job.seed);
        FrameObserver observer;
        if (config.render) {
          const fs::path frames_dir = fs::path(config.output_dir) / stem;
          fs::create_directories(frames_dir);
          observer = [frames_dir](int step, const AnnotatedObservation& obs) {
            const std::string png = encode_png(annotate_frame(obs));
            std::ofstream out(
                frames_dir / ("step" + std::to_string(step) + ".png"),
                std::ios::binary);
            out << png;
          };
        }

        const EpisodeLog log =
            run_episode(scenario, *policy, config.params, job.seed, observer);
        const fs::path out_path =
            fs::path(config.output_dir) / (stem + ".jsonl");
        log.save(out_path.string());

        std::lock_guard<std::mutex> lock(io_mutex);
        std::cout << scenario.name << " seed " << job.seed << ": "
                  << to_string(log.outcome) << " (prompts " << log.prompts_used
                  << ", path " << log.path_length << " m, dtg " << log.dtg
                  << " m) -> " << out_path.string() << "\n";
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(io_mutex);
        std::cerr << "run: " << job.scenario_path << " seed " << job.seed
                  << ": " << e.what() << "\n";
        failed.store(true);
      }
    }
  };

  const int n_workers =
      std::max(1, std::min<int>(config.parallelism,
                                static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  return failed.load() ? kExitEngine : kExitOk;
}

int cmd_report(const std::vector<std::string>& log_paths, bool as_json) {
  std::vector<EpisodeStats> stats;
  for (const std::string& path : log_paths) {
    stats.push_back(stats_from_log(EpisodeLog::load(path)));
  }
  const std::vector<AggregateRow> rows = summarize_by_scenario(stats);
  std::cout << (as_json ? report_json(rows) : render_table(rows));
  return kExitOk;
}

int cmd_replay(const std::string& log_path) {
  const EpisodeLog recorded = EpisodeLog::load(log_path);
  const ReplayResult result = replay_log(recorded);
  if (result.identical) {
    std::cout << "replay: identical (" << recorded.steps.size()
              << " steps)\n";
    return kExitOk;
  }
  std::cerr << "replay: divergence at step " << result.first_divergent_step
            << ": " << result.detail << "\n";
  return kExitDivergence;
}

int cmd_annotate(const std::string& log_path, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const EpisodeLog recorded = EpisodeLog::load(log_path);
  size_t frames = 0;
  const ReplayResult result = replay_log(
      recorded, [&](int step, const AnnotatedObservation& obs) {
        const std::string png = encode_png(annotate_frame(obs));
        std::ofstream out(
            fs::path(out_dir) / ("step" + std::to_string(step) + ".png"),
            std::ios::binary);
        out << png;
        ++frames;
      });
  std::cout << "annotate: wrote " << frames << " frames to " << out_dir
            << "\n";
  if (!result.identical) {
    std::cerr << "annotate: warning: log did not replay cleanly ("
              << result.detail << ")\n";
    return kExitDivergence;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anchor-guided navigation engine"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run episodes and write JSONL logs");
  std::vector<std::string> scenarios;
  std::string config_path, policy_spec, output_dir, seed_spec;
  std::vector<std::string> overrides;
  int parallelism = 0;
  bool render = false;
  run->add_option("--scenario", scenarios, "Scenario JSON file(s)");
  run->add_option("--config", config_path, "JSON config file");
  run->add_option("--policy", policy_spec,
                  "mock | scripted:<path> | remote:<url>");
  run->add_option("--out", output_dir, "Output directory");
  run->add_option("--seeds", seed_spec, "Seed list: '3', '1,2,5' or '1..10'");
  run->add_option("--parallel", parallelism, "Worker pool size");
  run->add_flag("--render", render, "Write annotated PNG frames per step");
  run->add_option("--set", overrides,
                  "Param override group.key=value (repeatable)");

  // report
  auto* report = app.add_subcommand("report", "Aggregate logs into a table");
  std::vector<std::string> report_logs;
  bool report_as_json = false;
  report->add_option("logs", report_logs, "Episode log files")->required();
  report->add_flag("--json", report_as_json, "Emit machine-readable JSON");

  // replay
  auto* replay = app.add_subcommand(
      "replay", "Re-run a log from its recorded responses and verify");
  std::string replay_log_path;
  replay->add_option("log", replay_log_path, "Episode log file")->required();

  // annotate
  auto* annotate =
      app.add_subcommand("annotate", "Render annotated frames from a log");
  std::string annotate_log_path, annotate_out = "frames";
  annotate->add_option("log", annotate_log_path, "Episode log file")
      ->required();
  annotate->add_option("--out", annotate_out, "Frame output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run->parsed()) {
      RunConfig config;
      if (!config_path.empty()) apply_config_text(config, read_file(config_path));
      // Flags beat the config file, which beats the defaults.
      if (!scenarios.empty()) config.scenario_paths = scenarios;
      if (!policy_spec.empty()) config.policy_spec = policy_spec;
      if (!output_dir.empty()) config.output_dir = output_dir;
      if (!seed_spec.empty()) config.seeds = parse_seed_spec(seed_spec);
      if (parallelism > 0) config.parallelism = parallelism;
      if (render) config.render = true;
      for (const std::string& o : overrides) apply_override(config.params, o);
      return cmd_run(config);
    }
    if (report->parsed()) return cmd_report(report_logs, report_as_json);
    if (replay->parsed()) return cmd_replay(replay_log_path);
    if (annotate->parsed()) return cmd_annotate(annotate_log_path, annotate_out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEngine;
  }
  return kExitUsage;
}
