// Copyright 2026 The GBS Harness Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// gbs: run experiments, replay and verify logs, compute reports, validate
// inputs and host live sessions.
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>

#include "CLI11.hpp"
#include "gbs/analytics.h"
#include "gbs/live.h"
#include "gbs/log.h"
#include "gbs/manifest.h"
#include "gbs/orchestrator.h"
#include "gbs/replay.h"
#include "gbs/report.h"
#include "json.hpp"

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFailure = 2;

struct Common {
  bool json_output = false;
};

int Fail(const Common& common, const std::string& code, const std::string& detail) {
  if (common.json_output) {
    std::cout << json{{"ok", false}, {"error", code}, {"detail", detail}}.dump()
              << "\n";
  } else {
    std::cerr << "error: " << code << ": " << detail << "\n";
  }
  return kExitFailure;
}

int Fail(const Common& common, const gbs::Error& e) {
  return Fail(common, std::string(gbs::ErrorCodeName(e.code())), e.detail());
}

std::string Fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

// Mean rounds to solution per feedback mode for one session.
json SessionSummary(const gbs::SessionLog& log) {
  json modes = json::object();
  for (gbs::FeedbackMode mode :
       {gbs::FeedbackMode::kDirectional, gbs::FeedbackMode::kNumerical}) {
    std::vector<double> rounds;
    int solved = 0;
    for (const gbs::GameLog& game : log.games) {
      if (game.mode() != mode || game.status == gbs::GameStatus::kInProgress) {
        continue;
      }
      rounds.push_back(gbs::RoundsToSolution(game));
      solved += game.status == gbs::GameStatus::kSolved;
    }
    if (rounds.empty()) continue;
    modes[std::string(gbs::FeedbackModeName(mode))] = {
        {"games", rounds.size()},
        {"solved", solved},
        {"mean_rounds", gbs::Mean(rounds)},
        {"max_rounds", *std::max_element(rounds.begin(), rounds.end())}};
  }
  return {{"session_id", log.meta.session_id},
          {"n_players", log.meta.n_players},
          {"condition", log.meta.condition},
          {"modes", modes}};
}

bool HasLlm(const gbs::SessionConfig& session) {
  for (const auto& a : session.agents) {
    if (a.kind == gbs::AgentKind::kLlm) return true;
  }
  return false;
}

// ---------------------------------------------------------------- run

struct RunArgs {
  std::string manifest;
  std::string out;
  std::string cassette = "off";
  std::string cassette_dir;
  std::optional<int> replications;
  std::optional<uint64_t> seed;
  std::string clock = "wall";
  int jobs = 1;
  bool parallel_decisions = false;
};

int CmdRun(const RunArgs& args, const Common& common) {
  gbs::Manifest manifest = gbs::LoadManifest(args.manifest);
  if (args.seed) manifest.SetBaseSeed(*args.seed);
  if (args.replications) {
    if (*args.replications < 1) {
      throw gbs::Error(gbs::ErrorCode::kInvalidConfig, "--replications must be >= 1");
    }
    manifest.experiment.replications = *args.replications;
  }
  const gbs::CassetteMode mode = gbs::ParseCassetteMode(args.cassette);
  const fs::path out = args.out;
  const fs::path cassettes =
      args.cassette_dir.empty() ? out / "cassettes" : fs::path(args.cassette_dir);
  if (mode == gbs::CassetteMode::kRecord) fs::create_directories(cassettes);

  std::shared_ptr<gbs::ModelRouter> router;
  auto live_router = [&] {
    if (!router) router = gbs::MakeHttpRouter(manifest.providers);
    return router;
  };
  bool any_llm = false;
  for (const auto& s : manifest.experiment.sessions) any_llm |= HasLlm(s);
  if (any_llm && mode != gbs::CassetteMode::kReplay) live_router();

  auto factory_for = [&](const gbs::SessionConfig& session)
      -> std::unique_ptr<gbs::AgentFactory> {
    if (!HasLlm(session)) return std::make_unique<gbs::DefaultAgentFactory>();
    std::shared_ptr<gbs::CompletionService> service;
    if (mode == gbs::CassetteMode::kOff) {
      service = router;
    } else {
      service = std::make_shared<gbs::CassetteService>(
          mode, cassettes / (session.session_id + ".jsonl"),
          mode == gbs::CassetteMode::kRecord ? router : nullptr);
    }
    return std::make_unique<gbs::DefaultAgentFactory>(
        [service](const gbs::SessionConfig&) { return service; });
  };

  gbs::ExperimentRunOptions options;
  options.out_dir = out;
  options.session_jobs = args.jobs;
  options.run.parallel_decisions = args.parallel_decisions;
  options.run.clock =
      args.clock == "logical" ? gbs::ClockKind::kLogical : gbs::ClockKind::kWall;
  gbs::ExperimentResult result =
      gbs::RunExperiment(manifest.experiment, factory_for, options);

  json sessions = json::array();
  for (const auto& log : result.logs) sessions.push_back(SessionSummary(log));
  json failures = json::array();
  for (const auto& f : result.failures) {
    failures.push_back({{"session_id", f.session_id}, {"error", f.error}});
  }
  const bool ok = result.failures.empty();
  if (common.json_output) {
    std::cout << json{{"ok", ok},
                      {"experiment", manifest.experiment.name},
                      {"out", out.string()},
                      {"sessions", sessions},
                      {"failures", failures}}
                     .dump()
              << "\n";
  } else {
    for (const auto& s : sessions) {
      std::cout << s["session_id"].get<std::string>() << "  players="
                << s["n_players"].get<int>();
      for (const auto& [mode_name, m] : s["modes"].items()) {
        std::cout << "  " << mode_name << "="
                  << Fixed(m["mean_rounds"].get<double>()) << " ("
                  << m["solved"].get<int>() << "/" << m["games"].get<int>()
                  << " solved)";
      }
      std::cout << "\n";
    }
    for (const auto& f : result.failures) {
      std::cout << f.session_id << "  FAILED  " << f.error << "\n";
    }
    std::cout << result.logs.size() << " session(s) completed, "
              << result.failures.size() << " failed; logs in " << out.string()
              << "\n";
  }
  return ok ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------- replay

int CmdReplay(const std::string& path, bool verify, const Common& common) {
  gbs::SessionLog log;
  try {
    gbs::ReadOptions read;
    read.allow_incomplete = true;
    log = gbs::ReadSessionLog(path, read);
  } catch (const gbs::Error& e) {
    if (e.code() != gbs::ErrorCode::kValidationFailed) throw;
    if (common.json_output) {
      std::cout << json{{"ok", false}, {"verdict", "FAIL"},
                        {"error", "ValidationFailed"}, {"detail", e.detail()}}
                       .dump()
                << "\n";
    } else {
      std::cout << "FAIL " << e.detail() << "\n";
    }
    return kExitFailure;
  }
  gbs::VerifyResult result = gbs::VerifyLog(log);
  if (common.json_output) {
    json j = {{"ok", result.ok},
              {"verdict", result.ok ? "PASS" : "FAIL"},
              {"session_id", log.meta.session_id},
              {"games_checked", result.games_checked},
              {"rounds_checked", result.rounds_checked}};
    if (!result.ok) {
      j["error"] = "VerificationFailed";
      j["detail"] = result.detail;
      j["game"] = result.game_index ? json(*result.game_index) : json();
      j["round"] = result.round_index ? json(*result.round_index) : json();
    }
    std::cout << j.dump() << "\n";
  } else if (result.ok) {
    std::cout << "PASS " << log.meta.session_id << ": " << result.games_checked
              << " games, " << result.rounds_checked << " rounds reproduced\n";
  } else {
    std::cout << "FAIL " << log.meta.session_id;
    if (result.game_index) std::cout << " game " << *result.game_index;
    if (result.round_index) std::cout << " round " << *result.round_index;
    std::cout << ": " << result.detail << "\n";
  }
  if (!verify) return kExitOk;
  return result.ok ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------- analyze

struct AnalyzeArgs {
  std::vector<std::string> inputs;
  std::string out;
  std::string report = "all";
  uint64_t bootstrap_seed = 0;
  int iterations = 10000;
  std::string ci_method = "expanded_percentile";
  std::string stability_axis = "mean_stay";
  std::string condition = "Humans";
};

std::vector<gbs::SessionLog> LoadInputs(const std::vector<std::string>& inputs,
                                        const std::string& condition) {
  std::vector<gbs::SessionLog> logs;
  std::vector<fs::path> log_inputs;
  for (const std::string& input : inputs) {
    if (fs::path(input).extension() == ".csv") {
      gbs::ImportOptions options;
      options.condition = condition;
      auto imported = gbs::ImportExternalTraceFile(input, options);
      logs.insert(logs.end(), imported.begin(), imported.end());
    } else {
      log_inputs.push_back(input);
    }
  }
  if (!log_inputs.empty()) {
    for (const fs::path& file : gbs::CollectLogFiles(log_inputs)) {
      logs.push_back(gbs::ReadSessionLog(file));
    }
  }
  return logs;
}

int CmdAnalyze(const AnalyzeArgs& args, const Common& common) {
  static const std::set<std::string> kReports = {
      "all", "rounds", "slopes", "reaction", "switching", "stay", "signature", "hist"};
  if (!kReports.count(args.report)) {
    throw CLI::ValidationError("--report", "unknown report '" + args.report + "'");
  }
  std::vector<gbs::SessionLog> logs = LoadInputs(args.inputs, args.condition);
  gbs::AnalysisOptions options;
  options.bootstrap_seed = args.bootstrap_seed;
  options.bootstrap.iterations = args.iterations;
  options.bootstrap.method = gbs::ParseCiMethod(args.ci_method);
  options.stability_axis = gbs::ParseStabilityAxis(args.stability_axis);
  gbs::MetricsReport report = gbs::ComputeMetrics(logs, options);

  std::vector<fs::path> written;
  if (!args.out.empty()) {
    if (args.report == "all") {
      written = gbs::WriteReport(report, args.out);
    } else {
      fs::create_directories(args.out);
      std::vector<std::pair<std::string, std::string>> files = {
          {"report.json", gbs::ReportJson(report)}};
      if (args.report == "rounds") {
        files.push_back({"rounds_table.csv", gbs::RoundsGridCsv(report)});
        files.push_back({"rounds_long.csv", gbs::RoundsLongCsv(report)});
      } else if (args.report == "slopes") {
        files.push_back({"learning_slopes.csv", gbs::LearningSlopesCsv(report)});
      } else if (args.report == "reaction") {
        files.push_back({"reaction_slopes.csv", gbs::ReactionSlopesCsv(report)});
        files.push_back({"reaction_points.csv", gbs::ReactionPointsCsv(report)});
      } else if (args.report == "switching") {
        files.push_back({"switching_profile.csv", gbs::SwitchingCsv(report)});
      } else if (args.report == "stay") {
        files.push_back({"stay_extremes.csv", gbs::StayExtremesCsv(report)});
        files.push_back({"stay_points.csv", gbs::StayPointsCsv(report)});
      } else if (args.report == "signature") {
        files.push_back({"signatures.csv", gbs::SignaturesCsv(report)});
      } else if (args.report == "hist") {
        files.push_back({"histograms.csv", gbs::HistogramsCsv(report)});
      }
      for (const auto& [name, content] : files) {
        const fs::path path = fs::path(args.out) / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw gbs::Error(gbs::ErrorCode::kSinkUnavailable, path.string());
        out << content;
        written.push_back(path);
      }
    }
  }

  if (common.json_output) {
    json files = json::array();
    for (const auto& p : written) files.push_back(p.string());
    json j = json::parse(gbs::ReportJson(report));
    std::cout << json{{"ok", true}, {"files", files}, {"report", j}}.dump() << "\n";
    return kExitOk;
  }
  const std::string& r = args.report;
  if (r == "all" || r == "rounds") {
    std::cout << "Mean rounds to solution (sd across runs)\n"
              << gbs::RoundsGridCsv(report) << "\n";
  }
  if (r == "all" || r == "slopes") {
    std::cout << "Learning slopes\n" << gbs::LearningSlopesCsv(report) << "\n";
  }
  if (r == "all" || r == "reaction") {
    std::cout << "Reaction slopes (numerical)\n" << gbs::ReactionSlopesCsv(report) << "\n";
  }
  if (r == "all" || r == "stay") {
    std::cout << "Stay extremes\n" << gbs::StayExtremesCsv(report) << "\n";
  }
  if (r == "all" || r == "signature") {
    std::cout << "Coordination signatures\n" << gbs::SignaturesCsv(report) << "\n";
  }
  if (r == "switching") std::cout << gbs::SwitchingCsv(report);
  if (r == "hist") std::cout << gbs::HistogramsCsv(report);
  for (const auto& p : written) std::cout << "wrote " << p.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- validate

int CmdValidate(const std::vector<std::string>& inputs, const Common& common) {
  json results = json::array();
  bool ok = true;
  for (const std::string& input : inputs) {
    json entry = {{"path", input}};
    const std::string ext = fs::path(input).extension().string();
    try {
      if (ext == ".jsonl" || fs::is_directory(input)) {
        int count = 0;
        for (const fs::path& file : gbs::CollectLogFiles({input})) {
          gbs::ReadSessionLog(file);
          ++count;
        }
        if (count == 0) throw gbs::Error(gbs::ErrorCode::kNoLogs, input);
        entry["kind"] = "log";
        entry["logs"] = count;
      } else if (ext == ".csv") {
        auto logs = gbs::ImportExternalTraceFile(input);
        entry["kind"] = "trace";
        entry["sessions"] = logs.size();
      } else {
        gbs::Manifest manifest = gbs::LoadManifest(input);
        manifest.experiment.Validate();
        entry["kind"] = "manifest";
        entry["sessions"] = manifest.experiment.sessions.size();
      }
      entry["ok"] = true;
    } catch (const gbs::Error& e) {
      ok = false;
      entry["ok"] = false;
      entry["error"] = gbs::ErrorCodeName(e.code());
      entry["detail"] = e.detail();
    }
    results.push_back(entry);
  }
  if (common.json_output) {
    std::cout << json{{"ok", ok}, {"results", results}}.dump() << "\n";
  } else {
    for (const auto& r : results) {
      if (r["ok"].get<bool>()) {
        std::cout << "OK    " << r["path"].get<std::string>() << " ("
                  << r["kind"].get<std::string>() << ")\n";
      } else {
        std::cout << "ERROR " << r["error"].get<std::string>() << ": "
                  << r["detail"].get<std::string>() << "\n";
      }
    }
  }
  return ok ? kExitOk : kExitFailure;
}

// ---------------------------------------------------------------- serve

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  double round_timeout_s = 60;
  double ttl_s = 1800;
  std::string log_dir;
  std::string static_dir;
  std::string providers;
};

int CmdServe(const ServeArgs& args, const Common& common) {
  // Block termination signals before any thread starts so that only the
  // sigwait below receives them.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  gbs::LiveOptions options;
  options.round_timeout =
      std::chrono::milliseconds(static_cast<int64_t>(args.round_timeout_s * 1000));
  options.lobby_ttl = std::chrono::milliseconds(static_cast<int64_t>(args.ttl_s * 1000));
  if (!args.log_dir.empty()) options.log_dir = args.log_dir;
  std::vector<gbs::EndpointConfig> endpoints = gbs::DefaultEndpoints();
  if (!args.providers.empty()) endpoints = gbs::LoadManifest(args.providers).providers;
  auto router = gbs::MakeHttpRouter(endpoints);
  options.factory_for = [router](const gbs::SessionConfig&) {
    return std::make_unique<gbs::DefaultAgentFactory>(
        [router](const gbs::SessionConfig&) { return router; });
  };
  gbs::LiveService service(options);
  gbs::LiveServer server(service);
  if (!args.static_dir.empty()) server.SetStaticDir(args.static_dir);
  const int port = server.Start(args.host, args.port);
  if (common.json_output) {
    std::cout << json{{"ok", true}, {"host", args.host}, {"port", port}}.dump()
              << std::endl;
  } else {
    std::cout << "serving on http://" << args.host << ":" << port << std::endl;
  }
  int sig = 0;
  sigwait(&set, &sig);
  server.Stop();
  service.Shutdown();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Group Binary Search experiment harness"};
  app.require_subcommand(1);
  Common common;
  app.add_flag("--json", common.json_output, "Machine-readable JSON output");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment manifest");
  run_cmd->add_option("manifest", run.manifest, "Manifest file")->required();
  run_cmd->add_option("--out", run.out, "Output directory")->required();
  run_cmd->add_option("--cassette", run.cassette, "off | record | replay")
      ->check(CLI::IsMember({"off", "record", "replay"}));
  run_cmd->add_option("--cassette-dir", run.cassette_dir,
                      "Cassette directory (default <out>/cassettes)");
  run_cmd->add_option("--replications", run.replications, "Replications per session");
  run_cmd->add_option("--seed", run.seed, "Experiment base seed");
  run_cmd->add_option("--clock", run.clock, "wall | logical timestamps")
      ->check(CLI::IsMember({"wall", "logical"}));
  run_cmd->add_option("--jobs", run.jobs, "Sessions run concurrently")
      ->check(CLI::PositiveNumber);
  run_cmd->add_flag("--parallel-decisions", run.parallel_decisions,
                    "Gather each round's decisions concurrently");
  run_cmd->add_flag("--json", common.json_output, "Machine-readable JSON output");

  std::string replay_path;
  bool verify = false;
  auto* replay_cmd = app.add_subcommand("replay", "Re-drive a log with replay agents");
  replay_cmd->add_option("log", replay_path, "Session log (log.jsonl)")->required();
  replay_cmd->add_flag("--verify", verify, "Fail unless feedback is reproduced exactly");
  replay_cmd->add_flag("--json", common.json_output, "Machine-readable JSON output");

  AnalyzeArgs analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Compute metrics from logs");
  analyze_cmd->add_option("inputs", analyze.inputs, "Log files, directories or trace CSVs")
      ->required();
  analyze_cmd->add_option("--out", analyze.out, "Report directory");
  analyze_cmd->add_option("--report", analyze.report,
                          "all|rounds|slopes|reaction|switching|stay|signature|hist");
  analyze_cmd->add_option("--bootstrap-seed", analyze.bootstrap_seed, "Bootstrap RNG seed");
  analyze_cmd->add_option("--iterations", analyze.iterations, "Bootstrap iterations")
      ->check(CLI::PositiveNumber);
  analyze_cmd->add_option("--ci-method", analyze.ci_method,
                          "expanded_percentile | percentile")
      ->check(CLI::IsMember({"expanded_percentile", "percentile"}));
  analyze_cmd->add_option("--stability-axis", analyze.stability_axis,
                          "mean_stay | one_minus_switch")
      ->check(CLI::IsMember({"mean_stay", "one_minus_switch"}));
  analyze_cmd->add_option("--condition", analyze.condition,
                          "Condition label for imported CSV traces");
  analyze_cmd->add_flag("--json", common.json_output, "Machine-readable JSON output");

  std::vector<std::string> validate_inputs;
  auto* validate_cmd =
      app.add_subcommand("validate", "Check manifests, logs or trace CSVs");
  validate_cmd->add_option("inputs", validate_inputs, "Files or directories")->required();
  validate_cmd->add_flag("--json", common.json_output, "Machine-readable JSON output");

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Host live sessions over HTTP");
  serve_cmd->add_option("--host", serve.host, "Listen address");
  serve_cmd->add_option("--port", serve.port, "Listen port (0 picks one)");
  serve_cmd->add_option("--round-timeout", serve.round_timeout_s,
                        "Seconds per round for human seats (0 waits forever)");
  serve_cmd->add_option("--lobby-ttl", serve.ttl_s, "Idle lobby lifetime in seconds");
  serve_cmd->add_option("--log-dir", serve.log_dir, "Directory for session logs");
  serve_cmd->add_option("--static", serve.static_dir, "Serve a browser client from here");
  serve_cmd->add_option("--providers", serve.providers,
                        "Manifest whose providers section configures endpoints");
  serve_cmd->add_flag("--json", common.json_output, "Machine-readable JSON output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run_cmd) return CmdRun(run, common);
    if (*replay_cmd) return CmdReplay(replay_path, verify, common);
    if (*analyze_cmd) return CmdAnalyze(analyze, common);
    if (*validate_cmd) return CmdValidate(validate_inputs, common);
    if (*serve_cmd) return CmdServe(serve, common);
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  } catch (const gbs::Error& e) {
    return Fail(common, e);
  } catch (const std::exception& e) {
    return Fail(common, "Failure", e.what());
  }
  return kExitUsage;
}
