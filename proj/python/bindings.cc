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

// Structured results cross the boundary as JSON text; the Python package
// decodes them.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "gbs/analytics.h"
#include "gbs/game.h"
#include "gbs/log.h"
#include "gbs/manifest.h"
#include "gbs/orchestrator.h"
#include "gbs/replay.h"
#include "gbs/report.h"
#include "json.hpp"

namespace py = pybind11;
using json = nlohmann::json;

namespace {

std::string RunManifest(const std::string& manifest_path, const std::string& out_dir,
                        std::optional<uint64_t> seed, std::optional<int> replications,
                        const std::string& clock, int jobs) {
  gbs::Manifest manifest = gbs::LoadManifest(manifest_path);
  if (seed) manifest.SetBaseSeed(*seed);
  if (replications) manifest.experiment.replications = *replications;
  for (const auto& s : manifest.experiment.sessions) {
    for (const auto& a : s.agents) {
      if (a.kind == gbs::AgentKind::kLlm) {
        throw gbs::Error(gbs::ErrorCode::kInvalidConfig,
                         "the Python runner handles scripted manifests only; use "
                         "the gbs CLI for model-backed runs");
      }
    }
  }
  gbs::ExperimentRunOptions options;
  options.out_dir = out_dir;
  options.session_jobs = jobs;
  options.run.clock = clock == "logical" ? gbs::ClockKind::kLogical : gbs::ClockKind::kWall;
  gbs::ExperimentResult result;
  {
    py::gil_scoped_release release;
    result = gbs::RunExperiment(
        manifest.experiment,
        [](const gbs::SessionConfig&) { return std::make_unique<gbs::DefaultAgentFactory>(); },
        options);
  }
  json sessions = json::array();
  for (const auto& log : result.logs) {
    json games = json::array();
    for (const auto& g : log.games) {
      games.push_back({{"game", g.game_index},
                       {"mode", gbs::FeedbackModeName(g.mode())},
                       {"target", g.target},
                       {"status", gbs::GameStatusName(g.status)},
                       {"rounds", gbs::RoundsToSolution(g)}});
    }
    sessions.push_back({{"session_id", log.meta.session_id},
                        {"n_players", log.meta.n_players},
                        {"games", games}});
  }
  json failures = json::array();
  for (const auto& f : result.failures) {
    failures.push_back({{"session_id", f.session_id}, {"error", f.error}});
  }
  return json{{"sessions", sessions}, {"failures", failures}}.dump();
}

std::string Analyze(const std::vector<std::string>& inputs,
                    std::optional<std::string> out_dir, uint64_t bootstrap_seed,
                    int iterations, const std::string& ci_method) {
  std::vector<std::filesystem::path> paths(inputs.begin(), inputs.end());
  std::vector<gbs::SessionLog> logs;
  for (const auto& file : gbs::CollectLogFiles(paths)) {
    logs.push_back(gbs::ReadSessionLog(file));
  }
  gbs::AnalysisOptions options;
  options.bootstrap_seed = bootstrap_seed;
  options.bootstrap.iterations = iterations;
  options.bootstrap.method = gbs::ParseCiMethod(ci_method);
  gbs::MetricsReport report = gbs::ComputeMetrics(logs, options);
  if (out_dir) gbs::WriteReport(report, *out_dir);
  return gbs::ReportJson(report);
}

std::string Verify(const std::string& path) {
  gbs::ReadOptions read;
  read.allow_incomplete = true;
  gbs::VerifyResult r = gbs::VerifyLog(gbs::ReadSessionLog(path, read));
  return json{{"ok", r.ok},
              {"game", r.game_index ? json(*r.game_index) : json()},
              {"round", r.round_index ? json(*r.round_index) : json()},
              {"detail", r.detail},
              {"games_checked", r.games_checked},
              {"rounds_checked", r.rounds_checked}}
      .dump();
}

std::string ImportTrace(const std::string& csv_path, const std::string& out_dir,
                        const std::string& condition) {
  gbs::ImportOptions options;
  options.condition = condition;
  json written = json::array();
  for (const auto& log : gbs::ImportExternalTraceFile(csv_path, options)) {
    const auto dir = std::filesystem::path(out_dir) / log.meta.session_id;
    std::filesystem::create_directories(dir);
    gbs::WriteSessionLog(log, dir / "log.jsonl");
    written.push_back((dir / "log.jsonl").string());
  }
  return written.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Group Binary Search harness core";

  static py::exception<gbs::Error> error(m, "GbsError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const gbs::Error& e) {
      py::set_error(error, e.what());
    }
  });

  m.def("compute_feedback", [](int group_sum, int target) {
    gbs::FeedbackSignal f = gbs::ComputeFeedback(group_sum, target);
    return py::dict(py::arg("direction") = std::string(gbs::DirectionName(f.direction)),
                    py::arg("magnitude") = f.magnitude,
                    py::arg("group_sum") = f.group_sum, py::arg("solved") = f.solved);
  }, py::arg("group_sum"), py::arg("target"));

  m.def("render_feedback", [](int group_sum, int target, int own_guess,
                              const std::string& mode, bool include_sum) {
    gbs::GameConfig config;
    config.feedback_mode = gbs::ParseFeedbackMode(mode);
    config.include_group_sum_in_feedback = include_sum;
    return gbs::RenderFeedback(gbs::ComputeFeedback(group_sum, target), config, own_guess);
  }, py::arg("group_sum"), py::arg("target"), py::arg("own_guess"),
        py::arg("mode") = "numerical", py::arg("include_sum") = false);

  m.def("fit_line", [](const std::vector<double>& x, const std::vector<double>& y) {
    gbs::LineFit fit = gbs::FitLine(x, y);
    return py::make_tuple(fit.slope, fit.intercept);
  });

  m.def("bootstrap_mean_ci", [](const std::vector<double>& samples, int iterations,
                                double level, uint64_t seed, const std::string& method) {
    gbs::Rng rng(seed);
    gbs::BootstrapOptions options{iterations, level, gbs::ParseCiMethod(method)};
    gbs::BootstrapResult r = gbs::BootstrapMeanCi(samples, rng, options);
    return py::dict(py::arg("mean") = r.mean, py::arg("ci_low") = r.ci_low,
                    py::arg("ci_high") = r.ci_high,
                    py::arg("pct_negative") = r.pct_negative, py::arg("n") = r.n);
  }, py::arg("samples"), py::arg("iterations") = 10000, py::arg("level") = 0.95,
        py::arg("seed") = 0, py::arg("method") = "expanded_percentile");

  m.def("validate_manifest", [](const std::filesystem::path& path) {
    gbs::Manifest manifest = gbs::LoadManifest(path);
    std::vector<int> sizes;
    for (const auto& s : manifest.experiment.sessions) sizes.push_back(s.n_players());
    return py::dict(py::arg("experiment") = manifest.experiment.name,
                    py::arg("sessions") = manifest.experiment.sessions.size(),
                    py::arg("player_counts") = sizes);
  });

  m.def("_run", &RunManifest, py::arg("manifest"), py::arg("out_dir"),
        py::arg("seed") = std::nullopt, py::arg("replications") = std::nullopt,
        py::arg("clock") = "logical", py::arg("jobs") = 1);
  m.def("_analyze", &Analyze, py::arg("inputs"), py::arg("out_dir") = std::nullopt,
        py::arg("bootstrap_seed") = 0, py::arg("iterations") = 10000,
        py::arg("ci_method") = "expanded_percentile");
  m.def("_verify", &Verify, py::arg("path"));
  m.def("_import_trace", &ImportTrace, py::arg("csv_path"), py::arg("out_dir"),
        py::arg("condition") = "Humans");
  m.def("_read_log", [](const std::string& path) {
    return gbs::SerializeSessionLog(gbs::ReadSessionLog(path));
  });
}
