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

#ifndef GBS_ANALYTICS_H_
#define GBS_ANALYTICS_H_

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gbs/common.h"
#include "gbs/game.h"
#include "gbs/log.h"

namespace gbs {

// Solving round, or max_rounds for an exhausted game. Errors: GameNotTerminal.
int RoundsToSolution(const GameLog& game);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  size_t n = 0;
};

// Ordinary least squares y = intercept + slope * x. Errors:
// InsufficientPoints (fewer than 2), DegenerateX (x has no variance).
LineFit FitLine(const std::vector<double>& x, const std::vector<double>& y);

// OLS slope of rounds-to-solution against the within-mode game index (1, 2,
// ...). Errors: InsufficientGames when the run has fewer than two terminal
// games of that mode.
double LearningSlope(const SessionLog& run, FeedbackMode mode);

enum class CiMethod {
  kPercentile,
  // Percentile interval read at a widened level so that small samples keep
  // nominal coverage: alpha'/2 = Phi(-sqrt(n/(n-1)) * t_{n-1, 1-alpha/2}).
  kExpandedPercentile,
};
std::string_view CiMethodName(CiMethod method);
CiMethod ParseCiMethod(std::string_view name);

struct BootstrapOptions {
  int iterations = 10000;
  double level = 0.95;
  CiMethod method = CiMethod::kExpandedPercentile;
};

struct BootstrapResult {
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double pct_negative = 0.0;  // fraction of raw samples below zero, in [0, 1]
  size_t n = 0;
};

// Errors: EmptySamples.
BootstrapResult BootstrapMeanCi(const std::vector<double>& samples, Rng& rng,
                                const BootstrapOptions& options = {});

// Tail probability used by the percentile read-out for a sample of size n.
double BootstrapTailAlpha(size_t n, double level, CiMethod method);

// (signed error at round t, group_sum(t+1) - group_sum(t)).
struct ReactionPoint {
  double error = 0.0;
  double delta = 0.0;
};
std::vector<ReactionPoint> ReactionPoints(const GameLog& game);
// Affine OLS over pooled points. Errors: InsufficientPoints, DegenerateX.
LineFit ReactionSlope(const std::vector<ReactionPoint>& points);

// Fraction of players whose guess changed, for each round t >= 2.
std::vector<double> SwitchProportions(const GameLog& game);

struct SwitchingPoint {
  int rounds_before_end = 0;  // 0 = final round
  double mean = 0.0;
  double sd = 0.0;  // sample sd across games; 0 with one game
  int games = 0;
};
std::vector<SwitchingPoint> SwitchingProfile(
    const std::vector<const GameLog*>& games);

// Per-player stay probability over post-initial rounds; empty when the game
// has fewer than two rounds.
std::vector<double> StayProbabilities(const GameLog& game);

struct StayExtremes {
  double p0_mean = 0.0;  // share of player-games with stay probability 0
  double p0_se = 0.0;
  double p1_mean = 0.0;  // share with stay probability 1
  double p1_se = 0.0;
  int runs = 0;
};
// One entry per run; each holds that run's games. Runs without any
// multi-round game are skipped.
StayExtremes ComputeStayExtremes(
    const std::vector<std::vector<const GameLog*>>& runs);

enum class StabilityAxis {
  kMeanStay,        // mean over players and games of stay probability
  kOneMinusSwitch,  // 1 - mean per-round switching proportion
};
std::string_view StabilityAxisName(StabilityAxis axis);
StabilityAxis ParseStabilityAxis(std::string_view name);

struct Signature {
  double stability = 0.0;
  double dispersion = 0.0;  // mean per-game population sd of stay probability
  double stability_sd = 0.0;
  double dispersion_sd = 0.0;
  int games = 0;
};
Signature CoordinationSignature(const std::vector<const GameLog*>& games,
                                StabilityAxis axis = StabilityAxis::kMeanStay);

using Histogram = std::map<int, int64_t>;
Histogram DecisionHistogram(const std::vector<const GameLog*>& games);
Histogram SwitchMagnitudeHistogram(const std::vector<const GameLog*>& games);

double Mean(const std::vector<double>& values);
// Sample standard deviation; 0 for fewer than two values.
double SampleSd(const std::vector<double>& values);
double PopulationSd(const std::vector<double>& values);

// Condition x size category x feedback mode.
struct CellKey {
  std::string condition;
  SizeCategory size = SizeCategory::kSmall;
  FeedbackMode mode = FeedbackMode::kDirectional;

  auto operator<=>(const CellKey&) const = default;
};

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
  int count = 0;
};

struct RoundsCell {
  CellKey key;
  MeanSd across_runs;   // mean and sd of per-run means
  MeanSd across_games;  // every game pooled
  bool low_sample = false;  // fewer than two runs
};

struct LearningRow {
  std::string condition;
  FeedbackMode mode = FeedbackMode::kDirectional;
  BootstrapResult stats;
  std::vector<double> slopes;  // one per run, session order
};

struct ReactionRow {
  std::string condition;
  SizeCategory size = SizeCategory::kSmall;
  bool fitted = false;  // false when the points do not support a fit
  LineFit fit;
  std::vector<ReactionPoint> points;
};

struct SwitchingRow {
  CellKey key;
  std::vector<SwitchingPoint> profile;
};

struct PlayerGameStay {
  std::string session_id;
  int game_index = 0;
  std::string agent_id;
  double probability = 0.0;
};

struct StayRow {
  CellKey key;
  StayExtremes extremes;
  std::vector<PlayerGameStay> values;
};

struct SignatureRow {
  CellKey key;
  Signature signature;
};

struct HistogramRow {
  CellKey key;
  Histogram decisions;
  Histogram switch_magnitudes;
};

struct AnalysisOptions {
  BootstrapOptions bootstrap;
  uint64_t bootstrap_seed = 0;
  StabilityAxis stability_axis = StabilityAxis::kMeanStay;
};

struct MetricsReport {
  AnalysisOptions options;
  int session_count = 0;
  std::vector<RoundsCell> rounds_table;
  std::vector<LearningRow> learning_slopes;
  std::vector<ReactionRow> reaction_slopes;  // numerical games only
  std::vector<SwitchingRow> switching;
  std::vector<StayRow> stay;
  std::vector<SignatureRow> signatures;
  std::vector<HistogramRow> histograms;
};

// Condition label used for grouping; unlabeled sessions become "default".
std::string ConditionOf(const SessionLog& log);

// Errors: NoLogs, MixedSchemaVersions, GameNotTerminal.
MetricsReport ComputeMetrics(const std::vector<SessionLog>& logs,
                             const AnalysisOptions& options = {});

}  // namespace gbs

#endif  // GBS_ANALYTICS_H_
