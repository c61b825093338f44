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

#include "gbs/analytics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace gbs {
namespace {

uint64_t Fnv1a(std::string_view text) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<double> PlayerColumn(const GameLog& game, size_t player) {
  std::vector<double> out;
  for (const RoundLog& round : game.rounds) out.push_back(round.guesses[player]);
  return out;
}

size_t PlayerCount(const GameLog& game) {
  return game.rounds.empty() ? 0 : game.rounds.front().guesses.size();
}

}  // namespace

int RoundsToSolution(const GameLog& game) {
  switch (game.status) {
    case GameStatus::kSolved:
      for (const RoundLog& round : game.rounds) {
        if (round.feedback.solved) return round.round_index;
      }
      throw Error(ErrorCode::kGameNotTerminal,
                  "game " + std::to_string(game.game_index) +
                      " is marked solved but has no solving round");
    case GameStatus::kExhausted:
      return game.config.max_rounds;
    case GameStatus::kInProgress:
      break;
  }
  throw Error(ErrorCode::kGameNotTerminal,
              "game " + std::to_string(game.game_index) + " is in progress");
}

LineFit FitLine(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kInsufficientPoints, "x and y differ in length");
  }
  const size_t n = x.size();
  if (n < 2) {
    throw Error(ErrorCode::kInsufficientPoints,
                std::to_string(n) + " point(s); need at least 2");
  }
  const double mx = Mean(x);
  const double my = Mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) throw Error(ErrorCode::kDegenerateX, "x has zero variance");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.n = n;
  return fit;
}

double LearningSlope(const SessionLog& run, FeedbackMode mode) {
  std::vector<double> x, y;
  for (const GameLog& game : run.games) {
    if (game.mode() != mode || game.status == GameStatus::kInProgress) continue;
    x.push_back(static_cast<double>(x.size() + 1));
    y.push_back(RoundsToSolution(game));
  }
  if (x.size() < 2) {
    throw Error(ErrorCode::kInsufficientGames,
                run.meta.session_id + ": " + std::to_string(x.size()) + " " +
                    std::string(FeedbackModeName(mode)) + " game(s)");
  }
  return FitLine(x, y).slope;
}

std::string_view CiMethodName(CiMethod method) {
  return method == CiMethod::kPercentile ? "percentile" : "expanded_percentile";
}

CiMethod ParseCiMethod(std::string_view name) {
  if (name == "percentile") return CiMethod::kPercentile;
  if (name == "expanded_percentile" || name == "expanded") {
    return CiMethod::kExpandedPercentile;
  }
  throw Error(ErrorCode::kInvalidConfig,
              "unknown CI method '" + std::string(name) + "'");
}

double BootstrapTailAlpha(size_t n, double level, CiMethod method) {
  const double half = (1.0 - level) / 2.0;
  if (method == CiMethod::kPercentile || n < 2) return half;
  const double df = static_cast<double>(n - 1);
  boost::math::students_t t(df);
  const double tq = boost::math::quantile(t, 1.0 - half);
  const double z = std::sqrt(static_cast<double>(n) / df) * tq;
  return boost::math::cdf(boost::math::normal(), -z);
}

BootstrapResult BootstrapMeanCi(const std::vector<double>& samples, Rng& rng,
                                const BootstrapOptions& options) {
  if (samples.empty()) throw Error(ErrorCode::kEmptySamples, "no samples");
  if (options.iterations < 1) {
    throw Error(ErrorCode::kInvalidConfig, "iterations must be >= 1");
  }
  if (!(options.level > 0.0 && options.level < 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "level must be in (0, 1)");
  }
  const size_t n = samples.size();
  BootstrapResult result;
  result.n = n;
  result.mean = Mean(samples);
  result.pct_negative =
      static_cast<double>(std::count_if(samples.begin(), samples.end(),
                                        [](double v) { return v < 0.0; })) /
      static_cast<double>(n);

  const int b = options.iterations;
  std::vector<double> means(b);
  for (int k = 0; k < b; ++k) {
    double sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
      sum += samples[rng.UniformInt(0, static_cast<int64_t>(n) - 1)];
    }
    means[k] = sum / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const double a = BootstrapTailAlpha(n, options.level, options.method);
  auto lo = static_cast<int64_t>(std::floor(a * b));
  auto hi = static_cast<int64_t>(std::ceil((1.0 - a) * b)) - 1;
  lo = std::clamp<int64_t>(lo, 0, b - 1);
  hi = std::clamp<int64_t>(hi, lo, b - 1);
  result.ci_low = means[lo];
  result.ci_high = means[hi];
  return result;
}

std::vector<ReactionPoint> ReactionPoints(const GameLog& game) {
  std::vector<ReactionPoint> out;
  for (size_t t = 0; t + 1 < game.rounds.size(); ++t) {
    const FeedbackSignal& now = game.rounds[t].feedback;
    const FeedbackSignal& next = game.rounds[t + 1].feedback;
    out.push_back({static_cast<double>(now.SignedError()),
                   static_cast<double>(next.group_sum - now.group_sum)});
  }
  return out;
}

LineFit ReactionSlope(const std::vector<ReactionPoint>& points) {
  std::vector<double> x, y;
  for (const ReactionPoint& p : points) {
    x.push_back(p.error);
    y.push_back(p.delta);
  }
  return FitLine(x, y);
}

std::vector<double> SwitchProportions(const GameLog& game) {
  std::vector<double> out;
  const size_t n = PlayerCount(game);
  for (size_t t = 1; t < game.rounds.size(); ++t) {
    int switched = 0;
    for (size_t i = 0; i < n; ++i) {
      if (game.rounds[t].guesses[i] != game.rounds[t - 1].guesses[i]) {
        ++switched;
      }
    }
    out.push_back(static_cast<double>(switched) / static_cast<double>(n));
  }
  return out;
}

std::vector<SwitchingPoint> SwitchingProfile(
    const std::vector<const GameLog*>& games) {
  std::map<int, std::vector<double>> by_offset;
  for (const GameLog* game : games) {
    const std::vector<double> props = SwitchProportions(*game);
    const int last = static_cast<int>(props.size()) - 1;
    for (int k = 0; k <= last; ++k) by_offset[last - k].push_back(props[k]);
  }
  std::vector<SwitchingPoint> out;
  for (const auto& [offset, values] : by_offset) {
    out.push_back({offset, Mean(values), SampleSd(values),
                   static_cast<int>(values.size())});
  }
  return out;
}

std::vector<double> StayProbabilities(const GameLog& game) {
  std::vector<double> out;
  if (game.rounds.size() < 2) return out;
  const size_t n = PlayerCount(game);
  const double post = static_cast<double>(game.rounds.size() - 1);
  for (size_t i = 0; i < n; ++i) {
    const std::vector<double> column = PlayerColumn(game, i);
    int stays = 0;
    for (size_t t = 1; t < column.size(); ++t) stays += column[t] == column[t - 1];
    out.push_back(stays / post);
  }
  return out;
}

StayExtremes ComputeStayExtremes(
    const std::vector<std::vector<const GameLog*>>& runs) {
  std::vector<double> p0, p1;
  for (const auto& run : runs) {
    int total = 0, zeros = 0, ones = 0;
    for (const GameLog* game : run) {
      for (double p : StayProbabilities(*game)) {
        ++total;
        zeros += p == 0.0;
        ones += p == 1.0;
      }
    }
    if (total == 0) continue;
    p0.push_back(static_cast<double>(zeros) / total);
    p1.push_back(static_cast<double>(ones) / total);
  }
  StayExtremes out;
  out.runs = static_cast<int>(p0.size());
  if (out.runs == 0) return out;
  const double root = std::sqrt(static_cast<double>(out.runs));
  out.p0_mean = Mean(p0);
  out.p0_se = SampleSd(p0) / root;
  out.p1_mean = Mean(p1);
  out.p1_se = SampleSd(p1) / root;
  return out;
}

std::string_view StabilityAxisName(StabilityAxis axis) {
  return axis == StabilityAxis::kMeanStay ? "mean_stay" : "one_minus_switch";
}

StabilityAxis ParseStabilityAxis(std::string_view name) {
  if (name == "mean_stay") return StabilityAxis::kMeanStay;
  if (name == "one_minus_switch") return StabilityAxis::kOneMinusSwitch;
  throw Error(ErrorCode::kInvalidConfig,
              "unknown stability axis '" + std::string(name) + "'");
}

Signature CoordinationSignature(const std::vector<const GameLog*>& games,
                                StabilityAxis axis) {
  std::vector<double> stability, dispersion;
  for (const GameLog* game : games) {
    const std::vector<double> stay = StayProbabilities(*game);
    if (stay.empty()) continue;
    if (axis == StabilityAxis::kMeanStay) {
      stability.push_back(Mean(stay));
    } else {
      stability.push_back(1.0 - Mean(SwitchProportions(*game)));
    }
    dispersion.push_back(PopulationSd(stay));
  }
  Signature out;
  out.games = static_cast<int>(stability.size());
  if (out.games == 0) return out;
  out.stability = Mean(stability);
  out.dispersion = Mean(dispersion);
  out.stability_sd = SampleSd(stability);
  out.dispersion_sd = SampleSd(dispersion);
  return out;
}

Histogram DecisionHistogram(const std::vector<const GameLog*>& games) {
  Histogram out;
  for (const GameLog* game : games) {
    for (const RoundLog& round : game->rounds) {
      for (int guess : round.guesses) ++out[guess];
    }
  }
  return out;
}

Histogram SwitchMagnitudeHistogram(const std::vector<const GameLog*>& games) {
  Histogram out;
  for (const GameLog* game : games) {
    for (size_t t = 1; t < game->rounds.size(); ++t) {
      const auto& now = game->rounds[t].guesses;
      const auto& before = game->rounds[t - 1].guesses;
      for (size_t i = 0; i < now.size(); ++i) ++out[now[i] - before[i]];
    }
  }
  return out;
}

double Mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

double SampleSd(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  const double m = Mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double PopulationSd(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  const double m = Mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

std::string ConditionOf(const SessionLog& log) {
  return log.meta.condition.empty() ? "default" : log.meta.condition;
}

MetricsReport ComputeMetrics(const std::vector<SessionLog>& logs,
                             const AnalysisOptions& options) {
  if (logs.empty()) throw Error(ErrorCode::kNoLogs, "no session logs");
  for (const SessionLog& log : logs) {
    if (log.schema_version != logs.front().schema_version) {
      throw Error(ErrorCode::kMixedSchemaVersions,
                  log.meta.session_id + " has schema_version " +
                      std::to_string(log.schema_version) + ", expected " +
                      std::to_string(logs.front().schema_version));
    }
  }

  // cell -> run index -> games
  std::map<CellKey, std::map<size_t, std::vector<const GameLog*>>> cells;
  for (size_t r = 0; r < logs.size(); ++r) {
    const SessionLog& log = logs[r];
    for (const GameLog& game : log.games) {
      if (game.status == GameStatus::kInProgress) {
        throw Error(ErrorCode::kGameNotTerminal,
                    log.meta.session_id + ": game " +
                        std::to_string(game.game_index) + " is in progress");
      }
      cells[{ConditionOf(log), log.meta.size_category, game.mode()}][r]
          .push_back(&game);
    }
  }

  MetricsReport report;
  report.options = options;
  report.session_count = static_cast<int>(logs.size());

  for (const auto& [key, runs] : cells) {
    std::vector<const GameLog*> games;
    std::vector<std::vector<const GameLog*>> per_run;
    std::vector<double> run_means, all_rounds;
    for (const auto& [r, run_games] : runs) {
      per_run.push_back(run_games);
      std::vector<double> rounds;
      for (const GameLog* game : run_games) {
        games.push_back(game);
        rounds.push_back(RoundsToSolution(*game));
      }
      run_means.push_back(Mean(rounds));
      all_rounds.insert(all_rounds.end(), rounds.begin(), rounds.end());
    }

    RoundsCell cell;
    cell.key = key;
    cell.across_runs = {Mean(run_means), SampleSd(run_means),
                        static_cast<int>(run_means.size())};
    cell.across_games = {Mean(all_rounds), SampleSd(all_rounds),
                         static_cast<int>(all_rounds.size())};
    cell.low_sample = run_means.size() < 2;
    report.rounds_table.push_back(cell);

    report.switching.push_back({key, SwitchingProfile(games)});

    StayRow stay;
    stay.key = key;
    stay.extremes = ComputeStayExtremes(per_run);
    for (const auto& [r, run_games] : runs) {
      for (const GameLog* game : run_games) {
        const std::vector<double> probs = StayProbabilities(*game);
        for (size_t i = 0; i < probs.size(); ++i) {
          stay.values.push_back({logs[r].meta.session_id, game->game_index,
                                 i < logs[r].meta.agents.size()
                                     ? logs[r].meta.agents[i].agent_id
                                     : PlayerLetter(static_cast<int>(i)),
                                 probs[i]});
        }
      }
    }
    report.stay.push_back(std::move(stay));

    report.signatures.push_back(
        {key, CoordinationSignature(games, options.stability_axis)});
    report.histograms.push_back(
        {key, DecisionHistogram(games), SwitchMagnitudeHistogram(games)});
  }

  // Learning slopes pool group sizes; one sample per run.
  std::set<std::string> conditions;
  for (const SessionLog& log : logs) conditions.insert(ConditionOf(log));
  for (const std::string& condition : conditions) {
    for (FeedbackMode mode : {FeedbackMode::kDirectional, FeedbackMode::kNumerical}) {
      LearningRow row;
      row.condition = condition;
      row.mode = mode;
      for (const SessionLog& log : logs) {
        if (ConditionOf(log) != condition) continue;
        try {
          row.slopes.push_back(LearningSlope(log, mode));
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kInsufficientGames) throw;
        }
      }
      if (row.slopes.empty()) continue;
      Rng rng(MixSeed(options.bootstrap_seed ^
                      Fnv1a(condition + "|" +
                            std::string(FeedbackModeName(mode)))));
      row.stats = BootstrapMeanCi(row.slopes, rng, options.bootstrap);
      report.learning_slopes.push_back(std::move(row));
    }

    for (SizeCategory size :
         {SizeCategory::kSmall, SizeCategory::kMedium, SizeCategory::kLarge}) {
      auto it = cells.find({condition, size, FeedbackMode::kNumerical});
      if (it == cells.end()) continue;
      ReactionRow row;
      row.condition = condition;
      row.size = size;
      for (const auto& [r, run_games] : it->second) {
        for (const GameLog* game : run_games) {
          auto points = ReactionPoints(*game);
          row.points.insert(row.points.end(), points.begin(), points.end());
        }
      }
      try {
        row.fit = ReactionSlope(row.points);
        row.fitted = true;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kInsufficientPoints &&
            e.code() != ErrorCode::kDegenerateX) {
          throw;
        }
      }
      report.reaction_slopes.push_back(std::move(row));
    }
  }
  return report;
}

}  // namespace gbs
