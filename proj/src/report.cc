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

#include "gbs/report.h"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace gbs {
namespace {

using nlohmann::json;

std::string Num(double value, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  std::string s = buf;
  if (s == "-0.000000" || s == "-0.00") s.erase(0, 1);
  return s;
}

// Quotes a CSV field when needed.
std::string Field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json KeyJson(const CellKey& key) {
  return {{"condition", key.condition},
          {"size_category", SizeCategoryName(key.size)},
          {"feedback_mode", FeedbackModeName(key.mode)}};
}

std::string KeyCsv(const CellKey& key) {
  return Field(key.condition) + "," + std::string(SizeCategoryName(key.size)) +
         "," + std::string(FeedbackModeName(key.mode));
}

json HistogramJson(const Histogram& h) {
  json out = json::array();
  for (const auto& [bin, count] : h) out.push_back({bin, count});
  return out;
}

}  // namespace

std::string FormatMeanSd(const MeanSd& value) {
  return Num(value.mean, 2) + " (" + Num(value.sd, 2) + ")";
}

std::string ReportJson(const MetricsReport& report) {
  json j;
  j["session_count"] = report.session_count;
  j["conventions"] = {
      {"ci_method", CiMethodName(report.options.bootstrap.method)},
      {"bootstrap_iterations", report.options.bootstrap.iterations},
      {"bootstrap_level", report.options.bootstrap.level},
      {"bootstrap_seed", report.options.bootstrap_seed},
      {"rounds_sd", "across runs (primary); across games (secondary)"},
      {"switching_alignment", "rounds_before_end, 0 = final round"},
      {"stability_axis", StabilityAxisName(report.options.stability_axis)},
      {"dispersion", "mean over games of population sd of stay probability"},
      {"reaction_fit", "OLS with intercept, numerical games only"},
  };

  json rounds = json::array();
  for (const RoundsCell& c : report.rounds_table) {
    json row = KeyJson(c.key);
    row["mean"] = c.across_runs.mean;
    row["sd"] = c.across_runs.sd;
    row["run_count"] = c.across_runs.count;
    row["game_mean"] = c.across_games.mean;
    row["game_sd"] = c.across_games.sd;
    row["game_count"] = c.across_games.count;
    row["low_sample"] = c.low_sample;
    rounds.push_back(row);
  }
  j["rounds_table"] = rounds;

  json learning = json::array();
  for (const LearningRow& r : report.learning_slopes) {
    learning.push_back({{"condition", r.condition},
                        {"feedback_mode", FeedbackModeName(r.mode)},
                        {"run_count", r.stats.n},
                        {"mean_slope", r.stats.mean},
                        {"ci_low", r.stats.ci_low},
                        {"ci_high", r.stats.ci_high},
                        {"pct_negative", r.stats.pct_negative},
                        {"slopes", r.slopes}});
  }
  j["learning_slopes"] = learning;

  json reaction = json::array();
  for (const ReactionRow& r : report.reaction_slopes) {
    json row = {{"condition", r.condition},
                {"size_category", SizeCategoryName(r.size)},
                {"fitted", r.fitted},
                {"points", r.points.size()}};
    if (r.fitted) {
      row["slope"] = r.fit.slope;
      row["intercept"] = r.fit.intercept;
    }
    reaction.push_back(row);
  }
  j["reaction_slopes"] = reaction;

  json switching = json::array();
  for (const SwitchingRow& r : report.switching) {
    json row = KeyJson(r.key);
    row["profile"] = json::array();
    for (const SwitchingPoint& p : r.profile) {
      row["profile"].push_back({{"rounds_before_end", p.rounds_before_end},
                                {"mean", p.mean},
                                {"sd", p.sd},
                                {"games", p.games}});
    }
    switching.push_back(row);
  }
  j["switching_profile"] = switching;

  json stay = json::array();
  for (const StayRow& r : report.stay) {
    json row = KeyJson(r.key);
    row["p0_mean"] = r.extremes.p0_mean;
    row["p0_se"] = r.extremes.p0_se;
    row["p1_mean"] = r.extremes.p1_mean;
    row["p1_se"] = r.extremes.p1_se;
    row["runs"] = r.extremes.runs;
    row["player_games"] = r.values.size();
    stay.push_back(row);
  }
  j["stay_stats"] = stay;

  json signatures = json::array();
  for (const SignatureRow& r : report.signatures) {
    json row = KeyJson(r.key);
    row["stability"] = r.signature.stability;
    row["dispersion"] = r.signature.dispersion;
    row["stability_sd"] = r.signature.stability_sd;
    row["dispersion_sd"] = r.signature.dispersion_sd;
    row["games"] = r.signature.games;
    signatures.push_back(row);
  }
  j["signature_points"] = signatures;

  json hist = json::array();
  for (const HistogramRow& r : report.histograms) {
    json row = KeyJson(r.key);
    row["decisions"] = HistogramJson(r.decisions);
    row["switch_magnitudes"] = HistogramJson(r.switch_magnitudes);
    hist.push_back(row);
  }
  j["histograms"] = hist;
  return j.dump(2) + "\n";
}

std::string RoundsGridCsv(const MetricsReport& report) {
  std::set<std::string> conditions;
  std::map<std::pair<std::string, std::string>, const RoundsCell*> cells;
  const SizeCategory sizes[] = {SizeCategory::kSmall, SizeCategory::kMedium,
                                SizeCategory::kLarge};
  const FeedbackMode modes[] = {FeedbackMode::kNumerical,
                                FeedbackMode::kDirectional};
  auto column = [](SizeCategory s, FeedbackMode m) {
    return std::string(SizeCategoryName(s)) + "_" +
           std::string(FeedbackModeName(m));
  };
  for (const RoundsCell& c : report.rounds_table) {
    conditions.insert(c.key.condition);
    cells[{c.key.condition, column(c.key.size, c.key.mode)}] = &c;
  }
  std::ostringstream out;
  out << "condition";
  for (SizeCategory s : sizes) {
    for (FeedbackMode m : modes) out << "," << column(s, m);
  }
  out << "\n";
  for (const std::string& condition : conditions) {
    out << Field(condition);
    for (SizeCategory s : sizes) {
      for (FeedbackMode m : modes) {
        out << ",";
        auto it = cells.find({condition, column(s, m)});
        if (it == cells.end()) continue;
        std::string cell = FormatMeanSd(it->second->across_runs);
        if (it->second->low_sample) cell += "*";
        out << Field(cell);
      }
    }
    out << "\n";
  }
  return out.str();
}

std::string RoundsLongCsv(const MetricsReport& report) {
  std::ostringstream out;
  out << "condition,size_category,feedback_mode,mean,sd,run_count,game_mean,"
         "game_sd,game_count,low_sample\n";
  for (const RoundsCell& c : report.rounds_table) {
    out << KeyCsv(c.key) << "," << Num(c.across_runs.mean) << ","
        << Num(c.across_runs.sd) << "," << c.across_runs.count << ","
        << Num(c.across_games.mean) << "," << Num(c.across_games.sd) << ","
        << c.across_games.count << "," << (c.low_sample ? 1 : 0) << "\n";
  }
  return out.str();
}

std::string LearningSlopesCsv(const MetricsReport& report) {
  std::ostringstream out;
  out << "condition,feedback_mode,runs,mean_slope,ci_low,ci_high,pct_negative\n";
  for (const LearningRow& r : report.learning_slopes) {
    out << Field(r.condition) << "," << FeedbackModeName(r.mode) << ","
        << r.stats.n << "," << Num(r.stats.mean) << "," << Num(r.stats.ci_low)
        << "," << Num(r.stats.ci_high) << ","
        << Num(100.0 * r.stats.pct_negative, 2) << "\n";
  }
  return out.str();
}

std::string ReactionSlopesCsv(const MetricsReport& report) {
  std::ostringstream out;
  out << "condition,size_category,slope,intercept,points\n";
  for (const ReactionRow& r : report.reaction_slopes) {
    out << Field(r.condition) << "," << SizeCategoryName(r.size) << ","
        << (r.fitted ? Num(r.fit.slope) : "") << ","
        << (r.fitted ? Num(r.fit.intercept) : "") << "," << r.points.size()
        << "\n";
  }
  return out.str();
}

std::string ReactionPointsCsv(const MetricsReport& report) {
  std::ostringstream out;
  out << "condition,size_category,error,delta\n";
  for (const ReactionRow& r : report.reaction_slopes) {
    for (const ReactionPoint& p : r.points) {
      out << Field(r.condition) << "," << SizeCategoryName(r.size) << ","
          << Num(p.error, 0) << "," << Num(p.delta, 0) << "\n";
    }
  }
  return out.str();
}

std::string SwitchingCsv(const MetricsReport& report) {
  std::ostringstream out;
  out << "condition,size_category,feedback_mode,rounds_before_end,mean,sd,"
         "games\n";
  for (const SwitchingRow& r : report.switching) {
    for (const SwitchingPoint& p : r.profile) {
      out << KeyCsv(r.key) << "," << p.rounds_before_end << "," << Num(p.mean)
          << "," << Num(p.sd) << "," << p.games << "\n";
    }
  }
  return out.str();
}

std::string StayExtremesCsv(const MetricsReport& report) {
  std::ostringstream out;
  out << "condition,size_category,feedback_mode,p0_mean,p0_se,p1_mean,p1_se,"
         "runs\n";
  for (const StayRow& r : report.stay) {
    const StayExtremes& e = r.extremes;
    out << KeyCsv(r.key) << "," << Num(e.p0_mean) << "," << Num(e.p0_se) << ","
        << Num(e.p1_mean) << "," << Num(e.p1_se) << "," << e.runs << "\n";
  }
  return out.str();
}

std::string StayPointsCsv(const MetricsReport& report) {
  std::ostringstream out;
  out << "condition,size_category,feedback_mode,session_id,game_index,"
         "agent_id,stay_probability\n";
  for (const StayRow& r : report.stay) {
    for (const PlayerGameStay& v : r.values) {
      out << KeyCsv(r.key) << "," << Field(v.session_id) << "," << v.game_index
          << "," << Field(v.agent_id) << "," << Num(v.probability) << "\n";
    }
  }
  return out.str();
}

std::string SignaturesCsv(const MetricsReport& report) {
  std::ostringstream out;
  out << "condition,size_category,feedback_mode,stability,dispersion,"
         "stability_sd,dispersion_sd,games\n";
  for (const SignatureRow& r : report.signatures) {
    const Signature& s = r.signature;
    out << KeyCsv(r.key) << "," << Num(s.stability) << "," << Num(s.dispersion)
        << "," << Num(s.stability_sd) << "," << Num(s.dispersion_sd) << ","
        << s.games << "\n";
  }
  return out.str();
}

std::string HistogramsCsv(const MetricsReport& report) {
  std::ostringstream out;
  out << "condition,size_category,feedback_mode,kind,bin,count\n";
  for (const HistogramRow& r : report.histograms) {
    for (const auto& [bin, count] : r.decisions) {
      out << KeyCsv(r.key) << ",decision," << bin << "," << count << "\n";
    }
    for (const auto& [bin, count] : r.switch_magnitudes) {
      out << KeyCsv(r.key) << ",switch_magnitude," << bin << "," << count
          << "\n";
    }
  }
  return out.str();
}

std::vector<std::filesystem::path> WriteReport(
    const MetricsReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kSinkUnavailable, dir.string() + ": " + ec.message());
  const std::pair<const char*, std::string> files[] = {
      {"report.json", ReportJson(report)},
      {"rounds_table.csv", RoundsGridCsv(report)},
      {"rounds_long.csv", RoundsLongCsv(report)},
      {"learning_slopes.csv", LearningSlopesCsv(report)},
      {"reaction_slopes.csv", ReactionSlopesCsv(report)},
      {"reaction_points.csv", ReactionPointsCsv(report)},
      {"switching_profile.csv", SwitchingCsv(report)},
      {"stay_extremes.csv", StayExtremesCsv(report)},
      {"stay_points.csv", StayPointsCsv(report)},
      {"signatures.csv", SignaturesCsv(report)},
      {"histograms.csv", HistogramsCsv(report)},
  };
  std::vector<std::filesystem::path> written;
  for (const auto& [name, content] : files) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::kSinkUnavailable, path.string());
    out << content;
    if (!out) throw Error(ErrorCode::kSinkUnavailable, path.string());
    written.push_back(path);
  }
  return written;
}

}  // namespace gbs
