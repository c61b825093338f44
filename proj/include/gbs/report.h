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

#ifndef GBS_REPORT_H_
#define GBS_REPORT_H_

#include <filesystem>
#include <string>
#include <vector>

#include "gbs/analytics.h"

namespace gbs {

// Whole report as pretty-printed JSON, including the conventions used for
// quantities whose definition is a choice (alignment, axes, CI method).
std::string ReportJson(const MetricsReport& report);

// Grid with one row per condition and one "mean (sd)" column per size
// category and feedback mode. Low-sample cells carry a trailing '*'.
std::string RoundsGridCsv(const MetricsReport& report);
std::string RoundsLongCsv(const MetricsReport& report);
std::string LearningSlopesCsv(const MetricsReport& report);
std::string ReactionSlopesCsv(const MetricsReport& report);
std::string ReactionPointsCsv(const MetricsReport& report);
std::string SwitchingCsv(const MetricsReport& report);
std::string StayExtremesCsv(const MetricsReport& report);
std::string StayPointsCsv(const MetricsReport& report);
std::string SignaturesCsv(const MetricsReport& report);
std::string HistogramsCsv(const MetricsReport& report);

// Writes report.json and every CSV above into `dir`; returns the paths.
// Errors: SinkUnavailable.
std::vector<std::filesystem::path> WriteReport(const MetricsReport& report,
                                               const std::filesystem::path& dir);

// Fixed two-decimal rendering used by the grid ("4.34 (0.82)").
std::string FormatMeanSd(const MeanSd& value);

}  // namespace gbs

#endif  // GBS_REPORT_H_
