// Copyright 2026 The errscale Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "errscale/error_model.hpp"
#include "errscale/inference.hpp"

namespace errscale::cli {

struct PlotPoint {
    double c = 0.0;
    double accuracy = 0.0;
    double ci_halfwidth = 0.0;
};

struct CurvePoint {
    double c = 0.0;
    double accuracy = 0.0;
};

struct PlotSeries {
    std::vector<PlotPoint> points;
    std::vector<CurvePoint> curve;  // empty without fit parameters
    std::string title;
    std::string subtitle;
};

inline constexpr int kCurveSamples = 240;

/// Points sorted by c; with parameters, the curve is sampled at
/// kCurveSamples log-spaced c values covering the data range.
PlotSeries build_plot_series(const std::vector<AccuracyPoint>& points, const std::optional<ErrorModelParams>& params,
                             std::string title, std::string subtitle);

/// Columns series,c,accuracy,ci_halfwidth; curve rows leave the half-width empty.
void write_plot_csv(std::ostream& out, const PlotSeries& series);

/// Static SVG: accuracy against c with error bars and the fitted curve.
void write_plot_svg(std::ostream& out, const PlotSeries& series, bool log_x);

}  // namespace errscale::cli
