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

#include "plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace errscale::cli {

namespace {

constexpr double kWidth = 720, kHeight = 480;
constexpr double kLeft = 72, kRight = 24, kTop = 56, kBottom = 56;

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string num(double v) { return fmt("%.17g", v); }
std::string px(double v) { return fmt("%.2f", v); }

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

std::string tick_label(double v) {
    if (v >= 1e5 || (v > 0 && v < 1e-2)) return fmt("%.0e", v);
    return fmt("%g", v);
}

}  // namespace

PlotSeries build_plot_series(const std::vector<AccuracyPoint>& points, const std::optional<ErrorModelParams>& params,
                             std::string title, std::string subtitle) {
    PlotSeries s;
    s.title = std::move(title);
    s.subtitle = std::move(subtitle);
    for (const auto& p : points) {
        s.points.push_back({static_cast<double>(p.c), p.mean_accuracy, p.ci_halfwidth});
    }
    std::sort(s.points.begin(), s.points.end(), [](const auto& a, const auto& b) { return a.c < b.c; });
    if (params && !s.points.empty()) {
        params->validate();
        const double lo = std::log(s.points.front().c);
        const double hi = std::log(s.points.back().c);
        for (int i = 0; i < kCurveSamples; ++i) {
            // Pin the ends exactly so the curve spans the data range.
            const double c = i == 0 ? s.points.front().c
                             : i == kCurveSamples - 1
                                 ? s.points.back().c
                                 : std::exp(lo + (hi - lo) * i / (kCurveSamples - 1));
            s.curve.push_back({c, accuracy(*params, c)});
        }
    }
    return s;
}

void write_plot_csv(std::ostream& out, const PlotSeries& series) {
    out << "series,c,accuracy,ci_halfwidth\n";
    for (const auto& p : series.points) out << "observed," << num(p.c) << ',' << num(p.accuracy) << ',' << num(p.ci_halfwidth) << '\n';
    for (const auto& p : series.curve) out << "fit," << num(p.c) << ',' << num(p.accuracy) << ",\n";
}

void write_plot_svg(std::ostream& out, const PlotSeries& series, bool log_x) {
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    double c_min = 1, c_max = 10;
    if (!series.points.empty()) {
        c_min = series.points.front().c;
        c_max = series.points.back().c;
    }
    if (log_x && c_min <= 0) throw std::invalid_argument("plot: log axis needs positive c");
    double x_lo, x_hi;
    if (log_x) {
        x_lo = std::floor(std::log10(c_min));
        x_hi = std::ceil(std::log10(c_max));
        if (x_hi <= x_lo) x_hi = x_lo + 1;
    } else {
        x_lo = 0;
        x_hi = c_max > 0 ? c_max * 1.05 : 1;
    }
    auto x_of = [&](double c) {
        const double v = log_x ? std::log10(c) : c;
        return kLeft + (v - x_lo) / (x_hi - x_lo) * plot_w;
    };
    auto y_of = [&](double a) { return kTop + (1.0 - std::clamp(a, 0.0, 1.0)) * plot_h; };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << px(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(series.title)
        << "</text>\n";
    if (!series.subtitle.empty()) {
        out << "<text x=\"" << px(kWidth / 2) << "\" y=\"40\" text-anchor=\"middle\" fill=\"#555\">"
            << xml_escape(series.subtitle) << "</text>\n";
    }

    // Axes, grid and ticks.
    out << "<g stroke=\"#ddd\">\n";
    for (int i = 0; i <= 5; ++i) {
        const double y = y_of(i / 5.0);
        out << "<line x1=\"" << px(kLeft) << "\" y1=\"" << px(y) << "\" x2=\"" << px(kLeft + plot_w) << "\" y2=\"" << px(y) << "\"/>\n";
    }
    out << "</g>\n<g font-size=\"11\">\n";
    for (int i = 0; i <= 5; ++i) {
        out << "<text x=\"" << px(kLeft - 8) << "\" y=\"" << px(y_of(i / 5.0) + 4) << "\" text-anchor=\"end\">"
            << fmt("%.1f", i / 5.0) << "</text>\n";
    }
    std::vector<double> ticks;
    if (log_x) {
        for (double e = x_lo; e <= x_hi + 1e-9; e += 1) ticks.push_back(std::pow(10.0, e));
    } else {
        const double raw = x_hi / 6;
        const double mag = std::pow(10.0, std::floor(std::log10(raw)));
        const double step = raw / mag < 2 ? 2 * mag : raw / mag < 5 ? 5 * mag : 10 * mag;
        for (double t = 0; t <= x_hi + 1e-9; t += step) ticks.push_back(t);
    }
    for (double t : ticks) {
        const double x = x_of(t);
        out << "<line x1=\"" << px(x) << "\" y1=\"" << px(kTop + plot_h) << "\" x2=\"" << px(x) << "\" y2=\""
            << px(kTop + plot_h + 5) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << px(x) << "\" y=\"" << px(kTop + plot_h + 18) << "\" text-anchor=\"middle\">" << tick_label(t)
            << "</text>\n";
    }
    out << "</g>\n";
    out << "<rect x=\"" << px(kLeft) << "\" y=\"" << px(kTop) << "\" width=\"" << px(plot_w) << "\" height=\"" << px(plot_h)
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"" << px(kLeft + plot_w / 2) << "\" y=\"" << px(kHeight - 14) << "\" text-anchor=\"middle\">c"
        << (log_x ? " (log scale)" : "") << "</text>\n";
    out << "<text x=\"18\" y=\"" << px(kTop + plot_h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << px(kTop + plot_h / 2) << ")\">accuracy</text>\n";

    if (!series.curve.empty()) {
        out << "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < series.curve.size(); ++i) {
            out << (i ? " " : "") << px(x_of(series.curve[i].c)) << ',' << px(y_of(series.curve[i].accuracy));
        }
        out << "\"/>\n";
    }
    out << "<g stroke=\"#1f77b4\" fill=\"#1f77b4\">\n";
    for (const auto& p : series.points) {
        const double x = x_of(p.c);
        const double y0 = y_of(p.accuracy - p.ci_halfwidth);
        const double y1 = y_of(p.accuracy + p.ci_halfwidth);
        out << "<line x1=\"" << px(x) << "\" y1=\"" << px(y0) << "\" x2=\"" << px(x) << "\" y2=\"" << px(y1) << "\"/>\n";
        out << "<line x1=\"" << px(x - 3) << "\" y1=\"" << px(y0) << "\" x2=\"" << px(x + 3) << "\" y2=\"" << px(y0) << "\"/>\n";
        out << "<line x1=\"" << px(x - 3) << "\" y1=\"" << px(y1) << "\" x2=\"" << px(x + 3) << "\" y2=\"" << px(y1) << "\"/>\n";
        out << "<circle cx=\"" << px(x) << "\" cy=\"" << px(y_of(p.accuracy)) << "\" r=\"3\"/>\n";
    }
    out << "</g>\n</svg>\n";
}

}  // namespace errscale::cli
