// SPDX-License-Identifier: Apache-2.0
//
// Minimal deterministic SVG line plots: fixed layout, fixed palette, no
// timestamps, so identical inputs produce byte-identical files.

#pragma once

#include <megc/common.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace megc_cli {

struct PlotSeries {
    std::string name;
    std::vector<double> x, y;
};

class SvgPlot {
  public:
    SvgPlot(std::string x_label, std::string y_label)
        : x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

    void add(PlotSeries series) {
        if (series.x.size() != series.y.size() || series.x.empty())
            throw megc::UsageError("plot: series '" + series.name + "' is empty or ragged");
        series_.push_back(std::move(series));
    }

    void add_diagonal() { diagonal_ = true; }

    /// Embedded as an XML comment so the file carries its configuration.
    void set_metadata(std::string metadata) { metadata_ = std::move(metadata); }

    void write(const std::filesystem::path& path) const {
        if (series_.empty()) throw megc::UsageError("plot: nothing to draw");
        double xmin = series_[0].x[0], xmax = xmin, ymin = series_[0].y[0], ymax = ymin;
        for (const auto& s : series_) {
            for (double v : s.x) {
                xmin = std::min(xmin, v);
                xmax = std::max(xmax, v);
            }
            for (double v : s.y) {
                ymin = std::min(ymin, v);
                ymax = std::max(ymax, v);
            }
        }
        if (ymin > 0.0) ymin = 0.0;  // keep the zero line visible
        if (ymax < 0.0) ymax = 0.0;
        if (xmax == xmin) xmax = xmin + 1.0;
        if (ymax == ymin) ymax = ymin + 1.0;
        const double xpad = 0.0, ypad = 0.05 * (ymax - ymin);
        xmin -= xpad;
        xmax += xpad;
        ymin -= ypad;
        ymax += ypad;

        auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * kPlotW; };
        auto py = [&](double y) { return kTop + (1.0 - (y - ymin) / (ymax - ymin)) * kPlotH; };
        auto fmt = [](double v) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.2f", v);
            return std::string(buf);
        };
        auto fmt_tick = [](double v) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.4g", v);
            return std::string(buf);
        };

        std::ofstream out(path);
        if (!out) throw megc::IoError("cannot write '" + path.string() + "'");
        out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
            << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
        if (!metadata_.empty()) out << "<!-- " << metadata_ << " -->\n";
        out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";

        // axes
        out << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop + kPlotH) << "\" x2=\""
            << fmt(kLeft + kPlotW) << "\" y2=\"" << fmt(kTop + kPlotH)
            << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
        out << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop) << "\" x2=\"" << fmt(kLeft)
            << "\" y2=\"" << fmt(kTop + kPlotH) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";

        // zero gridline
        if (ymin < 0.0 && ymax > 0.0)
            out << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(py(0.0)) << "\" x2=\""
                << fmt(kLeft + kPlotW) << "\" y2=\"" << fmt(py(0.0))
                << "\" stroke=\"#bbbbbb\" stroke-width=\"1\" stroke-dasharray=\"4,3\"/>\n";
        if (diagonal_)
            out << "<line x1=\"" << fmt(px(std::max(xmin, ymin))) << "\" y1=\""
                << fmt(py(std::max(xmin, ymin))) << "\" x2=\"" << fmt(px(std::min(xmax, ymax)))
                << "\" y2=\"" << fmt(py(std::min(xmax, ymax)))
                << "\" stroke=\"#cccccc\" stroke-width=\"1\" stroke-dasharray=\"2,3\"/>\n";

        // ticks
        for (int t = 0; t <= 4; ++t) {
            const double xv = xmin + (xmax - xmin) * t / 4.0;
            const double yv = ymin + (ymax - ymin) * t / 4.0;
            out << "<line x1=\"" << fmt(px(xv)) << "\" y1=\"" << fmt(kTop + kPlotH) << "\" x2=\""
                << fmt(px(xv)) << "\" y2=\"" << fmt(kTop + kPlotH + 5)
                << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
            out << "<text x=\"" << fmt(px(xv)) << "\" y=\"" << fmt(kTop + kPlotH + 18)
                << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt_tick(xv) << "</text>\n";
            out << "<line x1=\"" << fmt(kLeft - 5) << "\" y1=\"" << fmt(py(yv)) << "\" x2=\""
                << fmt(kLeft) << "\" y2=\"" << fmt(py(yv))
                << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
            out << "<text x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(py(yv) + 4)
                << "\" font-size=\"11\" text-anchor=\"end\">" << fmt_tick(yv) << "</text>\n";
        }
        out << "<text x=\"" << fmt(kLeft + kPlotW / 2) << "\" y=\"" << fmt(kHeight - 8.0)
            << "\" font-size=\"12\" text-anchor=\"middle\">" << x_label_ << "</text>\n";
        out << "<text x=\"14\" y=\"" << fmt(kTop + kPlotH / 2)
            << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
            << fmt(kTop + kPlotH / 2) << ")\">" << y_label_ << "</text>\n";

        for (std::size_t k = 0; k < series_.size(); ++k) {
            const auto& s = series_[k];
            out << "<polyline fill=\"none\" stroke=\"" << color(k)
                << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (i) out << ' ';
                out << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i]));
            }
            out << "\"/>\n";
        }

        for (std::size_t k = 0; k < series_.size(); ++k) {
            const double ly = kTop + 16.0 * static_cast<double>(k);
            out << "<line x1=\"" << fmt(kLeft + kPlotW + 8) << "\" y1=\"" << fmt(ly + 4)
                << "\" x2=\"" << fmt(kLeft + kPlotW + 28) << "\" y2=\"" << fmt(ly + 4)
                << "\" stroke=\"" << color(k) << "\" stroke-width=\"2\"/>\n";
            out << "<text x=\"" << fmt(kLeft + kPlotW + 32) << "\" y=\"" << fmt(ly + 8)
                << "\" font-size=\"11\">" << series_[k].name << "</text>\n";
        }
        out << "</svg>\n";
        if (!out) throw megc::IoError("write failed for '" + path.string() + "'");
    }

  private:
    static constexpr double kWidth = 760, kHeight = 420;
    static constexpr double kLeft = 60, kTop = 20, kPlotW = 520, kPlotH = 340;

    static const char* color(std::size_t k) {
        static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                        "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
        return palette[k % 8];
    }

    std::string x_label_, y_label_;
    std::string metadata_;
    std::vector<PlotSeries> series_;
    bool diagonal_ = false;
};

}  // namespace megc_cli
