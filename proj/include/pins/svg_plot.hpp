#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pins/errors.hpp"

namespace pins {

// Just enough plotting for batch output: one x/y series with optional error
// bars, rendered to a standalone SVG file.
struct PlotSeries {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> y_err;  // may be empty
    std::string x_label = "x";
    std::string y_label = "y";
    std::string title;
    bool log_y = false;
};

namespace detail_svg {

inline std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace detail_svg

inline void write_svg_plot(const std::string& path, const PlotSeries& s)
{
    if (s.x.empty() || s.x.size() != s.y.size())
        throw InvalidInput("write_svg_plot: empty or mismatched series");

    const double width = 720, height = 480;
    const double ml = 80, mr = 30, mt = 40, mb = 60;

    auto ty = [&](double v) { return s.log_y ? std::log10(v) : v; };

    double x_min = s.x.front(), x_max = s.x.front();
    double y_min = ty(s.y.front()), y_max = ty(s.y.front());
    for (std::size_t i = 0; i < s.x.size(); ++i) {
        x_min = std::min(x_min, s.x[i]);
        x_max = std::max(x_max, s.x[i]);
        double lo = s.y[i], hi = s.y[i];
        if (!s.y_err.empty()) {
            lo -= s.y_err[i];
            hi += s.y_err[i];
        }
        if (s.log_y) lo = std::max(lo, 1e-300);
        y_min = std::min(y_min, ty(lo));
        y_max = std::max(y_max, ty(hi));
    }
    if (x_max == x_min) x_max = x_min + 1.0;
    if (y_max == y_min) y_max = y_min + 1.0;
    const double x_pad = 0.05 * (x_max - x_min), y_pad = 0.08 * (y_max - y_min);
    x_min -= x_pad;
    x_max += x_pad;
    y_min -= y_pad;
    y_max += y_pad;

    auto px = [&](double v) { return ml + (v - x_min) / (x_max - x_min) * (width - ml - mr); };
    auto py = [&](double v) {
        return height - mb - (ty(v) - y_min) / (y_max - y_min) * (height - mt - mb);
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // axes + ticks
    svg << "<g stroke=\"black\" fill=\"none\">\n"
        << "<path d=\"M" << ml << " " << mt << " V" << height - mb << " H" << width - mr
        << "\"/>\n</g>\n";
    const int n_ticks = 6;
    svg << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"black\">\n";
    for (int t = 0; t <= n_ticks; ++t) {
        const double xv = x_min + (x_max - x_min) * t / n_ticks;
        const double yv = y_min + (y_max - y_min) * t / n_ticks;
        svg << "<line x1=\"" << px(xv) << "\" y1=\"" << height - mb << "\" x2=\"" << px(xv)
            << "\" y2=\"" << height - mb + 5 << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << px(xv) << "\" y=\"" << height - mb + 20
            << "\" text-anchor=\"middle\">" << detail_svg::num(xv) << "</text>\n";
        const double y_screen = height - mb - (yv - y_min) / (y_max - y_min) * (height - mt - mb);
        svg << "<line x1=\"" << ml - 5 << "\" y1=\"" << y_screen << "\" x2=\"" << ml
            << "\" y2=\"" << y_screen << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << ml - 8 << "\" y=\"" << y_screen + 4
            << "\" text-anchor=\"end\">" << detail_svg::num(s.log_y ? std::pow(10, yv) : yv)
            << "</text>\n";
    }
    svg << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 15
        << "\" text-anchor=\"middle\">" << s.x_label << "</text>\n"
        << "<text x=\"18\" y=\"" << (mt + height - mb) / 2
        << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << (mt + height - mb) / 2
        << ")\">" << s.y_label << (s.log_y ? " (log scale)" : "") << "</text>\n";
    if (!s.title.empty())
        svg << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
            << s.title << "</text>\n";
    svg << "</g>\n";

    // error bars
    if (!s.y_err.empty()) {
        svg << "<g stroke=\"#777777\">\n";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!(s.y_err[i] > 0.0)) continue;
            double lo = s.y[i] - s.y_err[i];
            if (s.log_y) lo = std::max(lo, 1e-300);
            const double hi = s.y[i] + s.y_err[i];
            svg << "<line x1=\"" << px(s.x[i]) << "\" y1=\"" << py(lo) << "\" x2=\""
                << px(s.x[i]) << "\" y2=\"" << py(hi) << "\"/>\n";
        }
        svg << "</g>\n";
    }

    // polyline + markers
    svg << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
        svg << px(s.x[i]) << "," << py(s.y[i]) << (i + 1 < s.x.size() ? " " : "");
    svg << "\"/>\n<g fill=\"#1f77b4\">\n";
    for (std::size_t i = 0; i < s.x.size(); ++i)
        svg << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\"/>\n";
    svg << "</g>\n</svg>\n";

    std::ofstream out(path);
    if (!out) throw Error("cannot open plot file " + path);
    out << svg.str();
}

// Tiny CSV reader for the sweep output schema: header row + numeric columns.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    int column_index(const std::string& name) const
    {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return static_cast<int>(i);
        throw InvalidInput("csv: no column named \"" + name + "\"");
    }
};

inline CsvTable read_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InvalidInput("csv: cannot open " + path);
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput("csv: empty file " + path);
    std::stringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) table.columns.push_back(cell);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::vector<double> vals;
        while (std::getline(row, cell, ',')) vals.push_back(std::atof(cell.c_str()));
        if (vals.size() != table.columns.size())
            throw InvalidInput("csv: ragged row in " + path);
        table.rows.push_back(std::move(vals));
    }
    return table;
}

}  // namespace pins
