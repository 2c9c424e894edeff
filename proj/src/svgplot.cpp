#include "spt/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "spt/tensor.hpp"

namespace spt {

namespace {

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '&') out += "&amp;";
        else if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else out += c;
    }
    return out;
}

}  // namespace

void write_line_plot(const std::string& path, const std::string& title,
                     const std::string& xlabel, const std::string& ylabel,
                     const std::vector<PlotSeries>& series) {
    bool any = false;
    for (const auto& s : series) {
        check(s.x.size() == s.y.size(), "plot: x/y length mismatch in " + s.label);
        if (!s.x.empty()) any = true;
    }
    check(any, "plot: no data");

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (size_t i = 0; i < s.x.size(); ++i) {
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    const int W = 720, H = 460;
    const int left = 70, right = 180, top = 50, bottom = 55;
    const double pw = W - left - right, ph = H - top - bottom;
    auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
        << "\" height=\"" << H << "\" font-family=\"sans-serif\">\n"
        << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
        << "<text x=\"" << (left + pw / 2) << "\" y=\"25\" text-anchor=\"middle\" "
           "font-size=\"15\">" << escape(title) << "</text>\n";
    // axes
    svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
        << "\" y2=\"" << (top + ph) << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << left << "\" y1=\"" << (top + ph) << "\" x2=\""
        << (left + pw) << "\" y2=\"" << (top + ph) << "\" stroke=\"black\"/>\n";
    const int nticks = 5;
    for (int t = 0; t <= nticks; ++t) {
        const double xv = xmin + (xmax - xmin) * t / nticks;
        const double yv = ymin + (ymax - ymin) * t / nticks;
        svg << "<line x1=\"" << px(xv) << "\" y1=\"" << (top + ph) << "\" x2=\""
            << px(xv) << "\" y2=\"" << (top + ph + 5) << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << px(xv) << "\" y=\"" << (top + ph + 18)
            << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(xv) << "</text>\n"
            << "<line x1=\"" << (left - 5) << "\" y1=\"" << py(yv) << "\" x2=\""
            << left << "\" y2=\"" << py(yv) << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << (left - 8) << "\" y=\"" << (py(yv) + 4)
            << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(yv) << "</text>\n";
    }
    svg << "<text x=\"" << (left + pw / 2) << "\" y=\"" << (H - 12)
        << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(xlabel)
        << "</text>\n"
        << "<text x=\"18\" y=\"" << (top + ph / 2)
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
        << (top + ph / 2) << ")\">" << escape(ylabel) << "</text>\n";
    // curves + legend
    int ci = 0;
    for (const auto& s : series) {
        const char* color = kPalette[ci % 10];
        std::ostringstream pts;
        for (size_t i = 0; i < s.x.size(); ++i)
            pts << (i ? " " : "") << fmt(px(s.x[i])) << "," << fmt(py(s.y[i]));
        svg << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.5\" points=\"" << pts.str() << "\"/>\n";
        const double ly = top + 16 + 18 * ci;
        svg << "<line x1=\"" << (left + pw + 12) << "\" y1=\"" << ly << "\" x2=\""
            << (left + pw + 34) << "\" y2=\"" << ly << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << (left + pw + 40) << "\" y=\"" << (ly + 4)
            << "\" font-size=\"11\">" << escape(s.label) << "</text>\n";
        ++ci;
    }
    svg << "</svg>\n";

    std::ofstream f(path);
    check(f.good(), "cannot write " + path);
    f << svg.str();
}

}  // namespace spt
