#include "trackcast/evalkit/plot.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "trackcast/errors.hpp"
#include "trackcast/trackgen/dataset.hpp"

namespace trackcast::evalkit {

namespace {

constexpr std::array<const char*, 6> kColours = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finish() {
        if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
        if (hi == lo) lo -= 0.5, hi += 0.5;
    }
};

} // namespace

std::string render_svg(const PlotSpec& spec) {
    const double left = 70, right = 20, top = 40, bottom = 50;
    const double w = spec.width - left - right, h = spec.height - top - bottom;
    Range xr, yr;
    for (const auto& s : spec.series)
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i)
            if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) xr.add(s.x[i]), yr.add(s.y[i]);
    xr.finish();
    yr.finish();
    auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * w; };
    auto py = [&](double y) { return top + h - (y - yr.lo) / (yr.hi - yr.lo) * h; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << num(left + w / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(spec.title) << "</text>\n";
    o << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = xr.lo + (xr.hi - xr.lo) * k / 4.0, yv = yr.lo + (yr.hi - yr.lo) * k / 4.0;
        o << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(top + h + 16) << "\" text-anchor=\"middle\">" << tick(xv)
          << "</text>\n";
        o << "<text x=\"" << num(left - 6) << "\" y=\"" << num(py(yv) + 4) << "\" text-anchor=\"end\">" << tick(yv)
          << "</text>\n";
    }
    o << "<text x=\"" << num(left + w / 2) << "\" y=\"" << num(spec.height - 10.0) << "\" text-anchor=\"middle\">"
      << escape(spec.x_label) << "</text>\n";
    o << "<text transform=\"translate(16," << num(top + h / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(spec.y_label) << "</text>\n";

    for (std::size_t si = 0; si < spec.series.size(); ++si) {
        const auto& s = spec.series[si];
        const char* colour = kColours[si % kColours.size()];
        const std::size_t n = std::min(s.x.size(), s.y.size());
        if (spec.kind == PlotKind::line) {
            o << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < n; ++i)
                if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) o << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
            o << "\"/>\n";
        } else {
            for (std::size_t i = 0; i < n; ++i)
                if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
                    o << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i])) << "\" r=\"2.5\" fill=\""
                      << colour << "\" fill-opacity=\"0.6\"/>\n";
        }
        o << "<text x=\"" << num(left + w - 8) << "\" y=\"" << num(top + 16 + 16.0 * si) << "\" text-anchor=\"end\" fill=\""
          << colour << "\">" << escape(s.name) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

} // namespace

PlotSpec plot_from_csv(const std::filesystem::path& csv, PlotKind kind, const std::string& x_column,
                       const std::vector<std::string>& y_columns) {
    std::ifstream in(csv);
    if (!in) throw UsageError("cannot open " + csv.string());
    std::string line;
    if (!std::getline(in, line)) throw ParseError(csv.string() + ": empty file");
    const auto header = split(line);
    auto column = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw UsageError(csv.string() + " has no column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t xc = column(x_column);
    std::vector<std::size_t> yc;
    PlotSpec spec;
    spec.kind = kind;
    spec.title = csv.filename().string();
    spec.x_label = x_column;
    for (const auto& name : y_columns) {
        yc.push_back(column(name));
        spec.series.push_back({name, {}, {}});
    }
    spec.y_label = y_columns.size() == 1 ? y_columns.front() : "value";
    auto parse = [](const std::string& s, double& v) {
        if (s.empty()) return false;
        const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        return r.ec == std::errc() && r.ptr == s.data() + s.size();
    };
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split(line);
        double x = 0.0;
        if (xc >= cells.size() || !parse(cells[xc], x)) continue;
        for (std::size_t k = 0; k < yc.size(); ++k) {
            double y = 0.0;
            if (yc[k] < cells.size() && parse(cells[yc[k]], y)) {
                spec.series[k].x.push_back(x);
                spec.series[k].y.push_back(y);
            }
        }
    }
    return spec;
}

} // namespace trackcast::evalkit
