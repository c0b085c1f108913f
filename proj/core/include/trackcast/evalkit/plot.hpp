#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace trackcast::evalkit {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

enum class PlotKind { line, scatter };

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    PlotKind kind = PlotKind::line;
    std::vector<Series> series;
    int width = 720;
    int height = 420;
};

// Self-contained SVG document. Non-finite points are skipped.
std::string render_svg(const PlotSpec& spec);

// Reads a CSV with a header row. `x_column` selects the abscissa and every
// name in `y_columns` becomes a series; empty cells are skipped. Unknown
// columns throw UsageError.
PlotSpec plot_from_csv(const std::filesystem::path& csv, PlotKind kind, const std::string& x_column,
                       const std::vector<std::string>& y_columns);

} // namespace trackcast::evalkit
