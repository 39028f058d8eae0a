#pragma once

#include "itc/pareto.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace itc {

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

/// RFC 4180 quoting when the field holds a comma, quote, or newline.
std::string csv_field(std::string_view value);
/// Shortest round-trip decimal form.
std::string format_number(double value);

/// label,compute,accuracy,n_queries
std::string points_csv(const std::vector<ParetoPoint>& points);

/// Scatter of every point with the front drawn as a step line.
std::string pareto_svg(const std::vector<ParetoPoint>& points, const std::vector<ParetoPoint>& front,
                       std::string_view title = "Accuracy vs. compute");

struct Bar {
    std::string label;
    double value = 0.0;
};

/// Vertical bar chart; negative values hang below the axis.
std::string bar_chart_svg(std::string_view title, std::string_view y_label, const std::vector<Bar>& bars);

} // namespace itc
