#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "saliency/errors.hpp"
#include "saliency/matrix.hpp"

namespace saliency {

// Grayscale heatmap: one rect per cell, darkness proportional to the value
// (1 = black, 0 = white; values clamped into [0,1]). Optional row labels.
// Markup is fully deterministic so rendered maps diff cleanly.
inline std::string render_heatmap_svg(const Matrix& matrix, const std::vector<std::string>& row_labels = {}) {
    if (matrix.rows() == 0 || matrix.cols() == 0) throw InputError("heatmap needs a non-empty matrix");
    if (!row_labels.empty() && row_labels.size() != matrix.rows())
        throw InputError("heatmap row labels do not match matrix rows");

    constexpr int cell = 10;
    const int gutter = row_labels.empty() ? 0 : 90;
    const std::size_t width = gutter + matrix.cols() * cell;
    const std::size_t height = matrix.rows() * cell;

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" shape-rendering=\"crispEdges\">\n";
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        if (!row_labels.empty())
            out << "  <text x=\"2\" y=\"" << r * cell + 8 << "\" font-size=\"8\" font-family=\"monospace\">"
                << row_labels[r] << "</text>\n";
        for (std::size_t c = 0; c < matrix.cols(); ++c) {
            const double v = std::min(1.0, std::max(0.0, matrix(r, c)));
            const int gray = static_cast<int>(std::lround(255.0 * (1.0 - v)));
            out << "  <rect x=\"" << gutter + c * cell << "\" y=\"" << r * cell << "\" width=\"" << cell
                << "\" height=\"" << cell << "\" fill=\"rgb(" << gray << ',' << gray << ',' << gray << ")\"/>\n";
        }
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace saliency
