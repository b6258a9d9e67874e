#pragma once

#include <span>
#include <string>

namespace dlm {

struct ScatterSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::string annotation;  // drawn in the upper left corner
};

// Standalone SVG scatterplot; point labels are drawn next to each point when given.
std::string scatter_svg(std::span<const double> x, std::span<const double> y, std::span<const std::string> point_labels,
                        const ScatterSpec& spec);

}  // namespace dlm
