#pragma once

#include <string>
#include <vector>

#include "nexus/matrix.hpp"
#include "nexus/seasonal.hpp"

namespace nexus {

// Blue ramp for heat maps: darker = larger. Returns "#rrggbb".
std::string heat_color(double value, double lo, double hi);

// Line chart of power against period in months, candidate periods marked.
std::string periodogram_svg(const Periodogram& pg, const std::string& title,
                            const std::vector<int>& marked_periods = {6, 12});

// Shaded grid with row/column labels; `values` must already be reordered.
std::string heatmap_svg(const Matrix& values, const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels, const std::string& title);

} // namespace nexus
