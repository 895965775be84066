#pragma once

#include <iosfwd>

#include "metrolab/montecarlo.hpp"

namespace metrolab {

// Self-contained log-log line chart of a figure table (first column = x,
// remaining numeric columns = one polyline each). Static output only.
void write_figure_svg(std::ostream& os, const FigureTable& table);

}  // namespace metrolab
