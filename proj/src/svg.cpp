#include "metrolab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace metrolab {

void write_figure_svg(std::ostream& os, const FigureTable& table) {
    const int width = 720, height = 480;
    const int ml = 70, mr = 20, mt = 30, mb = 50;
    const char* colors[] = {"#d95f02", "#1b9e77", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"};

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& row : table.rows) {
        if (row.empty() || !(row[0] > 0.0)) continue;
        xmin = std::min(xmin, row[0]);
        xmax = std::max(xmax, row[0]);
        for (std::size_t c = 1; c < row.size(); ++c)
            if (row[c] > 0.0) {
                ymin = std::min(ymin, row[c]);
                ymax = std::max(ymax, row[c]);
            }
    }
    if (!(xmax > xmin) || !(ymax > ymin)) {
        os << "<svg xmlns='http://www.w3.org/2000/svg'/>\n";
        return;
    }

    double lx0 = std::log10(xmin), lx1 = std::log10(xmax);
    double ly0 = std::log10(ymin), ly1 = std::log10(ymax);
    auto px = [&](double x) {
        return ml + (std::log10(x) - lx0) / (lx1 - lx0) * (width - ml - mr);
    };
    auto py = [&](double y) {
        return height - mb - (std::log10(y) - ly0) / (ly1 - ly0) * (height - mt - mb);
    };

    char buf[256];
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
       << "' font-family='sans-serif' font-size='12'>\n";
    os << "<rect width='100%' height='100%' fill='white'/>\n";
    std::snprintf(buf, sizeof(buf),
                  "<text x='%d' y='18' font-size='14'>%s (log-log)</text>\n", ml, table.kind.c_str());
    os << buf;

    // decade grid
    for (int d = static_cast<int>(std::ceil(lx0)); d <= static_cast<int>(std::floor(lx1)); ++d) {
        double X = px(std::pow(10.0, d));
        std::snprintf(buf, sizeof(buf),
                      "<line x1='%.1f' y1='%d' x2='%.1f' y2='%d' stroke='#ddd'/>"
                      "<text x='%.1f' y='%d' text-anchor='middle'>1e%d</text>\n",
                      X, mt, X, height - mb, X, height - mb + 16, d);
        os << buf;
    }
    for (int d = static_cast<int>(std::ceil(ly0)); d <= static_cast<int>(std::floor(ly1)); ++d) {
        double Y = py(std::pow(10.0, d));
        std::snprintf(buf, sizeof(buf),
                      "<line x1='%d' y1='%.1f' x2='%d' y2='%.1f' stroke='#ddd'/>"
                      "<text x='%d' y='%.1f' text-anchor='end'>1e%d</text>\n",
                      ml, Y, width - mr, Y, ml - 6, Y + 4, d);
        os << buf;
    }

    for (std::size_t c = 1; c < table.columns.size(); ++c) {
        os << "<polyline fill='none' stroke='" << colors[(c - 1) % 6] << "' stroke-width='1.5' points='";
        for (const auto& row : table.rows) {
            if (row.size() <= c || !(row[0] > 0.0) || !(row[c] > 0.0)) continue;
            std::snprintf(buf, sizeof(buf), "%.1f,%.1f ", px(row[0]), py(row[c]));
            os << buf;
        }
        os << "'/>\n";
        std::snprintf(buf, sizeof(buf),
                      "<text x='%d' y='%d' fill='%s'>%s</text>\n", width - mr - 150,
                      mt + 16 * static_cast<int>(c), colors[(c - 1) % 6], table.columns[c].c_str());
        os << buf;
    }
    os << "</svg>\n";
}

}  // namespace metrolab
