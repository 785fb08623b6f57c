#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>

#include "crisiskit/analytics.hpp"

namespace crisiskit {

/// Minimal multi-series line chart for trend tables. Static SVG, one
/// polyline per series, legend on the right.
inline std::string trend_svg(const TrendTable& table, const std::string& title,
                             int width = 900, int height = 420) {
  const int margin_left = 60, margin_right = 170, margin_top = 40, margin_bottom = 50;
  const int plot_w = width - margin_left - margin_right;
  const int plot_h = height - margin_top - margin_bottom;

  std::int64_t peak = 1;
  for (const auto& [key, row] : table.series)
    for (std::int64_t v : row) peak = std::max(peak, v);

  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  const size_t n = table.months.size();

  std::string svg;
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                "viewBox=\"0 0 %d %d\">\n",
                width, height, width, height);
  svg += buf;
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%d\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">%s"
                "</text>\n",
                margin_left, title.c_str());
  svg += buf;

  // axes
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n",
                margin_left, margin_top, margin_left, margin_top + plot_h);
  svg += buf;
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n",
                margin_left, margin_top + plot_h, margin_left + plot_w, margin_top + plot_h);
  svg += buf;

  auto x_of = [&](size_t i) {
    return n <= 1 ? margin_left + plot_w / 2
                  : margin_left + int(double(plot_w) * double(i) / double(n - 1));
  };
  auto y_of = [&](std::int64_t v) {
    return margin_top + plot_h - int(double(plot_h) * double(v) / double(peak));
  };

  // y-axis ticks at 0, peak/2, peak
  for (std::int64_t tick : {std::int64_t(0), peak / 2, peak}) {
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"%d\" font-family=\"sans-serif\" font-size=\"11\" "
                  "text-anchor=\"end\">%lld</text>\n",
                  margin_left - 6, y_of(tick) + 4, (long long)tick);
    svg += buf;
  }
  // a few month labels
  const size_t label_step = std::max<size_t>(1, n / 8);
  for (size_t i = 0; i < n; i += label_step) {
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"%d\" font-family=\"sans-serif\" font-size=\"10\" "
                  "text-anchor=\"middle\">%s</text>\n",
                  x_of(i), margin_top + plot_h + 16, table.months[i].c_str());
    svg += buf;
  }

  int series_index = 0;
  for (const auto& [key, row] : table.series) {
    const char* color = palette[size_t(series_index) % (sizeof(palette) / sizeof(*palette))];
    std::string points;
    for (size_t i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof(buf), "%d,%d ", x_of(i), y_of(row[i]));
      points += buf;
    }
    std::snprintf(buf, sizeof(buf),
                  "<polyline fill=\"none\" stroke=\"%s\" stroke-width=\"2\" points=\"%s\"/>\n",
                  color, points.c_str());
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<rect x=\"%d\" y=\"%d\" width=\"12\" height=\"12\" fill=\"%s\"/>\n"
                  "<text x=\"%d\" y=\"%d\" font-family=\"sans-serif\" font-size=\"12\">%s"
                  "</text>\n",
                  margin_left + plot_w + 16, margin_top + 18 * series_index, color,
                  margin_left + plot_w + 34, margin_top + 18 * series_index + 10, key.c_str());
    svg += buf;
    ++series_index;
  }
  svg += "</svg>\n";
  return svg;
}

inline void write_trend_svg(const std::string& path, const TrendTable& table,
                            const std::string& title) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << trend_svg(table, title);
}

}  // namespace crisiskit
