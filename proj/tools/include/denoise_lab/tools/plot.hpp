#pragma once

#include <string>
#include <vector>

namespace denoise_lab::tools {

struct Series {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
};

enum class PlotKind { Line, Scatter };

struct Plot {
  std::string name;  // file stem, e.g. "sweep_wasserstein"
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  PlotKind kind = PlotKind::Line;
  std::vector<Series> series;
};

inline constexpr int kSvgWidth = 800;
inline constexpr int kSvgHeight = 600;

// Standalone SVG document with axes, tick labels, axis labels and a legend.
// Points that cannot be placed (non-finite, or nonpositive on a log axis) are skipped.
std::string render_svg(const Plot& plot);

std::string xml_escape(const std::string& text);

}  // namespace denoise_lab::tools
