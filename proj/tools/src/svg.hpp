#pragma once

#include <string>
#include <vector>

namespace potwb::cli {

/// Minimal SVG 1.1 chart writer: stacked panels with linear or log-x axes.
struct Series {
  enum class Style { line, dashed, points, hollow_points, bars };
  std::vector<double> x;
  std::vector<double> y;
  Style style = Style::line;
  std::string color = "#000000";
  std::string label;
};

/// Filled rectangles centred at (x, y) with extents (dx, dy).
struct CellLayer {
  std::vector<double> x;
  std::vector<double> y;
  double dx = 1.0;
  double dy = 1.0;
  std::string color = "#808080";
  double opacity = 0.5;
  std::string label;
};

struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  std::vector<CellLayer> cells;
  std::vector<Series> series;
};

struct Figure {
  std::string title;
  double width = 640.0;
  double panel_height = 300.0;
  std::vector<Panel> panels;

  [[nodiscard]] std::string render() const;
};

[[nodiscard]] std::string xml_escape(const std::string& s);

}  // namespace potwb::cli
