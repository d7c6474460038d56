#ifndef OBA_PLOT_HPP
#define OBA_PLOT_HPP

#include <string>
#include <vector>

#include "oba/tensor.hpp"

namespace oba::plot {

inline constexpr int kWidth = 800;
inline constexpr int kHeight = 500;

/// Bars of log10(1 + count) over 0.5 mm label bins.
std::string histogram_svg(const std::vector<double>& labels, double bin_width = 0.5);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// MAE against the swept parameter as a single polyline.
std::string ablation_svg(const std::vector<Point>& points, const std::string& x_label, const std::string& y_label = "MAE (mm)");

struct Panel {
  std::string title;
  RowMatrix<double> values;
};

/// Side-by-side panels sharing one colour scale from 0 (grey) to the maximum
/// across panels (blue), plus a legend bar.
std::string heatmap_svg(const std::vector<Panel>& panels);

/// Colour for `v` on [0, vmax] as "#rrggbb"; vmax <= 0 maps everything to the floor.
std::string colormap(double v, double vmax);

/// Parses an ablation CSV (param,value,mae,...) into (value, mae) points.
std::vector<Point> read_ablation_csv(const std::string& csv, std::string* param = nullptr);

}  // namespace oba::plot

#endif  // OBA_PLOT_HPP
