#include "oba/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "oba/error.hpp"
#include "oba/text.hpp"

namespace oba::plot {

namespace {

constexpr double kLeft = 70, kRight = 30, kTop = 40, kBottom = 60;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string open_svg(const std::string& title) {
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  o << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
  return o.str();
}

std::string axes(const std::string& x_label, const std::string& y_label) {
  std::ostringstream o;
  const double x0 = kLeft, y0 = kHeight - kBottom, x1 = kWidth - kRight, y1 = kTop;
  o << "<line class=\"axis\" x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0 << "\" stroke=\"black\"/>\n";
  o << "<line class=\"axis\" x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1 << "\" stroke=\"black\"/>\n";
  o << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
  o << "<text x=\"18\" y=\"" << (y0 + y1) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << (y0 + y1) / 2 << ")\">" << y_label
    << "</text>\n";
  return o.str();
}

std::string tick(double x, double y, const std::string& label, bool horizontal) {
  std::ostringstream o;
  if (horizontal)
    o << "<text x=\"" << num(x) << "\" y=\"" << num(y + 16) << "\" text-anchor=\"middle\" font-size=\"10\">" << label << "</text>\n";
  else
    o << "<text x=\"" << num(x - 6) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\" font-size=\"10\">" << label << "</text>\n";
  return o.str();
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

std::string histogram_svg(const std::vector<double>& labels, double bin_width) {
  if (labels.empty()) throw ArgumentError("histogram: no labels");
  if (!(bin_width > 0)) throw ArgumentError("histogram: bin width must be positive");
  std::map<long long, long long> bins;
  for (double y : labels) {
    if (!std::isfinite(y)) throw ArgumentError("histogram: non-finite label");
    ++bins[static_cast<long long>(std::floor(y / bin_width))];
  }
  const long long first = bins.begin()->first, last = bins.rbegin()->first;
  const double span = double(last - first + 1);
  double top = 0;
  for (const auto& [b, c] : bins) top = std::max(top, std::log10(1.0 + double(c)));
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  const double bar = pw / span;

  std::string s = open_svg("Label histogram (log10 count per " + short_num(bin_width) + " mm bin)");
  s += axes("precipitation (mm)", "log10(1 + count)");
  for (const auto& [b, c] : bins) {
    const double h = ph * std::log10(1.0 + double(c)) / top;
    const double x = kLeft + double(b - first) * bar;
    s += "<rect class=\"bar\" x=\"" + num(x) + "\" y=\"" + num(kHeight - kBottom - h) + "\" width=\"" + num(std::max(bar - 1.0, 0.5)) + "\" height=\"" +
         num(h) + "\" fill=\"steelblue\"><title>" + short_num(double(b) * bin_width) + ": " + std::to_string(c) + "</title></rect>\n";
  }
  const long long step = std::max<long long>(1, (last - first + 1) / 10);
  for (long long b = first; b <= last + 1; b += step) s += tick(kLeft + double(b - first) * bar, kHeight - kBottom, short_num(double(b) * bin_width), true);
  s += tick(kLeft, kTop, short_num(top), false);
  s += tick(kLeft, kHeight - kBottom, "0", false);
  return s + "</svg>\n";
}

std::string ablation_svg(const std::vector<Point>& points, const std::string& x_label, const std::string& y_label) {
  if (points.empty()) throw ArgumentError("ablation plot: no points");
  auto [xmin_it, xmax_it] = std::minmax_element(points.begin(), points.end(), [](auto& a, auto& b) { return a.x < b.x; });
  auto [ymin_it, ymax_it] = std::minmax_element(points.begin(), points.end(), [](auto& a, auto& b) { return a.y < b.y; });
  double xmin = xmin_it->x, xmax = xmax_it->x, ymin = ymin_it->y, ymax = ymax_it->y;
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double pad = 0.1 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  const double pw = kWidth - kLeft - kRight - 20, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + 10 + pw * (x - xmin) / (xmax - xmin); };
  auto py = [&](double y) { return kHeight - kBottom - ph * (y - ymin) / (ymax - ymin); };

  std::string s = open_svg(y_label + " vs " + x_label);
  s += axes(x_label, y_label);
  std::string pts;
  for (const auto& p : points) pts += (pts.empty() ? "" : " ") + num(px(p.x)) + "," + num(py(p.y));
  s += "<polyline class=\"curve\" fill=\"none\" stroke=\"crimson\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
  for (const auto& p : points) {
    s += "<circle cx=\"" + num(px(p.x)) + "\" cy=\"" + num(py(p.y)) + "\" r=\"4\" fill=\"crimson\"/>\n";
    s += tick(px(p.x), kHeight - kBottom, short_num(p.x), true);
  }
  for (int i = 0; i <= 4; ++i) {
    const double v = ymin + (ymax - ymin) * i / 4.0;
    s += tick(kLeft, py(v), num(v), false);
  }
  return s + "</svg>\n";
}

std::string colormap(double v, double vmax) {
  const double t = vmax > 0 ? std::clamp(v / vmax, 0.0, 1.0) : 0.0;
  // grey (220,220,220) -> blue (20,60,200)
  const int r = static_cast<int>(std::lround(220 + t * (20 - 220)));
  const int g = static_cast<int>(std::lround(220 + t * (60 - 220)));
  const int b = static_cast<int>(std::lround(220 + t * (200 - 220)));
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

std::string heatmap_svg(const std::vector<Panel>& panels) {
  if (panels.empty()) throw ArgumentError("heatmap: no panels");
  double vmax = 0;
  for (const auto& p : panels) {
    if (p.values.size() == 0) throw ArgumentError("heatmap: empty panel '" + p.title + "'");
    vmax = std::max(vmax, p.values.maxCoeff());
  }
  const double n = double(panels.size());
  const double gap = 16, legend_h = 60;
  const double avail_w = (kWidth - 2 * gap - (n - 1) * gap) / n;
  const double avail_h = kHeight - kTop - legend_h - 20;

  std::string s = open_svg("Station grids (shared scale, mm)");
  for (std::size_t i = 0; i < panels.size(); ++i) {
    const auto& m = panels[i].values;
    const double cell = std::min(avail_w / double(m.cols()), avail_h / double(m.rows()));
    const double x0 = gap + double(i) * (avail_w + gap) + (avail_w - cell * double(m.cols())) / 2;
    const double y0 = kTop + 20;
    s += "<text x=\"" + num(gap + double(i) * (avail_w + gap) + avail_w / 2) + "\" y=\"" + num(kTop + 10) + "\" text-anchor=\"middle\">" +
         panels[i].title + "</text>\n<g class=\"panel\">\n";
    for (Index r = 0; r < m.rows(); ++r)
      for (Index c = 0; c < m.cols(); ++c)
        s += "<rect class=\"cell\" x=\"" + num(x0 + double(c) * cell) + "\" y=\"" + num(y0 + double(r) * cell) + "\" width=\"" + num(cell) +
             "\" height=\"" + num(cell) + "\" fill=\"" + colormap(m(r, c), vmax) + "\"/>\n";
    s += "</g>\n";
  }
  const double ly = kHeight - legend_h + 10, lx = kWidth / 2.0 - 150;
  s += "<g class=\"legend\">\n";
  for (int i = 0; i < 30; ++i)
    s += "<rect x=\"" + num(lx + 10 * i) + "\" y=\"" + num(ly) + "\" width=\"10\" height=\"14\" fill=\"" + colormap(vmax * i / 29.0, vmax) + "\"/>\n";
  s += tick(lx, ly + 4, "0", true) + tick(lx + 300, ly + 4, num(vmax), true);
  s += "</g>\n";
  return s + "</svg>\n";
}

std::vector<Point> read_ablation_csv(const std::string& csv, std::string* param) {
  std::istringstream in(csv);
  std::string line;
  std::vector<Point> out;
  bool header = true;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    const auto f = text::split(line, ',');
    if (header) {
      header = false;
      if (f.size() < 3 || f[0] != "param" || f[1] != "value" || f[2] != "mae") throw ArgumentError("ablation CSV: unexpected header");
      continue;
    }
    const auto x = f.size() >= 3 ? text::parse_double(f[1]) : std::nullopt;
    const auto y = f.size() >= 3 ? text::parse_double(f[2]) : std::nullopt;
    if (!x || !y) throw ArgumentError("ablation CSV line " + std::to_string(lineno) + ": malformed row");
    if (param) *param = f[0];
    out.push_back({*x, *y});
  }
  if (out.empty()) throw ArgumentError("ablation CSV holds no rows");
  return out;
}

}  // namespace oba::plot
