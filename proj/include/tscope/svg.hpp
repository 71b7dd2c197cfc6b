/**
 * @file svg.hpp
 * @brief Minimal static SVG output: line charts for time series and the
 *        layered phase-portrait canvas. No scripting, self-contained files.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "tscope/io.hpp"

namespace tscope {

struct SvgStyle {
  std::string stroke = "#000000";
  double width = 1.2;
  std::string dash;  // e.g. "6,4" for dashed
};

/// Maps a rectangular data region onto a fixed pixel viewport and collects
/// SVG elements. The portrait contract pins the viewport to 800x600.
class SvgCanvas {
 public:
  SvgCanvas(double x0, double x1, double y0, double y1, int width = 800, int height = 600)
      : x0_(x0), x1_(x1), y0_(y0), y1_(y1), w_(width), h_(height) {
    body_ << "<rect x=\"0\" y=\"0\" width=\"" << w_ << "\" height=\"" << h_
          << "\" fill=\"white\" stroke=\"#888\"/>\n";
  }

  double px(double x) const { return pad_ + (x - x0_) / (x1_ - x0_) * (w_ - 2 * pad_); }
  double py(double y) const { return h_ - pad_ - (y - y0_) / (y1_ - y0_) * (h_ - 2 * pad_); }

  void polyline(const std::vector<std::pair<double, double>>& pts, const SvgStyle& st) {
    if (pts.size() < 2) return;
    body_ << "<polyline fill=\"none\" stroke=\"" << st.stroke << "\" stroke-width=\"" << st.width
          << "\"";
    if (!st.dash.empty()) body_ << " stroke-dasharray=\"" << st.dash << "\"";
    body_ << " points=\"";
    for (const auto& [x, y] : pts) body_ << clampf(px(x)) << ',' << clampf(py(y)) << ' ';
    body_ << "\"/>\n";
  }

  void line(double xa, double ya, double xb, double yb, const SvgStyle& st) {
    body_ << "<line x1=\"" << clampf(px(xa)) << "\" y1=\"" << clampf(py(ya)) << "\" x2=\""
          << clampf(px(xb)) << "\" y2=\"" << clampf(py(yb)) << "\" stroke=\"" << st.stroke
          << "\" stroke-width=\"" << st.width << "\"";
    if (!st.dash.empty()) body_ << " stroke-dasharray=\"" << st.dash << "\"";
    body_ << "/>\n";
  }

  void text(double x, double y, const std::string& s, const std::string& fill = "#000",
            int size = 12) {
    body_ << "<text x=\"" << clampf(px(x)) << "\" y=\"" << clampf(py(y)) << "\" font-size=\""
          << size << "\" fill=\"" << fill << "\">" << s << "</text>\n";
  }

  void text_px(double xpx, double ypx, const std::string& s, const std::string& fill = "#000",
               int size = 12) {
    body_ << "<text x=\"" << xpx << "\" y=\"" << ypx << "\" font-size=\"" << size << "\" fill=\""
          << fill << "\">" << s << "</text>\n";
  }

  /// Small direction-field arrow at (x, y) pointing along (sx, sy) quadrants.
  void arrow(double x, double y, int sx, int sy, const std::string& stroke = "#000") {
    const double cx = px(x), cy = py(y);
    const double len = 7.0;
    const double nx = sx / std::sqrt(2.0), ny = -sy / std::sqrt(2.0);
    const double ex = cx + len * nx, ey = cy + len * ny;
    body_ << "<line x1=\"" << cx << "\" y1=\"" << cy << "\" x2=\"" << ex << "\" y2=\"" << ey
          << "\" stroke=\"" << stroke << "\" stroke-width=\"1\"/>\n";
    body_ << "<circle cx=\"" << ex << "\" cy=\"" << ey << "\" r=\"1.4\" fill=\"" << stroke
          << "\"/>\n";
  }

  void axes(const std::string& xlabel, const std::string& ylabel) {
    body_ << "<line x1=\"" << pad_ << "\" y1=\"" << h_ - pad_ << "\" x2=\"" << w_ - pad_
          << "\" y2=\"" << h_ - pad_ << "\" stroke=\"#000\" stroke-width=\"1\"/>\n";
    body_ << "<line x1=\"" << pad_ << "\" y1=\"" << pad_ << "\" x2=\"" << pad_ << "\" y2=\""
          << h_ - pad_ << "\" stroke=\"#000\" stroke-width=\"1\"/>\n";
    text_px(w_ / 2.0, h_ - 8.0, xlabel);
    text_px(8.0, 16.0, ylabel);
    text_px(pad_, h_ - pad_ + 14.0, fmt_g17_short(x0_));
    text_px(w_ - pad_ - 30.0, h_ - pad_ + 14.0, fmt_g17_short(x1_));
    text_px(2.0, h_ - pad_, fmt_g17_short(y0_));
    text_px(2.0, pad_ + 4.0, fmt_g17_short(y1_));
  }

  void legend(const std::vector<std::pair<std::string, SvgStyle>>& entries) {
    double y = pad_ + 10.0;
    for (const auto& [label, st] : entries) {
      body_ << "<line x1=\"" << w_ - pad_ - 150 << "\" y1=\"" << y << "\" x2=\""
            << w_ - pad_ - 120 << "\" y2=\"" << y << "\" stroke=\"" << st.stroke
            << "\" stroke-width=\"" << st.width << "\"";
      if (!st.dash.empty()) body_ << " stroke-dasharray=\"" << st.dash << "\"";
      body_ << "/>\n";
      text_px(w_ - pad_ - 114, y + 4.0, label, st.stroke);
      y += 16.0;
    }
  }

  void write(const std::string& path) const {
    auto os = open_out(path);
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_ << "\" height=\"" << h_
       << "\" viewBox=\"0 0 " << w_ << ' ' << h_ << "\">\n"
       << body_.str() << "</svg>\n";
  }

 private:
  static std::string fmt_g17_short(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
  }
  double clampf(double v) const {
    return std::min(std::max(v, -1e4), 1e4);  // keep degenerate data renderable
  }

  double x0_, x1_, y0_, y1_;
  int w_, h_;
  double pad_ = 42.0;
  std::ostringstream body_;
};

/// Simple multi-series line chart over t = 0..N-1.
inline void write_series_svg(const std::string& path,
                             const std::vector<std::pair<std::string, std::vector<double>>>& series,
                             const std::string& xlabel, const std::string& ylabel,
                             double threshold = std::nan(""), double marker_t = std::nan("")) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  double ymin = 0.0, ymax = 1e-12;
  std::size_t nmax = 2;
  for (const auto& [name, ys] : series) {
    for (double y : ys) {
      if (!std::isfinite(y)) continue;
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
    nmax = std::max(nmax, ys.size());
  }
  if (std::isfinite(threshold)) ymax = std::max(ymax, threshold);
  if (ymax <= ymin) ymax = ymin + 1.0;
  SvgCanvas canvas(0.0, static_cast<double>(nmax - 1), ymin, ymax * 1.05 + 1e-300);
  canvas.axes(xlabel, ylabel);
  std::vector<std::pair<std::string, SvgStyle>> legend;
  for (std::size_t s = 0; s < series.size(); ++s) {
    SvgStyle st;
    st.stroke = kColors[s % 6];
    std::vector<std::pair<double, double>> pts;
    for (std::size_t t = 0; t < series[s].second.size(); ++t) {
      if (std::isfinite(series[s].second[t])) pts.emplace_back(static_cast<double>(t), series[s].second[t]);
    }
    canvas.polyline(pts, st);
    legend.emplace_back(series[s].first, st);
  }
  if (std::isfinite(threshold)) {
    SvgStyle st{"#444444", 1.0, "6,4"};
    canvas.line(0.0, threshold, static_cast<double>(nmax - 1), threshold, st);
    legend.push_back({"threshold", st});
  }
  if (std::isfinite(marker_t)) {
    SvgStyle st{"#444444", 1.0, "8,3,2,3"};
    canvas.line(marker_t, ymin, marker_t, ymax, st);
    legend.push_back({"transient time", st});
  }
  canvas.legend(legend);
  canvas.write(path);
}

}  // namespace tscope
