#include "magnetic_gaps/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <ostream>


namespace magnetic_gaps {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

}  // namespace

void write_svg(std::ostream& out, const SpectrumPlot& plot) {
  const double width = 640, height = 480, left = 70, right = 20, top = 40, bottom = 50;
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  if (!plot.points.empty()) {
    x0 = x1 = plot.points.front().first;
    y0 = y1 = plot.points.front().second;
  }
  for (const auto& [x, y] : plot.points) {
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  for (double g : plot.guides) {
    y0 = std::min(y0, g);
    y1 = std::max(y1, g);
  }
  x0 = std::min(x0, 0.0);
  const double xpad = (x1 - x0) * 0.05 + 1e-12, ypad = (y1 - y0) * 0.05 + 1e-12;
  x1 += xpad;
  y0 -= ypad;
  y1 += ypad;
  auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * (width - left - right); };
  auto sy = [&](double y) { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& [lo, hi] : plot.bands) {
    const double a = std::clamp(lo, y0, y1), b = std::clamp(hi, y0, y1);
    out << "<rect x=\"" << left << "\" y=\"" << sy(b) << "\" width=\"" << width - left - right << "\" height=\""
        << sy(a) - sy(b) << "\" fill=\"#9ecae1\" fill-opacity=\"0.4\"/>\n";
  }
  for (double g : plot.guides) {
    out << "<line x1=\"" << left << "\" x2=\"" << width - right << "\" y1=\"" << sy(g) << "\" y2=\"" << sy(g)
        << "\" stroke=\"#d62728\" stroke-dasharray=\"4 3\"/>\n";
  }
  for (const auto& [x, y] : plot.points) {
    out << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"2\" fill=\"black\"/>\n";
  }
  out << "<line x1=\"" << left << "\" y1=\"" << height - bottom << "\" x2=\"" << width - right << "\" y2=\""
      << height - bottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << height - bottom
      << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
    out << "<text x=\"" << sx(xv) << "\" y=\"" << height - bottom + 18 << "\" font-size=\"11\" text-anchor=\"middle\">"
        << tick(xv) << "</text>\n";
    out << "<text x=\"" << left - 6 << "\" y=\"" << sy(yv) + 4 << "\" font-size=\"11\" text-anchor=\"end\">"
        << tick(yv) << "</text>\n";
  }
  out << "<text x=\"" << width / 2 << "\" y=\"" << height - 10 << "\" font-size=\"13\" text-anchor=\"middle\">"
      << escape(plot.x_label) << "</text>\n";
  out << "<text x=\"16\" y=\"" << height / 2 << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << height / 2 << ")\">" << escape(plot.y_label) << "</text>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"22\" font-size=\"14\" text-anchor=\"middle\">" << escape(plot.title)
      << "</text>\n";
  out << "</svg>\n";
}

}  // namespace magnetic_gaps
