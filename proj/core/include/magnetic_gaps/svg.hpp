#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace magnetic_gaps {

struct SpectrumPlot {
  std::string title;
  std::string x_label = "1/N";
  std::string y_label = "rescaled eigenvalue";
  std::vector<std::pair<double, double>> points;  // (x, y)
  std::vector<double> guides;                     // horizontal lines
  std::vector<std::pair<double, double>> bands;   // shaded y-intervals
};

void write_svg(std::ostream& out, const SpectrumPlot& plot);

}  // namespace magnetic_gaps
