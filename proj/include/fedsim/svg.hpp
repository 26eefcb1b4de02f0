#pragma once

#include <string>
#include <vector>

namespace fedsim {

struct CurveSeries {
  std::string label;
  std::vector<double> values;  // values[i] is the error rate after round i+1
};

// Renders learning curves as a standalone SVG: one polyline per series,
// x = round, y = error rate on a fixed [0,1] axis, with grid, axis labels
// and a legend. Output is deterministic for identical input.
std::string render_curve_svg(const std::vector<CurveSeries>& series);

void emit_curve_svg(const std::vector<CurveSeries>& series,
                    const std::string& path);

}  // namespace fedsim
