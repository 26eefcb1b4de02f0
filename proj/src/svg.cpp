#include "fedsim/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "fedsim/errors.hpp"

namespace fedsim {

namespace {

constexpr double kWidth = 880.0;
constexpr double kHeight = 520.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 700.0;   // plot edge; legend lives to the right
constexpr double kTop = 40.0;
constexpr double kBottom = 460.0;

const char* kPalette[] = {
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_curve_svg(const std::vector<CurveSeries>& series) {
  if (series.empty()) {
    throw ValidationError("render_curve_svg: no series");
  }
  std::size_t max_rounds = 0;
  for (const CurveSeries& s : series) {
    if (s.values.empty()) {
      throw ValidationError("render_curve_svg: series \"" + s.label +
                            "\" is empty");
    }
    max_rounds = std::max(max_rounds, s.values.size());
  }

  const double x_span = static_cast<double>(std::max<std::size_t>(max_rounds, 2) - 1);
  auto x_of = [&](std::size_t round_ix) {
    return kLeft + (kRight - kLeft) * static_cast<double>(round_ix) / x_span;
  };
  auto y_of = [&](double error) {
    const double clamped = std::clamp(error, 0.0, 1.0);
    return kBottom - (kBottom - kTop) * clamped;
  };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) +
         "\" height=\"" + num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) +
         " " + num(kHeight) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + num(kWidth) + "\" height=\"" +
         num(kHeight) + "\" fill=\"white\"/>\n";

  // Horizontal grid every 0.1 of error rate, with y-axis tick labels.
  for (int i = 0; i <= 10; ++i) {
    const double v = static_cast<double>(i) / 10.0;
    const double y = y_of(v);
    svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(y) + "\" x2=\"" +
           num(kRight) + "\" y2=\"" + num(y) +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    char label[16];
    std::snprintf(label, sizeof(label), "%.1f", v);
    svg += "<text x=\"" + num(kLeft - 10.0) + "\" y=\"" + num(y + 4.0) +
           "\" font-family=\"sans-serif\" font-size=\"12\" "
           "text-anchor=\"end\">" +
           label + "</text>\n";
  }
  // X tick labels: round numbers at up to ~10 evenly spaced positions.
  const std::size_t tick_step =
      std::max<std::size_t>(1, (max_rounds + 9) / 10);
  for (std::size_t r = 0; r < max_rounds; r += tick_step) {
    const double x = x_of(r);
    svg += "<line x1=\"" + num(x) + "\" y1=\"" + num(kBottom) + "\" x2=\"" +
           num(x) + "\" y2=\"" + num(kBottom + 5.0) +
           "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + num(x) + "\" y=\"" + num(kBottom + 20.0) +
           "\" font-family=\"sans-serif\" font-size=\"12\" "
           "text-anchor=\"middle\">" +
           std::to_string(r + 1) + "</text>\n";
  }

  // Axes.
  svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" +
         num(kLeft) + "\" y2=\"" + num(kBottom) +
         "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
  svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kBottom) +
         "\" x2=\"" + num(kRight) + "\" y2=\"" + num(kBottom) +
         "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
  svg += "<text x=\"" + num((kLeft + kRight) / 2.0) + "\" y=\"" +
         num(kBottom + 42.0) +
         "\" font-family=\"sans-serif\" font-size=\"14\" "
         "text-anchor=\"middle\">round</text>\n";
  svg += "<text x=\"18\" y=\"" + num((kTop + kBottom) / 2.0) +
         "\" font-family=\"sans-serif\" font-size=\"14\" "
         "text-anchor=\"middle\" transform=\"rotate(-90 18 " +
         num((kTop + kBottom) / 2.0) + ")\">test error rate</text>\n";

  // Curves.
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % kPaletteSize];
    std::string points;
    for (std::size_t r = 0; r < series[s].values.size(); ++r) {
      if (!points.empty()) points += ' ';
      points += num(x_of(r)) + "," + num(y_of(series[s].values[r]));
    }
    if (series[s].values.size() == 1) {
      svg += "<circle cx=\"" + num(x_of(0)) + "\" cy=\"" +
             num(y_of(series[s].values[0])) + "\" r=\"3\" fill=\"" + color +
             "\"/>\n";
    } else {
      svg += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" +
             color + "\" stroke-width=\"2\"/>\n";
    }
  }

  // Legend.
  const double legend_x = kRight + 16.0;
  for (std::size_t s = 0; s < series.size(); ++s) {
    const double y = kTop + 10.0 + 22.0 * static_cast<double>(s);
    svg += "<line x1=\"" + num(legend_x) + "\" y1=\"" + num(y) + "\" x2=\"" +
           num(legend_x + 24.0) + "\" y2=\"" + num(y) + "\" stroke=\"" +
           kPalette[s % kPaletteSize] + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + num(legend_x + 30.0) + "\" y=\"" + num(y + 4.0) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" +
           escape_xml(series[s].label) + "</text>\n";
  }

  svg += "</svg>\n";
  return svg;
}

void emit_curve_svg(const std::vector<CurveSeries>& series,
                    const std::string& path) {
  const std::string svg = render_curve_svg(series);
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw FormatError("emit_curve_svg: cannot write " + path);
  }
  out << svg;
  if (!out) {
    throw FormatError("emit_curve_svg: write failed for " + path);
  }
}

}  // namespace fedsim
