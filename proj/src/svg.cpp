#include "rda/svg.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <limits>

#include "rda/error.hpp"

namespace rda {

namespace {

constexpr double kWidth = 800, kHeight = 500;
constexpr double kLeft = 70, kRight = 200, kTop = 30, kBottom = 50;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
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

std::string loss_curves_svg(const std::vector<NamedMetrics>& runs) {
  if (runs.empty()) throw UsageError("no metrics to plot");
  double xmin = std::numeric_limits<double>::max(), xmax = std::numeric_limits<double>::lowest();
  double ymin = xmin, ymax = xmax;
  for (const auto& run : runs) {
    if (run.metrics.empty()) throw UsageError("metrics for '" + run.name + "' contain no rows");
    for (const auto& r : run.metrics.rows()) {
      xmin = std::min(xmin, static_cast<double>(r.iter));
      xmax = std::max(xmax, static_cast<double>(r.iter));
      ymin = std::min({ymin, r.train_loss, r.tgt_test_loss});
      ymax = std::max({ymax, r.train_loss, r.tgt_test_loss});
    }
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * plot_w; };
  auto py = [&](double y) { return kTop + (1.0 - (y - ymin) / (ymax - ymin)) * plot_h; };

  std::string svg =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 500\" width=\"800\" "
      "height=\"500\">\n<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";
  svg += "<g stroke=\"black\" stroke-width=\"1\">\n";
  svg += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop + plot_h) + "\" x2=\"" +
         fmt(kLeft + plot_w) + "\" y2=\"" + fmt(kTop + plot_h) + "\"/>\n";
  svg += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kTop) + "\" x2=\"" + fmt(kLeft) +
         "\" y2=\"" + fmt(kTop + plot_h) + "\"/>\n</g>\n";
  svg += "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<text x=\"" + fmt(kLeft) + "\" y=\"" + fmt(kHeight - 15) + "\">" + fmt(xmin) + "</text>\n";
  svg += "<text x=\"" + fmt(kLeft + plot_w) + "\" y=\"" + fmt(kHeight - 15) +
         "\" text-anchor=\"end\">" + fmt(xmax) + "</text>\n";
  svg += "<text x=\"" + fmt(kLeft + plot_w / 2) + "\" y=\"" + fmt(kHeight - 15) +
         "\" text-anchor=\"middle\">iteration</text>\n";
  svg += "<text x=\"" + fmt(kLeft - 8) + "\" y=\"" + fmt(kTop + 4) + "\" text-anchor=\"end\">" +
         fmt(ymax) + "</text>\n";
  svg += "<text x=\"" + fmt(kLeft - 8) + "\" y=\"" + fmt(kTop + plot_h) +
         "\" text-anchor=\"end\">" + fmt(ymin) + "</text>\n</g>\n";

  // train curves blue, target test curves red; runs differ by dash pattern
  static constexpr std::array<const char*, 4> kDash = {"", "6 3", "2 2", "8 3 2 3"};
  double legend_y = kTop + 10;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto& run = runs[k];
    const std::string dash = kDash[k % kDash.size()];
    const std::string dash_attr = dash.empty() ? "" : " stroke-dasharray=\"" + dash + "\"";
    for (int series = 0; series < 2; ++series) {
      std::string points;
      for (const auto& r : run.metrics.rows()) {
        double y = series == 0 ? r.train_loss : r.tgt_test_loss;
        points += fmt(px(static_cast<double>(r.iter))) + "," + fmt(py(y)) + " ";
      }
      const char* color = series == 0 ? "#1f5fbf" : "#c8302c";
      const std::string label = escape(run.name) + (series == 0 ? " train" : " target test");
      svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
             "\" stroke-width=\"1.5\"" + dash_attr + " points=\"" + points + "\"/>\n";
      const double lx = kLeft + plot_w + 15;
      svg += "<line x1=\"" + fmt(lx) + "\" y1=\"" + fmt(legend_y) + "\" x2=\"" + fmt(lx + 25) +
             "\" y2=\"" + fmt(legend_y) + "\" stroke=\"" + color + "\"" + dash_attr + "/>\n";
      svg += "<text class=\"legend\" x=\"" + fmt(lx + 30) + "\" y=\"" + fmt(legend_y + 4) +
             "\" font-family=\"sans-serif\" font-size=\"12\">" + label + "</text>\n";
      legend_y += 18;
    }
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace rda
