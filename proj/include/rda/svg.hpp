#ifndef RDA_SVG_HPP
#define RDA_SVG_HPP

#include <string>
#include <vector>

#include "rda/metrics.hpp"

namespace rda {

struct NamedMetrics {
  std::string name;
  RunMetrics metrics;
};

/// Static 800x500 SVG with one train-loss and one target-test-loss polyline
/// per run, linear axes autoscaled to the data, and a legend.
std::string loss_curves_svg(const std::vector<NamedMetrics>& runs);

}  // namespace rda

#endif  // RDA_SVG_HPP
