#pragma once

#include <string>
#include <vector>

#include "quadarm/types.hpp"

namespace quadarm {

struct PlotSeries {
  std::string label;
  std::vector<Scalar> x;
  std::vector<Scalar> y;
};

struct PlotPane {
  std::string title;            // includes units, e.g. "angle [rad]"
  std::vector<PlotSeries> series;
  std::vector<Scalar> hlines;   // dashed horizontal markers (bounds etc.)
};

// Render stacked line-chart panes as a standalone SVG document. Output
// bytes are a pure function of the inputs: fixed layout, fixed palette,
// fixed numeric formatting, and deterministic downsampling to at most
// 2001 points per series.
std::string render_svg(const std::string& title,
                       const std::vector<PlotPane>& panes);

}  // namespace quadarm
