#include "quadarm/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace quadarm {

namespace {

constexpr int kWidth = 960;
constexpr int kMarginL = 64;
constexpr int kMarginR = 16;
constexpr int kMarginT = 26;
constexpr int kMarginB = 30;
constexpr int kPlotH = 150;
constexpr int kPaneGap = 8;
constexpr std::size_t kMaxPoints = 2001;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#7f7f7f",
                          "#9467bd", "#8c564b"};

std::string num(Scalar v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string px(Scalar v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

Scalar nice_step(Scalar range) {
  if (!(range > 0)) return 1.0;
  const Scalar raw = range / 4.0;
  const Scalar mag = std::pow(10.0, std::floor(std::log10(raw)));
  const Scalar r = raw / mag;
  if (r < 1.5) return mag;
  if (r < 3.5) return 2.0 * mag;
  if (r < 7.5) return 5.0 * mag;
  return 10.0 * mag;
}

struct Range {
  Scalar lo = 0.0, hi = 1.0;

  void expand(Scalar v) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  void finish() {
    if (!(hi > lo)) {
      lo -= 1.0;
      hi += 1.0;
    }
  }
  Scalar map(Scalar v, Scalar out_lo, Scalar out_hi) const {
    return out_lo + (v - lo) / (hi - lo) * (out_hi - out_lo);
  }
};

void downsample(const std::vector<Scalar>& x, const std::vector<Scalar>& y,
                std::vector<Scalar>& xs, std::vector<Scalar>& ys) {
  const std::size_t n = std::min(x.size(), y.size());
  const std::size_t stride = n <= kMaxPoints ? 1 : (n + kMaxPoints - 1) / kMaxPoints;
  for (std::size_t i = 0; i < n; i += stride) {
    xs.push_back(x[i]);
    ys.push_back(y[i]);
  }
  if (n > 0 && (n - 1) % stride != 0) {
    xs.push_back(x[n - 1]);
    ys.push_back(y[n - 1]);
  }
}

}  // namespace

std::string render_svg(const std::string& title,
                       const std::vector<PlotPane>& panes) {
  if (panes.empty()) throw std::invalid_argument("render_svg: no panes");

  const int pane_h = kMarginT + kPlotH + kMarginB;
  const int height = 24 + static_cast<int>(panes.size()) * (pane_h + kPaneGap);
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << kWidth << " "
      << height << "\">\n";
  out << "<title>" << escape(title) << "</title>\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  out << "<text x=\"" << kMarginL << "\" y=\"16\" font-family=\"sans-serif\""
      << " font-size=\"13\" font-weight=\"bold\">" << escape(title)
      << "</text>\n";

  int top = 24;
  for (const PlotPane& pane : panes) {
    // Downsampled copies drive both the range fit and the polylines.
    std::vector<std::vector<Scalar>> xs(pane.series.size()),
        ys(pane.series.size());
    Range rx{0.0, 0.0}, ry{0.0, 0.0};
    bool have_x = false, have_y = false;
    for (std::size_t s = 0; s < pane.series.size(); ++s) {
      downsample(pane.series[s].x, pane.series[s].y, xs[s], ys[s]);
      for (Scalar v : xs[s]) {
        if (!std::isfinite(v)) continue;
        if (!have_x) {
          rx = {v, v};
          have_x = true;
        }
        rx.expand(v);
      }
      for (Scalar v : ys[s]) {
        if (!std::isfinite(v)) continue;
        if (!have_y) {
          ry = {v, v};
          have_y = true;
        }
        ry.expand(v);
      }
    }
    for (Scalar h : pane.hlines) {
      if (!have_y) {
        ry = {h, h};
        have_y = true;
      }
      ry.expand(h);
    }
    rx.finish();
    ry.finish();
    const Scalar pad = 0.05 * (ry.hi - ry.lo);
    ry.lo -= pad;
    ry.hi += pad;

    const Scalar x0 = kMarginL, x1 = kWidth - kMarginR;
    const Scalar y0 = top + kMarginT, y1 = y0 + kPlotH;

    out << "<text x=\"" << kMarginL << "\" y=\"" << top + 16
        << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#333333\">"
        << escape(pane.title) << "</text>\n";
    out << "<rect x=\"" << px(x0) << "\" y=\"" << px(y0) << "\" width=\""
        << px(x1 - x0) << "\" height=\"" << px(y1 - y0)
        << "\" fill=\"none\" stroke=\"#888888\" stroke-width=\"1\"/>\n";

    // y grid and labels
    const Scalar ystep = nice_step(ry.hi - ry.lo);
    for (Scalar v = std::ceil(ry.lo / ystep) * ystep; v <= ry.hi + 1e-12 * ystep;
         v += ystep) {
      const Scalar yy = ry.map(v, y1, y0);
      out << "<line x1=\"" << px(x0) << "\" y1=\"" << px(yy) << "\" x2=\""
          << px(x1) << "\" y2=\"" << px(yy)
          << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
      out << "<text x=\"" << px(x0 - 6) << "\" y=\"" << px(yy + 3)
          << "\" font-family=\"sans-serif\" font-size=\"10\""
          << " text-anchor=\"end\" fill=\"#555555\">" << num(v) << "</text>\n";
    }
    // x grid and labels
    const Scalar xstep = nice_step(rx.hi - rx.lo);
    for (Scalar v = std::ceil(rx.lo / xstep) * xstep; v <= rx.hi + 1e-12 * xstep;
         v += xstep) {
      const Scalar xx = rx.map(v, x0, x1);
      out << "<line x1=\"" << px(xx) << "\" y1=\"" << px(y0) << "\" x2=\""
          << px(xx) << "\" y2=\"" << px(y1)
          << "\" stroke=\"#eeeeee\" stroke-width=\"1\"/>\n";
      out << "<text x=\"" << px(xx) << "\" y=\"" << px(y1 + 14)
          << "\" font-family=\"sans-serif\" font-size=\"10\""
          << " text-anchor=\"middle\" fill=\"#555555\">" << num(v)
          << "</text>\n";
    }

    for (Scalar h : pane.hlines) {
      const Scalar yy = ry.map(h, y1, y0);
      out << "<line x1=\"" << px(x0) << "\" y1=\"" << px(yy) << "\" x2=\""
          << px(x1) << "\" y2=\"" << px(yy) << "\" stroke=\"#aa3333\""
          << " stroke-width=\"1\" stroke-dasharray=\"5,3\"/>\n";
    }

    for (std::size_t s = 0; s < pane.series.size(); ++s) {
      if (xs[s].empty()) continue;
      const char* color = kPalette[s % (sizeof(kPalette) / sizeof(*kPalette))];
      out << "<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"1.2\" points=\"";
      for (std::size_t i = 0; i < xs[s].size(); ++i) {
        if (i) out << ' ';
        out << px(rx.map(xs[s][i], x0, x1)) << ','
            << px(ry.map(ys[s][i], y1, y0));
      }
      out << "\"/>\n";
    }

    // legend, right-aligned above the frame
    Scalar lx = x1;
    for (std::size_t s = pane.series.size(); s-- > 0;) {
      const char* color = kPalette[s % (sizeof(kPalette) / sizeof(*kPalette))];
      const std::string label = escape(pane.series[s].label);
      lx -= 14.0 + 6.5 * static_cast<Scalar>(label.size()) + 16.0;
      out << "<line x1=\"" << px(lx) << "\" y1=\"" << top + 12 << "\" x2=\""
          << px(lx + 12) << "\" y2=\"" << top + 12 << "\" stroke=\"" << color
          << "\" stroke-width=\"2\"/>\n";
      out << "<text x=\"" << px(lx + 16) << "\" y=\"" << top + 16
          << "\" font-family=\"sans-serif\" font-size=\"10\" fill=\"#333333\">"
          << label << "</text>\n";
    }

    top += pane_h + kPaneGap;
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace quadarm
