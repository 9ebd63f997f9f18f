#ifndef BORNLAB_TOOLS_SVG_HPP
#define BORNLAB_TOOLS_SVG_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>
#include <string>

namespace bornlab::svg {

struct Axes {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// A single polyline chart as standalone SVG text.
inline std::string line_chart(std::span<const double> xs, std::span<const double> ys,
                              const Axes& axes) {
  constexpr double W = 640, H = 400, left = 70, right = 20, top = 40, bottom = 50;
  auto tx = [&](double v) { return axes.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return axes.log_y ? std::log10(v) : v; };

  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!xs.empty()) {
    auto [xmin, xmax] = std::minmax_element(xs.begin(), xs.end());
    auto [ymin, ymax] = std::minmax_element(ys.begin(), ys.end());
    x0 = tx(*xmin), x1 = tx(*xmax), y0 = ty(*ymin), y1 = ty(*ymax);
  }
  if (x1 <= x0) x1 = x0 + 1;
  if (y1 <= y0) y1 = y0 + 1;
  auto px = [&](double v) { return left + (tx(v) - x0) / (x1 - x0) * (W - left - right); };
  auto py = [&](double v) { return H - bottom - (ty(v) - y0) / (y1 - y0) * (H - top - bottom); };

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
                  "font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  s += "<text x=\"320\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + axes.title + "</text>\n";
  s += "<line x1=\"" + fmt(left) + "\" y1=\"" + fmt(H - bottom) + "\" x2=\"" + fmt(W - right) +
       "\" y2=\"" + fmt(H - bottom) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + fmt(left) + "\" y1=\"" + fmt(top) + "\" x2=\"" + fmt(left) + "\" y2=\"" +
       fmt(H - bottom) + "\" stroke=\"black\"/>\n";
  s += "<text x=\"320\" y=\"390\" text-anchor=\"middle\">" + axes.x_label + "</text>\n";
  s += "<text x=\"16\" y=\"200\" text-anchor=\"middle\" transform=\"rotate(-90 16 200)\">" +
       axes.y_label + "</text>\n";
  s += "<text x=\"" + fmt(left) + "\" y=\"" + fmt(H - bottom + 16) + "\" text-anchor=\"middle\">" +
       fmt(axes.log_x ? std::pow(10.0, x0) : x0) + "</text>\n";
  s += "<text x=\"" + fmt(W - right) + "\" y=\"" + fmt(H - bottom + 16) +
       "\" text-anchor=\"middle\">" + fmt(axes.log_x ? std::pow(10.0, x1) : x1) + "</text>\n";
  s += "<text x=\"" + fmt(left - 6) + "\" y=\"" + fmt(H - bottom) + "\" text-anchor=\"end\">" +
       fmt(axes.log_y ? std::pow(10.0, y0) : y0) + "</text>\n";
  s += "<text x=\"" + fmt(left - 6) + "\" y=\"" + fmt(top + 4) + "\" text-anchor=\"end\">" +
       fmt(axes.log_y ? std::pow(10.0, y1) : y1) + "</text>\n";
  s += "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    s += fmt(px(xs[i])) + "," + fmt(py(ys[i])) + (i + 1 < xs.size() ? " " : "");
  }
  s += "\"/>\n</svg>\n";
  return s;
}

}  // namespace bornlab::svg

#endif  // BORNLAB_TOOLS_SVG_HPP
