#pragma once

#include "fgdqn/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace fgdqn {

/// Minimal static line-plot writer: one polyline per series, optional shaded
/// confidence band per series, axis ticks and a legend. No external plotting
/// dependency; the output is plain SVG 1.1.
class LinePlotSvg {
 public:
  LinePlotSvg(std::string title, std::string x_label, std::string y_label)
      : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

  void add_series(const std::string& name, std::vector<double> xs, std::vector<double> ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("LinePlotSvg: x/y length mismatch");
    series_.push_back({name, std::move(xs), std::move(ys), {}, {}});
  }

  /// Shaded band around the last added series (e.g. a 95% CI).
  void add_band(std::vector<double> lo, std::vector<double> hi) {
    if (series_.empty()) throw std::logic_error("LinePlotSvg: band needs a series");
    auto& s = series_.back();
    if (lo.size() != s.xs.size() || hi.size() != s.xs.size())
      throw std::invalid_argument("LinePlotSvg: band length mismatch");
    s.band_lo = std::move(lo);
    s.band_hi = std::move(hi);
  }

  std::string render(int width = 860, int height = 520) const {
    const double ml = 70, mr = 20, mt = 40, mb = 55;
    const double pw = width - ml - mr, ph = height - mt - mb;

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series_) {
      for (double v : s.xs) { xmin = std::min(xmin, v); xmax = std::max(xmax, v); }
      for (double v : s.ys) { ymin = std::min(ymin, v); ymax = std::max(ymax, v); }
      for (double v : s.band_lo) ymin = std::min(ymin, v);
      for (double v : s.band_hi) ymax = std::max(ymax, v);
    }
    if (!std::isfinite(xmin)) { xmin = 0; xmax = 1; ymin = 0; ymax = 1; }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double y) { return mt + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };
    auto num = [](double v) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.6g", v);
      return std::string(buf);
    };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) +
           " " + std::to_string(height) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + num(ml + pw / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"16\" "
           "font-family=\"sans-serif\">" + title_ + "</text>\n";

    // axes and ticks
    out += "<line x1=\"" + num(ml) + "\" y1=\"" + num(mt + ph) + "\" x2=\"" + num(ml + pw) +
           "\" y2=\"" + num(mt + ph) + "\" stroke=\"black\"/>\n";
    out += "<line x1=\"" + num(ml) + "\" y1=\"" + num(mt) + "\" x2=\"" + num(ml) + "\" y2=\"" +
           num(mt + ph) + "\" stroke=\"black\"/>\n";
    const int ticks = 5;
    for (int i = 0; i <= ticks; ++i) {
      const double fx = xmin + (xmax - xmin) * i / ticks;
      const double fy = ymin + (ymax - ymin) * i / ticks;
      out += "<line x1=\"" + num(sx(fx)) + "\" y1=\"" + num(mt + ph) + "\" x2=\"" + num(sx(fx)) +
             "\" y2=\"" + num(mt + ph + 5) + "\" stroke=\"black\"/>\n";
      out += "<text x=\"" + num(sx(fx)) + "\" y=\"" + num(mt + ph + 20) +
             "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" + num(fx) +
             "</text>\n";
      out += "<line x1=\"" + num(ml - 5) + "\" y1=\"" + num(sy(fy)) + "\" x2=\"" + num(ml) +
             "\" y2=\"" + num(sy(fy)) + "\" stroke=\"black\"/>\n";
      out += "<text x=\"" + num(ml - 8) + "\" y=\"" + num(sy(fy) + 4) +
             "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" + num(fy) +
             "</text>\n";
    }
    out += "<text x=\"" + num(ml + pw / 2) + "\" y=\"" + num(static_cast<double>(height) - 12) +
           "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\">" + x_label_ +
           "</text>\n";
    out += "<text x=\"18\" y=\"" + num(mt + ph / 2) +
           "\" text-anchor=\"middle\" font-size=\"13\" font-family=\"sans-serif\" transform=\"rotate(-90 18 " +
           num(mt + ph / 2) + ")\">" + y_label_ + "</text>\n";

    for (std::size_t k = 0; k < series_.size(); ++k) {
      const auto& s = series_[k];
      const std::string color = kPalette[k % kPalette.size()];
      if (!s.band_lo.empty()) {
        std::string pts;
        for (std::size_t i = 0; i < s.xs.size(); ++i)
          pts += num(sx(s.xs[i])) + "," + num(sy(s.band_hi[i])) + " ";
        for (std::size_t i = s.xs.size(); i-- > 0;)
          pts += num(sx(s.xs[i])) + "," + num(sy(s.band_lo[i])) + " ";
        out += "<polygon points=\"" + pts + "\" fill=\"" + color + "\" fill-opacity=\"0.18\" "
               "stroke=\"none\"/>\n";
      }
      std::string pts;
      for (std::size_t i = 0; i < s.xs.size(); ++i)
        pts += num(sx(s.xs[i])) + "," + num(sy(s.ys[i])) + " ";
      out += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
             "\" stroke-width=\"1.6\"/>\n";
      // legend entry
      const double ly = mt + 16 + 18 * static_cast<double>(k);
      out += "<line x1=\"" + num(ml + pw - 150) + "\" y1=\"" + num(ly) + "\" x2=\"" +
             num(ml + pw - 120) + "\" y2=\"" + num(ly) + "\" stroke=\"" + color +
             "\" stroke-width=\"2\"/>\n";
      out += "<text x=\"" + num(ml + pw - 112) + "\" y=\"" + num(ly + 4) +
             "\" font-size=\"12\" font-family=\"sans-serif\">" + s.name + "</text>\n";
    }
    out += "</svg>\n";
    return out;
  }

  void write(const std::string& path, int width = 860, int height = 520) const {
    write_text_file(path, render(width, height));
  }

 private:
  struct Series {
    std::string name;
    std::vector<double> xs, ys, band_lo, band_hi;
  };

  static inline const std::vector<std::string> kPalette = {"#1f77b4", "#d62728", "#2ca02c",
                                                           "#ff7f0e"};
  std::string title_, x_label_, y_label_;
  std::vector<Series> series_;
};

}  // namespace fgdqn
