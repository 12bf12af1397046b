#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "anchorprobe/report.hpp"

namespace anchorprobe {

namespace {

constexpr double kWidth = 720, kHeight = 420;
constexpr double kLeft = 70, kRight = 650, kTop = 40, kBottom = 360;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
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

struct Axis {
  double lo, hi;
  double y(double v) const { return kBottom - (v - lo) / (hi - lo) * (kBottom - kTop); }
};

struct Frame {
  std::size_t layers;
  double x(std::size_t l) const {
    return layers <= 1 ? (kLeft + kRight) / 2 : kLeft + static_cast<double>(l) / static_cast<double>(layers - 1) * (kRight - kLeft);
  }
};

std::string header(const std::string& title) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"420\" viewBox=\"0 0 " +
                  fmt(kWidth) + " " + fmt(kHeight) + "\" font-family=\"monospace\" font-size=\"11\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"720\" height=\"420\" fill=\"#ffffff\"/>\n";
  s += "<text x=\"" + fmt(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + escape(title) + "</text>\n";
  return s;
}

std::string x_axis(const Frame& f) {
  std::string s = "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(kBottom) + "\" x2=\"" + fmt(kRight) + "\" y2=\"" +
                  fmt(kBottom) + "\" stroke=\"#000000\"/>\n";
  const std::size_t step = std::max<std::size_t>(1, (f.layers + 9) / 10);
  for (std::size_t l = 0; l < f.layers; l += step) {
    s += "<line x1=\"" + fmt(f.x(l)) + "\" y1=\"" + fmt(kBottom) + "\" x2=\"" + fmt(f.x(l)) + "\" y2=\"" +
         fmt(kBottom + 5) + "\" stroke=\"#000000\"/>\n";
    s += "<text x=\"" + fmt(f.x(l)) + "\" y=\"" + fmt(kBottom + 18) + "\" text-anchor=\"middle\">" +
         std::to_string(l) + "</text>\n";
  }
  s += "<text x=\"" + fmt((kLeft + kRight) / 2) + "\" y=\"" + fmt(kBottom + 36) +
       "\" text-anchor=\"middle\">layer</text>\n";
  return s;
}

std::string y_axis(const Axis& a, double x, bool right, const std::string& label, const char* color) {
  std::string s = "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(kTop) + "\" x2=\"" + fmt(x) + "\" y2=\"" + fmt(kBottom) +
                  "\" stroke=\"" + color + "\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = a.lo + (a.hi - a.lo) * i / 4.0;
    const double tx = right ? x + 5 : x - 5;
    s += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(a.y(v)) + "\" x2=\"" + fmt(tx) + "\" y2=\"" + fmt(a.y(v)) +
         "\" stroke=\"" + color + "\"/>\n";
    s += "<text x=\"" + fmt(right ? x + 8 : x - 8) + "\" y=\"" + fmt(a.y(v) + 4) + "\" text-anchor=\"" +
         (right ? "start" : "end") + "\" fill=\"" + color + "\">" + tick_label(v) + "</text>\n";
  }
  const double lx = right ? kWidth - 14 : 16;
  s += "<text x=\"" + fmt(lx) + "\" y=\"" + fmt((kTop + kBottom) / 2) + "\" text-anchor=\"middle\" fill=\"" + color +
       "\" transform=\"rotate(" + (right ? "90 " : "-90 ") + fmt(lx) + " " + fmt((kTop + kBottom) / 2) + ")\">" +
       escape(label) + "</text>\n";
  return s;
}

std::string polyline(const Frame& f, const Axis& a, const std::vector<double>& v, const char* color,
                     const char* dash = nullptr) {
  std::string pts;
  for (std::size_t l = 0; l < v.size(); ++l) {
    if (!std::isfinite(v[l])) continue;
    if (!pts.empty()) pts += ' ';
    pts += fmt(f.x(l)) + "," + fmt(a.y(std::clamp(v[l], a.lo, a.hi)));
  }
  std::string s = "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\"";
  if (dash) s += std::string(" stroke-dasharray=\"") + dash + "\"";
  return s + " points=\"" + pts + "\"/>\n";
}

std::string marker(const Frame& f, std::size_t layer, const std::string& label, const char* color) {
  return "<line x1=\"" + fmt(f.x(layer)) + "\" y1=\"" + fmt(kTop) + "\" x2=\"" + fmt(f.x(layer)) + "\" y2=\"" +
         fmt(kBottom) + "\" stroke=\"" + color + "\" stroke-dasharray=\"2,3\"/>\n" + "<text x=\"" +
         fmt(f.x(layer) + 3) + "\" y=\"" + fmt(kTop + 12) + "\" fill=\"" + color + "\">" + escape(label) + "</text>\n";
}

}  // namespace

std::string render_layer_sweep_svg(const std::string& model_id, const LayerSweepResult* accuracy,
                                   const LayerSweepResult* r_squared) {
  std::size_t layers = 0;
  if (accuracy) layers = std::max(layers, accuracy->per_layer.size());
  if (r_squared) layers = std::max(layers, r_squared->per_layer.size());
  const Frame frame{std::max<std::size_t>(layers, 1)};
  const Axis left{0.0, 1.0};
  double r2_lo = 0.0;
  if (r_squared) {
    for (double v : r_squared->values()) {
      if (std::isfinite(v)) r2_lo = std::min(r2_lo, std::floor(v * 4.0) / 4.0);
    }
  }
  const Axis right{r2_lo, 1.0};

  std::string s = header(model_id + ": anchor accuracy and quality R2 by layer");
  s += x_axis(frame);
  s += y_axis(left, kLeft, false, "anchor accuracy", kPalette[0]);
  s += y_axis(right, kRight, true, "quality R2", kPalette[1]);
  if (accuracy && !accuracy->per_layer.empty()) {
    s += polyline(frame, left, accuracy->values(), kPalette[0]);
    if (accuracy->breakthrough) s += marker(frame, *accuracy->breakthrough, "bt", kPalette[0]);
    if (accuracy->saturation) s += marker(frame, *accuracy->saturation, "sat", kPalette[4]);
  }
  if (r_squared && !r_squared->per_layer.empty()) {
    s += polyline(frame, right, r_squared->values(), kPalette[1], "6,3");
    s += marker(frame, r_squared->optimal, "opt", kPalette[1]);
  }
  s += "</svg>\n";
  return s;
}

std::string render_fusion_svg(const std::vector<NamedCurve>& curves, double threshold) {
  std::size_t layers = 1;
  double lo = 0.0;
  for (const auto& c : curves) {
    layers = std::max(layers, c.curve.per_layer.size());
    for (double v : c.curve.values()) {
      if (std::isfinite(v)) lo = std::min(lo, std::floor(v * 4.0) / 4.0);
    }
  }
  const Frame frame{layers};
  const Axis axis{std::max(lo, -1.0), 1.0};
  std::string s = header("anchored vs clean cosine similarity by layer");
  s += x_axis(frame);
  s += y_axis(axis, kLeft, false, "mean cosine", "#000000");
  s += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(axis.y(threshold)) + "\" x2=\"" + fmt(kRight) + "\" y2=\"" +
       fmt(axis.y(threshold)) + "\" stroke=\"#7f7f7f\" stroke-dasharray=\"4,4\"/>\n";
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    s += polyline(frame, axis, curves[i].curve.values(), color);
    const double ly = kTop + 14.0 * static_cast<double>(i) + 4;
    s += "<rect x=\"" + fmt(kRight - 150) + "\" y=\"" + fmt(ly) + "\" width=\"10\" height=\"10\" fill=\"" + color +
         "\"/>\n";
    s += "<text x=\"" + fmt(kRight - 135) + "\" y=\"" + fmt(ly + 9) + "\">" +
         escape(curves[i].model_id + " (" + std::string(to_string(curves[i].curve.pattern)) + ")") + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace anchorprobe
