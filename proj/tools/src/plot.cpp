#include "denoise_lab/tools/plot.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace denoise_lab::tools {

namespace {

constexpr double kLeft = 90.0;
constexpr double kRight = 200.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 70.0;

struct Axis {
  bool log = false;
  double lo = 0.0;
  double hi = 1.0;
  double pixel_lo = 0.0;
  double pixel_hi = 1.0;

  double transform(double v) const { return log ? std::log10(v) : v; }
  double map(double v) const {
    return pixel_lo + (transform(v) - lo) / (hi - lo) * (pixel_hi - pixel_lo);
  }
};

bool usable(double v, bool log) { return std::isfinite(v) && (!log || v > 0.0); }

std::string num(double v, int precision = 2) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(precision) << v;
  return out.str();
}

std::string tick_label(double v) {
  std::ostringstream out;
  out << std::setprecision(3) << v;
  return out.str();
}

Axis make_axis(const std::vector<double>& values, bool log, double pixel_lo, double pixel_hi) {
  Axis axis;
  axis.log = log;
  axis.pixel_lo = pixel_lo;
  axis.pixel_hi = pixel_hi;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : values) {
    if (!usable(v, log)) continue;
    lo = std::min(lo, axis.transform(v));
    hi = std::max(hi, axis.transform(v));
  }
  if (!std::isfinite(lo)) {
    lo = 0.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  axis.lo = lo - pad;
  axis.hi = hi + pad;
  return axis;
}

// Tick positions in data units.
std::vector<double> ticks(const Axis& axis) {
  std::vector<double> out;
  if (axis.log) {
    const double span = axis.hi - axis.lo;
    const int first = static_cast<int>(std::ceil(axis.lo));
    const int last = static_cast<int>(std::floor(axis.hi));
    const int stride = std::max(1, static_cast<int>(std::ceil(span / 8.0)));
    for (int e = first; e <= last; e += stride) out.push_back(std::pow(10.0, e));
    if (out.size() < 3) {
      out.clear();
      for (int e = first - 1; e <= last + 1; ++e) {
        for (double m : {1.0, 2.0, 5.0}) {
          const double v = m * std::pow(10.0, e);
          if (std::log10(v) >= axis.lo && std::log10(v) <= axis.hi) out.push_back(v);
        }
      }
    }
    return out;
  }
  const double raw = (axis.hi - axis.lo) / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  for (double v = std::ceil(axis.lo / step) * step; v <= axis.hi + 1e-9 * step; v += step) {
    out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  }
  return out;
}

}  // namespace

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string render_svg(const Plot& plot) {
  const double w = kSvgWidth;
  const double h = kSvgHeight;
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& s : plot.series) {
    xs.insert(xs.end(), s.x.begin(), s.x.end());
    ys.insert(ys.end(), s.y.begin(), s.y.end());
  }
  const Axis ax = make_axis(xs, plot.log_x, kLeft, w - kRight);
  const Axis ay = make_axis(ys, plot.log_y, h - kBottom, kTop);

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSvgWidth << "\" height=\""
      << kSvgHeight << "\" viewBox=\"0 0 " << kSvgWidth << ' ' << kSvgHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << num(w / 2) << "\" y=\"30\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"18\">" << xml_escape(plot.title) << "</text>\n";

  svg << "<g font-family=\"sans-serif\" font-size=\"12\" stroke-width=\"1\">\n";
  svg << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(w - kLeft - kRight)
      << "\" height=\"" << num(h - kTop - kBottom) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ticks(ax)) {
    const double px = ax.map(t);
    svg << "<line x1=\"" << num(px) << "\" y1=\"" << num(h - kBottom) << "\" x2=\"" << num(px)
        << "\" y2=\"" << num(h - kBottom + 6) << "\" stroke=\"black\"/>"
        << "<text x=\"" << num(px) << "\" y=\"" << num(h - kBottom + 20)
        << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
  }
  for (double t : ticks(ay)) {
    const double py = ay.map(t);
    svg << "<line x1=\"" << num(kLeft - 6) << "\" y1=\"" << num(py) << "\" x2=\"" << num(kLeft)
        << "\" y2=\"" << num(py) << "\" stroke=\"black\"/>"
        << "<text x=\"" << num(kLeft - 10) << "\" y=\"" << num(py + 4)
        << "\" text-anchor=\"end\">" << tick_label(t) << "</text>\n";
  }
  svg << "<text x=\"" << num((kLeft + w - kRight) / 2) << "\" y=\"" << num(h - 20)
      << "\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(plot.x_label) << "</text>\n";
  svg << "<text x=\"20\" y=\"" << num((kTop + h - kBottom) / 2)
      << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 20 "
      << num((kTop + h - kBottom) / 2) << ")\">" << xml_escape(plot.y_label) << "</text>\n";
  svg << "</g>\n";

  for (const auto& s : plot.series) {
    const std::size_t n = std::min(s.x.size(), s.y.size());
    if (plot.kind == PlotKind::Line) {
      svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
      bool first = true;
      for (std::size_t i = 0; i < n; ++i) {
        if (!usable(s.x[i], plot.log_x) || !usable(s.y[i], plot.log_y)) continue;
        svg << (first ? "" : " ") << num(ax.map(s.x[i])) << ',' << num(ay.map(s.y[i]));
        first = false;
      }
      svg << "\"/>\n";
      if (n <= 50) {
        for (std::size_t i = 0; i < n; ++i) {
          if (!usable(s.x[i], plot.log_x) || !usable(s.y[i], plot.log_y)) continue;
          svg << "<circle cx=\"" << num(ax.map(s.x[i])) << "\" cy=\"" << num(ay.map(s.y[i]))
              << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
        }
      }
    } else {
      svg << "<g fill=\"" << s.color << "\" fill-opacity=\"0.5\">\n";
      for (std::size_t i = 0; i < n; ++i) {
        if (!usable(s.x[i], plot.log_x) || !usable(s.y[i], plot.log_y)) continue;
        svg << "<circle cx=\"" << num(ax.map(s.x[i])) << "\" cy=\"" << num(ay.map(s.y[i]))
            << "\" r=\"1.5\"/>\n";
      }
      svg << "</g>\n";
    }
  }

  svg << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  double ly = kTop + 10;
  for (const auto& s : plot.series) {
    const double lx = w - kRight + 10;
    svg << "<rect x=\"" << num(lx) << "\" y=\"" << num(ly) << "\" width=\"14\" height=\"14\" fill=\""
        << s.color << "\"/><text x=\"" << num(lx + 20) << "\" y=\"" << num(ly + 11) << "\">"
        << xml_escape(s.label) << "</text>\n";
    ly += 22;
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

}  // namespace denoise_lab::tools
