#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace potwb::cli {

namespace {

constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 45.0;
constexpr double kTitleBand = 28.0;

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish(bool log) {
    if (!(lo <= hi)) {
      lo = log ? 1.0 : 0.0;
      hi = log ? 10.0 : 1.0;
    }
    if (lo == hi) {
      const double pad = log ? 2.0 : std::max(1.0, std::abs(lo) * 0.1);
      lo = log ? lo / pad : lo - pad;
      hi = log ? hi * pad : hi + pad;
    } else if (!log) {
      const double pad = 0.04 * (hi - lo);
      lo -= pad;
      hi += pad;
    }
  }
};

double nice_step(double span) {
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  if (f < 1.5) return mag;
  if (f < 3.0) return 2.0 * mag;
  if (f < 7.0) return 5.0 * mag;
  return 10.0 * mag;
}

std::vector<double> linear_ticks(const Range& r) {
  const double step = nice_step(r.hi - r.lo);
  std::vector<double> out;
  for (double t = std::ceil(r.lo / step) * step; t <= r.hi + 1e-9 * step; t += step) {
    out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  }
  return out;
}

std::vector<double> log_ticks(const Range& r) {
  std::vector<double> out;
  for (int e = static_cast<int>(std::floor(std::log10(r.lo))); e <= std::ceil(std::log10(r.hi)); ++e) {
    for (double m : {1.0, 2.0, 5.0}) {
      const double t = m * std::pow(10.0, e);
      if (t >= r.lo && t <= r.hi) out.push_back(t);
    }
  }
  return out;
}

std::string coord(double v) { return fmt::format("{:.2f}", v); }

std::string tick_label(double v) { return fmt::format("{:g}", v); }

struct Frame {
  double x0, y0, w, h;
  Range xr, yr;
  bool log_x;

  double px(double x) const {
    const double t = log_x ? (std::log(x) - std::log(xr.lo)) / (std::log(xr.hi) - std::log(xr.lo))
                           : (x - xr.lo) / (xr.hi - xr.lo);
    return x0 + t * w;
  }
  double py(double y) const { return y0 + h - (y - yr.lo) / (yr.hi - yr.lo) * h; }
  bool usable(double x, double y) const {
    return std::isfinite(x) && std::isfinite(y) && (!log_x || x > 0.0);
  }
};

void render_panel(std::string& out, const Panel& p, double top, double width, double height) {
  Frame f{kLeft, top + kTop, width - kLeft - kRight, height - kTop - kBottom, {}, {}, p.log_x};
  for (const auto& c : p.cells) {
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      f.xr.add(c.x[i] - 0.5 * c.dx);
      f.xr.add(c.x[i] + 0.5 * c.dx);
      f.yr.add(c.y[i] - 0.5 * c.dy);
      f.yr.add(c.y[i] + 0.5 * c.dy);
    }
  }
  double bar_width = 1.0;
  for (const auto& s : p.series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!f.usable(s.x[i], s.y[i])) continue;
      f.xr.add(s.x[i]);
      f.yr.add(s.y[i]);
    }
    if (s.style == Series::Style::bars) {
      f.yr.add(0.0);
      for (std::size_t i = 1; i < s.x.size(); ++i) bar_width = std::min(bar_width, s.x[i] - s.x[i - 1]);
      if (!s.x.empty()) {
        f.xr.add(s.x.front() - 0.5 * bar_width);
        f.xr.add(s.x.back() + 0.5 * bar_width);
      }
    }
  }
  f.xr.finish(p.log_x);
  f.yr.finish(false);

  out += fmt::format("<g class=\"panel\">\n<text x=\"{}\" y=\"{}\" font-size=\"13\">{}</text>\n",
                     coord(f.x0), coord(top + 18.0), xml_escape(p.title));
  out += fmt::format(
      "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444444\"/>\n",
      coord(f.x0), coord(f.y0), coord(f.w), coord(f.h));
  for (double t : p.log_x ? log_ticks(f.xr) : linear_ticks(f.xr)) {
    const double x = f.px(t);
    out += fmt::format(
        "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#444444\"/>"
        "<text x=\"{0}\" y=\"{3}\" font-size=\"10\" text-anchor=\"middle\">{4}</text>\n",
        coord(x), coord(f.y0 + f.h), coord(f.y0 + f.h + 4.0), coord(f.y0 + f.h + 15.0),
        tick_label(t));
  }
  for (double t : linear_ticks(f.yr)) {
    const double y = f.py(t);
    out += fmt::format(
        "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#444444\"/>"
        "<text x=\"{3}\" y=\"{4}\" font-size=\"10\" text-anchor=\"end\">{5}</text>\n",
        coord(f.x0 - 4.0), coord(y), coord(f.x0), coord(f.x0 - 6.0), coord(y + 3.5), tick_label(t));
  }
  out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
                     coord(f.x0 + 0.5 * f.w), coord(f.y0 + f.h + 32.0), xml_escape(p.x_label));
  out += fmt::format(
      "<text x=\"{0}\" y=\"{1}\" font-size=\"11\" text-anchor=\"middle\" "
      "transform=\"rotate(-90 {0} {1})\">{2}</text>\n",
      coord(f.x0 - 48.0), coord(f.y0 + 0.5 * f.h), xml_escape(p.y_label));

  for (const auto& c : p.cells) {
    out += fmt::format("<g fill=\"{}\" fill-opacity=\"{:.3g}\">\n", c.color, c.opacity);
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      const double xa = f.px(c.x[i] - 0.5 * c.dx);
      const double xb = f.px(c.x[i] + 0.5 * c.dx);
      const double ya = f.py(c.y[i] + 0.5 * c.dy);
      const double yb = f.py(c.y[i] - 0.5 * c.dy);
      out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"/>\n", coord(xa),
                         coord(ya), coord(xb - xa), coord(yb - ya));
    }
    out += "</g>\n";
  }

  for (const auto& s : p.series) {
    switch (s.style) {
      case Series::Style::line:
      case Series::Style::dashed: {
        // Break the polyline at unusable points.
        std::string pts;
        const auto flush = [&] {
          if (pts.empty()) return;
          out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"{} points=\"{}\"/>\n",
                             s.color, s.style == Series::Style::dashed ? " stroke-dasharray=\"5,3\"" : "",
                             pts);
          pts.clear();
        };
        for (std::size_t i = 0; i < s.x.size(); ++i) {
          if (!f.usable(s.x[i], s.y[i])) {
            flush();
            continue;
          }
          if (!pts.empty()) pts += ' ';
          pts += coord(f.px(s.x[i])) + "," + coord(f.py(s.y[i]));
        }
        flush();
        break;
      }
      case Series::Style::points:
      case Series::Style::hollow_points:
        for (std::size_t i = 0; i < s.x.size(); ++i) {
          if (!f.usable(s.x[i], s.y[i])) continue;
          out += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"2.5\" {}/>\n", coord(f.px(s.x[i])),
                             coord(f.py(s.y[i])),
                             s.style == Series::Style::points
                                 ? fmt::format("fill=\"{}\"", s.color)
                                 : fmt::format("fill=\"none\" stroke=\"{}\"", s.color));
        }
        break;
      case Series::Style::bars:
        for (std::size_t i = 0; i < s.x.size(); ++i) {
          if (!f.usable(s.x[i], s.y[i])) continue;
          const double xa = f.px(s.x[i] - 0.4 * bar_width);
          const double xb = f.px(s.x[i] + 0.4 * bar_width);
          const double ya = f.py(std::max(s.y[i], 0.0));
          const double yb = f.py(0.0);
          out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n",
                             coord(xa), coord(ya), coord(xb - xa), coord(yb - ya), s.color);
        }
        break;
    }
  }

  double ly = f.y0 + 12.0;
  const auto legend = [&](const std::string& label, const std::string& color) {
    if (label.empty()) return;
    out += fmt::format(
        "<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"3\" fill=\"{}\"/>"
        "<text x=\"{}\" y=\"{}\" font-size=\"10\">{}</text>\n",
        coord(f.x0 + f.w - 150.0), coord(ly - 4.0), color, coord(f.x0 + f.w - 136.0), coord(ly),
        xml_escape(label));
    ly += 13.0;
  };
  for (const auto& c : p.cells) legend(c.label, c.color);
  for (const auto& s : p.series) legend(s.label, s.color);
  out += "</g>\n";
}

}  // namespace

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
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
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string Figure::render() const {
  const double height = kTitleBand + panel_height * static_cast<double>(std::max<std::size_t>(1, panels.size()));
  std::string out = fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n"
      "<text x=\"{2}\" y=\"20\" font-size=\"15\" text-anchor=\"middle\">{3}</text>\n",
      coord(width), coord(height), coord(0.5 * width), xml_escape(title));
  for (std::size_t k = 0; k < panels.size(); ++k) {
    render_panel(out, panels[k], kTitleBand + panel_height * static_cast<double>(k), width,
                 panel_height);
  }
  out += "</svg>\n";
  return out;
}

}  // namespace potwb::cli
