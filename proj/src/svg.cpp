#include "xsteer/svg.hpp"

#include <cstdio>
#include <fstream>

#include "xsteer/common.hpp"

namespace xsteer {

namespace {

constexpr double kMarginLeft = 62.0;
constexpr double kMarginRight = 18.0;
constexpr double kMarginTop = 38.0;
constexpr double kMarginBottom = 48.0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

SvgPlot::SvgPlot(int width, int height, std::string title)
    : width_(width), height_(height), title_(std::move(title)) {}

void SvgPlot::set_axes(double xmin, double xmax, double ymin, double ymax,
                       std::string xlabel, std::string ylabel) {
  if (!(xmax > xmin) || !(ymax > ymin))
    throw ValidationError("svg: axis ranges must be non-empty");
  xmin_ = xmin;
  xmax_ = xmax;
  ymin_ = ymin;
  ymax_ = ymax;
  xlabel_ = std::move(xlabel);
  ylabel_ = std::move(ylabel);
  axes_set_ = true;
}

double SvgPlot::px(double x) const {
  return kMarginLeft +
         (x - xmin_) / (xmax_ - xmin_) * (width_ - kMarginLeft - kMarginRight);
}

double SvgPlot::py(double y) const {
  return height_ - kMarginBottom -
         (y - ymin_) / (ymax_ - ymin_) * (height_ - kMarginTop - kMarginBottom);
}

void SvgPlot::add_point(double x, double y, const std::string& color, double radius) {
  points_.push_back({x, y, radius, color});
}

void SvgPlot::add_cross(double x, double y, const std::string& color, double size) {
  crosses_.push_back({x, y, size, color});
}

void SvgPlot::add_line(double x1, double y1, double x2, double y2,
                       const std::string& color, double stroke_width) {
  lines_.push_back({x1, y1, x2, y2, stroke_width, color});
}

void SvgPlot::add_bar(double x, double bar_width, double y, const std::string& color) {
  bars_.push_back({x, bar_width, y, color});
}

void SvgPlot::add_legend(const std::string& label, const std::string& color) {
  legend_.emplace_back(label, color);
}

const std::string& SvgPlot::color(size_t index) {
  static const std::vector<std::string> palette = {
      "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
      "#ff7f0e", "#8c564b", "#17becf", "#e377c2"};
  return palette[index % palette.size()];
}

void SvgPlot::write(const std::string& path) const {
  if (!axes_set_) throw ValidationError("svg: axes not set before write");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot open for writing: " + path);

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_
      << "\" height=\"" << height_ << "\" viewBox=\"0 0 " << width_ << " "
      << height_ << "\">\n";
  out << "<rect width=\"" << width_ << "\" height=\"" << height_
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << fmt(width_ / 2.0)
      << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\">"
      << escape(title_) << "</text>\n";

  // frame
  out << "<rect x=\"" << fmt(kMarginLeft) << "\" y=\"" << fmt(kMarginTop)
      << "\" width=\"" << fmt(width_ - kMarginLeft - kMarginRight)
      << "\" height=\"" << fmt(height_ - kMarginTop - kMarginBottom)
      << "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"1\"/>\n";

  // ticks
  for (int i = 0; i <= 4; ++i) {
    const double fx = xmin_ + (xmax_ - xmin_) * i / 4.0;
    const double fy = ymin_ + (ymax_ - ymin_) * i / 4.0;
    out << "<line x1=\"" << fmt(px(fx)) << "\" y1=\""
        << fmt(height_ - kMarginBottom) << "\" x2=\"" << fmt(px(fx)) << "\" y2=\""
        << fmt(height_ - kMarginBottom + 5) << "\" stroke=\"#444444\"/>\n";
    out << "<text x=\"" << fmt(px(fx)) << "\" y=\""
        << fmt(height_ - kMarginBottom + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"10\">"
        << fmt(fx) << "</text>\n";
    out << "<line x1=\"" << fmt(kMarginLeft - 5) << "\" y1=\"" << fmt(py(fy))
        << "\" x2=\"" << fmt(kMarginLeft) << "\" y2=\"" << fmt(py(fy))
        << "\" stroke=\"#444444\"/>\n";
    out << "<text x=\"" << fmt(kMarginLeft - 8) << "\" y=\"" << fmt(py(fy) + 3)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
        << fmt(fy) << "</text>\n";
  }

  out << "<text x=\"" << fmt((kMarginLeft + width_ - kMarginRight) / 2.0)
      << "\" y=\"" << fmt(height_ - 10.0)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << escape(xlabel_) << "</text>\n";
  out << "<text x=\"14\" y=\"" << fmt((kMarginTop + height_ - kMarginBottom) / 2.0)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
         "transform=\"rotate(-90 14 "
      << fmt((kMarginTop + height_ - kMarginBottom) / 2.0) << ")\">"
      << escape(ylabel_) << "</text>\n";

  for (const Bar& b : bars_) {
    const double x0 = px(b.x - b.w / 2.0);
    const double x1 = px(b.x + b.w / 2.0);
    const double y0 = py(std::max(0.0, b.y));
    const double y1 = py(std::min(0.0, b.y));
    out << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y0) << "\" width=\""
        << fmt(x1 - x0) << "\" height=\"" << fmt(y1 - y0) << "\" fill=\""
        << b.color << "\" fill-opacity=\"0.85\"/>\n";
  }
  for (const Line& l : lines_) {
    out << "<line x1=\"" << fmt(px(l.x1)) << "\" y1=\"" << fmt(py(l.y1))
        << "\" x2=\"" << fmt(px(l.x2)) << "\" y2=\"" << fmt(py(l.y2))
        << "\" stroke=\"" << l.color << "\" stroke-width=\"" << fmt(l.w)
        << "\"/>\n";
  }
  for (const Point& p : points_) {
    out << "<circle cx=\"" << fmt(px(p.x)) << "\" cy=\"" << fmt(py(p.y))
        << "\" r=\"" << fmt(p.r) << "\" fill=\"" << p.color
        << "\" fill-opacity=\"0.75\"/>\n";
  }
  for (const Cross& c : crosses_) {
    const double cx = px(c.x);
    const double cy = py(c.y);
    out << "<line x1=\"" << fmt(cx - c.s) << "\" y1=\"" << fmt(cy - c.s)
        << "\" x2=\"" << fmt(cx + c.s) << "\" y2=\"" << fmt(cy + c.s)
        << "\" stroke=\"" << c.color << "\" stroke-width=\"2\"/>\n";
    out << "<line x1=\"" << fmt(cx - c.s) << "\" y1=\"" << fmt(cy + c.s)
        << "\" x2=\"" << fmt(cx + c.s) << "\" y2=\"" << fmt(cy - c.s)
        << "\" stroke=\"" << c.color << "\" stroke-width=\"2\"/>\n";
  }

  double ly = kMarginTop + 14.0;
  for (const auto& [label, color] : legend_) {
    const double lx = width_ - kMarginRight - 110.0;
    out << "<rect x=\"" << fmt(lx) << "\" y=\"" << fmt(ly - 9) << "\" width=\"10\" "
        << "height=\"10\" fill=\"" << color << "\"/>\n";
    out << "<text x=\"" << fmt(lx + 16) << "\" y=\"" << fmt(ly)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(label)
        << "</text>\n";
    ly += 16.0;
  }
  out << "</svg>\n";
  if (!out) throw ValidationError("short write to " + path);
}

}  // namespace xsteer
