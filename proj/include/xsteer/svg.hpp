#pragma once

#include <string>
#include <vector>

namespace xsteer {

// Minimal static plot writer: axes with ticks, circles, crosses, lines and
// bars in data coordinates, plus a legend. Output is deterministic byte for
// byte given identical drawing calls.
class SvgPlot {
 public:
  SvgPlot(int width, int height, std::string title);

  void set_axes(double xmin, double xmax, double ymin, double ymax,
                std::string xlabel, std::string ylabel);
  void add_point(double x, double y, const std::string& color, double radius = 3.0);
  void add_cross(double x, double y, const std::string& color, double size = 5.0);
  void add_line(double x1, double y1, double x2, double y2,
                const std::string& color, double stroke_width = 1.5);
  // Vertical bar from y = 0 to y, centered on x with the given data-space width.
  void add_bar(double x, double bar_width, double y, const std::string& color);
  void add_legend(const std::string& label, const std::string& color);

  void write(const std::string& path) const;

  // Stable palette for per-language coloring.
  static const std::string& color(size_t index);

 private:
  struct Point { double x, y, r; std::string color; };
  struct Cross { double x, y, s; std::string color; };
  struct Line { double x1, y1, x2, y2, w; std::string color; };
  struct Bar { double x, w, y; std::string color; };

  double px(double x) const;
  double py(double y) const;

  int width_, height_;
  std::string title_, xlabel_, ylabel_;
  double xmin_ = 0.0, xmax_ = 1.0, ymin_ = 0.0, ymax_ = 1.0;
  bool axes_set_ = false;
  std::vector<Point> points_;
  std::vector<Cross> crosses_;
  std::vector<Line> lines_;
  std::vector<Bar> bars_;
  std::vector<std::pair<std::string, std::string>> legend_;
};

}  // namespace xsteer
