#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "geoforge/kernel/geometry.hpp"

namespace geoforge {

struct Box {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  static Box centered(Vec2 c, double w, double h) { return {c.x - w / 2, c.y - h / 2, c.x + w / 2, c.y + h / 2}; }
  Vec2 center() const { return {(x0 + x1) / 2, (y0 + y1) / 2}; }
  Box inflated(double d) const { return {x0 - d, y0 - d, x1 + d, y1 + d}; }
  bool contains(Vec2 p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
};

inline double label_width(const std::string& text, double font) { return 0.62 * font * text.size() + 4.0; }
inline double label_height(double font) { return font + 2.0; }

inline double overlap_area(const Box& a, const Box& b) {
  const double w = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  const double h = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  return w > 0 && h > 0 ? w * h : 0.0;
}

// Liang-Barsky clip of segment pq against the box.
inline bool segment_hits(const Box& b, Vec2 p, Vec2 q) {
  double t0 = 0, t1 = 1;
  const double dx = q.x - p.x, dy = q.y - p.y;
  const double pp[4] = {-dx, dx, -dy, dy};
  const double qq[4] = {p.x - b.x0, b.x1 - p.x, p.y - b.y0, b.y1 - p.y};
  for (int i = 0; i < 4; ++i) {
    if (pp[i] == 0) {
      if (qq[i] < 0) return false;
      continue;
    }
    const double t = qq[i] / pp[i];
    if (pp[i] < 0) t0 = std::max(t0, t);
    else t1 = std::min(t1, t);
    if (t0 > t1) return false;
  }
  return true;
}

inline bool circle_hits(const Box& b, Vec2 c, double r) {
  const double nx = std::clamp(c.x, b.x0, b.x1), ny = std::clamp(c.y, b.y0, b.y1);
  const double near = std::hypot(c.x - nx, c.y - ny);
  const double fx = std::max(std::abs(c.x - b.x0), std::abs(c.x - b.x1));
  const double fy = std::max(std::abs(c.y - b.y0), std::abs(c.y - b.y1));
  return near <= r && std::hypot(fx, fy) >= r;
}

}  // namespace geoforge
