#pragma once

#include <cmath>
#include <optional>
#include <utility>

namespace geoforge {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double dist(Vec2 a, Vec2 b) { return norm(a - b); }
inline Vec2 perp(Vec2 a) { return {-a.y, a.x}; }
inline Vec2 unit(Vec2 a) { return a / norm(a); }
inline Vec2 rotate(Vec2 a, double t) {
  const double c = std::cos(t), s = std::sin(t);
  return {c * a.x - s * a.y, s * a.x + c * a.y};
}
inline Vec2 midpoint(Vec2 a, Vec2 b) { return (a + b) * 0.5; }

// Direction angle of a line in [0, pi).
inline double line_angle(Vec2 a, Vec2 b) {
  double t = std::atan2(b.y - a.y, b.x - a.x);
  if (t < 0) t += M_PI;
  if (t >= M_PI) t -= M_PI;
  return t;
}

// Wraps an angle difference into (-pi/2, pi/2].
inline double wrap_half_pi(double t) {
  t = std::fmod(t, M_PI);
  if (t > M_PI / 2) t -= M_PI;
  if (t <= -M_PI / 2) t += M_PI;
  return t;
}

struct Line {
  Vec2 p;
  Vec2 d;  // unit direction
};

struct Circle {
  Vec2 c;
  double r = 0.0;
};

inline Line line_through(Vec2 a, Vec2 b) { return {a, unit(b - a)}; }

inline Vec2 project(Vec2 p, const Line& l) { return l.p + l.d * dot(p - l.p, l.d); }

inline Vec2 reflect(Vec2 p, const Line& l) { return project(p, l) * 2.0 - p; }

// Sine of the angle between the two lines below which they count as parallel.
inline constexpr double kParallelSin = 1e-6;

inline std::optional<Vec2> intersect(const Line& a, const Line& b) {
  const double den = cross(a.d, b.d);
  if (std::abs(den) < kParallelSin) return std::nullopt;
  const double t = cross(b.p - a.p, b.d) / den;
  return a.p + a.d * t;
}

// Both roots of a line-circle intersection; nullopt when the line misses.
inline std::optional<std::pair<Vec2, Vec2>> intersect(const Line& l, const Circle& c) {
  const Vec2 f = project(c.c, l);
  const double h2 = c.r * c.r - dot(f - c.c, f - c.c);
  if (h2 < 0) return std::nullopt;
  const double h = std::sqrt(h2);
  return std::pair{f - l.d * h, f + l.d * h};
}

inline std::optional<std::pair<Vec2, Vec2>> intersect(const Circle& a, const Circle& b) {
  const Vec2 d = b.c - a.c;
  const double dd = norm(d);
  if (dd < 1e-12) return std::nullopt;
  const double x = (dd * dd + a.r * a.r - b.r * b.r) / (2 * dd);
  const double h2 = a.r * a.r - x * x;
  if (h2 < 0) return std::nullopt;
  const double h = std::sqrt(h2);
  const Vec2 u = d / dd;
  const Vec2 base = a.c + u * x;
  return std::pair{base - perp(u) * h, base + perp(u) * h};
}

inline std::optional<Vec2> circumcenter(Vec2 a, Vec2 b, Vec2 c) {
  const double d = 2 * cross(b - a, c - a);
  if (std::abs(d) < 1e-14) return std::nullopt;
  const Vec2 ab = b - a, ac = c - a;
  const double b2 = dot(ab, ab), c2 = dot(ac, ac);
  return a + Vec2{(ac.y * b2 - ab.y * c2) / d, (ab.x * c2 - ac.x * b2) / d};
}

}  // namespace geoforge
