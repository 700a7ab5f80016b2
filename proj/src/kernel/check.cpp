#include "geoforge/kernel/check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace geoforge {

namespace {

constexpr double kBad = 1.0;

struct Ctx {
  const Diagram& d;
  double diag;
  Vec2 p(PointId i) const { return d.coords.at(i); }
};

// Distance of the odd point out from the line through the widest pair.
double coll_residual(const Ctx& c, PointId a, PointId b, PointId e) {
  Vec2 pts[3] = {c.p(a), c.p(b), c.p(e)};
  double best = -1.0;
  int bi = 0;
  for (int i = 0; i < 3; ++i) {
    const double l = dist(pts[(i + 1) % 3], pts[(i + 2) % 3]);
    if (l > best) {
      best = l;
      bi = i;
    }
  }
  if (best <= 0) return 0.0;
  const Vec2 u = pts[(bi + 1) % 3], v = pts[(bi + 2) % 3];
  return std::abs(cross(v - u, pts[bi] - u)) / best / c.diag;
}

double max_coll(const Ctx& c, std::span<const PointId> a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j)
      for (std::size_t k = j + 1; k < a.size(); ++k) m = std::max(m, coll_residual(c, a[i], a[j], a[k]));
  return m;
}

double para_residual(const Ctx& c, PointId a, PointId b, PointId e, PointId f) {
  const Vec2 u = c.p(b) - c.p(a), v = c.p(f) - c.p(e);
  const double nu = norm(u), nv = norm(v);
  if (nu == 0 || nv == 0) return kBad;
  return std::abs(cross(u, v)) / (nu * nv);
}

double angle_of(const Ctx& c, PointId a, PointId b) { return line_angle(c.p(a), c.p(b)); }

double length(const Ctx& c, PointId a, PointId b) { return dist(c.p(a), c.p(b)); }

double eqangle_residual(const Ctx& c, const PointId* a) {
  for (int i = 0; i < 4; ++i)
    if (length(c, a[2 * i], a[2 * i + 1]) == 0) return kBad;
  const double lhs = angle_of(c, a[2], a[3]) - angle_of(c, a[0], a[1]);
  const double rhs = angle_of(c, a[6], a[7]) - angle_of(c, a[4], a[5]);
  return std::abs(wrap_half_pi(lhs - rhs));
}

double sameside_measure(const Ctx& c, const PointId* a) {
  auto cosine = [&](PointId pivot, PointId x, PointId y) {
    const Vec2 u = c.p(x) - c.p(pivot), v = c.p(y) - c.p(pivot);
    const double nu = norm(u), nv = norm(v);
    if (nu == 0 || nv == 0) return 0.0;
    return dot(u, v) / (nu * nv);
  };
  const double s1 = cosine(a[0], a[1], a[2]);
  const double s2 = cosine(a[3], a[4], a[5]);
  if ((s1 > 0) != (s2 > 0)) return 0.0;
  return std::min(std::abs(s1), std::abs(s2));
}

}  // namespace

double residual(const Fact& f, const Diagram& d) {
  const Ctx c{d, d.diameter() > 0 ? d.diameter() : 1.0};
  const PointId* a = f.args.data();
  switch (f.pred) {
    case Pred::coll: return coll_residual(c, a[0], a[1], a[2]);
    case Pred::ncoll: return std::max(0.0, kTolFalse - max_coll(c, f.view()));
    case Pred::para: return para_residual(c, a[0], a[1], a[2], a[3]);
    case Pred::npara: return std::max(0.0, kTolFalse - para_residual(c, a[0], a[1], a[2], a[3]));
    case Pred::perp: {
      const Vec2 u = c.p(a[1]) - c.p(a[0]), v = c.p(a[3]) - c.p(a[2]);
      const double nu = norm(u), nv = norm(v);
      if (nu == 0 || nv == 0) return kBad;
      return std::abs(dot(u, v)) / (nu * nv);
    }
    case Pred::cong: return std::abs(length(c, a[0], a[1]) - length(c, a[2], a[3])) / c.diag;
    case Pred::cyclic: {
      if (max_coll(c, f.view()) < kTolTrue) return kBad;
      const PointId q[8] = {a[2], a[0], a[2], a[1], a[3], a[0], a[3], a[1]};
      return eqangle_residual(c, q);
    }
    case Pred::eqangle: return eqangle_residual(c, a);
    case Pred::eqratio: {
      double l[4];
      for (int i = 0; i < 4; ++i) {
        l[i] = length(c, a[2 * i], a[2 * i + 1]);
        if (l[i] == 0) return kBad;
      }
      return std::abs(std::log(l[0]) - std::log(l[1]) - std::log(l[2]) + std::log(l[3]));
    }
    case Pred::midp: return dist(c.p(a[0]), midpoint(c.p(a[1]), c.p(a[2]))) / c.diag;
    case Pred::circle: {
      const double r = length(c, a[0], a[1]);
      return std::max(std::abs(r - length(c, a[0], a[2])), std::abs(r - length(c, a[0], a[3]))) / c.diag;
    }
    case Pred::sameside: return std::max(0.0, kTolFalse - sameside_measure(c, a));
  }
  return kBad;
}

bool check_fact(const Fact& fact, const Diagram& diagram, double tol) { return residual(fact, diagram) < tol; }

}  // namespace geoforge
