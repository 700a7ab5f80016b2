#include "geoforge/kernel/diagram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <variant>

#include "geoforge/common/error.hpp"
#include "geoforge/common/rng.hpp"
#include "geoforge/kernel/catalog.hpp"
#include "geoforge/kernel/check.hpp"
#include "geoforge/kernel/premise_facts.hpp"

namespace geoforge {

namespace {

constexpr double kDeg = M_PI / 180.0;
// Intersections flatter than this (sine of the crossing angle) are rejected as
// ill-conditioned, as are line/circle meetings closer to tangency than this
// fraction of the radius.
constexpr double kMinCrossSin = 0.05;
constexpr double kMinChordFrac = 1e-3;

struct AttemptFailed {
  bool unsatisfiable;
};

[[noreturn]] void degenerate() { throw AttemptFailed{false}; }
[[noreturn]] void unsatisfiable() { throw AttemptFailed{true}; }

using Locus = std::variant<Line, Circle>;

class Builder {
public:
  explicit Builder(Rng& rng) : rng_(rng) {}

  std::vector<Vec2> pts;

  double scale() const {
    if (pts.size() < 2) return 1.0;
    double x0 = pts[0].x, x1 = x0, y0 = pts[0].y, y1 = y0;
    for (auto p : pts) {
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
    return std::hypot(x1 - x0, y1 - y0);
  }

  void check_fresh(Vec2 p) const {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) degenerate();
    const double s = scale();
    for (auto q : pts)
      if (dist(p, q) < kMargin * s) degenerate();
  }

  // Root farthest from the existing points.
  Vec2 pick(Vec2 a, Vec2 b) const {
    auto score = [&](Vec2 p) {
      double m = std::numeric_limits<double>::infinity();
      for (auto q : pts) m = std::min(m, dist(p, q));
      return m;
    };
    return score(b) > score(a) ? b : a;
  }

  Line line(Vec2 a, Vec2 b) const {
    if (dist(a, b) < 1e-12) degenerate();
    return line_through(a, b);
  }

  Vec2 meet(const Line& a, const Line& b) const {
    if (std::abs(cross(a.d, b.d)) < kMinCrossSin) degenerate();
    return *intersect(a, b);
  }

  Vec2 meet(const Line& l, const Circle& c) const {
    auto r = intersect(l, c);
    if (!r) unsatisfiable();
    if (dist(r->first, r->second) < 2 * kMinChordFrac * c.r) degenerate();
    return pick(r->first, r->second);
  }

  Vec2 meet(const Circle& a, const Circle& b) const {
    auto r = intersect(a, b);
    if (!r) unsatisfiable();
    if (dist(r->first, r->second) < 2 * kMinChordFrac * std::min(a.r, b.r)) degenerate();
    return pick(r->first, r->second);
  }

  Vec2 meet(const Locus& a, const Locus& b) const {
    return std::visit([&](const auto& x, const auto& y) -> Vec2 {
      using X = std::decay_t<decltype(x)>;
      using Y = std::decay_t<decltype(y)>;
      if constexpr (std::is_same_v<X, Line> && std::is_same_v<Y, Line>) return meet(x, y);
      else if constexpr (std::is_same_v<X, Line>) return meet(x, y);
      else if constexpr (std::is_same_v<Y, Line>) return meet(y, x);
      else return meet(x, y);
    }, a, b);
  }

  Vec2 random_on(const Locus& l) {
    if (auto* line = std::get_if<Line>(&l)) {
      const double s = std::max(scale(), 0.5);
      return line->p + line->d * (rng_.uniform(-0.7, 0.7) * s);
    }
    const auto& c = std::get<Circle>(l);
    const double t = rng_.uniform(0.0, 2 * M_PI);
    return c.c + Vec2{std::cos(t), std::sin(t)} * c.r;
  }

  Rng& rng() { return rng_; }

private:
  Rng& rng_;
};

double angle_between_deg(Vec2 u, Vec2 v) {
  return std::acos(std::clamp(dot(u, v) / (norm(u) * norm(v)), -1.0, 1.0)) / kDeg;
}

bool well_shaped(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = poly[i], a = poly[(i + n - 1) % n], b = poly[(i + 1) % n];
    const double ang = angle_between_deg(a - p, b - p);
    if (ang < 15.0 || ang > 165.0) return false;
  }
  return true;
}

std::vector<Vec2> place(std::vector<Vec2> pts, Rng& rng) {
  const double t = rng.uniform(0.0, 2 * M_PI);
  for (auto& p : pts) p = rotate(p, t);
  return pts;
}

std::vector<Vec2> seed_points(std::string_view name, Rng& rng) {
  for (int tries = 0; tries < 64; ++tries) {
    std::vector<Vec2> p;
    if (name == "segment") {
      p = {{0, 0}, {1, 0}};
    } else if (name == "triangle") {
      p = {{rng.uniform(), rng.uniform()}, {rng.uniform(), rng.uniform()}, {rng.uniform(), rng.uniform()}};
    } else if (name == "iso_triangle") {
      p = {{0, rng.uniform(0.6, 2.4)}, {-1, 0}, {1, 0}};
    } else if (name == "ieq_triangle") {
      p = {{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2}};
    } else if (name == "r_triangle") {
      p = {{0, 0}, {1, 0}, {0, rng.uniform(0.4, 2.5)}};
    } else if (name == "risos") {
      p = {{0, 0}, {1, 0}, {0, 1}};
    } else if (name == "isquare") {
      p = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    } else if (name == "rectangle") {
      const double h = rng.uniform(0.35, 0.85) * (rng.coin(0.5) ? 1.0 : 2.2);
      p = {{0, 0}, {1, 0}, {1, h}, {0, h}};
    } else if (name == "trapezoid") {
      const double h = rng.uniform(0.4, 1.2), d = rng.uniform(-0.4, 0.6), w = rng.uniform(0.3, 0.9);
      p = {{0, 0}, {1, 0}, {d + w, h}, {d, h}};
    } else if (name == "r_trapezoid") {
      const double h = rng.uniform(0.4, 1.2), w = rng.uniform(0.3, 1.6);
      p = {{0, 0}, {1, 0}, {w, h}, {0, h}};
    } else if (name == "eq_trapezoid") {
      const double h = rng.uniform(0.4, 1.2), w = rng.uniform(0.1, 0.4);
      p = {{0, 0}, {1, 0}, {0.5 + w, h}, {0.5 - w, h}};
    } else if (name == "eq_quadrangle") {
      const double l = rng.uniform(0.5, 1.2);
      const double a = rng.uniform(55, 125) * kDeg, b = rng.uniform(55, 125) * kDeg;
      p = {{0, 0}, {1, 0}, Vec2{1, 0} + Vec2{std::cos(b), std::sin(b)} * l, Vec2{std::cos(a), std::sin(a)} * l};
    } else if (name == "eqdia_quadrangle") {
      const double l = rng.uniform(0.9, 1.6);
      const double a = rng.uniform(25, 75) * kDeg, b = rng.uniform(105, 155) * kDeg;
      p = {{0, 0}, {1, 0}, Vec2{std::cos(a), std::sin(a)} * l, Vec2{1, 0} + Vec2{std::cos(b), std::sin(b)} * l};
    } else {
      throw Error(ErrorCode::UnknownTemplate, "'" + std::string(name) + "' is not a seed template");
    }
    if (p.size() < 3 || well_shaped(p)) return place(std::move(p), rng);
  }
  degenerate();
}

Locus locus_of(const Clause& cl, std::span<const Vec2> a, Builder& b) {
  const std::string_view r = cl.relation;
  if (r == "angle_bisector") {
    const Vec2 u = unit(a[0] - a[1]) + unit(a[2] - a[1]);
    if (norm(u) < 1e-6) degenerate();
    return Line{a[1], unit(u)};
  }
  if (r == "angle_mirror") {
    const Line bc = b.line(a[1], a[2]);
    return b.line(a[1], reflect(a[0], bc));
  }
  if (r == "eqangle3") {
    // Circle through A and B seeing AB under the directed angle of (DE, DF).
    const double theta = wrap_half_pi(line_angle(a[2], a[4]) - line_angle(a[2], a[3]));
    if (std::abs(std::sin(theta)) < kMinCrossSin) degenerate();
    const Vec2 m = midpoint(a[0], a[1]);
    const Vec2 n = perp(unit(a[1] - a[0]));
    const double k = dist(a[0], a[1]) / 2 / std::tan(theta);
    for (double sgn : {1.0, -1.0}) {
      const Vec2 o = m + n * (k * sgn);
      const double rad = dist(o, a[0]);
      const Vec2 x = o + n * rad;
      const double seen = line_angle(x, a[1]) - line_angle(x, a[0]);
      if (std::abs(wrap_half_pi(seen - theta)) < 1e-6) return Circle{o, rad};
    }
    degenerate();
  }
  if (r == "eqdistance") return Circle{a[0], dist(a[1], a[2])};
  if (r == "lc_tangent") {
    const Line oa = b.line(a[1], a[0]);
    return Line{a[0], perp(oa.d)};
  }
  if (r == "on_aline") {
    const double t = line_angle(a[0], a[1]) - line_angle(a[3], a[4]) + line_angle(a[3], a[2]);
    if (dist(a[0], a[1]) < 1e-12 || dist(a[3], a[4]) < 1e-12 || dist(a[3], a[2]) < 1e-12) degenerate();
    return Line{a[0], {std::cos(t), std::sin(t)}};
  }
  if (r == "on_bline") {
    const Line ab = b.line(a[0], a[1]);
    return Line{midpoint(a[0], a[1]), perp(ab.d)};
  }
  if (r == "on_circle") return Circle{a[0], dist(a[0], a[1])};
  if (r == "on_circum") {
    auto o = circumcenter(a[0], a[1], a[2]);
    if (!o || well_shaped(a) == false) degenerate();
    return Circle{*o, dist(*o, a[0])};
  }
  if (r == "on_dia") return Circle{midpoint(a[0], a[1]), dist(a[0], a[1]) / 2};
  if (r == "on_line") return b.line(a[0], a[1]);
  if (r == "on_pline") return Line{a[0], b.line(a[1], a[2]).d};
  if (r == "on_tline") return Line{a[0], perp(b.line(a[1], a[2]).d)};
  if (r == "s_angle") {
    const Line ba = b.line(a[1], a[0]);
    return Line{a[1], rotate(ba.d, cl.params.at(0) * kDeg)};
  }
  throw Error(ErrorCode::UnknownTemplate, "'" + cl.relation + "' is not a locus template");
}

std::vector<Vec2> determined(const Clause& cl, std::span<const Vec2> a, Builder& b) {
  const std::string_view r = cl.relation;
  auto tri_ok = [&] {
    if (!well_shaped(a.first(3))) degenerate();
  };
  if (r == "centroid") {
    tri_ok();
    return {midpoint(a[1], a[2]), midpoint(a[2], a[0]), midpoint(a[0], a[1]), (a[0] + a[1] + a[2]) / 3.0};
  }
  if (r == "circle") {
    tri_ok();
    return {*circumcenter(a[0], a[1], a[2])};
  }
  if (r == "eq_triangle") {
    const Vec2 d = a[1] - a[0];
    return {b.pick(a[0] + rotate(d, M_PI / 3), a[0] + rotate(d, -M_PI / 3))};
  }
  if (r == "eqangle2") {
    const Vec2 A = a[0], B = a[1], C = a[2];
    const double ba = dist(B, A), bc = dist(B, C);
    if (ba < 1e-12 || bc < 1e-12) degenerate();
    const double l = ba * ba / bc;
    double be;
    if (b.rng().coin(0.5)) {
      be = std::min(l, bc);
      be = b.rng().uniform(be * 0.1, be * 0.9);
    } else {
      be = std::max(l, bc);
      be = b.rng().uniform(be * 1.1, be * 1.5);
    }
    const Vec2 e = B + (C - B) * (be / bc);
    const Vec2 y = B + (A - B) * (be / l);
    return {b.meet(b.line(C, y), b.line(A, e))};
  }
  if (r == "excenter" || r == "incenter") {
    tri_ok();
    const double la = dist(a[1], a[2]), lb = dist(a[2], a[0]), lc = dist(a[0], a[1]);
    const double sa = r == "excenter" ? -la : la;
    return {(a[0] * sa + a[1] * lb + a[2] * lc) / (sa + lb + lc)};
  }
  if (r == "foot") return {project(a[0], b.line(a[1], a[2]))};
  if (r == "intersection_lc") {
    const Line l = b.line(a[0], a[2]);
    const Vec2 x = project(a[1], l) * 2.0 - a[2];
    if (dist(x, a[2]) < 2 * kMinChordFrac * dist(a[1], a[2])) degenerate();
    return {x};
  }
  if (r == "intersection_ll") return {b.meet(b.line(a[0], a[1]), b.line(a[2], a[3]))};
  if (r == "intersection_lp") return {b.meet(b.line(a[0], a[1]), Line{a[2], b.line(a[3], a[4]).d})};
  if (r == "intersection_lt") return {b.meet(b.line(a[0], a[1]), Line{a[2], perp(b.line(a[3], a[4]).d)})};
  if (r == "intersection_pp") return {b.meet(Line{a[0], b.line(a[1], a[2]).d}, Line{a[3], b.line(a[4], a[5]).d})};
  if (r == "intersection_tt")
    return {b.meet(Line{a[0], perp(b.line(a[1], a[2]).d)}, Line{a[3], perp(b.line(a[4], a[5]).d)})};
  if (r == "midpoint") return {midpoint(a[0], a[1])};
  if (r == "mirror") return {a[1] * 2.0 - a[0]};
  if (r == "ninepoints") {
    tri_ok();
    const Vec2 x = midpoint(a[1], a[2]), y = midpoint(a[2], a[0]), z = midpoint(a[0], a[1]);
    return {x, y, z, *circumcenter(x, y, z)};
  }
  if (r == "nsquare") return {a[0] + perp(a[1] - a[0])};
  if (r == "orthocenter") {
    tri_ok();
    return {b.meet(Line{a[0], perp(b.line(a[1], a[2]).d)}, Line{a[1], perp(b.line(a[2], a[0]).d)})};
  }
  if (r == "parallelogram") return {a[0] - a[1] + a[2]};
  if (r == "reflect") return {reflect(a[0], b.line(a[1], a[2]))};
  if (r == "shift") return {a[0] + a[1] - a[2]};
  if (r == "square") {
    const Vec2 q = perp(a[1] - a[0]);
    return {a[1] + q, a[0] + q};
  }
  if (r == "tangent") {
    const double d = dist(a[0], a[1]), rad = dist(a[1], a[2]);
    if (d <= rad) unsatisfiable();
    if (d - rad < kMinChordFrac * rad) degenerate();
    const double phi = std::acos(rad / d);
    const Vec2 u = unit(a[0] - a[1]);
    return {a[1] + rotate(u, phi) * rad, a[1] + rotate(u, -phi) * rad};
  }
  throw Error(ErrorCode::UnknownTemplate, "'" + cl.relation + "' is not a determined template");
}

void normalize(std::vector<Vec2>& pts) {
  double x0 = pts[0].x, x1 = x0, y0 = pts[0].y, y1 = y0;
  for (auto p : pts) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const double s = std::max(x1 - x0, y1 - y0);
  if (!(s > 0)) degenerate();
  for (auto& p : pts) p = Vec2{(p.x - x0) / s, (p.y - y0) / s};
}

double min_pairwise(const std::vector<Vec2>& pts) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) m = std::min(m, dist(pts[i], pts[j]));
  return m;
}

void build(const Premise& premise, Builder& b) {
  for (std::size_t k = 0; k < premise.constructions.size(); ++k) {
    const auto& c = premise.constructions[k];
    std::vector<std::vector<Vec2>> args;
    for (const auto& cl : c.clauses) {
      std::vector<Vec2> v;
      for (PointId id : clause_arg_ids(premise, cl)) v.push_back(b.pts.at(id));
      args.push_back(std::move(v));
    }
    const TemplateInfo* t = find_template(c.clauses[0].relation);
    std::vector<Vec2> out;
    if (c.clauses.size() == 2) {
      out = {b.meet(locus_of(c.clauses[0], args[0], b), locus_of(c.clauses[1], args[1], b))};
    } else if (t->kind == TemplateKind::Seed) {
      out = seed_points(t->name, b.rng());
    } else if (t->kind == TemplateKind::Locus) {
      out = {b.random_on(locus_of(c.clauses[0], args[0], b))};
    } else {
      out = determined(c.clauses[0], args[0], b);
    }
    for (auto p : out) {
      b.check_fresh(p);
      b.pts.push_back(p);
    }
  }
}

}  // namespace

double Diagram::diameter() const {
  if (coords.empty()) return 0.0;
  double x0 = coords[0].x, x1 = x0, y0 = coords[0].y, y1 = y0;
  for (auto p : coords) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  return std::hypot(x1 - x0, y1 - y0);
}

double clause_residual(const Premise& premise, std::size_t construction, const Clause& clause, const Diagram& d) {
  const auto new_ids = construction_point_ids(premise, construction);
  const auto arg_ids = clause_arg_ids(premise, clause);
  double m = 0.0;
  if (clause.relation == "s_angle") {
    const Vec2 a = d.coords.at(arg_ids[0]), bb = d.coords.at(arg_ids[1]), x = d.coords.at(new_ids[0]);
    const double got = line_angle(bb, x) - line_angle(bb, a);
    m = std::abs(wrap_half_pi(got - clause.params.at(0) * kDeg));
  }
  for (const auto& f : clause_facts(clause, new_ids, arg_ids)) m = std::max(m, residual(f, d));
  return m;
}

Diagram instantiate(const Premise& premise, std::uint64_t seed, int max_retries) {
  if (max_retries < 1) max_retries = 1;
  bool all_unsat = true;
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    Builder b(rng);
    try {
      build(premise, b);
      normalize(b.pts);
      Diagram d{b.pts, seed, min_pairwise(b.pts)};
      if (d.margin < kMargin) degenerate();
      for (std::size_t k = 0; k < premise.constructions.size(); ++k)
        for (const auto& cl : premise.constructions[k].clauses)
          if (clause_residual(premise, k, cl, d) >= kTolTrue) degenerate();
      return d;
    } catch (const AttemptFailed& f) {
      all_unsat = all_unsat && f.unsatisfiable;
    }
  }
  if (all_unsat)
    throw Error(ErrorCode::Unsatisfiable, "no intersection in any of " + std::to_string(max_retries) + " attempts");
  throw Error(ErrorCode::DegenerateAfterRetries, std::to_string(max_retries) + " attempts");
}

}  // namespace geoforge
