#include "scene.hpp"

#include <algorithm>
#include <cmath>

#include "geoforge/kernel/catalog.hpp"
#include "geoforge/kernel/premise_facts.hpp"

namespace geoforge::scene {

namespace {

std::optional<Circle> circumcircle(Vec2 a, Vec2 b, Vec2 c) {
  const double d = 2 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
  if (std::abs(d) < 1e-12) return std::nullopt;
  const double a2 = dot(a, a), b2 = dot(b, b), c2 = dot(c, c);
  const Vec2 o{(a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d,
               (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d};
  return Circle{o, dist(o, a)};
}

bool vertex_angle(const PointId* a) {
  return a[0] == a[2] || a[0] == a[3] || a[1] == a[2] || a[1] == a[3];
}

void add_unique(std::vector<Seg>& v, Seg s) {
  if (s.first != s.second && std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
}

}  // namespace

Seg seg(PointId a, PointId b) { return {std::min(a, b), std::max(a, b)}; }

bool markable(const Fact& f) {
  switch (f.pred) {
    case Pred::cong:
    case Pred::para:
    case Pred::perp: return true;
    case Pred::eqangle: return vertex_angle(f.args.data()) && vertex_angle(f.args.data() + 4);
    default: return false;
  }
}

std::vector<Seg> fact_segments(const Fact& f, const std::vector<Vec2>& coords) {
  std::vector<Seg> out;
  const auto& a = f.args;
  switch (f.pred) {
    case Pred::coll: {
      Seg best = seg(a[0], a[1]);
      double len = -1;
      for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
          const double l = dist(coords[a[i]], coords[a[j]]);
          if (l > len) len = l, best = seg(a[i], a[j]);
        }
      out.push_back(best);
      break;
    }
    case Pred::para:
    case Pred::perp:
    case Pred::cong:
    case Pred::eqangle:
    case Pred::eqratio:
      for (std::size_t i = 0; i + 1 < f.n; i += 2) add_unique(out, seg(a[i], a[i + 1]));
      break;
    case Pred::midp: out.push_back(seg(a[1], a[2])); break;
    default: break;
  }
  return out;
}

Scene build(const Problem& problem, const std::vector<Vec2>& coords) {
  Scene s;
  const Premise& p = problem.premise;
  for (std::size_t k = 0; k < p.constructions.size(); ++k) {
    const auto ids = construction_point_ids(p, k);
    for (const auto& cl : p.constructions[k].clauses) {
      const auto* t = find_template(cl.relation);
      if (t && t->kind == TemplateKind::Seed) {
        if (ids.size() == 2) add_unique(s.segments, seg(ids[0], ids[1]));
        else
          for (std::size_t i = 0; i < ids.size(); ++i) add_unique(s.segments, seg(ids[i], ids[(i + 1) % ids.size()]));
      } else if (cl.relation == "s_angle") {
        const auto args = clause_arg_ids(p, cl);
        add_unique(s.segments, seg(args[1], args[0]));
        add_unique(s.segments, seg(args[1], ids[0]));
      }
    }
  }
  auto add_circle = [&](DrawCircle c) {
    for (const auto& o : s.circles)
      if (dist(o.c, c.c) < 1e-9 && std::abs(o.r - c.r) < 1e-9) return;
    s.circles.push_back(std::move(c));
  };
  for (const auto& pf : premise_facts(p)) {
    const Fact& f = pf.fact;
    for (const auto& sg : fact_segments(f, coords)) add_unique(s.segments, sg);
    const auto& a = f.args;
    if (f.pred == Pred::circle) {
      add_circle({a[0], {a[1], a[2], a[3]}, coords[a[0]], dist(coords[a[0]], coords[a[1]])});
    } else if (f.pred == Pred::cyclic) {
      if (auto c = circumcircle(coords[a[0]], coords[a[1]], coords[a[2]]))
        add_circle({std::nullopt, {a[0], a[1], a[2], a[3]}, c->c, c->r});
    }
    if (markable(f)) s.marked.push_back(f);
  }
  for (const auto& o : problem.options)
    for (const auto& sg : fact_segments(o.statement.fact, coords))
      if (std::find(s.segments.begin(), s.segments.end(), sg) == s.segments.end()) add_unique(s.aux, sg);
  return s;
}

}  // namespace geoforge::scene
