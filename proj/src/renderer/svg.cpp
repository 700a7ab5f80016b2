#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>

#include "geoforge/kernel/premise_facts.hpp"
#include "geoforge/renderer/render.hpp"
#include "label_box.hpp"
#include "scene.hpp"

namespace geoforge {

namespace {

using scene::Seg;

std::string num(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s(buf);
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string pt(Vec2 p) { return fixed(p.x) + "," + fixed(p.y); }

struct Groups {
  std::map<Seg, Seg> parent;
  Seg find(Seg s) {
    auto it = parent.try_emplace(s, s).first;
    while (it->second != it->first) it = parent.try_emplace(it->second, it->second).first;
    return it->first;
  }
  void unite(Seg a, Seg b) { parent[find(a)] = find(b); }
};

// Group ordinal (1-based, by first appearance) for each key of a union-find.
template <typename Key>
int ordinal(std::map<Key, int>& seen, const Key& root) {
  auto [it, fresh] = seen.try_emplace(root, static_cast<int>(seen.size()) + 1);
  return it->second;
}

// Direction normalized so that parallel segments agree.
Vec2 canonical_dir(Vec2 a, Vec2 b) {
  Vec2 u = unit(b - a);
  if (u.x < -1e-12 || (std::abs(u.x) <= 1e-12 && u.y < 0)) u = u * -1.0;
  return u;
}

struct Canvas {
  double scale = 1.0, x0 = 0.0, y0 = 0.0, ox = 0.0, oy = 0.0, size = 512.0, margin = 36.0;
  Vec2 operator()(Vec2 v) const {
    return {margin + ox + (v.x - x0) * scale, size - (margin + oy + (v.y - y0) * scale)};
  }
};

Canvas fit(const std::vector<Vec2>& coords, const std::vector<scene::DrawCircle>& circles, const RenderConfig& cfg) {
  double x0 = coords[0].x, x1 = x0, y0 = coords[0].y, y1 = y0;
  for (auto p : coords) {
    x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
  }
  const double extent = std::max(x1 - x0, y1 - y0);
  for (const auto& c : circles) {
    if (c.r > 1.5 * extent) continue;  // nearly straight: let it run off the canvas
    x0 = std::min(x0, c.c.x - c.r), x1 = std::max(x1, c.c.x + c.r);
    y0 = std::min(y0, c.c.y - c.r), y1 = std::max(y1, c.c.y + c.r);
  }
  Canvas cv;
  cv.size = cfg.size;
  cv.margin = cfg.margin;
  const double w = x1 - x0, h = y1 - y0;
  cv.scale = (cfg.size - 2 * cfg.margin) / std::max({w, h, 1e-9});
  cv.x0 = x0;
  cv.y0 = y0;
  cv.ox = (cfg.size - 2 * cfg.margin - w * cv.scale) / 2;
  cv.oy = (cfg.size - 2 * cfg.margin - h * cv.scale) / 2;
  return cv;
}

struct Obstacles {
  std::vector<std::pair<Vec2, Vec2>> segments;
  std::vector<std::pair<Vec2, double>> circles;
};

double placement_cost(const Box& b, std::size_t self, const std::vector<Box>& placed, const std::vector<char>& has,
                      const std::vector<Vec2>& points, const Obstacles& obs, double size) {
  double cost = 0.0;
  for (std::size_t j = 0; j < placed.size(); ++j)
    if (j != self && has[j]) cost += 1000.0 * overlap_area(b, placed[j]) + (overlap_area(b, placed[j]) > 0 ? 1e5 : 0);
  for (std::size_t j = 0; j < points.size(); ++j)
    if (j != self && b.inflated(4).contains(points[j])) cost += 2e4;
  for (const auto& [p, q] : obs.segments) cost += segment_hits(b, p, q) ? 30.0 : 0.0;
  for (const auto& [c, r] : obs.circles) cost += circle_hits(b, c, r) ? 30.0 : 0.0;
  if (b.x0 < 0 || b.y0 < 0 || b.x1 > size || b.y1 > size) cost += 5e4;
  return cost;
}

std::vector<Box> place_labels(const std::vector<Vec2>& points, const std::vector<std::string>& text,
                              const Obstacles& obs, const RenderConfig& cfg) {
  const std::size_t n = points.size();
  auto candidate = [&](std::size_t i, int k, double extra) {
    const double t = k * M_PI / 4;
    const Vec2 d{std::cos(t), -std::sin(t)};
    const double w = label_width(text[i], cfg.font), h = label_height(cfg.font);
    const double r = 5.0 + extra + std::abs(d.x) * w / 2 + std::abs(d.y) * h / 2;
    return Box::centered(points[i] + d * r, w, h);
  };
  std::vector<Box> boxes(n);
  std::vector<int> choice(n, 0);
  std::vector<char> has(n, 0);
  auto best_for = [&](std::size_t i, double extra) {
    int best = 0;
    double best_cost = 0.0;
    for (int k = 0; k < 8; ++k) {
      const double c = placement_cost(candidate(i, k, extra), i, boxes, has, points, obs, cfg.size) + 0.01 * k;
      if (k == 0 || c < best_cost) best = k, best_cost = c;
    }
    return best;
  };
  for (std::size_t i = 0; i < n; ++i) {
    choice[i] = best_for(i, 0.0);
    boxes[i] = candidate(i, choice[i], 0.0);
    has[i] = 1;
  }
  for (int pass = 0; pass < cfg.label_passes; ++pass) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const int k = best_for(i, 0.0);
      if (k != choice[i]) {
        choice[i] = k;
        boxes[i] = candidate(i, k, 0.0);
        changed = true;
      }
    }
    if (!changed) break;
  }
  // Deterministic fallback: push still-colliding labels outward along their direction.
  for (std::size_t i = 0; i < n; ++i)
    for (int step = 1; step <= 4; ++step) {
      bool clash = false;
      for (std::size_t j = 0; j < n && !clash; ++j) clash = j != i && overlap_area(boxes[i], boxes[j]) > 0;
      if (!clash) break;
      boxes[i] = candidate(i, choice[i], 6.0 * step);
    }
  return boxes;
}

}  // namespace

RenderedText render_text(const Problem& problem, Lang lang) {
  RenderedText out;
  out.statement = statement_text(problem.premise, lang);
  const auto names = problem.premise.point_names();
  for (std::size_t i = 0; i < kLabels.size(); ++i) {
    const auto& s = problem.options[i].statement;
    out.options[i] = std::string(1, kLabels[i]) + ". " + fact_text(s.fact, names, lang, s.ratio);
  }
  return out;
}

std::string render_diagram(const Problem& problem, const Diagram& diagram, const RenderConfig& cfg) {
  const auto names = problem.premise.point_names();
  const auto sc = scene::build(problem, diagram.coords);
  const Canvas cv = fit(diagram.coords, sc.circles, cfg);
  std::vector<Vec2> P;
  for (auto v : diagram.coords) P.push_back(cv(v));

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  const std::string sz = fixed(cfg.size);
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + sz + "\" height=\"" + sz +
         "\" viewBox=\"0 0 " + sz + " " + sz + "\" data-problem=\"" + problem.id + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  Obstacles obs;
  out += "<g id=\"figure\" stroke=\"black\" stroke-width=\"1.4\" fill=\"none\">\n";
  for (const auto& c : sc.circles) {
    std::string through;
    for (PointId q : c.through) through += (through.empty() ? "" : " ") + names[q];
    const double r = c.r * cv.scale;
    out += "<circle class=\"circle\" data-center=\"" + (c.center ? names[*c.center] : std::string()) +
           "\" data-through=\"" + through + "\" cx=\"" + fixed(cv(c.c).x) + "\" cy=\"" + fixed(cv(c.c).y) +
           "\" r=\"" + fixed(r) + "\"/>\n";
    obs.circles.push_back({cv(c.c), r});
  }
  auto line = [&](const Seg& s, const char* cls, const char* extra) {
    out += std::string("<line class=\"") + cls + "\" data-seg=\"" + names[s.first] + " " + names[s.second] +
           "\" x1=\"" + fixed(P[s.first].x) + "\" y1=\"" + fixed(P[s.first].y) + "\" x2=\"" + fixed(P[s.second].x) +
           "\" y2=\"" + fixed(P[s.second].y) + "\"" + extra + "/>\n";
    obs.segments.push_back({P[s.first], P[s.second]});
  };
  for (const auto& s : sc.segments) line(s, "segment", "");
  for (const auto& s : sc.aux) line(s, "aux", " stroke-dasharray=\"5 4\" stroke=\"#555\"");
  out += "</g>\n";

  out += "<g id=\"marks\" stroke=\"#c0392b\" stroke-width=\"1.2\" fill=\"none\">\n";
  Groups cong, para;
  for (const auto& f : sc.marked) {
    const auto& a = f.args;
    if (f.pred == Pred::cong) cong.unite(scene::seg(a[0], a[1]), scene::seg(a[2], a[3]));
    if (f.pred == Pred::para) para.unite(scene::seg(a[0], a[1]), scene::seg(a[2], a[3]));
  }
  std::map<Seg, int> cong_ord, para_ord;
  std::set<Seg> ticked, arrowed;
  std::map<std::array<PointId, 3>, std::array<PointId, 3>> angle_parent;
  auto angle_find = [&](std::array<PointId, 3> k) {
    auto it = angle_parent.try_emplace(k, k).first;
    while (it->second != it->first) it = angle_parent.try_emplace(it->second, it->second).first;
    return it->first;
  };
  auto vertex_of = [](const PointId* a) -> std::array<PointId, 3> {
    PointId v, p, q;
    if (a[0] == a[2]) v = a[0], p = a[1], q = a[3];
    else if (a[0] == a[3]) v = a[0], p = a[1], q = a[2];
    else if (a[1] == a[2]) v = a[1], p = a[0], q = a[3];
    else v = a[1], p = a[0], q = a[2];
    return {v, std::min(p, q), std::max(p, q)};
  };
  for (const auto& f : sc.marked)
    if (f.pred == Pred::eqangle) angle_parent[angle_find(vertex_of(f.args.data()))] = angle_find(vertex_of(f.args.data() + 4));
  std::map<std::array<PointId, 3>, int> angle_ord;
  std::set<std::array<PointId, 3>> arced;

  for (const auto& f : sc.marked) {
    const auto& a = f.args;
    std::string body;
    if (f.pred == Pred::cong || f.pred == Pred::para) {
      const bool is_cong = f.pred == Pred::cong;
      for (const Seg s : {scene::seg(a[0], a[1]), scene::seg(a[2], a[3])}) {
        auto& done = is_cong ? ticked : arrowed;
        if (!done.insert(s).second) continue;
        const int g = is_cong ? ordinal(cong_ord, cong.find(s)) : ordinal(para_ord, para.find(s));
        const int count = std::min(g, 3);
        const Vec2 m = is_cong ? midpoint(P[s.first], P[s.second]) : P[s.first] + (P[s.second] - P[s.first]) * 0.3;
        const Vec2 u = is_cong ? unit(P[s.second] - P[s.first]) : canonical_dir(P[s.first], P[s.second]);
        const Vec2 nrm = perp(u);
        for (int j = 0; j < count; ++j) {
          const double off = (j - (count - 1) / 2.0) * (is_cong ? 4.0 : 6.0);
          const Vec2 c = m + u * off;
          if (is_cong) body += "<path d=\"M" + pt(c - nrm * 5.0) + " L" + pt(c + nrm * 5.0) + "\"/>";
          else
            body += "<path d=\"M" + pt(c - u * 5.0 + nrm * 4.0) + " L" + pt(c) + " L" + pt(c - u * 5.0 - nrm * 4.0) +
                    "\"/>";
        }
      }
    } else if (f.pred == Pred::perp) {
      const auto x = intersect(line_through(P[a[0]], P[a[1]]), line_through(P[a[2]], P[a[3]]));
      if (!x) continue;
      auto away = [&](PointId p, PointId q) {
        const Vec2 far = dist(P[p], *x) > dist(P[q], *x) ? P[p] : P[q];
        return unit(far - *x);
      };
      const Vec2 u = away(a[0], a[1]) * 8.0, v = away(a[2], a[3]) * 8.0;
      body = "<path d=\"M" + pt(*x + u) + " L" + pt(*x + u + v) + " L" + pt(*x + v) + "\"/>";
    } else if (f.pred == Pred::eqangle) {
      for (const PointId* half : {a.data(), a.data() + 4}) {
        const auto key = vertex_of(half);
        if (!arced.insert(key).second) continue;
        const int g = std::min(ordinal(angle_ord, angle_find(key)), 3);
        const Vec2 V = P[key[0]];
        const Vec2 up = unit(P[key[1]] - V), uq = unit(P[key[2]] - V);
        const double r = 15.0;
        const int sweep = cross(up, uq) > 0 ? 1 : 0;
        body += "<path d=\"M" + pt(V + up * r) + " A" + fixed(r) + "," + fixed(r) + " 0 0 " + std::to_string(sweep) +
                " " + pt(V + uq * r) + "\"/>";
        const Vec2 mid = unit(up + uq);
        const Vec2 side = perp(mid);
        for (int j = 0; j < g; ++j) {
          const Vec2 c = V + mid * r + side * ((j - (g - 1) / 2.0) * 3.0);
          body += "<path d=\"M" + pt(c - mid * 3.0) + " L" + pt(c + mid * 3.0) + "\"/>";
        }
      }
    }
    out += "<g class=\"mark " + std::string(pred_name(f.pred)) + "\" data-fact=\"" + format_fact(f, names) + "\">" +
           body + "</g>\n";
  }
  out += "</g>\n";

  out += "<g id=\"points\" fill=\"black\">\n";
  for (std::size_t i = 0; i < P.size(); ++i)
    out += "<circle class=\"point\" data-point=\"" + names[i] + "\" cx=\"" + num(P[i].x) + "\" cy=\"" + num(P[i].y) +
           "\" r=\"2.5\"/>\n";
  out += "</g>\n";

  std::vector<std::string> shown;
  for (const auto& n : names) shown.push_back(display_name(n));
  const auto boxes = place_labels(P, shown, obs, cfg);
  out += "<g id=\"labels\" font-family=\"sans-serif\" font-size=\"" + fixed(cfg.font) +
         "\" text-anchor=\"middle\" dominant-baseline=\"central\">\n";
  for (std::size_t i = 0; i < P.size(); ++i) {
    const Vec2 c = boxes[i].center();
    out += "<text class=\"label\" data-point=\"" + names[i] + "\" x=\"" + fixed(c.x) + "\" y=\"" + fixed(c.y) + "\">" +
           shown[i] + "</text>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace geoforge
