#include <algorithm>
#include <cmath>
#include <map>
#include <regex>
#include <set>

#include "geoforge/common/error.hpp"
#include "geoforge/kernel/check.hpp"
#include "geoforge/kernel/premise_facts.hpp"
#include "geoforge/renderer/render.hpp"
#include "label_box.hpp"
#include "scene.hpp"

namespace geoforge {

namespace {

struct Element {
  std::string tag;
  std::map<std::string, std::string> attrs;
  std::string text;
};

std::vector<Element> parse_elements(std::string_view svg) {
  static const std::regex tag_re(R"(<([a-zA-Z]+)((?:\s+[\w:-]+="[^"]*")*)\s*(/?)>([^<]*))");
  static const std::regex attr_re(R"(([\w:-]+)="([^"]*)\")");
  std::vector<Element> out;
  const std::string s(svg);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), tag_re); it != std::sregex_iterator(); ++it) {
    Element e;
    e.tag = (*it)[1];
    const std::string attrs = (*it)[2];
    for (auto a = std::sregex_iterator(attrs.begin(), attrs.end(), attr_re); a != std::sregex_iterator(); ++a)
      e.attrs[(*a)[1]] = (*a)[2];
    if ((*it)[3].length() == 0) e.text = (*it)[4];
    out.push_back(std::move(e));
  }
  return out;
}

double number(const Element& e, const std::string& key) {
  auto it = e.attrs.find(key);
  if (it == e.attrs.end()) return std::nan("");
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    return std::nan("");
  }
}

std::string attr(const Element& e, const std::string& key) {
  auto it = e.attrs.find(key);
  return it == e.attrs.end() ? std::string() : it->second;
}

}  // namespace

RenderReport verify_render(const Problem& problem, const Diagram& diagram, std::string_view svg,
                           const RenderConfig& config) {
  RenderReport rep;
  auto fail = [&](const char* check, std::string detail) {
    const std::string c(check);
    if (c == "readability") rep.readability_ok = false;
    if (c == "validity") rep.validity_ok = false;
    if (c == "alignment") rep.alignment_ok = false;
    rep.violations.push_back({c, std::move(detail)});
  };
  const auto names = problem.premise.point_names();
  std::map<std::string, PointId> id_of;
  for (std::size_t i = 0; i < names.size(); ++i) id_of[names[i]] = static_cast<PointId>(i);

  double width = config.size, height = config.size, font = config.font;
  std::vector<std::optional<Vec2>> drawn(names.size());
  struct Label {
    std::string point, text;
    Vec2 at;
  };
  std::vector<Label> labels;
  std::set<scene::Seg> lines;
  std::vector<std::pair<std::string, std::string>> marks;  // class, fact
  std::size_t circle_count = 0;
  for (const auto& e : parse_elements(svg)) {
    const std::string cls = attr(e, "class");
    if (e.tag == "svg") {
      if (!std::isnan(number(e, "width"))) width = number(e, "width");
      if (!std::isnan(number(e, "height"))) height = number(e, "height");
    } else if (e.tag == "g" && attr(e, "id") == "labels" && !std::isnan(number(e, "font-size"))) {
      font = number(e, "font-size");
    } else if (e.tag == "circle" && cls == "point") {
      auto it = id_of.find(attr(e, "data-point"));
      if (it == id_of.end()) {
        fail("alignment", "figure draws unknown point '" + attr(e, "data-point") + "'");
        continue;
      }
      drawn[it->second] = Vec2{number(e, "cx"), number(e, "cy")};
    } else if (e.tag == "circle" && cls == "circle") {
      ++circle_count;
    } else if (e.tag == "text" && cls == "label") {
      labels.push_back({attr(e, "data-point"), e.text, {number(e, "x"), number(e, "y")}});
    } else if (e.tag == "line" && cls == "segment") {
      const std::string s = attr(e, "data-seg");
      const auto sp = s.find(' ');
      auto a = id_of.find(s.substr(0, sp)), b = id_of.find(s.substr(sp + 1));
      if (sp == std::string::npos || a == id_of.end() || b == id_of.end()) {
        fail("alignment", "segment with unknown endpoints '" + s + "'");
        continue;
      }
      lines.insert(scene::seg(a->second, b->second));
    } else if (e.tag == "g" && cls.rfind("mark ", 0) == 0) {
      marks.push_back({cls.substr(5), attr(e, "data-fact")});
    }
  }

  // readability
  const double eps = 0.015 * std::hypot(width, height);
  std::vector<Box> boxes;
  for (const auto& l : labels) boxes.push_back(Box::centered(l.at, label_width(l.text, font), label_height(font)));
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = i + 1; j < labels.size(); ++j) {
      if (overlap_area(boxes[i], boxes[j]) > 0)
        fail("readability", "labels " + labels[i].text + " and " + labels[j].text + " overlap");
      else if (dist(labels[i].at, labels[j].at) < eps)
        fail("readability", "labels " + labels[i].text + " and " + labels[j].text + " are closer than 1.5% of the diagonal");
    }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Box& b = boxes[i];
    if (b.x0 < 0 || b.y0 < 0 || b.x1 > width || b.y1 > height)
      fail("readability", "label " + labels[i].text + " leaves the canvas");
    for (std::size_t p = 0; p < drawn.size(); ++p)
      if (drawn[p] && names[p] != labels[i].point && b.contains(*drawn[p]))
        fail("readability", "label " + labels[i].text + " covers point " + display_name(names[p]));
  }

  // validity
  bool complete = true;
  for (std::size_t p = 0; p < drawn.size(); ++p)
    if (!drawn[p] || std::isnan(drawn[p]->x) || std::isnan(drawn[p]->y)) {
      fail("validity", "point " + display_name(names[p]) + " is not drawn");
      complete = false;
    }
  if (!complete) return rep;
  Diagram figure;
  for (const auto& p : drawn) figure.coords.push_back(*p);
  if (diagram.coords.size() != figure.coords.size()) {
    fail("validity", "figure and diagram have different point counts");
    return rep;
  }
  const double ref = dist(diagram.coords[0], diagram.coords[1]);
  const double k = dist(figure.coords[0], figure.coords[1]) / ref;
  for (std::size_t i = 0; i < figure.coords.size(); ++i)
    for (std::size_t j = i + 1; j < figure.coords.size(); ++j)
      if (std::abs(dist(figure.coords[i], figure.coords[j]) / k - dist(diagram.coords[i], diagram.coords[j])) >
          1e-9 * diagram.diameter())
        fail("validity", "figure is not similar to the diagram at " + display_name(names[i]) + display_name(names[j]));
  std::set<Fact> declared;
  for (const auto& pf : premise_facts(problem.premise)) {
    declared.insert(pf.fact);
    if (!check_fact(pf.fact, figure))
      fail("validity", "premise fact '" + format_fact(pf.fact, names) + "' fails on the drawn coordinates");
  }

  // alignment
  std::set<std::string> labeled;
  for (const auto& l : labels) {
    labeled.insert(l.point);
    if (!id_of.count(l.point) || display_name(l.point) != l.text)
      fail("alignment", "label '" + l.text + "' does not name a premise point");
  }
  std::set<std::string> mentioned[2];
  for (Lang lang : {Lang::en, Lang::zh}) {
    const auto t = render_text(problem, lang);
    std::string all = t.statement;
    for (const auto& o : t.options) all += " " + o.substr(3);
    for (const auto& n : mentioned_points(all, names)) mentioned[lang == Lang::zh].insert(n);
  }
  if (mentioned[0] != mentioned[1]) fail("alignment", "EN and ZH texts mention different points");
  for (const auto& n : mentioned[0])
    if (!labeled.count(n) || !drawn[id_of.at(n)]) fail("alignment", "point " + display_name(n) + " is not labeled");
  const auto sc = scene::build(problem, figure.coords);
  for (const auto& s : sc.segments)
    if (!lines.count(s))
      fail("alignment", "premise segment " + display_name(names[s.first]) + display_name(names[s.second]) + " is missing");
  if (circle_count < sc.circles.size()) fail("alignment", "premise circles are missing");
  for (const auto& [cls, text] : marks) {
    Fact f;
    try {
      f = canonical(parse_fact(text, [&](std::string_view n) -> std::optional<PointId> {
        auto it = id_of.find(std::string(n));
        if (it == id_of.end()) return std::nullopt;
        return it->second;
      }));
    } catch (const Error&) {
      fail("alignment", "mark '" + text + "' does not parse");
      continue;
    }
    if (cls != pred_name(f.pred)) fail("alignment", "mark class " + cls + " disagrees with '" + text + "'");
    if (!declared.count(f)) fail("alignment", "mark '" + text + "' is not a premise relation");
    if (!check_fact(f, figure)) fail("alignment", "mark '" + text + "' contradicts the figure");
  }
  return rep;
}

}  // namespace geoforge
