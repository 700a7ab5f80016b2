#include "geoforge/renderer/text.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <sstream>

#include "geoforge/common/error.hpp"
#include "geoforge/kernel/catalog.hpp"

namespace geoforge {

namespace {

// clang-format off
const std::vector<TextTemplate> kClauses = {
  {"angle_bisector", "x a b c", "lies on the bisector of angle {a}{b}{c}", "在∠{a}{b}{c}的平分线上"},
  {"angle_mirror", "x a b c", "is such that {b}{c} bisects angle {a}{b}{x}", "满足{b}{c}平分∠{a}{b}{x}"},
  {"centroid", "x y z i a b c",
   "{x}, {y}, {z} are the midpoints of {b}{c}, {c}{a}, {a}{b}, and {i} is the centroid of triangle {a}{b}{c}.",
   "{x}、{y}、{z}分别是{b}{c}、{c}{a}、{a}{b}的中点，{i}是△{a}{b}{c}的重心。"},
  {"circle", "x a b c", "{x} is the circumcenter of triangle {a}{b}{c}.", "{x}是△{a}{b}{c}的外心。"},
  {"eq_quadrangle", "a b c d", "{a}{b}{c}{d} is a quadrilateral with {a}{d} = {b}{c}.",
   "{a}{b}{c}{d}是四边形，且{a}{d}={b}{c}。"},
  {"eq_trapezoid", "a b c d", "{a}{b}{c}{d} is an isosceles trapezoid with {a}{b} parallel to {c}{d}.",
   "{a}{b}{c}{d}是等腰梯形，{a}{b}∥{c}{d}。"},
  {"eq_triangle", "x b c", "{x} is a point such that triangle {x}{b}{c} is equilateral.",
   "点{x}使△{x}{b}{c}为等边三角形。"},
  {"eqangle2", "x a b c", "{x} is a point such that angle {b}{a}{x} equals angle {x}{c}{b}.",
   "点{x}满足∠{b}{a}{x}=∠{x}{c}{b}。"},
  {"eqangle3", "x a b d e f", "sees {a}{b} under an angle equal to angle {e}{d}{f}", "满足∠{a}{x}{b}=∠{e}{d}{f}"},
  {"eqdia_quadrangle", "a b c d", "{a}{b}{c}{d} is a quadrilateral with equal diagonals {a}{c} and {b}{d}.",
   "{a}{b}{c}{d}是对角线{a}{c}与{b}{d}相等的四边形。"},
  {"eqdistance", "x a b c", "is at distance {b}{c} from {a}", "满足{x}{a}={b}{c}"},
  {"excenter", "x a b c", "{x} is the excenter of triangle {a}{b}{c} opposite {a}.",
   "{x}是△{a}{b}{c}中与{a}相对的旁心。"},
  {"foot", "x a b c", "{x} is the foot of the perpendicular from {a} to line {b}{c}.",
   "{x}是{a}到直线{b}{c}的垂足。"},
  {"ieq_triangle", "a b c", "{a}{b}{c} is an equilateral triangle.", "△{a}{b}{c}是等边三角形。"},
  {"incenter", "x a b c", "{x} is the incenter of triangle {a}{b}{c}.", "{x}是△{a}{b}{c}的内心。"},
  {"intersection_lc", "x a o b",
   "{x} is the second intersection of line {a}{b} with the circle centered at {o} through {b}.",
   "{x}是直线{a}{b}与以{o}为圆心、过{b}的圆的另一个交点。"},
  {"intersection_ll", "x a b c d", "{x} is the intersection of lines {a}{b} and {c}{d}.",
   "{x}是直线{a}{b}与{c}{d}的交点。"},
  {"intersection_lp", "x a b c m n",
   "{x} is the intersection of line {a}{b} with the line through {c} parallel to {m}{n}.",
   "{x}是直线{a}{b}与过{c}且平行于{m}{n}的直线的交点。"},
  {"intersection_lt", "x a b c d e",
   "{x} is the intersection of line {a}{b} with the line through {c} perpendicular to {d}{e}.",
   "{x}是直线{a}{b}与过{c}且垂直于{d}{e}的直线的交点。"},
  {"intersection_pp", "x a b c d e f",
   "{x} is the point such that {x}{a} is parallel to {b}{c} and {x}{d} is parallel to {e}{f}.",
   "点{x}满足{x}{a}∥{b}{c}且{x}{d}∥{e}{f}。"},
  {"intersection_tt", "x a b c d e f",
   "{x} is the point such that {x}{a} is perpendicular to {b}{c} and {x}{d} is perpendicular to {e}{f}.",
   "点{x}满足{x}{a}⊥{b}{c}且{x}{d}⊥{e}{f}。"},
  {"iso_triangle", "a b c", "{a}{b}{c} is an isosceles triangle with {a}{b} = {a}{c}.",
   "△{a}{b}{c}是等腰三角形，{a}{b}={a}{c}。"},
  {"isquare", "a b c d", "{a}{b}{c}{d} is a square.", "{a}{b}{c}{d}是正方形。"},
  {"lc_tangent", "x a o", "lies on the line through {a} perpendicular to {o}{a}", "在过{a}且垂直于{o}{a}的直线上"},
  {"midpoint", "x a b", "{x} is the midpoint of segment {a}{b}.", "{x}是线段{a}{b}的中点。"},
  {"mirror", "x a b", "{x} is the reflection of {a} about {b}.", "{x}是{a}关于{b}的对称点。"},
  {"ninepoints", "x y z i a b c",
   "{x}, {y}, {z} are the midpoints of {b}{c}, {c}{a}, {a}{b}, and {i} is the center of the nine-point circle of "
   "triangle {a}{b}{c}.",
   "{x}、{y}、{z}分别是{b}{c}、{c}{a}、{a}{b}的中点，{i}是△{a}{b}{c}的九点圆圆心。"},
  {"nsquare", "x a b", "{x} is a point such that {a}{x} = {a}{b} and {a}{x} is perpendicular to {a}{b}.",
   "点{x}满足{a}{x}={a}{b}且{a}{x}⊥{a}{b}。"},
  {"on_aline", "x a b c d e", "is such that angle {x}{a}{b} equals angle {c}{d}{e}", "满足∠{x}{a}{b}=∠{c}{d}{e}"},
  {"on_bline", "x a b", "lies on the perpendicular bisector of segment {a}{b}", "在线段{a}{b}的垂直平分线上"},
  {"on_circle", "x o a", "lies on the circle centered at {o} through {a}", "在以{o}为圆心、过{a}的圆上"},
  {"on_circum", "x a b c", "lies on the circumcircle of triangle {a}{b}{c}", "在△{a}{b}{c}的外接圆上"},
  {"on_dia", "x a b", "lies on the circle with diameter {a}{b}", "在以{a}{b}为直径的圆上"},
  {"on_line", "x a b", "lies on line {a}{b}", "在直线{a}{b}上"},
  {"on_pline", "x a b c", "lies on the line through {a} parallel to {b}{c}", "在过{a}且平行于{b}{c}的直线上"},
  {"on_tline", "x a b c", "lies on the line through {a} perpendicular to {b}{c}", "在过{a}且垂直于{b}{c}的直线上"},
  {"orthocenter", "x a b c", "{x} is the orthocenter of triangle {a}{b}{c}.", "{x}是△{a}{b}{c}的垂心。"},
  {"parallelogram", "x a b c", "{x} is a point such that {a}{b}{c}{x} is a parallelogram.",
   "点{x}使{a}{b}{c}{x}为平行四边形。"},
  {"r_trapezoid", "a b c d",
   "{a}{b}{c}{d} is a right trapezoid with {a}{b} parallel to {c}{d} and {a}{d} perpendicular to {a}{b}.",
   "{a}{b}{c}{d}是直角梯形，{a}{b}∥{c}{d}，{a}{d}⊥{a}{b}。"},
  {"r_triangle", "a b c", "{a}{b}{c} is a right triangle with the right angle at {a}.",
   "△{a}{b}{c}是直角三角形，直角顶点为{a}。"},
  {"rectangle", "a b c d", "{a}{b}{c}{d} is a rectangle.", "{a}{b}{c}{d}是矩形。"},
  {"reflect", "x a b c", "{x} is the reflection of {a} about line {b}{c}.", "{x}是{a}关于直线{b}{c}的对称点。"},
  {"risos", "a b c", "{a}{b}{c} is a right isosceles triangle with the right angle at {a}.",
   "△{a}{b}{c}是等腰直角三角形，直角顶点为{a}。"},
  {"s_angle", "x a b", "is such that angle {a}{b}{x} measures {p0} degrees", "满足∠{a}{b}{x}={p0}°"},
  {"segment", "a b", "{a}{b} is a segment.", "{a}{b}是一条线段。"},
  {"shift", "x b c d", "{x} is a point such that {x}{b} = {c}{d} and {x}{c} = {b}{d}.",
   "点{x}满足{x}{b}={c}{d}且{x}{c}={b}{d}。"},
  {"square", "x y a b", "{a}{b}{x}{y} is a square.", "{a}{b}{x}{y}是正方形。"},
  {"tangent", "x y a o b",
   "{x} and {y} are the points where the tangents from {a} touch the circle centered at {o} through {b}.",
   "过{a}作以{o}为圆心、过{b}的圆的两条切线，切点为{x}、{y}。"},
  {"trapezoid", "a b c d", "{a}{b}{c}{d} is a trapezoid with {a}{b} parallel to {c}{d}.",
   "{a}{b}{c}{d}是梯形，{a}{b}∥{c}{d}。"},
  {"triangle", "a b c", "{a}{b}{c} is a triangle.", "{a}{b}{c}是三角形。"},
};

const std::vector<TextTemplate> kFacts = {
  {"coll", "a b c", "Points {a}, {b}, {c} are collinear.", "点{a}、{b}、{c}共线。"},
  {"para", "a b c d", "{a}{b} is parallel to {c}{d}.", "{a}{b}∥{c}{d}。"},
  {"perp", "a b c d", "{a}{b} is perpendicular to {c}{d}.", "{a}{b}⊥{c}{d}。"},
  {"cong", "a b c d", "{a}{b} = {r}{c}{d}.", "{a}{b}={r}{c}{d}。"},
  {"cyclic", "a b c d", "Points {a}, {b}, {c}, {d} are concyclic.", "点{a}、{b}、{c}、{d}四点共圆。"},
  {"eqangle", "a b c d e f g h", "{A1} = {A2}.", "{A1}={A2}。"},
  {"eqratio", "a b c d e f g h", "{a}{b} : {c}{d} = {r}{e}{f} : {g}{h}.", "{a}{b}:{c}{d}={r}{e}{f}:{g}{h}。"},
  {"midp", "m a b", "{m} is the midpoint of segment {a}{b}.", "{m}是线段{a}{b}的中点。"},
  {"circle", "o a b c", "{o} is the center of the circle through {a}, {b}, {c}.", "{o}是过{a}、{b}、{c}的圆的圆心。"},
};
// clang-format on

std::vector<std::string> split(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

const TextTemplate* find_in(const std::vector<TextTemplate>& v, std::string_view id) {
  for (const auto& t : v)
    if (t.id == id) return &t;
  return nullptr;
}

std::string fill(std::string_view pattern, const std::map<std::string, std::string>& values) {
  std::string out;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (pattern[i] == '{') {
      const auto j = pattern.find('}', i);
      const std::string key(pattern.substr(i + 1, j - i - 1));
      auto it = values.find(key);
      if (it == values.end()) throw Error(ErrorCode::MissingTemplate, "unfilled slot {" + key + "}");
      out += it->second;
      i = j;
    } else {
      out.push_back(pattern[i]);
    }
  }
  return out;
}

std::string format_number(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string pattern_of(const TextTemplate& t, Lang lang) { return std::string(lang == Lang::en ? t.en : t.zh); }

std::map<std::string, std::string> clause_values(const TextTemplate& t, const Construction& c, const Clause& cl) {
  const auto slots = split(t.slots);
  std::vector<std::string> actual;
  for (const auto& p : c.new_points) actual.push_back(p.name);
  for (const auto& a : cl.args) actual.push_back(a.name);
  if (actual.size() != slots.size())
    throw Error(ErrorCode::MissingTemplate, "template '" + std::string(t.id) + "' does not fit its clause");
  std::map<std::string, std::string> values;
  for (std::size_t i = 0; i < slots.size(); ++i) values[slots[i]] = display_name(actual[i]);
  for (std::size_t i = 0; i < cl.params.size(); ++i) values["p" + std::to_string(i)] = format_number(cl.params[i]);
  return values;
}

std::string ratio_text(Rational r, Lang lang) {
  if (r == Rational(1)) return "";
  return r.str() + (lang == Lang::en ? " × " : "×");
}

// Directed angle between lines (p q) and (r s), shown as a vertex angle when they share a point.
std::string angle_text(PointId p, PointId q, PointId r, PointId s, const std::vector<std::string>& names) {
  auto n = [&](PointId i) { return display_name(names.at(i)); };
  if (p == r) return "∠" + n(q) + n(p) + n(s);
  if (p == s) return "∠" + n(q) + n(p) + n(r);
  if (q == r) return "∠" + n(p) + n(q) + n(s);
  if (q == s) return "∠" + n(p) + n(q) + n(r);
  return "∠(" + n(p) + n(q) + "," + n(r) + n(s) + ")";
}

}  // namespace

std::string_view lang_name(Lang l) { return l == Lang::en ? "en" : "zh"; }

const std::vector<TextTemplate>& clause_templates() { return kClauses; }
const std::vector<TextTemplate>& fact_templates() { return kFacts; }

std::string display_name(std::string_view name) {
  std::string s(name);
  for (auto& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return s;
}

std::string construction_text(const Construction& c, Lang lang) {
  std::vector<std::string> phrases;
  bool locus = false;
  for (const auto& cl : c.clauses) {
    const auto* t = find_in(kClauses, cl.relation);
    if (!t) throw Error(ErrorCode::MissingTemplate, "no text template for '" + cl.relation + "'");
    const auto* info = find_template(cl.relation);
    locus = info && info->kind == TemplateKind::Locus;
    phrases.push_back(fill(pattern_of(*t, lang), clause_values(*t, c, cl)));
  }
  if (!locus) return phrases.front();
  const std::string x = display_name(c.new_points.front().name);
  if (lang == Lang::en) {
    std::string s = "Point " + x + " " + phrases[0];
    if (phrases.size() > 1) s += " and " + phrases[1];
    return s + ".";
  }
  std::string s = "点" + x + phrases[0];
  if (phrases.size() > 1) s += "，且" + phrases[1];
  return s + "。";
}

std::string premise_text(const Premise& p, Lang lang) {
  std::string out;
  for (const auto& c : p.constructions) {
    if (!out.empty() && lang == Lang::en) out += " ";
    out += construction_text(c, lang);
  }
  return out;
}

std::string statement_text(const Premise& p, Lang lang) {
  return premise_text(p, lang) +
         (lang == Lang::en ? " Which of the following statements are true?" : "下列结论中，正确的有哪些？");
}

std::string fact_text(const Fact& f, const std::vector<std::string>& names, Lang lang, Rational ratio) {
  const auto* t = find_in(kFacts, pred_name(f.pred));
  if (!t) throw Error(ErrorCode::MissingTemplate, "no text template for '" + std::string(pred_name(f.pred)) + "'");
  if (ratio != Rational(1) && f.pred != Pred::cong && f.pred != Pred::eqratio)
    throw Error(ErrorCode::MissingTemplate, "ratio form of '" + std::string(pred_name(f.pred)) + "'");
  const auto slots = split(t->slots);
  std::map<std::string, std::string> values;
  for (std::size_t i = 0; i < slots.size(); ++i) values[slots[i]] = display_name(names.at(f.args[i]));
  values["r"] = ratio_text(ratio, lang);
  if (f.pred == Pred::eqangle) {
    const auto& a = f.args;
    values["A1"] = angle_text(a[0], a[1], a[2], a[3], names);
    values["A2"] = angle_text(a[4], a[5], a[6], a[7], names);
  }
  return fill(pattern_of(*t, lang), values);
}

int token_count(std::string_view text) {
  int n = 0;
  bool in = false;
  for (char ch : text) {
    const bool space = std::isspace(static_cast<unsigned char>(ch)) != 0;
    if (!space && !in) ++n;
    in = !space;
  }
  return n;
}

std::vector<std::string> mentioned_points(std::string_view text, const std::vector<std::string>& names) {
  std::map<std::string, std::string> by_display;
  for (const auto& n : names) by_display[display_name(n)] = n;
  std::vector<std::string> out;
  auto push = [&](const std::string& n) {
    if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
  };
  auto is_upper = [](char c) { return c >= 'A' && c <= 'Z'; };
  auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
  auto is_lower = [](char c) { return c >= 'a' && c <= 'z'; };
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_upper(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && (is_upper(text[j]) || is_digit(text[j]))) ++j;
    const bool word = (j < text.size() && is_lower(text[j])) || (i > 0 && is_lower(text[i - 1]));
    if (!word) {
      // Split a run like "AB1C" into symbols: a letter with its trailing digits.
      for (std::size_t k = i; k < j;) {
        std::size_t e = k + 1;
        while (e < j && is_digit(text[e])) ++e;
        auto it = by_display.find(std::string(text.substr(k, e - k)));
        if (it != by_display.end()) push(it->second);
        k = e;
      }
    }
    i = j;
  }
  return out;
}

}  // namespace geoforge
