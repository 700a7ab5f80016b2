#include "geoforge/kernel/premise.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

#include "geoforge/common/error.hpp"
#include "geoforge/kernel/catalog.hpp"

namespace geoforge {

namespace {

struct Token {
  std::string text;
  bool is_number = false;
  double value = 0.0;
};

bool is_identifier(std::string_view s) {
  if (s.empty() || !std::islower(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::islower(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)) || c == '_';
  });
}

std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  const char c = s[0];
  if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.')) return std::nullopt;
  if (c == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<Token> split_words(std::string_view s) {
  std::vector<Token> out;
  std::string cur;
  auto flush = [&] {
    if (cur.empty()) return;
    Token t{cur};
    if (auto v = parse_number(cur)) {
      t.is_number = true;
      t.value = *v;
    }
    out.push_back(std::move(t));
    cur.clear();
  };
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',') flush();
    else cur.push_back(c);
  }
  flush();
  return out;
}

std::string at_line(int line) { return " (line " + std::to_string(line) + ")"; }

// Splits "f a b, g(c, d)" at top-level commas.
std::vector<std::string> split_clauses(std::string_view rhs) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : rhs) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

Clause parse_clause(const std::string& text, const std::vector<PointSym>& new_points, int line) {
  Clause cl;
  std::string head, body;
  const auto open = text.find('(');
  if (open != std::string::npos) {
    const auto close = text.rfind(')');
    if (close == std::string::npos || close < open || trim(text.substr(close + 1)) != "")
      throw Error(ErrorCode::UnderdeterminedOrInvalid, "unbalanced parentheses in '" + text + "'" + at_line(line));
    head = trim(text.substr(0, open));
    body = text.substr(open + 1, close - open - 1);
    cl.parenthesized = true;
  } else {
    auto words = split_words(text);
    if (words.empty()) throw Error(ErrorCode::UnderdeterminedOrInvalid, "empty clause" + at_line(line));
    head = words[0].text;
    const auto pos = text.find(head);
    body = text.substr(pos + head.size());
  }
  if (head.empty()) throw Error(ErrorCode::UnderdeterminedOrInvalid, "missing relation in '" + text + "'" + at_line(line));
  cl.relation = head;
  const TemplateInfo* t = find_template(head);
  if (!t) throw Error(ErrorCode::UnknownTemplate, "'" + head + "'" + at_line(line));

  std::vector<Token> words = split_words(body);
  std::vector<std::string> points;
  for (const auto& w : words) {
    if (w.is_number) cl.params.push_back(w.value);
    else points.push_back(w.text);
  }
  // Explicit-target form repeats the new point names in front of the arguments.
  const std::size_t expected = static_cast<std::size_t>(t->arity);
  if (points.size() == expected + new_points.size() && !new_points.empty()) {
    bool leading = true;
    for (std::size_t i = 0; i < new_points.size(); ++i) leading = leading && points[i] == new_points[i].name;
    if (leading) {
      points.erase(points.begin(), points.begin() + static_cast<std::ptrdiff_t>(new_points.size()));
      cl.explicit_target = true;
    }
  }
  if (points.size() != expected)
    throw Error(ErrorCode::ArityMismatch, "'" + head + "' takes " + std::to_string(t->arity) + " point arguments, got " +
                                              std::to_string(points.size()) + at_line(line));
  if (cl.params.size() != static_cast<std::size_t>(t->params))
    throw Error(ErrorCode::ArityMismatch, "'" + head + "' takes " + std::to_string(t->params) +
                                              " numeric parameters, got " + std::to_string(cl.params.size()) +
                                              at_line(line));
  for (auto& p : points) {
    if (!is_identifier(p)) throw Error(ErrorCode::UndefinedPoint, "'" + p + "' is not a point name" + at_line(line));
    cl.args.push_back(PointSym{p});
  }
  return cl;
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string serialize_clause(const Clause& cl, const Construction& c) {
  std::vector<std::string> parts;
  if (cl.explicit_target)
    for (const auto& p : c.new_points) parts.push_back(p.name);
  for (const auto& a : cl.args) parts.push_back(a.name);
  for (double v : cl.params) parts.push_back(format_number(v));
  std::string out = cl.relation;
  if (cl.parenthesized) {
    out += "(";
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? ", " : "") + parts[i];
    out += ")";
  } else {
    for (const auto& p : parts) out += " " + p;
  }
  return out;
}

}  // namespace

std::vector<std::string> Premise::point_names() const {
  std::vector<std::string> out;
  for (const auto& c : constructions)
    for (const auto& p : c.new_points) out.push_back(p.name);
  return out;
}

std::size_t Premise::point_count() const {
  std::size_t n = 0;
  for (const auto& c : constructions) n += c.new_points.size();
  return n;
}

std::optional<PointId> Premise::index_of(std::string_view name) const {
  std::size_t i = 0;
  for (const auto& c : constructions)
    for (const auto& p : c.new_points) {
      if (p.name == name) return static_cast<PointId>(i);
      ++i;
    }
  return std::nullopt;
}

std::vector<std::size_t> Premise::defining_construction() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < constructions.size(); ++k)
    for (std::size_t j = 0; j < constructions[k].new_points.size(); ++j) out.push_back(k);
  return out;
}

Premise parse_premise(std::string_view text) {
  Premise premise;
  std::vector<int> lines;
  int line = 1;
  std::string cur;
  int cur_line = 1;
  bool in_comment = false;
  auto flush = [&] {
    std::string s = trim(cur);
    cur.clear();
    if (s.empty()) return;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::UnderdeterminedOrInvalid, "construction without '=': '" + s + "'" + at_line(cur_line));
    Construction c;
    for (const auto& w : split_words(s.substr(0, eq))) {
      if (!is_identifier(w.text))
        throw Error(ErrorCode::UnderdeterminedOrInvalid, "'" + w.text + "' is not a point name" + at_line(cur_line));
      c.new_points.push_back(PointSym{w.text});
    }
    if (c.new_points.empty())
      throw Error(ErrorCode::UnderdeterminedOrInvalid, "construction defines no points" + at_line(cur_line));
    for (const auto& cl : split_clauses(s.substr(eq + 1))) c.clauses.push_back(parse_clause(cl, c.new_points, cur_line));
    premise.constructions.push_back(std::move(c));
    lines.push_back(cur_line);
  };
  for (char ch : text) {
    if (ch == '\n') {
      in_comment = false;
      flush();
      ++line;
      cur_line = line;
      continue;
    }
    if (in_comment) continue;
    if (ch == '#') {
      in_comment = true;
      continue;
    }
    if (ch == ';') {
      flush();
      cur_line = line;
      continue;
    }
    if (trim(cur).empty()) cur_line = line;
    cur.push_back(ch);
  }
  flush();
  validate_premise(premise, &lines);
  return premise;
}

void validate_premise(const Premise& premise, const std::vector<int>* line_of) {
  std::set<std::string> defined;
  for (std::size_t k = 0; k < premise.constructions.size(); ++k) {
    const auto& c = premise.constructions[k];
    const std::string where = at_line(line_of ? (*line_of)[k] : static_cast<int>(k) + 1);
    std::set<std::string> fresh;
    for (const auto& p : c.new_points) {
      if (!is_identifier(p.name))
        throw Error(ErrorCode::UnderdeterminedOrInvalid, "'" + p.name + "' is not a point name" + where);
      if (defined.count(p.name) || !fresh.insert(p.name).second)
        throw Error(ErrorCode::RedefinedPoint, "'" + p.name + "'" + where);
    }
    if (c.clauses.empty() || c.clauses.size() > 2)
      throw Error(ErrorCode::UnderdeterminedOrInvalid, "a construction takes one or two clauses" + where);
    for (const auto& cl : c.clauses) {
      const TemplateInfo* t = find_template(cl.relation);
      if (!t) throw Error(ErrorCode::UnknownTemplate, "'" + cl.relation + "'" + where);
      if (cl.args.size() != static_cast<std::size_t>(t->arity) || cl.params.size() != static_cast<std::size_t>(t->params))
        throw Error(ErrorCode::ArityMismatch, "'" + cl.relation + "'" + where);
      if (c.new_points.size() != static_cast<std::size_t>(t->new_points))
        throw Error(ErrorCode::ArityMismatch, "'" + cl.relation + "' defines " + std::to_string(t->new_points) +
                                                  " point(s), construction names " +
                                                  std::to_string(c.new_points.size()) + where);
      for (const auto& a : cl.args)
        if (!defined.count(a.name)) throw Error(ErrorCode::UndefinedPoint, "'" + a.name + "'" + where);
    }
    if (c.clauses.size() == 2) {
      const TemplateInfo* t0 = find_template(c.clauses[0].relation);
      const TemplateInfo* t1 = find_template(c.clauses[1].relation);
      if (t0->kind != TemplateKind::Locus || t1->kind != TemplateKind::Locus || c.clauses[0] == c.clauses[1])
        throw Error(ErrorCode::UnderdeterminedOrInvalid,
                    "'" + c.clauses[0].relation + ", " + c.clauses[1].relation + "' do not meet in isolated points" +
                        where);
    }
    for (const auto& p : c.new_points) defined.insert(p.name);
  }
}

std::string serialize(const Construction& c) {
  std::string out;
  for (std::size_t i = 0; i < c.new_points.size(); ++i) out += (i ? " " : "") + c.new_points[i].name;
  out += " = ";
  for (std::size_t i = 0; i < c.clauses.size(); ++i) out += (i ? ", " : "") + serialize_clause(c.clauses[i], c);
  return out;
}

std::string serialize(const Premise& premise) {
  std::string out;
  for (std::size_t i = 0; i < premise.constructions.size(); ++i)
    out += (i ? "; " : "") + serialize(premise.constructions[i]);
  return out;
}

std::string fresh_point_name(const std::vector<std::string>& used) {
  for (int round = 0;; ++round) {
    for (char c = 'a'; c <= 'z'; ++c) {
      std::string name(1, c);
      if (round > 0) name += std::to_string(round);
      if (std::find(used.begin(), used.end(), name) == used.end()) return name;
    }
  }
}

}  // namespace geoforge
