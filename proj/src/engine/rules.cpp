#include "geoforge/engine/rules.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "geoforge/common/error.hpp"
#include "rules_data.hpp"

namespace geoforge {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i)
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  return out;
}

std::vector<Atom> parse_atoms(const std::string& text, Rule& rule, const std::string& where) {
  std::istringstream in(text);
  std::string name;
  in >> name;
  std::vector<int> vars;
  for (std::string v; in >> v;) {
    if (v.empty() || !(v[0] >= 'A' && v[0] <= 'Z'))
      throw Error(ErrorCode::InvalidRule, "'" + v + "' is not a variable" + where);
    auto it = std::find(rule.vars.begin(), rule.vars.end(), v);
    if (it == rule.vars.end()) {
      rule.vars.push_back(v);
      it = rule.vars.end() - 1;
    }
    vars.push_back(static_cast<int>(it - rule.vars.begin()));
  }
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  std::vector<std::vector<int>> groups;
  if (lower == "cyclic" && vars.size() == 6) {
    for (int k = 3; k < 6; ++k) groups.push_back({vars[0], vars[1], vars[2], vars[static_cast<std::size_t>(k)]});
  } else {
    groups.push_back(vars);
  }
  std::vector<Atom> out;
  for (auto& g : groups) {
    Pred p{};
    if (!normalize_atom(name, g, p)) throw Error(ErrorCode::InvalidRule, "unknown predicate '" + name + "'" + where);
    if (!arity_ok(p, g.size()))
      throw Error(ErrorCode::InvalidRule, "'" + name + "' with " + std::to_string(g.size()) + " arguments" + where);
    Atom a;
    a.pred = p;
    a.n = static_cast<std::uint8_t>(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) a.vars[i] = static_cast<std::int8_t>(g[i]);
    out.push_back(a);
  }
  return out;
}

}  // namespace

const Rule* RuleSet::find(std::string_view id) const {
  for (const auto& r : rules)
    if (r.id == id) return &r;
  return nullptr;
}

RuleSet parse_rules(std::string_view text) {
  RuleSet set;
  int line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    std::string line = raw.substr(0, raw.find('#'));
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = " (line " + std::to_string(line_no) + ")";
    const auto colon = line.find(':');
    const auto arrow = line.find("=>");
    if (colon == std::string::npos || arrow == std::string::npos || arrow < colon)
      throw Error(ErrorCode::InvalidRule, "expected 'id: premises => conclusion'" + where);
    Rule r;
    r.id = trim(line.substr(0, colon));
    r.text = trim(line.substr(colon + 1));
    if (set.find(r.id)) throw Error(ErrorCode::InvalidRule, "duplicate id '" + r.id + "'" + where);
    for (const auto& part : split(line.substr(colon + 1, arrow - colon - 1), ',')) {
      if (part.empty()) throw Error(ErrorCode::InvalidRule, "empty premise in '" + r.id + "'" + where);
      for (const auto& a : parse_atoms(part, r, where)) (is_side_condition(a.pred) ? r.sides : r.premises).push_back(a);
    }
    const std::size_t premise_vars = r.vars.size();
    auto concl = parse_atoms(trim(line.substr(arrow + 2)), r, where);
    if (concl.size() != 1 || is_side_condition(concl[0].pred))
      throw Error(ErrorCode::InvalidRule, "'" + r.id + "' needs exactly one stored conclusion" + where);
    if (r.vars.size() != premise_vars)
      throw Error(ErrorCode::InvalidRule, "'" + r.id + "' concludes about a variable absent from its premises" + where);
    if (r.premises.empty()) throw Error(ErrorCode::InvalidRule, "'" + r.id + "' has no stored premise" + where);
    for (const auto& s : r.sides)
      for (std::size_t i = 0; i < s.n; ++i)
        if (static_cast<std::size_t>(s.vars[i]) >= premise_vars)
          throw Error(ErrorCode::InvalidRule, "unbound variable in side condition of '" + r.id + "'" + where);
    r.conclusion = concl[0];
    if (r.vars.size() > 16) throw Error(ErrorCode::InvalidRule, "'" + r.id + "' has too many variables" + where);
    set.rules.push_back(std::move(r));
  }
  return set;
}

RuleSet load_rules(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read rules file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_rules(ss.str());
}

std::string_view default_rules_text() { return kDefaultRulesText; }

const RuleSet& default_rules() {
  static const RuleSet set = parse_rules(kDefaultRulesText);
  return set;
}

std::string format_atom(const Atom& a, const Rule& r) {
  std::string out(pred_name(a.pred));
  for (std::size_t i = 0; i < a.n; ++i) out += " " + r.vars[static_cast<std::size_t>(a.vars[i])];
  return out;
}

}  // namespace geoforge
