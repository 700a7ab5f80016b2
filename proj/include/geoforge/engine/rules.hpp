#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "geoforge/kernel/fact.hpp"

namespace geoforge {

// A predicate applied to rule variables (indices into Rule::vars).
struct Atom {
  Pred pred = Pred::coll;
  std::uint8_t n = 0;
  std::array<std::int8_t, kMaxFactArgs> vars{};
};

struct Rule {
  std::string id;
  std::string text;                // source line, for diagnostics
  std::vector<std::string> vars;  // variable names
  std::vector<Atom> premises;     // stored relations
  std::vector<Atom> sides;        // ncoll / npara / sameside, checked on the diagram
  Atom conclusion;
};

struct RuleSet {
  std::vector<Rule> rules;
  const Rule* find(std::string_view id) const;
};

// Parses the rule file format (see data/rules.txt). Throws Error(InvalidRule)
// naming the rule and line on malformed input.
RuleSet parse_rules(std::string_view text);
RuleSet load_rules(const std::string& path);

// The shipped rule set.
const RuleSet& default_rules();
std::string_view default_rules_text();

std::string format_atom(const Atom& a, const Rule& r);

}  // namespace geoforge
