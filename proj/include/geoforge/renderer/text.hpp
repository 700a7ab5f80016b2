#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "geoforge/common/rational.hpp"
#include "geoforge/kernel/fact.hpp"
#include "geoforge/kernel/premise.hpp"

namespace geoforge {

enum class Lang { en, zh };

std::string_view lang_name(Lang l);

struct TextTemplate {
  std::string_view id;     // catalog template or predicate name
  std::string_view slots;  // slot names, space separated
  std::string_view en;
  std::string_view zh;
};

// Clause templates for every catalog entry; locus templates are phrases
// completing "Point X ...", others are full sentences.
const std::vector<TextTemplate>& clause_templates();
// Option templates for every stored predicate.
const std::vector<TextTemplate>& fact_templates();

// Point symbols as displayed ("a1" -> "A1").
std::string display_name(std::string_view name);

std::string construction_text(const Construction& c, Lang lang);
std::string premise_text(const Premise& p, Lang lang);
// The problem statement: premise text followed by the question.
std::string statement_text(const Premise& p, Lang lang);

// An option statement; a ratio other than 1 scales the right-hand side of a
// cong or eqratio ("AB = 2 × CD"). Throws Error(MissingTemplate).
std::string fact_text(const Fact& f, const std::vector<std::string>& names, Lang lang, Rational ratio = Rational(1));

// Whitespace-separated token count.
int token_count(std::string_view text);

// Point symbols mentioned in rendered text, in order of first appearance.
std::vector<std::string> mentioned_points(std::string_view text, const std::vector<std::string>& names);

}  // namespace geoforge
