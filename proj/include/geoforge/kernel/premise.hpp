#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geoforge/kernel/fact.hpp"

namespace geoforge {

struct PointSym {
  std::string name;
  friend bool operator==(const PointSym&, const PointSym&) = default;
  friend auto operator<=>(const PointSym&, const PointSym&) = default;
};

struct Clause {
  std::string relation;
  std::vector<PointSym> args;  // existing points only; the new point is implicit
  std::vector<double> params;
  // Surface form, kept so that serialization reproduces the input.
  bool explicit_target = false;  // "reflect d c a b" rather than "reflect c a b"
  bool parenthesized = false;    // "midpoint(a, b)" rather than "midpoint a b"

  friend bool operator==(const Clause& a, const Clause& b) {
    return a.relation == b.relation && a.args == b.args && a.params == b.params;
  }
};

struct Construction {
  std::vector<PointSym> new_points;
  std::vector<Clause> clauses;
  friend bool operator==(const Construction&, const Construction&) = default;
};

struct Premise {
  std::vector<Construction> constructions;

  std::vector<std::string> point_names() const;
  std::size_t point_count() const;
  std::optional<PointId> index_of(std::string_view name) const;
  // Index of the construction that defines each point, in point order.
  std::vector<std::size_t> defining_construction() const;

  friend bool operator==(const Premise&, const Premise&) = default;
};

// Parses the construction language: constructions separated by ';' or newlines,
// '#' starts a comment, each construction is `x y = f args[, g args]`.
// Clause arguments may be space separated or parenthesized and comma separated.
Premise parse_premise(std::string_view text);

// Checks the structural invariants (template, arity, definition order, clause pairing).
// Throws Error with the offending token; `line_of` maps construction index to a
// source line for messages (identity + 1 when absent).
void validate_premise(const Premise& premise, const std::vector<int>* line_of = nullptr);

std::string serialize(const Premise& premise);
std::string serialize(const Construction& construction);

// Next unused lowercase point name (a..z, then a1..z1, ...).
std::string fresh_point_name(const std::vector<std::string>& used);

}  // namespace geoforge
