#pragma once

#include <span>
#include <vector>

#include "geoforge/kernel/fact.hpp"
#include "geoforge/kernel/premise.hpp"

namespace geoforge {

// Point ids of a clause's arguments, resolved against the premise.
std::vector<PointId> clause_arg_ids(const Premise& premise, const Clause& clause);
std::vector<PointId> construction_point_ids(const Premise& premise, std::size_t index);

// Facts a single clause asserts about its new points. Templates whose meaning
// has no predicate in the fact vocabulary (s_angle, segment, triangle) assert none.
std::vector<Fact> clause_facts(const Clause& clause, std::span<const PointId> new_ids, std::span<const PointId> arg_ids);

struct PremiseFact {
  Fact fact;                  // canonical
  std::size_t construction;  // index of the construction that introduced it
};

// Canonical, de-duplicated facts read off a premise, in construction order.
// Besides the clause facts, every center with at least three points known to be
// equidistant from it contributes `circle O A B C` facts.
std::vector<PremiseFact> premise_facts(const Premise& premise);

}  // namespace geoforge
