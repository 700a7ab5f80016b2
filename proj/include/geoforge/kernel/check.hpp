#pragma once

#include "geoforge/kernel/diagram.hpp"
#include "geoforge/kernel/fact.hpp"

namespace geoforge {

// Scale-free numeric residual of a fact: angles in radians modulo pi, lengths
// relative to the figure diagonal, ratios as log differences. For the side
// conditions (ncoll, npara, sameside) the residual is how far the configuration
// is from clearing kTolFalse, so 0 means "clearly holds".
double residual(const Fact& fact, const Diagram& diagram);

bool check_fact(const Fact& fact, const Diagram& diagram, double tol = kTolTrue);

// Residual of the negated relation's defining quantity; used to certify that a
// statement is clearly false (> kTolFalse) rather than merely not within kTolTrue.
inline bool clearly_false(const Fact& fact, const Diagram& diagram) { return residual(fact, diagram) > kTolFalse; }

}  // namespace geoforge
