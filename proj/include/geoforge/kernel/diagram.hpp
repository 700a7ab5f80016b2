#pragma once

#include <cstdint>
#include <vector>

#include "geoforge/kernel/fact.hpp"
#include "geoforge/kernel/geometry.hpp"
#include "geoforge/kernel/premise.hpp"

namespace geoforge {

inline constexpr double kTolTrue = 1e-9;
inline constexpr double kTolFalse = 1e-3;
inline constexpr double kMargin = 1e-3;

struct Diagram {
  std::vector<Vec2> coords;  // indexed by PointId; normalized to the unit bounding box
  std::uint64_t seed = 0;
  double margin = 0.0;  // minimum pairwise point distance

  double diameter() const;  // bounding-box diagonal
};

// Numerically realizes a premise. Attempt k draws from derive_seed(seed, k);
// the first attempt whose points keep pairwise distance >= kMargin and whose
// clauses all hold within kTolTrue wins.
// Throws Error(Unsatisfiable) when every attempt hit a missing intersection,
// Error(DegenerateAfterRetries) otherwise.
Diagram instantiate(const Premise& premise, std::uint64_t seed, int max_retries = 32);

// Largest residual among the relations a clause defines (0 when it defines none).
double clause_residual(const Premise& premise, std::size_t construction, const Clause& clause, const Diagram& diagram);

}  // namespace geoforge
