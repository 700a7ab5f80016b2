#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "geoforge/forge/forge.hpp"
#include "geoforge/kernel/geometry.hpp"

namespace geoforge::scene {

using Seg = std::pair<PointId, PointId>;  // first < second

Seg seg(PointId a, PointId b);

struct DrawCircle {
  std::optional<PointId> center;
  std::vector<PointId> through;
  Vec2 c;
  double r = 0.0;
};

struct Scene {
  std::vector<Seg> segments;  // premise
  std::vector<Seg> aux;       // option segments not in the premise
  std::vector<DrawCircle> circles;
  std::vector<Fact> marked;  // premise facts that carry a mark
};

std::vector<Seg> fact_segments(const Fact& f, const std::vector<Vec2>& coords);

Scene build(const Problem& problem, const std::vector<Vec2>& coords);

bool markable(const Fact& f);

}  // namespace geoforge::scene
